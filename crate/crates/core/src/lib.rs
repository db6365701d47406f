//! Simulation and scaling analysis for the zero-noise limit of
//!
//! ```text
//! dX = b(X) dt + ε dL,    b(x) = B⁺|x|^β⁺ (x ≥ 0),  −B⁻|x|^β⁻ (x < 0)
//! ```
//!
//! driven by a symmetric α-stable Lévy process `L` with Lévy density
//! `c/|y|^{1+α}`.
//!
//! * [`noise`]: stable sampling, Lévy tail functionals, the small/large jump
//!   decomposition at threshold `ε^{-ρ}`.
//! * [`dynamics`]: drift, exact flow, extremal solutions, path integrators,
//!   the comparison process.
//! * [`scaling`]: every ε-dependent exponent and scale, evaluated in log space.
//! * [`exitlab`]: Monte Carlo estimators for exit and selection events.
//!
//! All sampling takes an explicit generator. Estimators derive one stream per
//! path from a master seed (see [`rng`]), so results do not depend on how many
//! threads run them.

pub mod dynamics;
pub mod error;
pub mod exitlab;
pub mod noise;
pub mod rng;
pub mod scaling;
pub mod stats;

pub use error::{Error, Result};
