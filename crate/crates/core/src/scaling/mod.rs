//! Closed-form ε-scales of the exit and selection analysis, in log space.
//!
//! The asymptotic regime of these quantities (for instance `δ_ε < 1`) is
//! reached only at extreme ε; `δ_ε ≈ 0.72` needs `ε = 10⁻⁴⁰` when α = 1,
//! ρ = 0.4. Everything is therefore stored as a (log-magnitude, sign) pair.

mod audit;
mod bounds;
mod polylog;
mod transition;

pub use audit::{exponent_audit, AuditFlag, AuditReport, FlagStatus};
pub use bounds::{bound_terms, BoundRow};
pub use polylog::{polylog, zeta};
pub use transition::{
    g_exponent, kappa_paper, kappa_window, ramp_parameters, ramp_time, transition_box,
    RampBarriers, RampParameters, TransitionBox,
};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, Side};
use crate::error::{Error, Result};

/// A real number `sign · exp(ln)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
    pub sign: i8,
}

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        Self { ln, sign: 1 }
    }

    pub fn from_value(x: f64) -> Self {
        Self {
            ln: x.abs().ln(),
            sign: if x < 0.0 { -1 } else { 1 },
        }
    }

    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.ln.exp()
    }

    /// `ln|x| / ln ε`, the exponent of `x` in powers of ε.
    pub fn ln_eps(&self, epsilon: f64) -> f64 {
        self.ln / epsilon.ln()
    }
}

/// Optional pins for experiments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub rho: Option<f64>,
    #[serde(rename = "Gamma")]
    pub gamma_exponent: Option<f64>,
    pub vartheta: Option<f64>,
}

/// `Γ` for drift exponent `β`, with the fallback when the formula leaves
/// `(1, 1/(1−β))`. Returns `(Γ, fallback_used)`.
pub fn gamma_exponent(beta: f64) -> (f64, bool) {
    let q = 1.0 - beta;
    let formula = 0.5 * (1.0 + 0.5 * (1.0 / q + 2.0 * q / (2.0 * q - 1.0)));
    if formula.is_finite() && formula > 1.0 && formula < 1.0 / q {
        (formula, false)
    } else {
        (0.5 * (1.0 + 1.0 / q), true)
    }
}

/// `ρ₁(β) = (1−1/Γ)(1−β) / ((1−1/Γ)(1−β) + 1)`.
pub fn rho1(beta: f64, gamma: f64) -> f64 {
    let a = (1.0 - 1.0 / gamma) * (1.0 - beta);
    a / (a + 1.0)
}

/// `ρ₀(α, β) = Γ(1−α)(1−β) / (Γ(1−α)(1−β) + α)`, Γ the exponent parameter.
pub fn rho0(alpha: f64, beta: f64, gamma: f64) -> f64 {
    let a = gamma * (1.0 - alpha) * (1.0 - beta);
    a / (a + alpha)
}

/// Per-side quantities of the half-line analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideScaling {
    pub side: Side,
    pub beta: f64,
    pub weight: f64,
    #[serde(rename = "Gamma")]
    pub gamma_exponent: f64,
    pub gamma_fallback: bool,
    pub rho: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub lambda_eps: LogValue,
    pub threshold: LogValue,
    pub delta_eps: LogValue,
    pub r_eps: LogValue,
    pub n_eps: LogValue,
    pub gamma_eps: LogValue,
    /// `γ_ε` fell back to its leading order `λ_ε^{-1/(Γ(1−β))}`.
    pub gamma_eps_asymptotic: bool,
}

fn side_scaling(p: &ModelParams, side: Side, ov: &Overrides) -> SideScaling {
    let (alpha, eps) = (p.alpha, p.epsilon);
    let (beta, weight) = (p.beta(side), p.weight(side));
    let (gamma_exponent, gamma_fallback) = match ov.gamma_exponent {
        Some(g) => (g, false),
        None => gamma_exponent(beta),
    };
    let r1 = rho1(beta, gamma_exponent);
    let rho = ov.rho.unwrap_or(0.5 * (r1 + 1.0 / (1.0 + alpha)));
    let le = eps.ln();
    let ll = le.abs().ln();
    let ln_lambda = (2.0 * p.c / alpha).ln() + alpha * rho * le;
    let ln_delta = (1.0 - rho * (1.0 + alpha)) * le + 4.0 * ll;
    let q = 1.0 - beta;
    // γ_ε = (λ^{-1/Γ} − (3δ)^{1−β})^{1/(1−β)}
    let a = -ln_lambda / gamma_exponent;
    let b = q * (3f64.ln() + ln_delta);
    let (ln_gamma_eps, gamma_eps_asymptotic) = if a > b {
        ((a + (-(b - a).exp()).ln_1p()) / q, false)
    } else {
        (a / q, true)
    };
    SideScaling {
        side,
        beta,
        weight,
        gamma_exponent,
        gamma_fallback,
        rho,
        rho0: rho0(alpha, beta, gamma_exponent),
        rho1: r1,
        lambda_eps: LogValue::from_ln(ln_lambda),
        threshold: LogValue::from_ln(-rho * le),
        delta_eps: LogValue::from_ln(ln_delta),
        r_eps: LogValue::from_ln(2.0 * ll - alpha * rho * le),
        n_eps: LogValue::from_ln(2.0 * ll - alpha * (1.0 - rho) * le),
        gamma_eps: LogValue::from_ln(ln_gamma_eps),
        gamma_eps_asymptotic,
    }
}

/// `ϑ* = ½(1 + (1−β)/α)` for equal drift exponents, else 1.
pub fn theta_star(p: &ModelParams) -> f64 {
    if p.beta_plus == p.beta_minus {
        0.5 * (1.0 + (1.0 - p.beta_plus) / p.alpha)
    } else {
        1.0
    }
}

/// Every ε-dependent scale, exponent and flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingBundle {
    pub epsilon: f64,
    pub alpha: f64,
    pub plus: SideScaling,
    pub minus: SideScaling,
    pub theta_star: f64,
    /// ϑ actually used for the box (ϑ* unless overridden).
    pub vartheta: f64,
    pub transition: TransitionBox,
    /// Threshold exponent of the exit-location argument; always negative.
    pub kappa: f64,
    /// The displayed choice of κ, which may sit on the window boundary.
    pub kappa_paper: f64,
    pub kappa_fallback: bool,
    pub ramp: RampParameters,
    /// Subcritical-drift exponent; 0 for equal drift exponents.
    pub g: f64,
    pub flags: Vec<String>,
}

impl ScalingBundle {
    pub fn side(&self, side: Side) -> &SideScaling {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn rho(&self) -> f64 {
        self.plus.rho
    }

    pub fn delta_eps(&self) -> LogValue {
        self.plus.delta_eps
    }

    pub fn lambda_eps(&self) -> LogValue {
        self.plus.lambda_eps
    }
}

/// Evaluate the bundle at `p.epsilon`.
pub fn scaling_bundle(p: &ModelParams, overrides: &Overrides) -> Result<ScalingBundle> {
    p.validate()?;
    if !(p.epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon = {} outside (0, 1)", p.epsilon)));
    }
    if let Some(r) = overrides.rho {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::domain(format!("rho override {r} outside (0, 1)")));
        }
    }
    let plus = side_scaling(p, Side::Plus, overrides);
    let minus = side_scaling(p, Side::Minus, overrides);
    let theta_star = theta_star(p);
    let vartheta = overrides.vartheta.unwrap_or(theta_star);
    let transition = transition_box(p, vartheta)?;

    let mut flags = Vec::new();
    for s in [&plus, &minus] {
        let tag = match s.side {
            Side::Plus => "plus",
            Side::Minus => "minus",
        };
        if s.gamma_fallback {
            flags.push(format!("Gamma_fallback_{tag}"));
        }
        if s.gamma_eps_asymptotic {
            flags.push(format!("gamma_eps_asymptotic_{tag}"));
        }
    }

    let kappa_paper = kappa_paper(p, vartheta);
    let (lo, hi) = kappa_window(p, vartheta);
    let (kappa, kappa_fallback) = if -kappa_paper > lo && -kappa_paper < hi && kappa_paper < 0.0 {
        (kappa_paper, false)
    } else {
        (-0.5 * (lo.max(0.0) + hi), true)
    };
    if kappa_fallback {
        flags.push("kappa_fallback".into());
    }

    let ramp = transition::ramp_from_parts(p, &transition, &plus, &minus);
    if ramp.pi1 >= 0.0 {
        flags.push("pi1_nonnegative".into());
    }
    Ok(ScalingBundle {
        epsilon: p.epsilon,
        alpha: p.alpha,
        plus,
        minus,
        theta_star,
        vartheta,
        transition,
        kappa,
        kappa_paper,
        kappa_fallback,
        ramp,
        g: g_exponent(p),
        flags,
    })
}
