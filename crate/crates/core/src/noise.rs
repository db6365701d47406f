//! Symmetric α-stable noise and its small/large jump decomposition.
//!
//! The Lévy measure is `ν(dy) = c |y|^{-1-α} dy`. Splitting it at a threshold
//! `u` gives a compound Poisson part (jumps with `|y| > u`, rate `ν(|y| > u)`)
//! and a bounded-jump martingale. The bounded part is simulated with jumps in
//! `(h, u]` as an exact compound Poisson process and jumps below `h` replaced by
//! a Brownian motion of matching variance.

use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Upper limit on the small-jump compound Poisson rate (events per unit time).
pub const MAX_SMALL_JUMP_RATE: f64 = 1e4;
/// Target ratio σ(h)/h for the Gaussian replacement of jumps below `h`.
pub const GAUSSIAN_RATIO_TARGET: f64 = 10.0;

const SIGMA_CHECK_RTOL: f64 = 1e-8;

/// `∫₀^∞ (1 − cos u) u^{-1-α} du`, by quadrature.
///
/// On `[0, 1]` the integrand is expanded termwise; on `[1, ∞)` the oscillatory
/// part is integrated panel by panel up to a cutoff and the remainder is taken
/// from the asymptotic integration-by-parts series.
pub fn cos_moment_integral(alpha: f64) -> f64 {
    // [0, 1]: Σ_{k≥1} (−1)^{k+1} / ((2k)! (2k − α))
    let mut head = 0.0;
    let mut fact = 1.0;
    for k in 1..20 {
        let n = 2 * k;
        fact *= ((n - 1) * n) as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        head += sign / (fact * (n as f64 - alpha));
    }

    // [1, ∞): ∫ u^{-1-α} = 1/α minus ∫ cos(u) u^{-1-α}.
    let s = 1.0 + alpha;
    let f = |u: f64| u.cos() * u.powf(-s);
    let panels = 400;
    let mut osc = quadrature::double_exponential::integrate(f, 1.0, PI, 1e-15).integral;
    for j in 1..panels {
        let (a, b) = (j as f64 * PI, (j + 1) as f64 * PI);
        osc += quadrature::double_exponential::integrate(f, a, b, 1e-16).integral;
    }
    // ∫_U^∞ cos(u) u^{-s} du = Re Σ_k −e^{iU} (s)_k U^{-s-k} (−i)^{k+1}
    let big_u = panels as f64 * PI;
    let (sin_u, cos_u) = big_u.sin_cos();
    let phase = [-sin_u, cos_u, sin_u, -cos_u];
    let mut rising = 1.0;
    for (k, ph) in phase.iter().cycle().take(8).enumerate() {
        osc += ph * rising * big_u.powf(-s - k as f64);
        rising *= s + k as f64;
    }

    head + 1.0 / alpha - osc
}

/// Closed-form scale σ with `E exp(izL₁) = exp(−σ^α |z|^α)`.
pub fn stable_scale(alpha: f64, c: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        return PI * c;
    }
    let i = statrs::function::gamma::gamma(1.0 - alpha) * (PI * alpha / 2.0).cos() / alpha;
    (2.0 * c * i).powf(1.0 / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    alpha: f64,
    c: f64,
    sigma: f64,
    /// `∫(1 − cos u) u^{-1-α} du` from quadrature.
    cos_integral: f64,
}

impl StableLaw {
    /// The symmetric stable law with Lévy density `c/|y|^{1+α}`.
    ///
    /// The closed-form scale is cross-checked against the quadrature of the
    /// Lévy–Khintchine exponent; a mismatch is reported as an error.
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain(format!("alpha = {alpha} outside (0, 2)")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("c = {c} must be positive")));
        }
        let cos_integral = cos_moment_integral(alpha);
        let sigma = stable_scale(alpha, c);
        let sigma_quad = (2.0 * c * cos_integral).powf(1.0 / alpha);
        if !((sigma - sigma_quad).abs() <= SIGMA_CHECK_RTOL * sigma_quad) {
            return Err(Error::Numerical {
                time: 0.0,
                path: None,
                what: format!("stable scale {sigma} disagrees with quadrature {sigma_quad}"),
            });
        }
        Ok(Self {
            alpha,
            c,
            sigma,
            cos_integral,
        })
    }

    /// A law with an arbitrary scale, bypassing the quadrature check.
    ///
    /// Only useful as a negative control for the validation suite.
    pub fn with_sigma_unchecked(alpha: f64, c: f64, sigma: f64) -> Self {
        Self {
            alpha,
            c,
            sigma,
            cos_integral: cos_moment_integral(alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Real part of the Lévy–Khintchine exponent, `−∫(1 − cos zy) ν(dy)`.
    pub fn char_exponent(&self, z: f64) -> f64 {
        -2.0 * self.c * z.abs().powf(self.alpha) * self.cos_integral
    }

    /// `E cos(z L_t)` under the quadrature exponent.
    pub fn char_function(&self, z: f64, t: f64) -> f64 {
        (t * self.char_exponent(z)).exp()
    }
}

/// One draw with characteristic function `exp(−|z|^α)` (Chambers–Mallows–Stuck).
pub fn sample_standard<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// One increment `L_dt` of the process; `L_dt = dt^{1/α} L₁` in law.
pub fn sample_stable_increment<R: Rng + ?Sized>(law: &StableLaw, dt: f64, rng: &mut R) -> f64 {
    debug_assert!(dt >= 0.0);
    law.sigma * dt.powf(1.0 / law.alpha) * sample_standard(law.alpha, rng)
}

/// `ν(ℝ ∖ [−u, u]) = 2c / (α u^α)`.
pub fn levy_tail_mass(law: &StableLaw, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::domain(format!("tail level u = {u} must be positive")));
    }
    Ok(tail_mass(law.alpha, law.c, u))
}

fn tail_mass(alpha: f64, c: f64, u: f64) -> f64 {
    2.0 * c / (alpha * u.powf(alpha))
}

/// A jump drawn from `ν` restricted to `|y| > threshold`, normalized.
pub fn sample_large_jump<R: Rng + ?Sized>(
    law: &StableLaw,
    threshold: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::domain(format!("threshold = {threshold} must be positive")));
    }
    Ok(large_jump(law.alpha, threshold, rng))
}

fn large_jump<R: Rng + ?Sized>(alpha: f64, threshold: f64, rng: &mut R) -> f64 {
    // V in (0, 1] so that |W| ≥ threshold.
    let v: f64 = 1.0 - rng.random::<f64>();
    let mag = threshold * v.powf(-1.0 / alpha);
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    /// Jump of `L`, not yet multiplied by ε.
    pub size: f64,
}

/// Threshold split of the noise into large jumps and a bounded-jump remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDecomposition {
    /// Threshold exponent when built from `(ε, ρ)`.
    pub rho: Option<f64>,
    pub threshold: f64,
    /// Rate of jumps larger than the threshold.
    pub lambda_eps: f64,
    /// Jumps below `h` are replaced by a Brownian motion.
    pub inner_cutoff: f64,
    /// Rate of the exact compound Poisson jumps in `(h, threshold]`.
    pub small_jump_rate: f64,
    /// Variance per unit time of the Brownian replacement.
    pub gaussian_variance: f64,
    /// `σ(h)/h` per unit time.
    pub gaussian_ratio: f64,
    alpha: f64,
}

impl NoiseDecomposition {
    /// Split at `ε^{-ρ}`.
    pub fn new(law: &StableLaw, epsilon: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::domain(format!("rho = {rho} outside (0, 1)")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::domain(format!("epsilon = {epsilon} outside (0, 1]")));
        }
        let mut d = Self::with_threshold(law, epsilon.powf(-rho))?;
        d.rho = Some(rho);
        Ok(d)
    }

    /// Split at an explicit threshold.
    pub fn with_threshold(law: &StableLaw, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::domain(format!("threshold = {threshold} must be positive and finite")));
        }
        let (alpha, c) = (law.alpha, law.c);
        let lambda_eps = tail_mass(alpha, c, threshold);

        // Largest h with σ(h)/h ≥ target, where σ(h)² = 2c h^{2−α}/(2−α).
        let k = (2.0 * c / (2.0 - alpha)).sqrt();
        let mut h = (GAUSSIAN_RATIO_TARGET / k).powf(-2.0 / alpha).min(0.5 * threshold);
        let rate = |h: f64| 2.0 * c / alpha * (h.powf(-alpha) - threshold.powf(-alpha));
        if rate(h) > MAX_SMALL_JUMP_RATE {
            h = (alpha * MAX_SMALL_JUMP_RATE / (2.0 * c) + threshold.powf(-alpha)).powf(-1.0 / alpha);
        }
        let gaussian_variance = 2.0 * c * h.powf(2.0 - alpha) / (2.0 - alpha);
        let gaussian_ratio = gaussian_variance.sqrt() / h;
        let small_jump_rate = rate(h);
        log::debug!(
            "noise split: threshold {threshold:.4e}, h {h:.4e}, small-jump rate {small_jump_rate:.3e}/t, sigma(h)/h {gaussian_ratio:.2}"
        );
        if gaussian_ratio < GAUSSIAN_RATIO_TARGET {
            log::warn!("small-jump Gaussian ratio {gaussian_ratio:.2} below {GAUSSIAN_RATIO_TARGET}");
        }
        Ok(Self {
            rho: None,
            threshold,
            lambda_eps,
            inner_cutoff: h,
            small_jump_rate,
            gaussian_variance,
            gaussian_ratio,
            alpha,
        })
    }

    /// Mean drift of the bounded-jump part per unit time; zero by symmetry of ν.
    pub fn mean_drift(&self) -> f64 {
        0.0
    }

    /// Fresh simulator for the bounded-jump part.
    pub fn small_jump_sampler<R: Rng + ?Sized>(&self, rng: &mut R) -> SmallJumpSampler {
        SmallJumpSampler::new(self, rng)
    }
}

/// Large-jump arrivals on `[0, horizon]`.
pub fn sample_event_stream<R: Rng + ?Sized>(
    decomp: &NoiseDecomposition,
    law: &StableLaw,
    horizon: f64,
    rng: &mut R,
) -> Vec<JumpEvent> {
    let mut events = Vec::new();
    if !(decomp.lambda_eps > 0.0) {
        return events;
    }
    let mut t = 0.0;
    loop {
        let wait: f64 = rng.sample(Exp1);
        t += wait / decomp.lambda_eps;
        if t > horizon {
            return events;
        }
        events.push(JumpEvent {
            time: t,
            size: large_jump(law.alpha, decomp.threshold, rng),
        });
    }
}

/// Increment of the bounded-jump part over one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallJumpIncrement {
    pub value: f64,
    /// Largest jump magnitude within the step (0 if none).
    pub max_jump: f64,
}

/// Stateful simulator of the bounded-jump martingale.
///
/// Compound Poisson arrivals are carried across steps, so the jump times are
/// exact regardless of the step sizes used.
#[derive(Debug, Clone)]
pub struct SmallJumpSampler {
    sd_unit: f64,
    rate: f64,
    h_pow: f64,
    span: f64,
    inv_alpha: f64,
    next_jump: f64,
}

impl SmallJumpSampler {
    fn new<R: Rng + ?Sized>(d: &NoiseDecomposition, rng: &mut R) -> Self {
        let h_pow = d.inner_cutoff.powf(-d.alpha);
        let mut s = Self {
            sd_unit: d.gaussian_variance.sqrt(),
            rate: d.small_jump_rate,
            h_pow,
            span: h_pow - d.threshold.powf(-d.alpha),
            inv_alpha: 1.0 / d.alpha,
            next_jump: f64::INFINITY,
        };
        s.next_jump = s.wait(rng);
        s
    }

    fn wait<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / self.rate
        } else {
            f64::INFINITY
        }
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> SmallJumpIncrement {
        let z: f64 = rng.sample(StandardNormal);
        let mut value = self.sd_unit * dt.sqrt() * z;
        let mut max_jump = 0.0f64;
        let mut left = dt;
        while self.next_jump <= left {
            left -= self.next_jump;
            // Inverse transform of ν restricted to h < |y| ≤ threshold.
            let u: f64 = rng.random();
            let mag = (self.h_pow - u * self.span).powf(-self.inv_alpha);
            max_jump = max_jump.max(mag);
            value += if rng.random::<bool>() { mag } else { -mag };
            self.next_jump = self.wait(rng);
        }
        self.next_jump -= left;
        SmallJumpIncrement { value, max_jump }
    }
}

/// The bounded-jump part `ξ` on `grid`, unscaled by ε.
pub fn sample_small_jump_path<R: Rng + ?Sized>(
    decomp: &NoiseDecomposition,
    _law: &StableLaw,
    grid: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let mut sampler = decomp.small_jump_sampler(rng);
    let mut path = Vec::with_capacity(grid.len());
    let mut x = 0.0;
    path.push(x);
    for w in grid.windows(2) {
        x += sampler.advance(w[1] - w[0], rng).value;
        path.push(x);
    }
    Ok(path)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.first() != Some(&0.0) {
        return Err(Error::domain("time grid must start at 0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("time grid must be strictly increasing"));
    }
    Ok(())
}
