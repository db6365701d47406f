//! Transition box `(Θ⁺, Θ⁻, t_ε)`, the jump cut-off κ, the subcritical
//! exponent g and the linearized ramp.

use serde::{Deserialize, Serialize};

use super::{LogValue, ScalingBundle, SideScaling};
use crate::dynamics::{ModelParams, Side};
use crate::error::{Error, Result};

/// Space-time scales at which noise and drift balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionBox {
    pub vartheta: f64,
    pub theta_plus: LogValue,
    pub theta_minus: LogValue,
    pub t_eps: LogValue,
    /// Side of the smaller boundary `Θ°`.
    pub small_side: Side,
    /// ε-exponent of `t_ε`.
    pub t_exponent: f64,
    /// `t_ε^{1−ϑ}`, the factor dropped when solving the closure equation.
    pub closure_factor_residual: LogValue,
    /// Largest relative residual of the two boundary equations.
    pub residual: f64,
    /// `Θ°/Θ*` from the returned boundaries.
    pub ratio_computed: f64,
    /// `(B°/B*)^{−1/(1+β)}` as displayed for equal drift exponents.
    pub ratio_displayed: Option<f64>,
}

impl TransitionBox {
    pub fn theta(&self, side: Side) -> LogValue {
        match side {
            Side::Plus => self.theta_plus,
            Side::Minus => self.theta_minus,
        }
    }

    pub fn theta_small(&self) -> LogValue {
        self.theta(self.small_side)
    }

    pub fn theta_large(&self) -> LogValue {
        self.theta(match self.small_side {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        })
    }
}

/// `(β°, β*)`.
fn ordered_betas(p: &ModelParams) -> (f64, f64) {
    (p.beta_plus.min(p.beta_minus), p.beta_plus.max(p.beta_minus))
}

/// `ϑα + β* − 1 + β*(ϑα + β° − 1)`.
fn denominator(p: &ModelParams, vartheta: f64) -> f64 {
    let (bo, bs) = ordered_betas(p);
    let ta = vartheta * p.alpha;
    ta + bs - 1.0 + bs * (ta + bo - 1.0)
}

/// Solve the boundary system with the closure `Θ° = ε t^{1/α}`.
pub fn transition_box(p: &ModelParams, vartheta: f64) -> Result<TransitionBox> {
    p.validate()?;
    if !(vartheta > 0.0 && vartheta <= 1.0) {
        return Err(Error::domain(format!("vartheta = {vartheta} outside (0, 1]")));
    }
    let (bo, _) = ordered_betas(p);
    if !(vartheta * p.alpha + bo > 1.0) {
        return Err(Error::domain(format!(
            "vartheta*alpha + min(beta) > 1 violated: {} * {} + {} <= 1",
            vartheta, p.alpha, bo
        )));
    }
    let (bp, bm) = (p.beta_plus, p.beta_minus);
    let (lbp, lbm) = (p.b_plus.ln(), p.b_minus.ln());
    let e = 1.0 - bp * bm;
    let pre_plus = (lbm + bm * lbp) / e;
    let pre_minus = (lbp + bp * lbm) / e;
    let k_plus = vartheta * (1.0 + bm) / e;
    let k_minus = vartheta * (1.0 + bp) / e;

    let small_side = if bp < bm || (bp == bm && pre_plus <= pre_minus) {
        Side::Plus
    } else {
        Side::Minus
    };
    let (pre_s, k_s) = match small_side {
        Side::Plus => (pre_plus, k_plus),
        Side::Minus => (pre_minus, k_minus),
    };
    let expo = k_s - 1.0 / p.alpha;
    let ln_t = (p.epsilon.ln() - pre_s) / expo;
    let ln_tp = pre_plus + k_plus * ln_t;
    let ln_tm = pre_minus + k_minus * ln_t;

    let r1 = (lbp + ln_t + bp * ln_tp) - (ln_tm + (1.0 - vartheta) * ln_t);
    let r2 = (lbm + ln_t + bm * ln_tm) - (ln_tp + (1.0 - vartheta) * ln_t);
    let residual = r1.exp_m1().abs().max(r2.exp_m1().abs());

    let (ln_small, ln_large) = match small_side {
        Side::Plus => (ln_tp, ln_tm),
        Side::Minus => (ln_tm, ln_tp),
    };
    let ratio_displayed = (bp == bm).then(|| {
        let (b_small, b_large) = match small_side {
            Side::Plus => (p.b_plus, p.b_minus),
            Side::Minus => (p.b_minus, p.b_plus),
        };
        (b_small / b_large).powf(-1.0 / (1.0 + bp))
    });

    Ok(TransitionBox {
        vartheta,
        theta_plus: LogValue::from_ln(ln_tp),
        theta_minus: LogValue::from_ln(ln_tm),
        t_eps: LogValue::from_ln(ln_t),
        small_side,
        t_exponent: 1.0 / expo,
        closure_factor_residual: LogValue::from_ln((1.0 - vartheta) * ln_t),
        residual,
        ratio_computed: (ln_small - ln_large).exp(),
        ratio_displayed,
    })
}

/// κ as displayed: `−((1−β°β*) − ϑ²α(β*−β°)) / D`.
pub fn kappa_paper(p: &ModelParams, vartheta: f64) -> f64 {
    let (bo, bs) = ordered_betas(p);
    -((1.0 - bo * bs) - vartheta * vartheta * p.alpha * (bs - bo)) / denominator(p, vartheta)
}

/// Open window `(lo, hi)` for `−κ`; non-empty iff `ϑα(β*−β°) > 0`.
pub fn kappa_window(p: &ModelParams, vartheta: f64) -> (f64, f64) {
    let (bo, bs) = ordered_betas(p);
    let d = denominator(p, vartheta);
    (
        vartheta * p.alpha * (1.0 + bo) / d - 1.0,
        (1.0 - bo * bs) / d,
    )
}

/// Subcritical-drift exponent `g`, half of `α(β*−β°)(1+β*)/(α+β*−1+β*(α+β°−1))`.
pub fn g_exponent(p: &ModelParams) -> f64 {
    let (bo, bs) = ordered_betas(p);
    let a = p.alpha;
    let den = a + bs - 1.0 + bs * (a + bo - 1.0);
    0.5 * a * (bs - bo) * (1.0 + bs) / den
}

/// `s_ε = (2/B)·Ψ₁^{(1−β)/2}`.
pub fn ramp_time(b: f64, beta: f64, psi1: f64) -> f64 {
    2.0 / b * psi1.powf(0.5 * (1.0 - beta))
}

/// Linearized-ramp scales on the side of the smaller boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampParameters {
    pub side: Side,
    pub beta: f64,
    pub weight: f64,
    /// Fraction γ of the admissible `(1−β)/α` used for π₁.
    pub gamma: f64,
    pub psi0: LogValue,
    pub psi1: LogValue,
    pub s_eps: LogValue,
    pub pi1: f64,
}

/// Ramp barriers usable at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampBarriers {
    pub psi0: f64,
    pub psi1: f64,
    pub s_eps: f64,
    pub clamped: bool,
}

impl RampParameters {
    /// Cap Ψ₁ at `cap` and keep `Ψ₀ < Ψ₁`; `s_ε` follows the capped Ψ₁.
    pub fn clamped(&self, cap: f64) -> RampBarriers {
        let raw0 = self.psi0.value();
        let raw1 = self.psi1.value();
        let psi1 = raw1.min(cap);
        let mut psi0 = raw0.min(cap);
        if psi0 >= psi1 {
            psi0 = 0.5 * psi1;
        }
        RampBarriers {
            psi0,
            psi1,
            s_eps: ramp_time(self.weight, self.beta, psi1),
            clamped: psi0 != raw0 || psi1 != raw1,
        }
    }
}

pub(super) fn ramp_from_parts(
    p: &ModelParams,
    tbox: &TransitionBox,
    plus: &SideScaling,
    minus: &SideScaling,
) -> RampParameters {
    let side = tbox.small_side;
    let s = match side {
        Side::Plus => plus,
        Side::Minus => minus,
    };
    let gamma = 1.0 / (2.0 * p.alpha);
    let ln_psi1 = 3f64.ln() + 0.5 * s.delta_eps.ln;
    RampParameters {
        side,
        beta: s.beta,
        weight: s.weight,
        gamma,
        psi0: tbox.theta_small(),
        psi1: LogValue::from_ln(ln_psi1),
        s_eps: LogValue::from_ln((2.0 / s.weight).ln() + 0.5 * (1.0 - s.beta) * ln_psi1),
        pi1: -0.5 * (1.0 - s.beta) * gamma * ln_psi1 / p.epsilon.ln(),
    }
}

/// `(Ψ₀, Ψ₁, s_ε, π₁)` for a computed bundle.
pub fn ramp_parameters(p: &ModelParams, bundle: &ScalingBundle) -> RampParameters {
    ramp_from_parts(p, &bundle.transition, &bundle.plus, &bundle.minus)
}
