//! Dominant-order bound terms `S₁ … S₅` with unit constants.

use serde::{Deserialize, Serialize};

use super::{LogValue, ScalingBundle};
use crate::dynamics::ModelParams;
use crate::error::{Error, Result};

/// One ε of the bound table. All terms are positive, stored as logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub epsilon: f64,
    pub s1: LogValue,
    /// `S₁` before taking dominant orders: `exp(−n x − ln x)`, `x = 2ε^α/λ`.
    pub s1_exact: LogValue,
    pub s2: LogValue,
    pub s3: LogValue,
    /// The four summands of `S₃` in display order.
    pub s3_terms: [LogValue; 4],
    pub s4: LogValue,
    pub s5: LogValue,
    pub total: LogValue,
}

impl BoundRow {
    pub fn terms(&self) -> [LogValue; 5] {
        [self.s1, self.s2, self.s3, self.s4, self.s5]
    }
}

fn log_sum(lns: &[f64]) -> f64 {
    let m = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + lns.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// Evaluate the bound terms on `eps_grid` with the exponents (Γ, ρ) of the
/// positive side of `bundle`.
pub fn bound_terms(
    p: &ModelParams,
    bundle: &ScalingBundle,
    eps_grid: &[f64],
) -> Result<Vec<BoundRow>> {
    if eps_grid.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::domain("eps_grid must lie in (0, 1)"));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("eps_grid must be strictly decreasing"));
    }
    let side = &bundle.plus;
    let (a, rho, g, beta) = (p.alpha, side.rho, side.gamma_exponent, side.beta);
    let q = 1.0 - beta;
    let ar = a * rho;
    let kappa_s = ar * (1.0 + ar / (g * q));

    Ok(eps_grid
        .iter()
        .map(|&eps| {
            let le = eps.ln();
            let ll = le.abs().ln();
            let s1 = (2.0 + a * (1.0 - rho)) * le;
            let ln_lambda = (2.0 * p.c / a).ln() + ar * le;
            let ln_x = 2f64.ln() + a * le - ln_lambda;
            let ln_n = 2.0 * ll - a * (1.0 - rho) * le;
            let s1_exact = -(ln_n + ln_x).exp() - ln_x;
            let s2 = 2f64.ln() + 2.0 * ll + (2.0 - a + ar) * le;
            let t = [
                (a * (1.0 - rho) + a * ar / (g * q)) * le,
                ar * (1.0 - 1.0 / g) * le,
                a * ((a - 1.0) * (1.0 - rho) + ar / (g * q)) * le + 2.0 * (2.0 - a) * ll,
                (ar * (1.0 - 1.0 / g) - a * (1.0 - rho) * q) * le + (2.0 - beta) * ll,
            ];
            let s3 = log_sum(&t);
            let s4 = kappa_s * ar * le;
            let s5 = (2.0 + kappa_s * ar - kappa_s) * le;
            BoundRow {
                epsilon: eps,
                s1: LogValue::from_ln(s1),
                s1_exact: LogValue::from_ln(s1_exact),
                s2: LogValue::from_ln(s2),
                s3: LogValue::from_ln(s3),
                s3_terms: t.map(LogValue::from_ln),
                s4: LogValue::from_ln(s4),
                s5: LogValue::from_ln(s5),
                total: LogValue::from_ln(log_sum(&[s1, s2, s3, s4, s5])),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::{scaling_bundle, Overrides};

    fn grid() -> Vec<f64> {
        (2..=12).map(|k| 10f64.powi(-k)).collect()
    }

    fn rows(alpha: f64, bp: f64, bm: f64) -> Vec<BoundRow> {
        let p = ModelParams::new(alpha, bp, bm, 1.0, 1.0, 1e-3).unwrap();
        let b = scaling_bundle(&p, &Overrides::default()).unwrap();
        bound_terms(&p, &b, &grid()).unwrap()
    }

    #[test]
    fn s1_slope_matches_displayed_order() {
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 1e-3).unwrap();
        let b = scaling_bundle(&p, &Overrides::default()).unwrap();
        let r = bound_terms(&p, &b, &grid()).unwrap();
        let expect = 2.0 + 1.5 * (1.0 - b.plus.rho);
        for w in r.windows(2) {
            let slope = (w[1].s1.ln - w[0].s1.ln) / (w[1].epsilon.ln() - w[0].epsilon.ln());
            assert!((slope - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn s1_exact_is_below_dominant_order() {
        for r in rows(1.5, 0.5, 0.5) {
            assert!(r.s1_exact.ln < r.s1.ln);
        }
    }

    #[test]
    fn all_terms_positive_and_finite() {
        for r in rows(1.1, 0.2, 0.8) {
            for t in r.terms() {
                assert_eq!(t.sign, 1);
                assert!(t.ln.is_finite());
            }
        }
    }

    #[test]
    fn total_dominates_each_term() {
        for r in rows(1.5, 0.5, 0.5) {
            for t in r.terms() {
                assert!(r.total.ln >= t.ln);
            }
        }
    }

    #[test]
    fn rejects_unordered_grid() {
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 1e-3).unwrap();
        let b = scaling_bundle(&p, &Overrides::default()).unwrap();
        assert!(bound_terms(&p, &b, &[1e-3, 1e-2]).is_err());
        assert!(bound_terms(&p, &b, &[1.5]).is_err());
    }
}
