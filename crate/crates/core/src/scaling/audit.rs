//! Exponent-positivity audit. Never fails; each flag carries the audited
//! value so a report can be read without recomputing anything.

use serde::{Deserialize, Serialize};

use super::{gamma_exponent, rho0, rho1, transition::g_exponent, transition::kappa_window};
use crate::dynamics::{ModelParams, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagStatus {
    Pass,
    Fail,
    /// The inequality is stated for unequal drift exponents only.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFlag {
    pub name: String,
    pub status: FlagStatus,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub vartheta: f64,
    pub flags: Vec<AuditFlag>,
    /// Derived exponents reported alongside the flags.
    pub exponents: Vec<(String, f64)>,
    pub all_pass: bool,
}

impl AuditReport {
    pub fn flag(&self, name: &str) -> Option<&AuditFlag> {
        self.flags.iter().find(|f| f.name == name)
    }
}

fn flag(name: impl Into<String>, value: f64, pass: bool) -> AuditFlag {
    AuditFlag {
        name: name.into(),
        status: if pass { FlagStatus::Pass } else { FlagStatus::Fail },
        value,
    }
}

fn asymmetric_flag(name: &str, value: f64, pass: bool, equal: bool) -> AuditFlag {
    if equal {
        AuditFlag {
            name: name.into(),
            status: FlagStatus::NotApplicable,
            value,
        }
    } else {
        flag(name, value, pass)
    }
}

/// Audit the exponent inequalities for `p` with the default Γ and ρ per side.
pub fn exponent_audit(p: &ModelParams, vartheta: f64) -> AuditReport {
    let a = p.alpha;
    let mut flags = Vec::new();
    let mut exponents = Vec::new();

    for side in [Side::Plus, Side::Minus] {
        let tag = match side {
            Side::Plus => "plus",
            Side::Minus => "minus",
        };
        let beta = p.beta(side);
        let (g, _) = gamma_exponent(beta);
        let r1 = rho1(beta, g);
        let rho = 0.5 * (r1 + 1.0 / (1.0 + a));
        let r0 = rho0(a, beta, g);
        let q = 1.0 - beta;

        let sign = (a - 1.0) * (1.0 - rho) + rho * a / (g * q);
        flags.push(flag(format!("sign_{tag}"), sign, sign > 0.0));
        let window = (rho - r0).min(1.0 / (1.0 + a) - rho);
        flags.push(flag(format!("rho_window_{tag}"), window, window > 0.0));
        flags.push(flag(format!("rho1_{tag}"), rho - r1, rho > r1));

        exponents.push((format!("Gamma_{tag}"), g));
        exponents.push((format!("rho_{tag}"), rho));
        // Last term of S₃: the displayed order and the one obtained from
        // multiplying out its factors.
        exponents.push((
            format!("s3_last_displayed_{tag}"),
            a * rho * (1.0 - 1.0 / g) - a * (1.0 - rho) * q,
        ));
        exponents.push((
            format!("s3_last_product_{tag}"),
            a * rho * (1.0 - 1.0 / g) - a * (1.0 - rho) * (2.0 - beta),
        ));
    }

    let (bo, bs) = (
        p.beta_plus.min(p.beta_minus),
        p.beta_plus.max(p.beta_minus),
    );
    let equal = bo == bs;
    let ta = vartheta * a;
    let d = ta + bs - 1.0 + bs * (ta + bo - 1.0);

    let pre = ta + bo - 1.0;
    flags.push(flag("box_precondition", pre, pre > 0.0));

    let (lo, hi) = kappa_window(p, vartheta);
    flags.push(asymmetric_flag("kappa_window", hi - lo, hi > lo, equal));

    let ramp = (ta * bo * (1.0 + bs) - d) / d;
    flags.push(asymmetric_flag("ramp_inequality", ramp, ramp < 0.0, equal));

    let g = g_exponent(p);
    flags.push(asymmetric_flag("g_positive", g, g > 0.0, equal));

    exponents.push(("t_eps".into(), a * (1.0 - bo * bs) / d));
    exponents.push(("theta_small".into(), ta * (1.0 + bs) / d));
    exponents.push(("theta_large".into(), ta * (1.0 + bo) / d));
    exponents.push(("kappa_lo".into(), lo));
    exponents.push(("kappa_hi".into(), hi));

    let all_pass = flags.iter().all(|f| f.status != FlagStatus::Fail);
    AuditReport {
        vartheta,
        flags,
        exponents,
        all_pass,
    }
}
