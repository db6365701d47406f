//! Riemann zeta and the polylogarithm `Li_a(x) = Σ x^k / k^a` on `[0, 1)`.

use std::f64::consts::PI;

use statrs::function::factorial::factorial;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Above this point the series is replaced by the expansion in `ln x`.
const SERIES_LIMIT: f64 = 1.0 - 1e-4;
const BORWEIN_N: usize = 50;

/// Riemann ζ on the real line; `+∞` at the pole `s = 1`.
pub fn zeta(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    if s == 0.0 {
        return -0.5;
    }
    if s < 0.0 {
        if s.fract() == 0.0 && (s as i64) % 2 == 0 {
            return 0.0;
        }
        let sin = (0.5 * PI * s).sin();
        let ln_mag = s * 2f64.ln() + (s - 1.0) * PI.ln() + sin.abs().ln() + ln_gamma(1.0 - s);
        return sin.signum() * ln_mag.exp() * zeta(1.0 - s);
    }
    borwein(s)
}

/// Borwein's alternating-series acceleration, valid for `s > 0`, `s ≠ 1`.
fn borwein(s: f64) -> f64 {
    let n = BORWEIN_N;
    let nf = n as f64;
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0;
    let mut acc = 0.0;
    for i in 0..=n {
        acc += term;
        d.push(acc);
        let fi = i as f64;
        term *= 4.0 * (nf + fi) * (nf - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
    }
    let dn = d[n];
    let mut sum = 0.0;
    for (k, dk) in d.iter().take(n).enumerate() {
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sgn * (dk - dn) / ((k + 1) as f64).powf(s);
    }
    -sum / (dn * (1.0 - 2f64.powf(1.0 - s)))
}

/// Polylogarithm of real order `a` at `x ∈ [0, 1)`.
pub fn polylog(a: f64, x: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::domain(format!("polylog order {a} not finite")));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::domain(format!("polylog argument {x} outside [0, 1)")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(if x <= SERIES_LIMIT {
        series(a, x)
    } else {
        log_expansion(a, x)
    })
}

fn series(a: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut xk = 1.0;
    let mut k = 1u64;
    loop {
        xk *= x;
        let kf = k as f64;
        sum += xk / kf.powf(a);
        // Tail bound: geometric in the ratio of the next two terms.
        let next = xk * x / (kf + 1.0).powf(a);
        let ratio = if a >= 0.0 {
            x
        } else {
            x * ((kf + 1.0) / (kf + 2.0)).powf(a)
        };
        if ratio < 1.0 && next / (1.0 - ratio) <= 1e-17 * sum.abs() {
            return sum;
        }
        k += 1;
    }
}

/// Expansion in `μ = ln x` around `x = 1`, convergent for `|μ| < 2π`.
fn log_expansion(a: f64, x: f64) -> f64 {
    let mu = x.ln();
    let int_order = a.fract() == 0.0 && a >= 1.0;
    let m = a as i64;
    let mut sum = if int_order {
        let j = (m - 1) as u64;
        let h: f64 = (1..=j).map(|i| 1.0 / i as f64).sum();
        mu.powi(j as i32) / factorial(j) * (h - (-mu).ln())
    } else {
        gamma(1.0 - a) * (-mu).powf(a - 1.0)
    };
    let mut pow = 1.0;
    let mut small = 0;
    for n in 0..80u64 {
        if n > 0 {
            pow *= mu / n as f64;
        }
        if int_order && n as i64 == m - 1 {
            continue;
        }
        let term = zeta(a - n as f64) * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}
