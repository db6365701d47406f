//! Monte Carlo estimators for exit, escape and selection events.
//!
//! Every estimator draws path `i` from stream `i` of the supplied factory and
//! reduces per-path outcomes in index order, so results do not depend on the
//! size of the worker pool.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    classify, drive_event_with_step, drive_grid, event_fine_step, extremal_solution, flow,
    Branch, Model, ModelParams, PathSample, Side,
};
use crate::error::{Error, Result};
use crate::noise::{sample_event_stream, NoiseDecomposition, StableLaw};
use crate::rng::{map_paths, StreamFactory};
use crate::scaling::{transition_box, ScalingBundle};
use crate::stats::{quantile, EstimateWithCI};

/// Default cap applied to asymptotic barriers at desk-scale ε.
pub const BARRIER_CAP: f64 = 0.1;
/// Minimum number of fine steps per horizon.
const MIN_STEPS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitSide {
    Below,
    Above,
    Censored,
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    /// First detection time, or the horizon if censored.
    pub exit_time: f64,
    pub exit_side: ExitSide,
    /// State at detection, overshoot included.
    pub exit_value: f64,
    /// Index of the random stream the path used.
    pub path_seed: u64,
}

/// `P(u(T₁; x) > z) = exp(−(z^{1−β} − x^{1−β}) λ / (B(1−β)))` for `T₁ ~ Exp(λ)`.
pub fn weibull_tail(z: f64, x: f64, beta: f64, b: f64, lambda: f64) -> Result<f64> {
    if !(x >= 0.0 && z >= x) {
        return Err(Error::domain(format!("need z >= x >= 0 (z {z}, x {x})")));
    }
    if !(lambda > 0.0 && b > 0.0 && beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "need lambda > 0, B > 0, beta in (0, 1) (lambda {lambda}, B {b}, beta {beta})"
        )));
    }
    let q = 1.0 - beta;
    Ok((-(z.powf(q) - x.powf(q)) * lambda / (b * q)).exp())
}

/// `(r⁻ + j)/(r⁺ + r⁻ + j)`, the optional-stopping bound on `P(σ⁺ < σ⁻)`
/// for a martingale with jumps at most `j`.
pub fn optional_stopping_bound(r_plus: f64, r_minus: f64, eps_jump: f64) -> Result<f64> {
    if !(r_plus > 0.0 && r_minus >= 0.0 && eps_jump >= 0.0) {
        return Err(Error::domain(format!(
            "need r_plus > 0, r_minus >= 0, eps_jump >= 0 (got {r_plus}, {r_minus}, {eps_jump})"
        )));
    }
    Ok((r_minus + eps_jump) / (r_plus + r_minus + eps_jump))
}

/// Barriers and horizon of one exit experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ExitProblem {
    x0: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    horizon: f64,
}

impl ExitProblem {
    fn side(&self, x: f64) -> Option<ExitSide> {
        if self.lower.is_some_and(|l| x <= l) {
            Some(ExitSide::Below)
        } else if self.upper.is_some_and(|u| x >= u) {
            Some(ExitSide::Above)
        } else {
            None
        }
    }
}

/// First exit under the event-driven scheme with fine step `h`.
fn exit_event<R: Rng + ?Sized>(
    model: &Model,
    decomp: &NoiseDecomposition,
    prob: &ExitProblem,
    h: f64,
    rng: &mut R,
    path_seed: u64,
) -> Result<ExitRecord> {
    let events = sample_event_stream(decomp, &model.law, prob.horizon, rng);
    let mut rec = ExitRecord {
        exit_time: prob.horizon,
        exit_side: ExitSide::Censored,
        exit_value: prob.x0,
        path_seed,
    };
    drive_event_with_step(model, decomp, &events, prob.x0, prob.horizon, h, rng, |t, x, _, _| {
        rec.exit_value = x;
        if let Some(side) = prob.side(x) {
            rec.exit_time = t;
            rec.exit_side = side;
            return false;
        }
        true
    })?;
    Ok(rec)
}

/// Run `f` on every path and surface the first failure in index order.
fn run_paths<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    map_paths(n, |i| f(i).map_err(|e| e.on_path(i)))
        .into_iter()
        .collect()
}

fn count(records: &[ExitRecord], side: ExitSide) -> u64 {
    records.iter().filter(|r| r.exit_side == side).count() as u64
}

fn check_paths(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::domain(format!("need at least {min} paths, got {n}")));
    }
    Ok(())
}

/// Same dynamics observed on the clock `s = t/T`: drift weights scale by
/// `T`, the noise intensity by `T^{1/α}`.
fn rescaled(p: &ModelParams, t: f64) -> ModelParams {
    ModelParams {
        b_plus: p.b_plus * t,
        b_minus: p.b_minus * t,
        epsilon: p.epsilon * t.powf(1.0 / p.alpha),
        ..*p
    }
}

fn mirrored(p: &ModelParams) -> ModelParams {
    ModelParams {
        beta_plus: p.beta_minus,
        beta_minus: p.beta_plus,
        b_plus: p.b_minus,
        b_minus: p.b_plus,
        ..*p
    }
}

/// Event-driven exit on the unit clock of a rescaled model; times are
/// mapped back to the original clock.
fn exit_on_unit_clock(
    p: &ModelParams,
    x0: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    horizon: f64,
    n: usize,
    streams: &StreamFactory,
) -> Result<Vec<ExitRecord>> {
    let model = Model::new(rescaled(p, horizon))?;
    let decomp = NoiseDecomposition::with_threshold(&model.law, 1.0)?;
    let h = event_fine_step(&decomp, 1.0).min(1.0 / MIN_STEPS);
    let prob = ExitProblem {
        x0,
        lower,
        upper,
        horizon: 1.0,
    };
    let mut records = run_paths(n, |i| {
        exit_event(&model, &decomp, &prob, h, &mut streams.stream(i), i)
    })?;
    for r in &mut records {
        r.exit_time *= horizon;
    }
    Ok(records)
}

/// Half-line exit below a barrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalflineExit {
    /// Estimate of `P(τ ≤ m)`.
    pub p_exit: EstimateWithCI,
    pub barrier: f64,
    pub barrier_clamped: bool,
    pub fine_step: f64,
    pub records: Vec<ExitRecord>,
}

/// Estimate `P(τ ≤ m)` for `τ` the first time `X ≤ barrier` from `x0`.
///
/// Without an explicit barrier the bundle's `δ_ε` is used, capped at
/// [`BARRIER_CAP`].
pub fn estimate_halfline_exit(
    p: &ModelParams,
    bundle: &ScalingBundle,
    x0: f64,
    m: f64,
    n: usize,
    barrier: Option<f64>,
    streams: &StreamFactory,
) -> Result<HalflineExit> {
    check_paths(n, 100)?;
    let delta = bundle.plus.delta_eps.value();
    let (barrier, barrier_clamped) = match barrier {
        Some(b) => (b, false),
        None if delta > BARRIER_CAP => {
            log::warn!("delta_eps = {delta:.4e} clamped to {BARRIER_CAP}");
            (BARRIER_CAP, true)
        }
        None => (delta, false),
    };
    // Relative slack so that e.g. x0 = 0.15 passes for barrier 0.05.
    if !(barrier > 0.0 && x0 >= 3.0 * barrier * (1.0 - 1e-12)) {
        return Err(Error::domain(format!(
            "need 0 < barrier and x0 >= 3 barrier (barrier {barrier}, x0 {x0})"
        )));
    }
    if !(m > 0.0) {
        return Err(Error::domain(format!("time budget m = {m} must be positive")));
    }
    let model = Model::new(*p)?;
    let decomp = if p.epsilon > 0.0 {
        NoiseDecomposition::new(&model.law, p.epsilon.min(1.0), bundle.plus.rho)?
    } else {
        NoiseDecomposition::with_threshold(&model.law, 1.0)?
    };
    let h = event_fine_step(&decomp, m).min(m / MIN_STEPS);
    let prob = ExitProblem {
        x0,
        lower: Some(barrier),
        upper: None,
        horizon: m,
    };
    let records = run_paths(n, |i| {
        exit_event(&model, &decomp, &prob, h, &mut streams.stream(i), i)
    })?;
    Ok(HalflineExit {
        p_exit: EstimateWithCI::proportion(count(&records, ExitSide::Below), n as u64),
        barrier,
        barrier_clamped,
        fine_step: h,
        records,
    })
}

/// Exit of the process started at 0 from `(−Θ⁻, Θ⁺)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxExit {
    /// `P(X_χ ≥ Θ⁺)` over all paths.
    pub p_above: EstimateWithCI,
    /// `P(χ > t̂)`.
    pub p_censored: EstimateWithCI,
    /// 10%, 50% and 90% quantiles of χ over paths that exited.
    pub exit_time_quantiles: Option<[f64; 3]>,
    pub records: Vec<ExitRecord>,
}

/// Estimate the exit location and censoring of the transition box.
pub fn estimate_box_exit(
    p: &ModelParams,
    theta_minus: f64,
    theta_plus: f64,
    t_hat: f64,
    n: usize,
    streams: &StreamFactory,
) -> Result<BoxExit> {
    if !(theta_minus > 0.0 && theta_plus > 0.0 && t_hat > 0.0) {
        return Err(Error::domain(format!(
            "need positive box and t_hat (Theta- {theta_minus}, Theta+ {theta_plus}, t_hat {t_hat})"
        )));
    }
    check_paths(n, 1)?;
    let records = exit_on_unit_clock(
        p,
        0.0,
        Some(-theta_minus),
        Some(theta_plus),
        t_hat,
        n,
        streams,
    )?;
    let times: Vec<f64> = records
        .iter()
        .filter(|r| r.exit_side != ExitSide::Censored)
        .map(|r| r.exit_time)
        .collect();
    let exit_time_quantiles =
        (!times.is_empty()).then(|| [0.1, 0.5, 0.9].map(|q| quantile(&times, q)));
    Ok(BoxExit {
        p_above: EstimateWithCI::proportion(count(&records, ExitSide::Above), n as u64),
        p_censored: EstimateWithCI::proportion(count(&records, ExitSide::Censored), n as u64),
        exit_time_quantiles,
        records,
    })
}

/// Escape through the linearized ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampEscape {
    /// `P(υ > s)`.
    pub p_late: EstimateWithCI,
    pub records: Vec<ExitRecord>,
}

/// Estimate `P(υ > s)` for `υ` the first passage beyond `Ψ₁` on `side`,
/// starting at `Ψ₀`.
pub fn estimate_ramp_escape(
    p: &ModelParams,
    side: Side,
    psi0: f64,
    psi1: f64,
    s: f64,
    n: usize,
    streams: &StreamFactory,
) -> Result<RampEscape> {
    if !(psi0 > 0.0 && psi1 > psi0 && s > 0.0) {
        return Err(Error::domain(format!(
            "need 0 < Psi0 < Psi1 and s > 0 (Psi0 {psi0}, Psi1 {psi1}, s {s})"
        )));
    }
    check_paths(n, 1)?;
    let q = match side {
        Side::Plus => *p,
        Side::Minus => mirrored(p),
    };
    let records = exit_on_unit_clock(&q, psi0, None, Some(psi1), s, n, streams)?;
    Ok(RampEscape {
        p_late: EstimateWithCI::proportion(count(&records, ExitSide::Censored), n as u64),
        records,
    })
}

/// Terminal-state proportions of paths started at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub p_plus: EstimateWithCI,
    pub p_minus: EstimateWithCI,
    pub p_unclassified: EstimateWithCI,
    /// Path counts `[plus, minus, unclassified]`.
    pub counts: [u64; 3],
    pub step: f64,
}

/// Step of the selection experiment: `min(T/1000, t_ε/20)` with `t_ε` the
/// transition time at `ϑ = 1`.
pub fn selection_step(p: &ModelParams, horizon: f64) -> f64 {
    let coarse = horizon / MIN_STEPS;
    match transition_box(p, 1.0) {
        Ok(b) => coarse.min(b.t_eps.value() / 20.0),
        Err(_) => coarse,
    }
}

/// Integrate paths from 0 and classify their terminal states.
pub fn estimate_selection(
    p: &ModelParams,
    horizon: f64,
    n: usize,
    step: Option<f64>,
    streams: &StreamFactory,
) -> Result<Selection> {
    check_paths(n, 100)?;
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("horizon = {horizon} must be positive")));
    }
    let step = step.unwrap_or_else(|| selection_step(p, horizon));
    let model = Model::new(*p)?;
    let branches = run_paths(n, |i| {
        let mut last = 0.0;
        drive_grid(&model, 0.0, horizon, step, &mut streams.stream(i), |_, x, _| {
            last = x;
            true
        })?;
        Ok(classify(last, horizon, p))
    })?;
    let mut counts = [0u64; 3];
    for b in &branches {
        counts[match b {
            Branch::Plus => 0,
            Branch::Minus => 1,
            Branch::Unclassified => 2,
        }] += 1;
    }
    let n = n as u64;
    Ok(Selection {
        p_plus: EstimateWithCI::proportion(counts[0], n),
        p_minus: EstimateWithCI::proportion(counts[1], n),
        p_unclassified: EstimateWithCI::proportion(counts[2], n),
        counts,
        step,
    })
}

/// Exit of the truncated compensated noise `ε ξ^κ` from `[−r⁻, r⁺]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleExit {
    /// `P(σ⁺ < σ⁻)`.
    pub p_plus_first: EstimateWithCI,
    pub p_censored: EstimateWithCI,
    /// Largest possible jump `ε^{1−κ}`.
    pub eps_jump: f64,
    pub bound: f64,
}

/// Simulate `ε ξ^κ`, the noise with jumps above `ε^{−κ}` removed, until it
/// leaves `[−r⁻, r⁺]`.
pub fn estimate_martingale_exit(
    law: &StableLaw,
    epsilon: f64,
    kappa: f64,
    r_plus: f64,
    r_minus: f64,
    n: usize,
    streams: &StreamFactory,
) -> Result<MartingaleExit> {
    if !(epsilon > 0.0 && r_plus > 0.0 && r_minus > 0.0) {
        return Err(Error::domain("need epsilon, r_plus, r_minus > 0"));
    }
    check_paths(n, 1)?;
    let cap = epsilon.powf(-kappa);
    let eps_jump = epsilon * cap;
    let bound = optional_stopping_bound(r_plus, r_minus, eps_jump)?;
    let decomp = NoiseDecomposition::with_threshold(law, cap)?;
    // Per-step spread of 5% of the nearer barrier.
    let alpha = law.alpha();
    let var = epsilon * epsilon * 2.0 * law.c() * cap.powf(2.0 - alpha) / (2.0 - alpha);
    let dt = (0.05 * r_plus.min(r_minus)).powi(2) / var;
    let max_steps = 200_000u32;
    let sides = run_paths(n, |i| {
        let mut rng = streams.stream(i);
        let mut sampler = decomp.small_jump_sampler(&mut rng);
        let mut m = 0.0;
        for _ in 0..max_steps {
            m += epsilon * sampler.advance(dt, &mut rng).value;
            if m >= r_plus {
                return Ok(ExitSide::Above);
            }
            if m <= -r_minus {
                return Ok(ExitSide::Below);
            }
        }
        Ok(ExitSide::Censored)
    })?;
    let above = sides.iter().filter(|&&s| s == ExitSide::Above).count() as u64;
    let censored = sides.iter().filter(|&&s| s == ExitSide::Censored).count() as u64;
    Ok(MartingaleExit {
        p_plus_first: EstimateWithCI::proportion(above, n as u64),
        p_censored: EstimateWithCI::proportion(censored, n as u64),
        eps_jump,
        bound,
    })
}

/// Deviation from the upper extremal solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeDeviation {
    /// `P(sup_t |X_t − x⁺(t)| > radius)`.
    pub p_exceed: EstimateWithCI,
    pub radius: f64,
}

/// Tube radius `δ^{β(1−β)/2} ∨ Δ^{1−β}` with `β = β⁺`.
pub fn tube_radius(p: &ModelParams, delta: f64, big_delta: f64) -> f64 {
    let b = p.beta_plus;
    delta.powf(0.5 * b * (1.0 - b)).max(big_delta.powf(1.0 - b))
}

/// Estimate the probability that a path from `x0 ∈ [3δ, Δ]` leaves the tube
/// around `x⁺` on `[0, horizon]`.
#[allow(clippy::too_many_arguments)]
pub fn tube_deviation(
    p: &ModelParams,
    x0: f64,
    delta: f64,
    big_delta: f64,
    horizon: f64,
    n: usize,
    radius: Option<f64>,
    streams: &StreamFactory,
) -> Result<TubeDeviation> {
    if !(delta > 0.0 && x0 >= 3.0 * delta * (1.0 - 1e-12) && x0 <= big_delta) {
        return Err(Error::domain(format!(
            "need x0 in [3 delta, Delta] (x0 {x0}, delta {delta}, Delta {big_delta})"
        )));
    }
    check_paths(n, 1)?;
    let radius = radius.unwrap_or_else(|| tube_radius(p, delta, big_delta));
    let model = Model::new(*p)?;
    let step = horizon / MIN_STEPS;
    let hits = run_paths(n, |i| {
        let mut out = false;
        drive_grid(&model, x0, horizon, step, &mut streams.stream(i), |t, x, _| {
            out = (x - extremal_solution(t, Side::Plus, p)).abs() > radius;
            !out
        })?;
        Ok(out)
    })?;
    let k = hits.iter().filter(|&&h| h).count() as u64;
    Ok(TubeDeviation {
        p_exceed: EstimateWithCI::proportion(k, n as u64),
        radius,
    })
}

/// Drift component `V = X − εL` along a path.
pub fn v_component(path: &PathSample, noise: &[f64]) -> Result<Vec<f64>> {
    if noise.len() != path.values.len() {
        return Err(Error::domain(format!(
            "noise path has {} points, state path {}",
            noise.len(),
            path.values.len()
        )));
    }
    Ok(path.values.iter().zip(noise).map(|(x, l)| x - l).collect())
}

/// Positive excursions of the drift component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VExcursion {
    /// `P(sup_{t ≤ t̂} (V_t)₊ > Θ⁺ ε^g)`.
    pub p_exceed: EstimateWithCI,
    pub level: f64,
    pub horizon: f64,
}

/// Estimate `P(sup (V)₊ > Θ⁺ ε^g)` on `[0, t_ε |ln ε|]`, box at `ϑ = 1`.
pub fn estimate_v_excursion(
    p: &ModelParams,
    bundle: &ScalingBundle,
    n: usize,
    streams: &StreamFactory,
) -> Result<VExcursion> {
    check_paths(n, 1)?;
    let tbox = transition_box(p, 1.0)?;
    let le = p.epsilon.ln();
    let horizon = tbox.t_eps.value() * le.abs();
    let level = (tbox.theta_plus.ln + bundle.g * le).exp();
    let model = Model::new(*p)?;
    let step = horizon / MIN_STEPS;
    let hits = run_paths(n, |i| {
        let mut out = false;
        drive_grid(&model, 0.0, horizon, step, &mut streams.stream(i), |_, x, l| {
            out = x - l > level;
            !out
        })?;
        Ok(out)
    })?;
    let k = hits.iter().filter(|&&h| h).count() as u64;
    Ok(VExcursion {
        p_exceed: EstimateWithCI::proportion(k, n as u64),
        level,
        horizon,
    })
}

/// Deterministic sup-deviation of the flow from `x⁺` on the tube grid.
pub fn deterministic_tube_deviation(p: &ModelParams, x0: f64, horizon: f64) -> f64 {
    let step = horizon / MIN_STEPS;
    (1..=MIN_STEPS as usize)
        .map(|k| {
            let t = k as f64 * step;
            (flow(t, x0, p) - extremal_solution(t, Side::Plus, p)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::crossing_time;
    use crate::scaling::{scaling_bundle, Overrides};

    #[test]
    fn weibull_values() {
        assert_eq!(weibull_tail(0.3, 0.3, 0.5, 1.0, 2.0).unwrap(), 1.0);
        let v = weibull_tail(1.0, 0.0, 0.5, 1.0, 1.0).unwrap();
        assert!((v - (-2f64).exp()).abs() < 1e-15);
        assert!(weibull_tail(0.1, 0.2, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn stopping_bound_values() {
        assert_eq!(optional_stopping_bound(2.0, 2.0, 0.0).unwrap(), 0.5);
        assert_eq!(optional_stopping_bound(2.0, 0.0, 0.0).unwrap(), 0.0);
        let v = optional_stopping_bound(3.0, 1.0, 0.5).unwrap();
        assert!((v - 1.5 / 4.5).abs() < 1e-15);
        assert!(optional_stopping_bound(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn noiseless_halfline_never_exits() {
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 0.1).unwrap();
        let b = scaling_bundle(&p, &Overrides::default()).unwrap();
        let q = ModelParams::unchecked(1.5, 0.5, 0.5, 1.0, 1.0, 0.0);
        let r = estimate_halfline_exit(&q, &b, 0.3, 10.0, 100, None, &StreamFactory::new(1))
            .unwrap();
        assert!(r.barrier_clamped);
        assert_eq!(r.p_exit.point, 0.0);
        assert!(r.records.iter().all(|r| r.exit_side == ExitSide::Censored));
        assert!(r.records.iter().all(|r| r.exit_time == 10.0));
    }

    #[test]
    fn halfline_rejects_bad_barrier() {
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 0.1).unwrap();
        let b = scaling_bundle(&p, &Overrides::default()).unwrap();
        let f = StreamFactory::new(1);
        assert!(estimate_halfline_exit(&p, &b, 0.1, 1.0, 100, Some(0.05), &f).is_err());
        assert!(estimate_halfline_exit(&p, &b, 0.15, 1.0, 100, Some(0.05), &f).is_ok());
        assert!(estimate_halfline_exit(&p, &b, 0.3, 1.0, 10, Some(0.05), &f).is_err());
    }

    #[test]
    fn noiseless_ramp_matches_crossing_time() {
        let p = ModelParams::unchecked(1.5, 0.5, 0.5, 2.0, 1.0, 0.0);
        let (psi0, psi1) = (0.01, 0.1);
        let tc = crossing_time(psi0, psi1, 2.0, 0.5);
        let f = StreamFactory::new(3);
        let early = estimate_ramp_escape(&p, Side::Plus, psi0, psi1, 0.9 * tc, 10, &f).unwrap();
        assert_eq!(early.p_late.point, 1.0);
        let late = estimate_ramp_escape(&p, Side::Plus, psi0, psi1, 1.1 * tc, 10, &f).unwrap();
        assert_eq!(late.p_late.point, 0.0);
        for r in &late.records {
            assert!(r.exit_time >= tc && r.exit_time <= tc * (1.0 + 2e-3));
        }
    }

    #[test]
    fn ramp_on_minus_side_uses_minus_drift() {
        // Weight 2 on the negative side: crossing on the mirrored ramp is fast.
        let p = ModelParams::unchecked(1.5, 0.5, 0.5, 0.5, 2.0, 0.0);
        let tc = crossing_time(0.01, 0.1, 2.0, 0.5);
        let f = StreamFactory::new(3);
        let r = estimate_ramp_escape(&p, Side::Minus, 0.01, 0.1, 1.1 * tc, 10, &f).unwrap();
        assert_eq!(r.p_late.point, 0.0);
    }

    #[test]
    fn selection_counts_sum() {
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 0.05).unwrap();
        let s = estimate_selection(&p, 1.0, 200, None, &StreamFactory::new(5)).unwrap();
        assert_eq!(s.counts.iter().sum::<u64>(), 200);
        let total = s.p_plus.point + s.p_minus.point + s.p_unclassified.point;
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn selection_step_rule() {
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 1e-3).unwrap();
        // t_ε = ε^{0.75} at unit weights.
        let expect = 1e-3f64.powf(0.75) / 20.0;
        assert!((selection_step(&p, 1.0) - expect).abs() < 1e-12);
        let q = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(selection_step(&q, 1.0), 1e-3);
    }

    #[test]
    fn deterministic_tube_oracle() {
        let p = ModelParams::unchecked(1.5, 0.5, 0.5, 1.0, 1.0, 0.0);
        let (delta, big) = (1e-4, 0.01);
        let dev = deterministic_tube_deviation(&p, big, 1.0);
        let radius = tube_radius(&p, delta, big);
        let f = StreamFactory::new(2);
        let r = tube_deviation(&p, big, delta, big, 1.0, 5, None, &f).unwrap();
        assert_eq!(r.p_exceed.point, if dev > radius { 1.0 } else { 0.0 });
        let wide = tube_deviation(&p, big, delta, big, 1.0, 5, Some(1e9), &f).unwrap();
        assert_eq!(wide.p_exceed.point, 0.0);
    }

    #[test]
    fn v_component_cases() {
        let p = ModelParams::unchecked(1.5, 0.5, 0.5, 0.0, 0.0, 0.1);
        let model = Model::new(p).unwrap();
        let path = crate::dynamics::integrate_grid(
            &model,
            0.2,
            1.0,
            0.01,
            &mut StreamFactory::new(4).stream(0),
        )
        .unwrap();
        let v = v_component(&path, &path.noise).unwrap();
        assert!(v.iter().all(|&x| (x - 0.2).abs() < 1e-12));
        assert!(v_component(&path, &path.noise[1..]).is_err());
    }

    #[test]
    fn symmetric_driftless_box() {
        let p = ModelParams::unchecked(1.5, 0.5, 0.5, 0.0, 0.0, 0.1);
        let r = estimate_box_exit(&p, 0.05, 0.05, 1.0, 2000, &StreamFactory::new(9)).unwrap();
        assert!((r.p_above.point - 0.5).abs() <= 3.0 * r.p_above.stderr);
        assert!(r.exit_time_quantiles.is_some());
    }

    #[test]
    fn results_independent_of_pool_size() {
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 0.1).unwrap();
        let f = StreamFactory::new(11);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_box_exit(&p, 0.05, 0.05, 0.5, 200, &f).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
