//! Singular power-law drift, its exact flow, and path integrators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{
    sample_event_stream, sample_stable_increment, JumpEvent, NoiseDecomposition, StableLaw,
};

fn one() -> f64 {
    1.0
}

/// Parameters of `dX = b(X) dt + ε dL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    #[serde(rename = "B_plus")]
    pub b_plus: f64,
    #[serde(rename = "B_minus")]
    pub b_minus: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub c: f64,
}

impl ModelParams {
    /// Validated parameters (see [`ModelParams::validate`]).
    pub fn new(
        alpha: f64,
        beta_plus: f64,
        beta_minus: f64,
        b_plus: f64,
        b_minus: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let p = Self::unchecked(alpha, beta_plus, beta_minus, b_plus, b_minus, epsilon);
        p.validate()?;
        Ok(p)
    }

    /// Parameters without the standing assumptions, e.g. `B = 0` or `ε = 0`.
    pub fn unchecked(
        alpha: f64,
        beta_plus: f64,
        beta_minus: f64,
        b_plus: f64,
        b_minus: f64,
        epsilon: f64,
    ) -> Self {
        Self {
            alpha,
            beta_plus,
            beta_minus,
            b_plus,
            b_minus,
            epsilon,
            c: 1.0,
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn beta(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.beta_plus,
            Side::Minus => self.beta_minus,
        }
    }

    pub fn weight(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.b_plus,
            Side::Minus => self.b_minus,
        }
    }

    /// Minimal requirements for simulation: weights and ε may vanish.
    pub fn check_simulable(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::domain(format!("alpha = {} outside (0, 2)", self.alpha)));
        }
        for (name, b) in [("beta_plus", self.beta_plus), ("beta_minus", self.beta_minus)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::domain(format!("{name} = {b} outside (0, 1)")));
            }
        }
        for (name, w) in [("B_plus", self.b_plus), ("B_minus", self.b_minus)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("{name} = {w} must be non-negative")));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain(format!("epsilon = {} must be non-negative", self.epsilon)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::domain(format!("c = {} must be positive", self.c)));
        }
        Ok(())
    }

    /// Full standing assumptions: positive weights, `ε > 0`, `α > 1 − β⁺∧β⁻`.
    pub fn validate(&self) -> Result<()> {
        self.check_simulable()?;
        for (name, w) in [("B_plus", self.b_plus), ("B_minus", self.b_minus)] {
            if !(w > 0.0) {
                return Err(Error::domain(format!("{name} = {w} must be positive")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain(format!("epsilon = {} must be positive", self.epsilon)));
        }
        let beta_min = self.beta_plus.min(self.beta_minus);
        if !(self.alpha > 1.0 - beta_min) {
            return Err(Error::domain(format!(
                "alpha = {} violates alpha > 1 - min(beta_plus, beta_minus) = {}",
                self.alpha,
                1.0 - beta_min
            )));
        }
        Ok(())
    }
}

/// Parameters together with the stable law they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub law: StableLaw,
}

impl Model {
    /// Build the law for simulation; weights and ε may vanish.
    pub fn new(params: ModelParams) -> Result<Self> {
        params.check_simulable()?;
        Ok(Self {
            params,
            law: StableLaw::new(params.alpha, params.c)?,
        })
    }

    pub fn with_law(params: ModelParams, law: StableLaw) -> Self {
        Self { params, law }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `b(x) = B⁺|x|^β⁺` for `x ≥ 0`, `−B⁻|x|^β⁻` for `x < 0`.
pub fn drift(x: f64, p: &ModelParams) -> f64 {
    if x >= 0.0 {
        p.b_plus * x.powf(p.beta_plus)
    } else {
        -p.b_minus * (-x).powf(p.beta_minus)
    }
}

/// Exact solution of `ẋ = b(x)` at time `t` from `x`; 0 stays at 0.
pub fn flow(t: f64, x: f64, p: &ModelParams) -> f64 {
    if x == 0.0 || t == 0.0 {
        return x;
    }
    let (b, beta) = if x > 0.0 {
        (p.b_plus, p.beta_plus)
    } else {
        (p.b_minus, p.beta_minus)
    };
    if b == 0.0 {
        return x;
    }
    let q = 1.0 - beta;
    (b * q * t + x.abs().powf(q)).powf(1.0 / q).copysign(x)
}

/// `x±(t) = ±(B±(1−β±) t)^{1/(1−β±)}`, the solutions leaving 0 at once.
pub fn extremal_solution(t: f64, side: Side, p: &ModelParams) -> f64 {
    let (b, beta) = (p.weight(side), p.beta(side));
    let q = 1.0 - beta;
    side.sign() * (b * q * t).powf(1.0 / q)
}

/// Time for the flow to carry `x0 > 0` up to `x1 ≥ x0` on the positive side.
pub fn crossing_time(x0: f64, x1: f64, b: f64, beta: f64) -> f64 {
    let q = 1.0 - beta;
    (x1.powf(q) - x0.powf(q)) / (b * q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Plus,
    Minus,
    Unclassified,
}

/// Terminal-state classification with margin ½ around the extremal solutions.
pub fn classify(x: f64, horizon: f64, p: &ModelParams) -> Branch {
    if x > 0.0 && x >= 0.5 * extremal_solution(horizon, Side::Plus, p) {
        Branch::Plus
    } else if x < 0.0 && -x >= 0.5 * extremal_solution(horizon, Side::Minus, p).abs() {
        Branch::Minus
    } else {
        Branch::Unclassified
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    GridSplitting,
    EventDriven,
    Comparison,
}

/// A simulated path on its time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Accumulated noise `εL` on the same grid.
    pub noise: Vec<f64>,
    /// Large jumps applied (event-driven scheme only).
    pub events: Vec<JumpEvent>,
    pub scheme: Scheme,
}

impl PathSample {
    fn start(x0: f64, scheme: Scheme, capacity: usize) -> Self {
        let mut s = Self {
            times: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
            noise: Vec::with_capacity(capacity),
            events: Vec::new(),
            scheme,
        };
        s.push(0.0, x0, 0.0);
        s
    }

    fn push(&mut self, t: f64, x: f64, n: f64) {
        self.times.push(t);
        self.values.push(x);
        self.noise.push(n);
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("path is never empty")
    }
}

fn check_finite(x: f64, t: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical {
            time: t,
            path: None,
            what: format!("state became {x}"),
        })
    }
}

/// Number of steps of a uniform grid of mesh `step` over `[0, horizon]`.
fn grid_steps(horizon: f64, step: f64) -> usize {
    let r = horizon / step;
    let n = if (r - r.round()).abs() < 1e-9 * r.max(1.0) {
        r.round()
    } else {
        r.ceil()
    };
    (n as usize).max(1)
}

/// Lie splitting on a uniform grid, reporting `(t, X_t, εL_t)` after every step.
///
/// The observer returns `false` to stop early.
pub fn drive_grid<R, F>(
    model: &Model,
    x0: f64,
    horizon: f64,
    step: f64,
    rng: &mut R,
    mut observe: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(f64, f64, f64) -> bool,
{
    if !(step > 0.0 && horizon >= step) {
        return Err(Error::domain(format!(
            "need step > 0 and horizon >= step (step {step}, horizon {horizon})"
        )));
    }
    let p = &model.params;
    let n = grid_steps(horizon, step);
    let (mut x, mut noise, mut t) = (x0, 0.0, 0.0);
    for k in 1..=n {
        let t_next = if k == n { horizon } else { k as f64 * step };
        let dt = t_next - t;
        x = flow(dt, x, p);
        if p.epsilon > 0.0 {
            let dl = p.epsilon * sample_stable_increment(&model.law, dt, rng);
            x += dl;
            noise += dl;
        }
        t = t_next;
        check_finite(x, t)?;
        if !observe(t, x, noise) {
            break;
        }
    }
    Ok(())
}

/// Grid-splitting integrator: exact drift flow, then an exact stable increment.
pub fn integrate_grid<R: Rng + ?Sized>(
    model: &Model,
    x0: f64,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<PathSample> {
    let cap = if step > 0.0 && horizon >= step { grid_steps(horizon, step) + 1 } else { 1 };
    let mut path = PathSample::start(x0, Scheme::GridSplitting, cap);
    drive_grid(model, x0, horizon, step, rng, |t, x, n| {
        path.push(t, x, n);
        true
    })?;
    Ok(path)
}

/// Fine step of the event-driven scheme.
pub fn event_fine_step(decomp: &NoiseDecomposition, horizon: f64) -> f64 {
    let mean_wait = if decomp.lambda_eps > 0.0 {
        1.0 / decomp.lambda_eps
    } else {
        f64::INFINITY
    };
    mean_wait.min(horizon) / 64.0
}

/// Event-driven scheme over a given large-jump stream.
///
/// Between arrivals the state follows the drift flow plus the bounded-jump
/// noise on a fine grid; at each arrival it jumps by `ε W`. The observer sees
/// `(t, X_t, εL_t, is_arrival)` after every step and returns `false` to stop.
pub fn drive_event<R, F>(
    model: &Model,
    decomp: &NoiseDecomposition,
    events: &[JumpEvent],
    x0: f64,
    horizon: f64,
    rng: &mut R,
    observe: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(f64, f64, f64, bool) -> bool,
{
    let h = event_fine_step(decomp, horizon);
    drive_event_with_step(model, decomp, events, x0, horizon, h, rng, observe)
}

/// [`drive_event`] with an explicit fine step `h`.
#[allow(clippy::too_many_arguments)]
pub fn drive_event_with_step<R, F>(
    model: &Model,
    decomp: &NoiseDecomposition,
    events: &[JumpEvent],
    x0: f64,
    horizon: f64,
    h: f64,
    rng: &mut R,
    mut observe: F,
) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(f64, f64, f64, bool) -> bool,
{
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("horizon = {horizon} must be positive")));
    }
    if !(h > 0.0) {
        return Err(Error::domain(format!("fine step = {h} must be positive")));
    }
    let p = &model.params;
    let eps = p.epsilon;
    let mut small = decomp.small_jump_sampler(rng);
    let (mut x, mut noise, mut t) = (x0, 0.0, 0.0);
    let mut k: u64 = 0;
    let mut next = events.iter().peekable();
    while t < horizon {
        let grid_t = ((k + 1) as f64 * h).min(horizon);
        let event = next.peek().filter(|e| e.time <= grid_t).copied();
        let t_next = event.map_or(grid_t, |e| e.time);
        if t_next >= grid_t {
            k += 1;
        }
        let dt = t_next - t;
        if dt > 0.0 {
            x = flow(dt, x, p);
            if eps > 0.0 {
                let dxi = eps * small.advance(dt, rng).value;
                x += dxi;
                noise += dxi;
            }
        }
        if let Some(e) = event {
            next.next();
            x += eps * e.size;
            noise += eps * e.size;
        }
        t = t_next;
        check_finite(x, t)?;
        if !observe(t, x, noise, event.is_some()) {
            break;
        }
    }
    Ok(())
}

/// Event-driven integrator; the returned path carries its event stream.
pub fn integrate_event<R: Rng + ?Sized>(
    model: &Model,
    decomp: &NoiseDecomposition,
    x0: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<PathSample> {
    if !(horizon > 0.0) {
        return Err(Error::domain(format!("horizon = {horizon} must be positive")));
    }
    let events = sample_event_stream(decomp, &model.law, horizon, rng);
    let mut path = PathSample::start(x0, Scheme::EventDriven, 0);
    drive_event(model, decomp, &events, x0, horizon, rng, |t, x, n, _| {
        path.push(t, x, n);
        true
    })?;
    path.events = events;
    Ok(path)
}

/// Piecewise deterministic lower comparison process on `times`.
///
/// On each inter-arrival segment the process follows the flow from the
/// previous restart value shifted down by `δ`, minus `δ`, capped at `γ`; at
/// each arrival the jump `ε W` of the coupled path is added before the cap.
pub fn comparison_process(
    p: &ModelParams,
    events: &[JumpEvent],
    gamma: f64,
    delta: f64,
    x0: f64,
    times: &[f64],
) -> Result<PathSample> {
    if !(gamma > 0.0) || delta < 0.0 {
        return Err(Error::domain(format!(
            "need gamma > 0 and delta >= 0 (gamma {gamma}, delta {delta})"
        )));
    }
    crate::noise::check_grid(times)?;
    let u = |t: f64, s: f64| (flow(t, s - delta, p) - delta).min(gamma);
    let mut out = PathSample::start(u(0.0, x0), Scheme::Comparison, times.len());
    let (mut restart, mut seg_start) = (x0, 0.0);
    let mut next = events.iter().peekable();
    for &t in &times[1..] {
        let mut at_event = None;
        while let Some(e) = next.next_if(|e| e.time <= t) {
            let end = (flow(e.time - seg_start, restart - delta, p) - delta + p.epsilon * e.size)
                .min(gamma);
            restart = end;
            seg_start = e.time;
            at_event = (e.time == t).then_some(end);
        }
        let z = at_event.unwrap_or_else(|| u(t - seg_start, restart));
        out.push(t, z, 0.0);
    }
    out.events = events.to_vec();
    Ok(out)
}
