//! Experiment dispatch: one pass over the ε grid on a sized worker pool.

use std::time::Instant;

use peano_core::dynamics::{drive_grid, extremal_solution, Model, ModelParams, Side};
use peano_core::error::{Error as CoreError, Result as CoreResult};
use peano_core::exitlab::{
    estimate_box_exit, estimate_halfline_exit, estimate_ramp_escape, estimate_selection,
    ExitRecord, BARRIER_CAP,
};
use peano_core::rng::{map_paths, StreamFactory};
use peano_core::scaling::{bound_terms, exponent_audit, scaling_bundle, Overrides, ScalingBundle};
use peano_core::stats::EstimateWithCI;
use serde_json::{json, Value};

use crate::config::{Experiment, ResolvedConfig};
use crate::error::HarnessError;
use crate::output::{ResultRow, RunOutput};
use crate::validate::NoiseSuite;

struct Quantity {
    name: String,
    est: EstimateWithCI,
    flags: Vec<String>,
}

#[derive(Default)]
struct EpsOutcome {
    quantities: Vec<Quantity>,
    flags: Vec<String>,
    detail: Value,
    records: Vec<ExitRecord>,
    failed: Vec<String>,
}

impl EpsOutcome {
    fn push(&mut self, name: impl Into<String>, est: EstimateWithCI) {
        self.quantities.push(Quantity {
            name: name.into(),
            est,
            flags: Vec::new(),
        });
    }

    fn flag(&mut self, name: &str, value: f64) {
        self.flags.push(format!("{name}={value:e}"));
    }
}

/// Run `cfg` on a pool of `cfg.workers` threads.
pub fn run(cfg: &ResolvedConfig) -> Result<RunOutput, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Config {
            field: "workers".into(),
            message: e.to_string(),
        })?;
    pool.install(|| execute(cfg))
}

fn execute(cfg: &ResolvedConfig) -> Result<RunOutput, HarnessError> {
    let root = StreamFactory::new(cfg.master_seed);
    let mut out = RunOutput {
        experiment: cfg.experiment.as_str().into(),
        config: cfg.clone(),
        rows: Vec::new(),
        details: Vec::new(),
        records: Vec::new(),
        failed_oracles: Vec::new(),
    };
    for (k, &eps) in cfg.eps_grid.iter().enumerate() {
        let p = cfg.params.with_epsilon(eps);
        let streams = root.derive(k as u64);
        let start = Instant::now();
        let (field, result) = match cfg.experiment {
            Experiment::Simulate => ("extras", simulate(cfg, &p, &streams)),
            Experiment::SelectProb => ("extras.step", select_prob(cfg, &p, &streams)),
            Experiment::ExitTime => ("extras", exit_time(cfg, &p, &streams)),
            Experiment::BoxExit => ("extras.vartheta", box_exit(cfg, &p, &streams)),
            Experiment::Ramp => ("extras.vartheta", ramp(cfg, &p, &streams)),
            Experiment::ScalingReport => ("params", scaling_report(cfg, &p)),
            Experiment::ValidateNoise => ("extras", validate_noise(cfg, &p, &streams)),
        };
        let res = result.map_err(|e| HarnessError::from_core(e, eps, field))?;
        let runtime_ms = cfg
            .extras
            .record_runtime
            .then(|| start.elapsed().as_millis() as u64);
        log::info!("{} at epsilon {eps:e} done in {:?}", cfg.experiment, start.elapsed());

        for q in res.quantities {
            let mut row = ResultRow::new(cfg, eps, &q.name, q.est);
            row.runtime_ms = runtime_ms;
            row.flags = res.flags.iter().chain(&q.flags).cloned().collect::<Vec<_>>().join(";");
            out.rows.push(row);
        }
        let mut detail = res.detail;
        if let Value::Object(m) = &mut detail {
            m.insert("epsilon".into(), json!(eps));
            m.insert("flags".into(), json!(res.flags));
        }
        out.details.push(detail);
        out.records.extend(res.records.into_iter().map(|r| (eps, r)));
        out.failed_oracles
            .extend(res.failed.into_iter().map(|f| format!("{f} (epsilon = {eps:e})")));
    }
    Ok(out)
}

impl RunOutput {
    /// `Err` with exit code 4 if any validation oracle failed.
    pub fn status(&self) -> Result<(), HarnessError> {
        if self.failed_oracles.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Validation {
                failed: self.failed_oracles.clone(),
            })
        }
    }
}

fn overrides(cfg: &ResolvedConfig) -> Overrides {
    Overrides {
        vartheta: cfg.extras.vartheta,
        ..Overrides::default()
    }
}

fn bundle(cfg: &ResolvedConfig, p: &ModelParams, out: &mut EpsOutcome) -> CoreResult<ScalingBundle> {
    let b = scaling_bundle(p, &overrides(cfg))?;
    out.flags.extend(b.flags.iter().cloned());
    Ok(b)
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Plus => "plus",
        Side::Minus => "minus",
    }
}

fn simulate(cfg: &ResolvedConfig, p: &ModelParams, streams: &StreamFactory) -> CoreResult<EpsOutcome> {
    let model = Model::new(*p)?;
    let step = cfg
        .extras
        .step
        .unwrap_or_else(|| peano_core::exitlab::selection_step(p, cfg.horizon));
    let x0 = cfg.extras.x0.unwrap_or(0.0);
    let finals = map_paths(cfg.n_paths as usize, |i| {
        let mut rng = streams.stream(i);
        let mut last = x0;
        drive_grid(&model, x0, cfg.horizon, step, &mut rng, |_, x, _| {
            last = x;
            true
        })
        .map(|_| last)
        .map_err(|e| e.on_path(i))
    })
    .into_iter()
    .collect::<CoreResult<Vec<f64>>>()?;

    let n = finals.len() as u64;
    let mut out = EpsOutcome::default();
    out.flag("step", step);
    out.flag("x0", x0);
    out.push("terminal_mean", EstimateWithCI::mean(&finals));
    let abs: Vec<f64> = finals.iter().map(|x| x.abs()).collect();
    out.push("terminal_abs_mean", EstimateWithCI::mean(&abs));
    let positive = finals.iter().filter(|&&x| x > 0.0).count() as u64;
    out.push("p_positive", EstimateWithCI::proportion(positive, n));
    out.detail = json!({
        "step": step,
        "x0": x0,
        "extremal_plus": extremal_solution(cfg.horizon, Side::Plus, p),
        "extremal_minus": extremal_solution(cfg.horizon, Side::Minus, p),
    });
    Ok(out)
}

fn select_prob(cfg: &ResolvedConfig, p: &ModelParams, streams: &StreamFactory) -> CoreResult<EpsOutcome> {
    let s = estimate_selection(p, cfg.horizon, cfg.n_paths as usize, cfg.extras.step, streams)?;
    let mut out = EpsOutcome::default();
    out.flag("step", s.step);
    out.push("p_plus", s.p_plus);
    out.push("p_minus", s.p_minus);
    out.push("p_unclassified", s.p_unclassified);
    out.detail = json!({
        "step": s.step,
        "counts": {"plus": s.counts[0], "minus": s.counts[1], "unclassified": s.counts[2]},
        "extremal_plus": extremal_solution(cfg.horizon, Side::Plus, p),
        "extremal_minus": extremal_solution(cfg.horizon, Side::Minus, p),
    });
    Ok(out)
}

fn exit_time(cfg: &ResolvedConfig, p: &ModelParams, streams: &StreamFactory) -> CoreResult<EpsOutcome> {
    let mut out = EpsOutcome::default();
    let b = bundle(cfg, p, &mut out)?;
    let barrier = cfg
        .extras
        .barrier
        .unwrap_or_else(|| b.delta_eps().value().min(BARRIER_CAP));
    let x0 = cfg.extras.x0.unwrap_or(3.0 * barrier);
    let m = cfg.extras.m.unwrap_or_else(|| p.epsilon.powf(-p.alpha));
    let r = estimate_halfline_exit(
        p,
        &b,
        x0,
        m,
        cfg.n_paths as usize,
        Some(barrier),
        streams,
    )?;
    out.flag("barrier", r.barrier);
    if cfg.extras.barrier.is_none() && barrier < b.delta_eps().value() {
        out.flags.push("barrier_clamped".into());
    }
    out.flag("x0", x0);
    out.flag("m", m);
    out.flag("fine_step", r.fine_step);
    out.push("p_exit", r.p_exit);
    out.detail = json!({
        "barrier": r.barrier,
        "delta_eps": b.delta_eps(),
        "x0": x0,
        "m": m,
        "fine_step": r.fine_step,
        "bundle": b,
    });
    out.records = r.records;
    Ok(out)
}

fn box_exit(cfg: &ResolvedConfig, p: &ModelParams, streams: &StreamFactory) -> CoreResult<EpsOutcome> {
    let mut out = EpsOutcome::default();
    let b = bundle(cfg, p, &mut out)?;
    let tb = b.transition;
    let (raw_plus, raw_minus) = (tb.theta_plus.value(), tb.theta_minus.value());
    let (theta_plus, theta_minus) = (raw_plus.min(BARRIER_CAP), raw_minus.min(BARRIER_CAP));
    let t_hat = tb.t_eps.value();
    let r = estimate_box_exit(p, theta_minus, theta_plus, t_hat, cfg.n_paths as usize, streams)?;
    out.flag("theta_plus", theta_plus);
    out.flag("theta_minus", theta_minus);
    out.flag("t_hat", t_hat);
    out.flag("vartheta", tb.vartheta);
    if theta_plus < raw_plus || theta_minus < raw_minus {
        out.flags.push("theta_clamped".into());
    }
    out.push("p_above", r.p_above);
    out.push("p_censored", r.p_censored);
    out.detail = json!({
        "theta_plus": theta_plus,
        "theta_minus": theta_minus,
        "t_hat": t_hat,
        "exit_time_quartiles": r.exit_time_quantiles,
        "transition": tb,
    });
    out.records = r.records;
    Ok(out)
}

fn ramp(cfg: &ResolvedConfig, p: &ModelParams, streams: &StreamFactory) -> CoreResult<EpsOutcome> {
    let mut out = EpsOutcome::default();
    let b = bundle(cfg, p, &mut out)?;
    let rp = b.ramp;
    let bar = rp.clamped(BARRIER_CAP);
    let r = estimate_ramp_escape(p, rp.side, bar.psi0, bar.psi1, bar.s_eps, cfg.n_paths as usize, streams)?;
    out.flags.push(format!("side={}", side_name(rp.side)));
    out.flag("psi0", bar.psi0);
    out.flag("psi1", bar.psi1);
    out.flag("s_eps", bar.s_eps);
    if bar.clamped {
        out.flags.push("ramp_clamped".into());
    }
    out.push("p_late", r.p_late);
    out.detail = json!({
        "barriers": bar,
        "ramp": rp,
    });
    out.records = r.records;
    Ok(out)
}

fn scaling_report(cfg: &ResolvedConfig, p: &ModelParams) -> CoreResult<EpsOutcome> {
    let mut out = EpsOutcome::default();
    let b = bundle(cfg, p, &mut out)?;
    let audit = exponent_audit(p, b.vartheta);
    let bounds = bound_terms(p, &b, &[p.epsilon])?
        .pop()
        .ok_or_else(|| CoreError::Domain("empty bound table".into()))?;
    let exact = |v: f64| EstimateWithCI::exact(v, 0);

    for s in [&b.plus, &b.minus] {
        let tag = side_name(s.side);
        out.push(format!("Gamma_{tag}"), exact(s.gamma_exponent));
        out.push(format!("rho_{tag}"), exact(s.rho));
        out.push(format!("rho0_{tag}"), exact(s.rho0));
        out.push(format!("rho1_{tag}"), exact(s.rho1));
        out.push(format!("ln_lambda_eps_{tag}"), exact(s.lambda_eps.ln));
        out.push(format!("ln_delta_eps_{tag}"), exact(s.delta_eps.ln));
        out.push(format!("ln_r_eps_{tag}"), exact(s.r_eps.ln));
        out.push(format!("ln_n_eps_{tag}"), exact(s.n_eps.ln));
        out.push(format!("ln_gamma_eps_{tag}"), exact(s.gamma_eps.ln));
    }
    let tb = &b.transition;
    out.push("theta_star", exact(b.theta_star));
    out.push("vartheta", exact(b.vartheta));
    out.push("ln_theta_plus", exact(tb.theta_plus.ln));
    out.push("ln_theta_minus", exact(tb.theta_minus.ln));
    out.push("ln_t_eps", exact(tb.t_eps.ln));
    out.push("transition_residual", exact(tb.residual));
    out.push("kappa", exact(b.kappa));
    out.push("g", exact(b.g));
    out.push("pi1", exact(b.ramp.pi1));
    for (i, t) in bounds.terms().iter().enumerate() {
        out.push(format!("ln_S{}", i + 1), exact(t.ln));
    }
    for (name, v) in &audit.exponents {
        out.push(format!("exponent_{name}"), exact(*v));
    }
    for f in &audit.flags {
        let status = serde_json::to_value(f.status)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        out.quantities.push(Quantity {
            name: format!("audit_{}", f.name),
            est: exact(f.value),
            flags: vec![format!("status={status}")],
        });
    }
    if !audit.all_pass {
        out.flags.push("audit_failed".into());
    }
    out.detail = json!({
        "bundle": b,
        "audit": audit,
        "bounds": bounds,
    });
    Ok(out)
}

fn validate_noise(cfg: &ResolvedConfig, p: &ModelParams, streams: &StreamFactory) -> CoreResult<EpsOutcome> {
    let mut out = EpsOutcome::default();
    let b = scaling_bundle(p, &overrides(cfg))?;
    let suite = NoiseSuite {
        alpha: p.alpha,
        c: p.c,
        sigma_override: cfg.extras.sigma_override,
        threshold: b.plus.threshold.value(),
        n: cfg.n_paths,
        n_cauchy: cfg.extras.cauchy_paths.unwrap_or(crate::config::DEFAULT_CAUCHY_PATHS),
    };
    let report = suite.run(streams)?;
    out.flag("threshold", report.threshold);
    out.flag("inner_cutoff", report.inner_cutoff);
    if report.sigma_overridden {
        out.flags.push("sigma_override".into());
    }
    for o in &report.oracles {
        out.quantities.push(Quantity {
            name: o.name.clone(),
            est: EstimateWithCI::exact(o.statistic, o.samples),
            flags: vec![
                format!("threshold={:e}", o.threshold),
                format!("samples={}", o.samples),
                (if o.pass { "pass" } else { "fail" }).into(),
            ],
        });
    }
    out.failed = report.failed();
    out.detail = json!({ "report": report });
    Ok(out)
}
