//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines are always shown. The process fails
//! when the set of failing criteria differs from `KNOWN_FAILURES`, in either
//! direction.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use peano::config::{CliOverrides, ExperimentConfig};
use peano::output::{write_csv, ResultRow};
use peano_core::dynamics::{flow, ModelParams};
use peano_core::exitlab::{estimate_martingale_exit, weibull_tail};
use peano_core::noise::StableLaw;
use peano_core::rng::{map_paths, StreamFactory};
use peano_core::scaling::{
    bound_terms, exponent_audit, polylog, scaling_bundle, FlagStatus, Overrides,
};
use peano_core::stats::ks_one_sample;
use rand::Rng;
use rand_distr::Exp1;

const SEED: u64 = 20_240_601;

/// Criteria that fail as stated; see README.
const KNOWN_FAILURES: [&str; 2] = ["8", "9b"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn run_config(json: &str) -> (Vec<ResultRow>, Duration) {
    let cfg = ExperimentConfig::from_json(json)
        .and_then(|c| c.resolve(&CliOverrides::default(), None))
        .expect("valid config");
    let start = Instant::now();
    let out = peano::run(&cfg).expect("run succeeds");
    (out.rows, start.elapsed())
}

fn row<'a>(rows: &'a [ResultRow], eps: f64, quantity: &str) -> &'a ResultRow {
    rows.iter()
        .find(|r| r.epsilon == eps && r.quantity == quantity)
        .unwrap_or_else(|| panic!("no row {quantity} at {eps}"))
}

fn selection(b_minus: f64, beta_plus: f64, beta_minus: f64, grid: &[f64], n: u64) -> (Vec<ResultRow>, Duration) {
    run_config(&format!(
        r#"{{"experiment": "select-prob",
            "params": {{"alpha": 1.5, "beta_plus": {beta_plus}, "beta_minus": {beta_minus},
                        "B_plus": 1.0, "B_minus": {b_minus}}},
            "eps_grid": {grid:?}, "n_paths": {n}, "horizon": 1.0,
            "master_seed": {SEED}, "workers": 1}}"#
    ))
}

fn c1() -> Outcome {
    let (rows, elapsed) = selection(1.0, 0.5, 0.5, &[1e-3], 4000);
    let p = row(&rows, 1e-3, "p_plus");
    let u = row(&rows, 1e-3, "p_unclassified").point;
    let gap = (p.point - 0.5).abs();
    let tol = 3.0 * p.stderr + 0.02;
    outcome(
        "1",
        gap <= tol && u <= 0.05 && elapsed.as_secs_f64() <= 60.0,
        format!(
            "symmetric selection: p_plus {:.4} (|gap| {gap:.4} <= {tol:.4}), unclassified {u:.4} <= 0.05, {:.1} s <= 60 s",
            p.point,
            elapsed.as_secs_f64()
        ),
    )
}

fn c2() -> Outcome {
    let (rows, _) = selection(2.0, 0.5, 0.5, &[1e-3], 4000);
    // Equal exponents β: p⁺ = (B⁻)^{−1/(1+β)} / ((B⁺)^{−1/(1+β)} + (B⁻)^{−1/(1+β)}).
    let w = |b: f64| b.powf(-1.0 / 1.5);
    let target = w(2.0) / (w(1.0) + w(2.0));
    let p = row(&rows, 1e-3, "p_plus").point;
    outcome(
        "2",
        (p - target).abs() <= 0.05 && (target - 0.3865).abs() < 5e-5,
        format!("weighted selection: p_plus {p:.4}, target {target:.4}, |gap| {:.4} <= 0.05", (p - target).abs()),
    )
}

fn c3() -> Outcome {
    let grid = [1e-1, 1e-2, 1e-3, 1e-4];
    let (rows, _) = selection(1.0, 0.3, 0.7, &grid, 2000);
    let p: Vec<f64> = grid.iter().map(|&e| row(&rows, e, "p_plus").point).collect();
    let increasing = p.windows(2).all(|w| w[1] > w[0]);
    outcome(
        "3",
        increasing && p[3] >= 0.9,
        format!("dominant branch: p_plus {p:.4?} strictly increasing, last >= 0.9"),
    )
}

fn c4() -> Outcome {
    let (rows, _) = run_config(&format!(
        r#"{{"experiment": "exit-time",
            "params": {{"alpha": 1.5, "beta_plus": 0.5, "beta_minus": 0.5, "B_plus": 1.0, "B_minus": 1.0}},
            "eps_grid": [0.1, 0.01, 0.001], "n_paths": 2000, "horizon": 1.0,
            "master_seed": {SEED}, "extras": {{"barrier": 0.05, "x0": 0.15}}}}"#
    ));
    let p: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&e| row(&rows, e, "p_exit").point).collect();
    let decreasing = p.windows(2).all(|w| w[1] < w[0]);
    outcome(
        "4",
        decreasing && p[2] <= 0.1,
        format!("half-line persistence: P(tau <= m) {p:.4?} strictly decreasing, last <= 0.1"),
    )
}

fn c5() -> Outcome {
    let start = Instant::now();
    let (x, b) = (0.1, 1.0);
    let mut worst = 0.0f64;
    for beta in [0.2, 0.5, 0.8] {
        for lambda in [0.5, 1.0, 4.0] {
            let p = ModelParams::unchecked(1.5, beta, beta, b, b, 0.0);
            let s = StreamFactory::new(SEED);
            let z = map_paths(100_000, |i| {
                let t: f64 = s.stream(i).sample::<f64, _>(Exp1) / lambda;
                flow(t, x, &p)
            });
            let d = ks_one_sample(&z, |z| {
                if z < x {
                    0.0
                } else {
                    1.0 - weibull_tail(z, x, beta, b, lambda).unwrap()
                }
            });
            worst = worst.max(d);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "5",
        worst <= 0.01 && secs <= 10.0,
        format!("Weibull oracle: worst KS {worst:.4} <= 0.01 over 3x3 (beta, lambda), {secs:.2} s <= 10 s"),
    )
}

fn c6() -> Outcome {
    let (rows, _) = run_config(&format!(
        r#"{{"experiment": "validate-noise",
            "params": {{"alpha": 1.5, "beta_plus": 0.5, "beta_minus": 0.5, "B_plus": 1.0, "B_minus": 1.0}},
            "eps_grid": [0.001], "n_paths": 100000, "master_seed": {SEED},
            "extras": {{"cauchy_paths": 1000000}}}}"#
    ));
    let checks = [
        ("cauchy_point", 0.005),
        ("tail_ratio", 0.01),
        ("self_similarity", 0.01),
        ("levy_ito_reassembly", 0.01),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, tol) in checks {
        let s = row(&rows, 1e-3, name).point;
        pass &= s <= tol;
        parts.push(format!("{name} {s:.5} <= {tol}"));
    }
    outcome("6", pass, format!("noise suite: {}", parts.join(", ")))
}

fn c7() -> Outcome {
    let mut worst_identity = 0.0f64;
    let mut worst_residual = 0.0f64;
    for k in 2..=12 {
        let eps = 10f64.powi(-k);
        let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, eps).unwrap();
        let b = scaling_bundle(&p, &Overrides::default()).unwrap();
        let s = &b.plus;
        let target = eps.ln().powi(2);
        let r = s.r_eps.value();
        let first = eps.powf(p.alpha * s.rho) * r;
        let second = s.delta_eps.value() / (eps.powf(1.0 - s.rho) * r);
        worst_identity = worst_identity
            .max((first / target - 1.0).abs())
            .max((second / target - 1.0).abs());
        for (bp, bm) in [(0.5, 0.5), (0.3, 0.7), (0.8, 0.2)] {
            let q = ModelParams::new(1.5, bp, bm, 1.0, 1.0, eps).unwrap();
            let t = scaling_bundle(&q, &Overrides::default()).unwrap().transition;
            worst_residual = worst_residual.max(t.residual);
        }
    }
    let mut failed = Vec::new();
    let betas: [f64; 3] = [0.2, 0.5, 0.8];
    for alpha in [1.1, 1.5, 1.9] {
        for &bp in &betas {
            for &bm in &betas {
                if alpha <= 1.0 - bp.min(bm) {
                    continue;
                }
                let p = ModelParams::new(alpha, bp, bm, 1.0, 1.0, 1e-3).unwrap();
                let b = scaling_bundle(&p, &Overrides::default()).unwrap();
                let a = exponent_audit(&p, b.vartheta);
                for f in a.flags.iter().filter(|f| f.status == FlagStatus::Fail) {
                    failed.push(format!("{}@({alpha},{bp},{bm})", f.name));
                }
            }
        }
    }
    outcome(
        "7",
        worst_identity <= 1e-12 && worst_residual <= 1e-9 && failed.is_empty(),
        format!(
            "scaling identities: rel err {worst_identity:.2e} <= 1e-12, box residual {worst_residual:.2e} <= 1e-9, audit failures {failed:?}"
        ),
    )
}

fn c8() -> Outcome {
    let grid: Vec<f64> = (2..=12).map(|k| 10f64.powi(-k)).collect();
    let p = ModelParams::new(1.5, 0.5, 0.5, 1.0, 1.0, 1e-2).unwrap();
    let b = scaling_bundle(&p, &Overrides::default()).unwrap();
    let rows = bound_terms(&p, &b, &grid).unwrap();
    let mut bad = Vec::new();
    for i in 0..5 {
        let lns: Vec<f64> = rows.iter().map(|r| r.terms()[i].ln).collect();
        if !lns.windows(2).all(|w| w[1] < w[0]) {
            bad.push(format!("S{} ln {:.2} -> {:.2}", i + 1, lns[0], lns[lns.len() - 1]));
        }
    }
    outcome(
        "8",
        bad.is_empty(),
        format!("bound terms strictly decreasing on 1e-2..1e-12; not decreasing: {bad:?}"),
    )
}

fn c9() -> [Outcome; 2] {
    let a = (polylog(1.0, 0.5).unwrap() - 2f64.ln()).abs();
    let v = polylog(0.5, 1.0 - 1e-6).unwrap() * 1e-3;
    let b = (v - std::f64::consts::PI.sqrt()).abs();
    [
        outcome("9a", a <= 1e-8, format!("|Li_1(0.5) - ln 2| = {a:.2e} <= 1e-8")),
        outcome(
            "9b",
            b <= 1e-3,
            format!("|Li_0.5(1-1e-6) * 1e-3 - sqrt(pi)| = {b:.3e} <= 1e-3 (value {v:.6})"),
        ),
    ]
}

fn c10() -> Outcome {
    let law = StableLaw::new(1.5, 1.0).unwrap();
    let eps = 1e-3f64;
    let p = ModelParams::new(1.5, 0.3, 0.7, 1.0, 1.0, eps).unwrap();
    let kappa = scaling_bundle(&p, &Overrides::default()).unwrap().kappa;
    // Scaled units: multiples of the largest jump ε^{1−κ}.
    let unit = eps.powf(1.0 - kappa);
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (a, b)) in [(1.0, 1.0), (3.0, 1.0), (1.0, 3.0)].into_iter().enumerate() {
        let r = estimate_martingale_exit(
            &law,
            eps,
            kappa,
            a * unit,
            b * unit,
            10_000,
            &StreamFactory::new(SEED).derive(k as u64),
        )
        .unwrap();
        let est = &r.p_plus_first;
        let ok = est.point <= r.bound + 3.0 * est.stderr;
        pass &= ok;
        parts.push(format!("({a},{b}): {:.4} <= {:.4} + 3*{:.4}", est.point, r.bound, est.stderr));
    }
    outcome("10", pass, format!("optional stopping: {}", parts.join(", ")))
}

fn c11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("select.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"experiment": "select-prob",
                "params": {{"alpha": 1.5, "beta_plus": 0.5, "beta_minus": 0.5, "B_plus": 1.0, "B_minus": 1.0}},
                "eps_grid": [0.1, 0.01], "n_paths": 500, "master_seed": {SEED}}}"#
        ),
    )
    .unwrap();
    let outputs: Vec<Vec<u8>> = ["1", "2", "5"]
        .iter()
        .map(|w| {
            let out = dir.path().join(format!("w{w}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_peano"))
                .arg("select-prob")
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .env("PEANO_WORKERS", w)
                .output()
                .unwrap()
                .status;
            assert!(status.success());
            std::fs::read(out).unwrap()
        })
        .collect();
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    // The in-process writer must agree with the binary.
    let (rows, _) = run_config(&std::fs::read_to_string(&cfg).unwrap());
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    outcome(
        "11",
        same && buf == outputs[0],
        format!("determinism: CSV byte-identical across PEANO_WORKERS 1, 2, 5 ({} bytes)", outputs[0].len()),
    )
}

fn main() -> ExitCode {
    let only: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: Vec<(&str, fn() -> Vec<Outcome>)> = vec![
        ("1", || vec![c1()]),
        ("2", || vec![c2()]),
        ("3", || vec![c3()]),
        ("4", || vec![c4()]),
        ("5", || vec![c5()]),
        ("6", || vec![c6()]),
        ("7", || vec![c7()]),
        ("8", || vec![c8()]),
        ("9", || c9().into()),
        ("10", || vec![c10()]),
        ("11", || vec![c11()]),
    ];
    let mut unexpected = Vec::new();
    for (id, f) in criteria {
        if only.as_deref().is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        for o in f() {
            let verdict = if o.pass { "PASS" } else { "FAIL" };
            println!("{verdict} criterion {:<3} {} [{:.1} s]", o.id, o.detail, start.elapsed().as_secs_f64());
            if o.pass == KNOWN_FAILURES.contains(&o.id) {
                unexpected.push(o.id);
            }
        }
    }
    println!("known failures: {KNOWN_FAILURES:?}");
    if unexpected.is_empty() {
        println!("acceptance: every criterion matched its recorded outcome");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
