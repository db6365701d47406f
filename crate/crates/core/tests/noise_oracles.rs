use std::f64::consts::PI;

use peano_core::noise::*;
use peano_core::rng::{map_paths, StreamFactory};
use peano_core::stats::ks_one_sample;
use proptest::prelude::*;

const N: usize = 100_000;

fn draws(n: usize, seed: u64, f: impl Fn(&mut peano_core::rng::PathRng) -> f64 + Sync + Send) -> Vec<f64> {
    let s = StreamFactory::new(seed);
    map_paths(n, |i| f(&mut s.stream(i)))
}

#[test]
fn cauchy_cdf_matches_closed_form() {
    // Scale π: F(x) = ½ + atan(x/π)/π.
    let law = StableLaw::new(1.0, 1.0).unwrap();
    let xs = draws(N, 1, |r| sample_stable_increment(&law, 1.0, r));
    let d = ks_one_sample(&xs, |x| 0.5 + (x / PI).atan() / PI);
    assert!(d < 0.01, "KS {d}");
}

#[test]
fn characteristic_function_by_quadrature() {
    for alpha in [0.7, 1.2, 1.8] {
        let law = StableLaw::new(alpha, 1.0).unwrap();
        let xs = draws(N, 2, |r| sample_stable_increment(&law, 1.0, r));
        for z in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let emp = xs.iter().map(|x| (z * x).cos()).sum::<f64>() / N as f64;
            let err = (emp - law.char_function(z, 1.0)).abs();
            assert!(err <= 4.0 / (N as f64).sqrt(), "alpha {alpha} z {z}: {err}");
        }
    }
}

#[test]
fn increments_are_symmetric() {
    let law = StableLaw::new(1.5, 1.0).unwrap();
    let xs = draws(N, 3, |r| sample_stable_increment(&law, 1.0, r));
    let mean_sign = xs.iter().map(|x| x.signum()).sum::<f64>() / N as f64;
    assert!(mean_sign.abs() <= 3.0 / (N as f64).sqrt());
}

#[test]
fn event_counts_and_first_arrival() {
    let law = StableLaw::new(1.5, 1.0).unwrap();
    let d = NoiseDecomposition::new(&law, 1e-2, 0.3).unwrap();
    let horizon = 10.0;
    let counts = draws(20_000, 4, |r| sample_event_stream(&d, &law, horizon, r).len() as f64);
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let expect = d.lambda_eps * horizon;
    assert!((mean - expect).abs() < 4.0 * (expect / 20_000.0).sqrt(), "{mean} vs {expect}");

    // P(T₁ > r) = exp(−λ r).
    let r = 1.0 / d.lambda_eps;
    let late = draws(20_000, 5, |g| {
        sample_event_stream(&d, &law, r, g).is_empty() as u8 as f64
    });
    let p = late.iter().sum::<f64>() / late.len() as f64;
    assert!((p - (-1f64).exp()).abs() < 0.015, "{p}");
}

#[test]
fn small_jump_paths_never_exceed_threshold() {
    let law = StableLaw::new(1.2, 1.0).unwrap();
    let d = NoiseDecomposition::with_threshold(&law, 0.5).unwrap();
    let s = StreamFactory::new(6);
    for i in 0..200 {
        let mut rng = s.stream(i);
        let mut sampler = d.small_jump_sampler(&mut rng);
        for _ in 0..100 {
            assert!(sampler.advance(0.1, &mut rng).max_jump <= d.threshold);
        }
    }
}

#[test]
fn lambda_matches_power_of_epsilon() {
    let law = StableLaw::new(1.5, 1.0).unwrap();
    for (eps, rho) in [(1e-2, 0.3), (1e-6, 0.27), (1e-12, 0.4)] {
        let d = NoiseDecomposition::new(&law, eps, rho).unwrap();
        let direct = (2.0 / 1.5) * f64::powf(eps, 1.5 * rho);
        assert!((d.lambda_eps / direct - 1.0).abs() < 1e-12);
    }
}

#[test]
fn decomposition_rejects_bad_inputs() {
    let law = StableLaw::new(1.5, 1.0).unwrap();
    assert!(NoiseDecomposition::new(&law, 1e-2, 1.0).is_err());
    assert!(NoiseDecomposition::new(&law, 0.0, 0.3).is_err());
    assert!(NoiseDecomposition::with_threshold(&law, f64::INFINITY).is_err());
    let mut rng = StreamFactory::new(0).stream(0);
    assert!(sample_small_jump_path(&NoiseDecomposition::with_threshold(&law, 1.0).unwrap(), &law, &[0.0, 1.0, 0.5], &mut rng).is_err());
}

proptest! {
    #[test]
    fn tail_mass_ratio_is_a_power(alpha in 0.1f64..1.99, u1 in 1e-3f64..1e3, k in 1.0001f64..100.0) {
        let law = StableLaw::new(alpha, 1.0).unwrap();
        let u2 = u1 * k;
        let ratio = levy_tail_mass(&law, u2).unwrap() / levy_tail_mass(&law, u1).unwrap();
        let expect = (u1 / u2).powf(alpha);
        prop_assert!((ratio / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_jumps_clear_the_threshold(alpha in 0.1f64..1.99, u in 1e-3f64..1e3, seed in any::<u64>()) {
        let law = StableLaw::new(alpha, 1.0).unwrap();
        let mut rng = StreamFactory::new(seed).stream(0);
        for _ in 0..50 {
            let w = sample_large_jump(&law, u, &mut rng).unwrap();
            prop_assert!(w.abs() >= u);
        }
    }
}
