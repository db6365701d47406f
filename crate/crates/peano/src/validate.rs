//! Noise oracle suite: sampled laws against closed forms and quadrature.

use std::f64::consts::PI;

use peano_core::error::Result;
use peano_core::noise::{
    levy_tail_mass, sample_event_stream, sample_large_jump, sample_stable_increment,
    NoiseDecomposition, StableLaw,
};
use peano_core::rng::{map_paths, StreamFactory};
use peano_core::stats::ks_two_sample;
use serde::{Deserialize, Serialize};

pub const CAUCHY_TOL: f64 = 0.005;
pub const TAIL_RATIO_TOL: f64 = 0.01;
pub const KS_TOL: f64 = 0.01;
/// Characteristic-function tolerance is `CF_SIGMAS / √N`.
pub const CF_SIGMAS: f64 = 4.0;
pub const CF_POINTS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
/// Time ratio of the self-similarity check.
pub const SELF_SIMILAR_SCALE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub samples: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub alpha: f64,
    pub c: f64,
    pub sigma: f64,
    pub sigma_overridden: bool,
    pub threshold: f64,
    pub inner_cutoff: f64,
    pub oracles: Vec<OracleOutcome>,
}

impl NoiseReport {
    pub fn failed(&self) -> Vec<String> {
        self.oracles.iter().filter(|o| !o.pass).map(|o| o.name.clone()).collect()
    }
}

/// Settings of one run of the suite.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSuite {
    pub alpha: f64,
    pub c: f64,
    /// Applied to the configured law only; the Cauchy check keeps its own.
    pub sigma_override: Option<f64>,
    /// Large-jump threshold of the Lévy–Itô split and the tail-ratio check.
    pub threshold: f64,
    pub n: u64,
    pub n_cauchy: u64,
}

fn outcome(name: &str, statistic: f64, threshold: f64, samples: u64) -> OracleOutcome {
    OracleOutcome {
        name: name.into(),
        statistic,
        threshold,
        samples,
        pass: statistic <= threshold,
    }
}

fn draws<F>(n: u64, streams: &StreamFactory, f: F) -> Vec<f64>
where
    F: Fn(&mut peano_core::rng::PathRng) -> f64 + Sync + Send,
{
    map_paths(n as usize, |i| f(&mut streams.stream(i)))
}

impl NoiseSuite {
    pub fn run(&self, streams: &StreamFactory) -> Result<NoiseReport> {
        let law = match self.sigma_override {
            Some(s) => StableLaw::with_sigma_unchecked(self.alpha, self.c, s),
            None => StableLaw::new(self.alpha, self.c)?,
        };
        let n = self.n;
        let mut oracles = Vec::new();

        // α = 1, c = 1 is the Cauchy law with scale π: P(L₁ ≤ π) = 3/4.
        let cauchy = StableLaw::new(1.0, 1.0)?;
        let s = streams.derive(0);
        let below = draws(self.n_cauchy, &s, |r| sample_stable_increment(&cauchy, 1.0, r))
            .into_iter()
            .filter(|&x| x <= PI)
            .count();
        let p = below as f64 / self.n_cauchy as f64;
        oracles.push(outcome("cauchy_point", (p - 0.75).abs(), CAUCHY_TOL, self.n_cauchy));

        let u = self.threshold;
        let target = levy_tail_mass(&law, 2.0 * u)? / levy_tail_mass(&law, u)?;
        let s = streams.derive(1);
        let jumps = draws(n, &s, |r| sample_large_jump(&law, u, r).expect("positive threshold"));
        let above = jumps.iter().filter(|w| w.abs() > 2.0 * u).count();
        let ratio = above as f64 / n as f64;
        oracles.push(outcome("tail_ratio", (ratio - target).abs(), TAIL_RATIO_TOL, n));

        let a = SELF_SIMILAR_SCALE;
        let s = streams.derive(2);
        let long = draws(n, &s, |r| sample_stable_increment(&law, a, r));
        let s = streams.derive(3);
        let scaled = draws(n, &s, |r| a.powf(1.0 / law.alpha()) * sample_stable_increment(&law, 1.0, r));
        oracles.push(outcome("self_similarity", ks_two_sample(&long, &scaled), KS_TOL, n));

        let decomp = NoiseDecomposition::with_threshold(&law, u)?;
        let s = streams.derive(4);
        let assembled = draws(n, &s, |r| {
            let small = decomp.small_jump_sampler(r).advance(1.0, r).value;
            let large: f64 = sample_event_stream(&decomp, &law, 1.0, r).iter().map(|e| e.size).sum();
            small + large
        });
        let s = streams.derive(5);
        let direct = draws(n, &s, |r| sample_stable_increment(&law, 1.0, r));
        oracles.push(outcome("levy_ito_reassembly", ks_two_sample(&assembled, &direct), KS_TOL, n));

        // Fresh draws so the CF check does not reuse the KS reference sample.
        let s = streams.derive(6);
        let l1 = draws(n, &s, |r| sample_stable_increment(&law, 1.0, r));
        let worst = CF_POINTS
            .iter()
            .map(|&z| {
                let emp = l1.iter().map(|x| (z * x).cos()).sum::<f64>() / n as f64;
                (emp - law.char_function(z, 1.0)).abs()
            })
            .fold(0.0, f64::max);
        oracles.push(outcome("char_function", worst, CF_SIGMAS / (n as f64).sqrt(), n));

        Ok(NoiseReport {
            alpha: self.alpha,
            c: self.c,
            sigma: law.sigma(),
            sigma_overridden: self.sigma_override.is_some(),
            threshold: u,
            inner_cutoff: decomp.inner_cutoff,
            oracles,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite(sigma_override: Option<f64>) -> NoiseSuite {
        NoiseSuite {
            alpha: 1.5,
            c: 1.0,
            sigma_override,
            threshold: 5.0,
            n: 20_000,
            n_cauchy: 20_000,
        }
    }

    #[test]
    fn characteristic_function_catches_wrong_scale() {
        let law = StableLaw::new(1.5, 1.0).unwrap();
        let r = suite(Some(1.5 * law.sigma())).run(&StreamFactory::new(3)).unwrap();
        assert!(r.failed().contains(&"char_function".to_string()));
        assert!(r.sigma_overridden);
    }

    #[test]
    fn suite_is_reproducible() {
        let f = StreamFactory::new(11);
        assert_eq!(suite(None).run(&f).unwrap(), suite(None).run(&f).unwrap());
    }
}
