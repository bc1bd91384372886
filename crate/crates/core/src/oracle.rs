//! Independent checks for the closed forms: Monte Carlo confusion-matrix
//! sampling and exact Bayes chaining.
//!
//! Every sampling call owns a single ChaCha8 stream seeded from the caller's
//! `u64`, so identical inputs give bit-identical estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bayes::{ppv, Prevalence, TestCharacteristics};
use crate::dynamics::ProgramConfig;
use crate::error::{Result, ScreenError};

/// Identifier of the generator behind every estimate.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.9/seed_from_u64";

pub const MIN_PPV_SAMPLES: u64 = 10_000;
pub const MIN_POSITIVES: u64 = 100;
pub const MIN_INDIVIDUALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// Normal-approximation standard error `√(p̂(1-p̂)/n)` over `denominator`.
    pub standard_error: f64,
    pub samples: u64,
    /// Number of draws the proportion is taken over (positives for PPV).
    pub denominator: u64,
    pub seed: u64,
    pub algorithm: &'static str,
}

impl McEstimate {
    fn from_counts(hits: u64, denominator: u64, samples: u64, seed: u64) -> Self {
        let estimate = hits as f64 / denominator as f64;
        Self {
            estimate,
            standard_error: (estimate * (1.0 - estimate) / denominator as f64).sqrt(),
            samples,
            denominator,
            seed,
            algorithm: RNG_ALGORITHM,
        }
    }

    /// `|estimate - reference|` in units of the standard error. A zero
    /// standard error gives 0 on exact agreement and infinity otherwise.
    pub fn deviation_in_se(&self, reference: f64) -> f64 {
        let diff = (self.estimate - reference).abs();
        if diff == 0.0 {
            0.0
        } else if self.standard_error == 0.0 {
            f64::INFINITY
        } else {
            diff / self.standard_error
        }
    }

    pub fn covers(&self, reference: f64, sigmas: f64) -> bool {
        self.deviation_in_se(reference) <= sigmas
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// PPV estimated from a simulated confusion matrix: disease status is drawn
/// with probability φ, then a positive result with probability `a` for cases
/// and `1 - b` for non-cases.
pub fn mc_ppv(
    test: &TestCharacteristics,
    phi: Prevalence,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if samples < MIN_PPV_SAMPLES {
        return Err(ScreenError::TooFewSamples {
            observed: samples,
            required: MIN_PPV_SAMPLES,
        });
    }
    let p = phi.value();
    let sens = test.sensitivity();
    let fpr = test.false_positive_rate();
    let mut rng = rng(seed);
    let (mut true_pos, mut positives) = (0u64, 0u64);
    for _ in 0..samples {
        let diseased = rng.random_bool(p);
        let positive = rng.random_bool(if diseased { sens } else { fpr });
        if positive {
            positives += 1;
            true_pos += u64::from(diseased);
        }
    }
    if positives < MIN_POSITIVES {
        return Err(ScreenError::InsufficientPositives {
            observed: positives,
            required: MIN_POSITIVES,
        });
    }
    Ok(McEstimate::from_counts(true_pos, positives, samples, seed))
}

/// Serial PPV by applying Bayes' rule `n` times, each posterior serving as
/// the next prior.
pub fn chained_serial_ppv(test: &TestCharacteristics, phi: Prevalence, n: u64) -> Result<f64> {
    let p = phi.value();
    if !(p > 0.0 && p < 1.0) {
        return Err(ScreenError::OutOfRange {
            name: "prevalence",
            range: "(0, 1)",
            value: p,
        });
    }
    if n == 0 {
        return Err(ScreenError::domain("serial PPV needs at least one test"));
    }
    if test.positive_likelihood_ratio().is_none() {
        return Err(ScreenError::domain(
            "likelihood ratio is undefined for specificity 1",
        ));
    }
    (0..n).try_fold(p, |prior, _| ppv(test, Prevalence::new(prior)?))
}

/// Post-step prevalence from an agent-level simulation of one
/// screen-and-treat step.
pub fn mc_one_step_prevalence(
    config: &ProgramConfig,
    phi_t: Prevalence,
    individuals: u64,
    seed: u64,
) -> Result<McEstimate> {
    if individuals < MIN_INDIVIDUALS {
        return Err(ScreenError::TooFewSamples {
            observed: individuals,
            required: MIN_INDIVIDUALS,
        });
    }
    config.validate()?;
    let p = phi_t.value();
    let sens = config.test.sensitivity();
    let mut rng = rng(seed);
    let mut diseased_after = 0u64;
    for _ in 0..individuals {
        let diseased = if rng.random_bool(p) {
            let screened = rng.random_bool(config.coverage);
            let detected = screened && rng.random_bool(sens);
            let cured = detected && rng.random_bool(config.treatment_efficacy);
            !cured
        } else {
            rng.random_bool(config.incidence)
        };
        diseased_after += u64::from(diseased);
    }
    Ok(McEstimate::from_counts(
        diseased_after,
        individuals,
        individuals,
        seed,
    ))
}

/// Twenty (sensitivity, specificity, prevalence) triples spanning weak to
/// near-perfect tests at low to high prevalence.
pub fn reference_configurations() -> Vec<(f64, f64, f64)> {
    vec![
        (0.85, 0.90, 0.38),
        (0.85, 0.90, 0.18),
        (0.85, 0.90, 0.2554),
        (0.85, 0.90, 0.60),
        (0.60, 0.60, 0.50),
        (0.70, 0.80, 0.10),
        (0.95, 0.95, 0.01),
        (0.95, 0.95, 0.05),
        (0.99, 0.99, 0.01),
        (0.99, 0.90, 0.30),
        (0.50, 0.95, 0.20),
        (0.90, 0.70, 0.40),
        (0.75, 0.99, 0.02),
        (0.80, 0.85, 0.75),
        (0.65, 0.92, 0.12),
        (0.97, 0.80, 0.90),
        (0.55, 0.55, 0.05),
        (0.88, 0.96, 0.07),
        (0.92, 0.98, 0.50),
        (1.00, 0.90, 0.25),
    ]
}
