//! Oracle-versus-closed-form sweep behind the `verify` command.

use crate::bayes::{ppv, prevalence_threshold, Prevalence, TestCharacteristics};
use crate::dynamics::{step_prevalence, ProgramConfig};
use crate::error::Result;
use crate::oracle::{chained_serial_ppv, mc_one_step_prevalence, mc_ppv, reference_configurations};
use crate::serial::{serial_ppv, threshold_iterations_closed_form, PPV_TIE_TOLERANCE};

/// Monte Carlo checks pass within this many standard errors.
pub const SIGMAS: f64 = 3.0;
pub const CHAINING_TOLERANCE: f64 = 1e-12;
pub const THRESHOLD_TOLERANCE: f64 = 1e-10;
const MAX_SEARCH: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub family: &'static str,
    pub case: String,
    pub reference: f64,
    pub observed: f64,
    /// Standard errors for sampled checks, absolute difference otherwise.
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(
        family: &'static str,
        case: String,
        reference: f64,
        observed: f64,
        deviation: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            family,
            case,
            reference,
            observed,
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }
}

pub const FAMILIES: [&str; 5] = [
    "mc_ppv",
    "chained_serial",
    "threshold_routes",
    "pti_search",
    "step_prevalence",
];

/// Runs every check. `inject_fault` corrupts the sensitivity used for the
/// closed-form PPV reference so the failure path can be exercised.
pub fn run_checks(samples: u64, seed: u64, inject_fault: bool) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let configs = reference_configurations();

    for (i, &(a, b, phi)) in configs.iter().enumerate() {
        let test = TestCharacteristics::new(a, b)?;
        let prevalence = Prevalence::new(phi)?;
        let case = format!("a={a} b={b} phi={phi}");

        let reference_test = if inject_fault {
            TestCharacteristics::new(a * 0.9, b)?
        } else {
            test
        };
        let exact = ppv(&reference_test, prevalence)?;
        let sample_seed = seed.wrapping_add(i as u64);
        out.push(match mc_ppv(&test, prevalence, samples, sample_seed) {
            Ok(est) => CheckOutcome::new(
                "mc_ppv",
                format!("{case} seed={sample_seed}"),
                exact,
                est.estimate,
                est.deviation_in_se(exact),
                SIGMAS,
            ),
            Err(_) => CheckOutcome::new(
                "mc_ppv",
                case.clone(),
                exact,
                f64::NAN,
                f64::INFINITY,
                SIGMAS,
            ),
        });

        for n in 1..=8 {
            let closed = serial_ppv(&test, prevalence, n)?;
            let chained = chained_serial_ppv(&test, prevalence, n)?;
            out.push(CheckOutcome::new(
                "chained_serial",
                format!("{case} n={n}"),
                closed,
                chained,
                (closed - chained).abs(),
                CHAINING_TOLERANCE,
            ));
        }

        let phi_e = prevalence_threshold(&test)?;
        let omega = test.omega().expect("reference tests have specificity < 1");
        let via_bayes = ppv(&test, Prevalence::new(phi_e)?)?;
        out.push(CheckOutcome::new(
            "threshold_routes",
            case.clone(),
            phi_e * omega,
            via_bayes,
            (phi_e * omega - via_bayes).abs(),
            THRESHOLD_TOLERANCE,
        ));

        let closed_n = threshold_iterations_closed_form(&test, prevalence)?;
        let searched = minimal_iterations(&test, prevalence, phi_e * omega)?;
        out.push(CheckOutcome::new(
            "pti_search",
            case,
            searched as f64,
            closed_n as f64,
            (closed_n as f64 - searched as f64).abs(),
            0.0,
        ));
    }

    let individuals = samples.max(crate::oracle::MIN_INDIVIDUALS);
    for (i, config) in dynamics_cases()?.iter().enumerate() {
        let phi = config.initial_prevalence;
        let expected = step_prevalence(config, phi).value();
        let case_seed = seed.wrapping_add(1_000 + i as u64);
        let est = mc_one_step_prevalence(config, phi, individuals, case_seed)?;
        out.push(CheckOutcome::new(
            "step_prevalence",
            format!(
                "coverage={} efficacy={} incidence={} seed={case_seed}",
                config.coverage, config.treatment_efficacy, config.incidence
            ),
            expected,
            est.estimate,
            est.deviation_in_se(expected),
            SIGMAS,
        ));
    }
    Ok(out)
}

/// Smallest `n` whose serial PPV reaches `target` (within the tie
/// tolerance), found by walking `n = 0, 1, 2, …`.
fn minimal_iterations(test: &TestCharacteristics, phi: Prevalence, target: f64) -> Result<u64> {
    if phi.value() >= target - PPV_TIE_TOLERANCE {
        return Ok(0);
    }
    for n in 1..=MAX_SEARCH {
        if serial_ppv(test, phi, n)? >= target - PPV_TIE_TOLERANCE {
            return Ok(n);
        }
    }
    Ok(u64::MAX)
}

fn dynamics_cases() -> Result<Vec<ProgramConfig>> {
    let base = ProgramConfig {
        test: TestCharacteristics::new(0.85, 0.90)?,
        initial_prevalence: Prevalence::new(0.38)?,
        coverage: 0.5,
        treatment_efficacy: 0.8,
        incidence: 0.0,
        steps: 1,
        stop_at_threshold: false,
    };
    Ok(vec![
        base,
        ProgramConfig {
            coverage: 0.0,
            ..base
        },
        ProgramConfig {
            treatment_efficacy: 0.0,
            ..base
        },
        ProgramConfig {
            incidence: 0.02,
            ..base
        },
    ])
}
