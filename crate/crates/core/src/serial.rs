//! Serial testing: posteriors after consecutive positive results and the
//! number of positive test iterations (PTI) needed to reach a target PPV.
//!
//! Repeat results are assumed conditionally independent given disease
//! status, so every positive multiplies the prior odds by `L = a / (1 - b)`.

use crate::bayes::{ppv_at_threshold, prevalence_threshold, Prevalence, TestCharacteristics};
use crate::error::{Result, ScreenError};

/// A serial PPV within this distance below the target counts as reaching it.
pub const PPV_TIE_TOLERANCE: f64 = 1e-12;

/// Largest iteration count for which a plan (and its ladder) is built.
pub const MAX_ITERATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationPlan {
    pub target_ppv: f64,
    /// Minimal number of consecutive positives, 0 when the prior already
    /// meets the target.
    pub iterations: u64,
    /// Entry `j - 1` is the PPV after `j` consecutive positives.
    pub per_step_ppv: Vec<f64>,
    pub omega: f64,
}

fn likelihood_ratio(test: &TestCharacteristics, target: f64) -> Result<f64> {
    let ratio = test
        .positive_likelihood_ratio()
        .ok_or_else(|| ScreenError::domain("likelihood ratio is undefined for specificity 1"))?;
    if ratio <= 1.0 {
        return Err(ScreenError::UnreachableTarget {
            target,
            likelihood_ratio: ratio,
        });
    }
    Ok(ratio)
}

fn open_prevalence(phi: Prevalence) -> Result<f64> {
    let p = phi.value();
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(ScreenError::OutOfRange {
            name: "prevalence",
            range: "(0, 1)",
            value: p,
        })
    }
}

/// PPV after `n` consecutive positive results: `φLⁿ / (φLⁿ + 1 - φ)`.
pub fn serial_ppv(test: &TestCharacteristics, phi: Prevalence, n: u64) -> Result<f64> {
    let p = open_prevalence(phi)?;
    if n == 0 {
        return Err(ScreenError::domain("serial PPV needs at least one test"));
    }
    let ratio = likelihood_ratio(test, f64::NAN)?;
    let gain = match i32::try_from(n) {
        Ok(n) => ratio.powi(n),
        Err(_) => ratio.powf(n as f64),
    };
    let odds = p / (1.0 - p) * gain;
    if !odds.is_finite() {
        return Ok(1.0);
    }
    Ok(odds / (1.0 + odds))
}

/// Ceiling of a real iteration count, accepting counts whose PPV lands
/// within [`PPV_TIE_TOLERANCE`] of the target. The PPV tolerance is mapped
/// into log-odds units through `dρ = ρ(1-ρ) d(log-odds)`.
fn ceil_iterations(required: f64, target: f64, ln_ratio: f64) -> Result<u64> {
    if !required.is_finite() {
        return Err(ScreenError::domain(format!(
            "iteration count is not finite ({required})"
        )));
    }
    let slack = PPV_TIE_TOLERANCE / (target * (1.0 - target) * ln_ratio);
    let n = (required - slack).ceil();
    if n <= 0.0 {
        return Ok(0);
    }
    if n > MAX_ITERATIONS as f64 {
        return Err(ScreenError::IterationLimit {
            required: n,
            limit: MAX_ITERATIONS,
        });
    }
    Ok(n as u64)
}

fn build_plan(
    test: &TestCharacteristics,
    phi: Prevalence,
    target: f64,
    iterations: u64,
    ratio: f64,
) -> Result<IterationPlan> {
    let per_step_ppv = (1..=iterations)
        .map(|n| serial_ppv(test, phi, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(IterationPlan {
        target_ppv: target,
        iterations,
        per_step_ppv,
        omega: ratio.sqrt(),
    })
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        Err(ScreenError::OutOfRange {
            name: "target PPV",
            range: "(0, 1)",
            value: target,
        })
    }
}

/// Number of consecutive positives needed to lift the PPV at prevalence
/// `phi` to `target`:
/// `⌈ ln[ρ(φ-1) / (φ(ρ-1))] / ln[a/(1-b)] ⌉`, clamped at 0.
pub fn iterations_to_target(
    test: &TestCharacteristics,
    phi: Prevalence,
    target: f64,
) -> Result<IterationPlan> {
    let p = open_prevalence(phi)?;
    check_target(target)?;
    let ratio = likelihood_ratio(test, target)?;
    let ln_ratio = ratio.ln();
    let required = (target * (p - 1.0) / (p * (target - 1.0))).ln() / ln_ratio;
    let n = ceil_iterations(required, target, ln_ratio)?;
    build_plan(test, phi, target, n, ratio)
}

/// PTI count from the threshold form
/// `⌈ ln[(ωφ_eφ_k - ωφ_e) / (ωφ_eφ_k - φ_k)] / (2 ln ω) ⌉`.
pub fn threshold_iterations_closed_form(
    test: &TestCharacteristics,
    phi_k: Prevalence,
) -> Result<u64> {
    let pk = open_prevalence(phi_k)?;
    let phi_e = prevalence_threshold(test)?;
    let omega = test
        .omega()
        .ok_or_else(|| ScreenError::domain("omega is undefined for specificity 1"))?;
    let target = omega * phi_e;
    check_target(target)?;
    let w_e = omega * phi_e;
    let ln_omega = omega.ln();
    let required = ((w_e * pk - w_e) / (w_e * pk - pk)).ln() / (2.0 * ln_omega);
    ceil_iterations(required, target, 2.0 * ln_omega)
}

/// Plan whose target is the PPV at the prevalence threshold, i.e. the
/// number of positives needed to climb back above the threshold PPV once
/// prevalence has fallen to `phi_k`.
pub fn iterations_to_threshold(
    test: &TestCharacteristics,
    phi_k: Prevalence,
) -> Result<IterationPlan> {
    let target = ppv_at_threshold(test)?;
    let plan = iterations_to_target(test, phi_k, target)?;
    debug_assert_eq!(
        Ok(plan.iterations),
        threshold_iterations_closed_form(test, phi_k),
        "odds and threshold forms of the PTI count disagree"
    );
    Ok(plan)
}
