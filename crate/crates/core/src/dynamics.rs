//! Deterministic screen-and-treat simulator.
//!
//! Each step, a `coverage` fraction of the population is screened, detected
//! true positives are cured with probability `treatment_efficacy`, and a
//! constant `incidence` fraction of the healthy population falls ill:
//!
//! ```text
//! φ' = clamp(φ - coverage·a·φ·efficacy + incidence·(1 - φ), 0, 1)
//! ```
//!
//! Falling prevalence drags the test's PPV down with it, which is the loop
//! the trajectory records make visible.

use crate::bayes::{
    fdr, ppv, prevalence_threshold, Prevalence, PrevalenceScenario, TestCharacteristics,
};
use crate::error::{Result, ScreenError};
use crate::serial::iterations_to_threshold;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgramConfig {
    pub test: TestCharacteristics,
    pub initial_prevalence: Prevalence,
    /// Fraction of the population screened per step.
    pub coverage: f64,
    /// Fraction of detected true positives cured per step.
    pub treatment_efficacy: f64,
    /// Per-step probability that a healthy individual becomes a case.
    pub incidence: f64,
    pub steps: u32,
    pub stop_at_threshold: bool,
}

impl ProgramConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(ScreenError::OutOfRange {
                    name,
                    range: "[0, 1]",
                    value,
                })
            }
        };
        unit("coverage", self.coverage)?;
        unit("treatment efficacy", self.treatment_efficacy)?;
        unit("incidence", self.incidence)?;
        let phi0 = self.initial_prevalence.value();
        if !(phi0 > 0.0 && phi0 < 1.0) {
            return Err(ScreenError::OutOfRange {
                name: "initial prevalence",
                range: "(0, 1)",
                value: phi0,
            });
        }
        Ok(())
    }

    /// Per-step removal rate `coverage · a · efficacy`.
    pub fn removal_rate(&self) -> f64 {
        self.coverage * self.test.sensitivity() * self.treatment_efficacy
    }

    /// Prevalence at which removal balances incidence,
    /// `i / (coverage·a·efficacy + i)`. `None` when nothing moves.
    pub fn equilibrium_prevalence(&self) -> Option<f64> {
        let total = self.removal_rate() + self.incidence;
        (total > 0.0).then(|| self.incidence / total)
    }
}

/// Advances prevalence by one screen-and-treat step.
pub fn step_prevalence(config: &ProgramConfig, phi_t: Prevalence) -> Prevalence {
    let p = phi_t.value();
    let next = p - config.removal_rate() * p + config.incidence * (1.0 - p);
    Prevalence::new(next.clamp(0.0, 1.0)).expect("clamped into [0, 1]")
}

/// One simulator step. Analytic fields are `None` where they are undefined at
/// the step's prevalence (e.g. PPV at zero prevalence with a perfectly
/// specific test, or PTI once the disease is eliminated).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub step: u32,
    pub prevalence: f64,
    pub ppv: Option<f64>,
    pub fdr: Option<f64>,
    /// PPV at this step over PPV at step 0.
    pub zeta_vs_baseline: Option<f64>,
    /// `None` when incidence has pushed prevalence above the baseline.
    pub scenario: Option<PrevalenceScenario>,
    pub pti_required: Option<u64>,
    pub below_threshold: bool,
}

/// Runs the program for `steps` steps, returning records for steps
/// `0..=steps`. With `stop_at_threshold` the run ends at the first record
/// whose prevalence is below the prevalence threshold.
pub fn run_trajectory(config: &ProgramConfig) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    let test = &config.test;
    let baseline = config.initial_prevalence;
    let threshold = prevalence_threshold(test)?;
    let baseline_ppv = ppv(test, baseline)?;

    let mut records = Vec::with_capacity(config.steps as usize + 1);
    let mut phi = baseline;
    for step in 0..=config.steps {
        let p = phi.value();
        let current_ppv = ppv(test, phi).ok();
        let record = TrajectoryRecord {
            step,
            prevalence: p,
            ppv: current_ppv,
            fdr: fdr(test, phi).ok(),
            zeta_vs_baseline: current_ppv.map(|v| v / baseline_ppv),
            scenario: (p <= baseline.value())
                .then(|| PrevalenceScenario::from_ordering(baseline.value(), p, threshold)),
            pti_required: iterations_to_threshold(test, phi)
                .ok()
                .map(|plan| plan.iterations),
            below_threshold: p < threshold,
        };
        let stop = config.stop_at_threshold && record.below_threshold;
        records.push(record);
        if stop {
            break;
        }
        phi = step_prevalence(config, phi);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParadoxSummary {
    /// First step whose prevalence is below the threshold.
    pub first_crossing_step: Option<u32>,
    /// PPV of the last record over PPV of the first.
    pub total_zeta_loss: Option<f64>,
    pub max_pti_required: Option<u64>,
    pub final_scenario: Option<PrevalenceScenario>,
    pub final_prevalence: f64,
}

pub fn paradox_summary(records: &[TrajectoryRecord]) -> Result<ParadoxSummary> {
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(ScreenError::EmptyTrajectory),
    };
    let total_zeta_loss = match (first.ppv, last.ppv) {
        (Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    Ok(ParadoxSummary {
        first_crossing_step: records.iter().find(|r| r.below_threshold).map(|r| r.step),
        total_zeta_loss,
        max_pti_required: records.iter().filter_map(|r| r.pti_required).max(),
        final_scenario: last.scenario,
        final_prevalence: last.prevalence,
    })
}
