//! Predictive-value dynamics of screening tests.
//!
//! The crate is split the same way the computations are:
//!
//! - [`bayes`]: closed forms for PPV, the false discovery rate, the
//!   predictive-value-loss ratio ζ, the prevalence threshold and the
//!   ordering of prevalences against it.
//! - [`serial`]: posteriors after repeated positive results and the number of
//!   positive test iterations needed to reach a target PPV.
//! - [`dynamics`]: a deterministic screen-and-treat simulator.
//! - [`oracle`]: Monte Carlo and exact-chaining checks used to validate the
//!   closed forms.
//! - [`report`] and [`cli`]: number formatting, CSV emission and the
//!   `screenlab` command-line front end.

pub mod bayes;
pub mod cli;
pub mod dynamics;
mod error;
pub mod oracle;
pub mod report;
pub mod serial;

pub use bayes::{
    classify_scenario, fdr, ppv, ppv_at_threshold, prevalence_threshold, zeta, zeta_expanded,
    zeta_partials, Prevalence, PrevalenceScenario, PrevalenceShift, ScenarioKind,
    TestCharacteristics, ZetaReport,
};
pub use dynamics::{
    paradox_summary, run_trajectory, step_prevalence, ProgramConfig, TrajectoryRecord,
};
pub use error::{Result, ScreenError};
pub use oracle::McEstimate;
pub use serial::{iterations_to_target, iterations_to_threshold, serial_ppv, IterationPlan};
