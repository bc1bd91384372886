//! Closed-form screening mathematics.
//!
//! Notation used in the comments: `a` is sensitivity, `b` specificity,
//! `J = a + b - 1` (Youden's statistic), `L = a / (1 - b)` the positive
//! likelihood ratio and `ω = √L`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, ScreenError};

/// Absolute tolerance under which two prevalences are treated as tied when
/// ordering them against the threshold.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Central-difference step used by [`zeta_partials`].
pub const PARTIALS_STEP: f64 = 1e-6;

/// Sensitivity/specificity pair of an informative binary test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestCharacteristics {
    sensitivity: f64,
    specificity: f64,
}

impl TestCharacteristics {
    /// Both rates must lie in `(0, 1]` and their sum must exceed 1.
    pub fn new(sensitivity: f64, specificity: f64) -> Result<Self> {
        check_open_closed("sensitivity", sensitivity)?;
        check_open_closed("specificity", specificity)?;
        let j = sensitivity + specificity - 1.0;
        if j <= 0.0 {
            return Err(ScreenError::UninformativeTest(j));
        }
        Ok(Self {
            sensitivity,
            specificity,
        })
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn specificity(&self) -> f64 {
        self.specificity
    }

    /// Youden's J statistic, `a + b - 1`.
    pub fn youden_j(&self) -> f64 {
        self.sensitivity + self.specificity - 1.0
    }

    /// `1 - b`.
    pub fn false_positive_rate(&self) -> f64 {
        1.0 - self.specificity
    }

    /// Positive likelihood ratio `a / (1 - b)`; `None` for a perfectly
    /// specific test.
    pub fn positive_likelihood_ratio(&self) -> Option<f64> {
        let fpr = self.false_positive_rate();
        (fpr > 0.0).then(|| self.sensitivity / fpr)
    }

    /// `ω = √(a / (1 - b))`.
    pub fn omega(&self) -> Option<f64> {
        self.positive_likelihood_ratio().map(f64::sqrt)
    }
}

fn check_open_closed(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(ScreenError::OutOfRange {
            name,
            range: "(0, 1]",
            value,
        })
    }
}

/// Disease prevalence, a probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Prevalence(f64);

impl Prevalence {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(ScreenError::OutOfRange {
                name: "prevalence",
                range: "[0, 1]",
                value,
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// An absolute drop in prevalence from `baseline` (φ₀) by `reduction` (k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrevalenceShift {
    baseline: Prevalence,
    reduction: f64,
    shifted: Prevalence,
}

impl PrevalenceShift {
    /// `reduction` is in prevalence units: `φ_k = φ₀ - k`. A zero reduction
    /// is always accepted; otherwise `0 < k < φ₀` is required.
    pub fn new(baseline: Prevalence, reduction: f64) -> Result<Self> {
        let phi0 = baseline.value();
        if !(reduction == 0.0 || (reduction > 0.0 && reduction < phi0)) {
            return Err(ScreenError::domain(format!(
                "reduction k = {reduction} must satisfy 0 <= k < baseline prevalence {phi0}"
            )));
        }
        Ok(Self {
            baseline,
            reduction,
            shifted: Prevalence(phi0 - reduction),
        })
    }

    pub fn baseline(&self) -> Prevalence {
        self.baseline
    }

    pub fn reduction(&self) -> f64 {
        self.reduction
    }

    pub fn shifted(&self) -> Prevalence {
        self.shifted
    }
}

/// Which side of the prevalence threshold φ_e the two prevalences fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// φ_e > φ₀ > φ_k
    ThresholdAboveBoth,
    /// φ₀ > φ_k > φ_e
    ThresholdBelowBoth,
    /// φ₀ > φ_e > φ_k
    ThresholdBetween,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::ThresholdAboveBoth => "ThresholdAboveBoth",
            ScenarioKind::ThresholdBelowBoth => "ThresholdBelowBoth",
            ScenarioKind::ThresholdBetween => "ThresholdBetween",
        }
    }
}

/// Scenario plus a flag raised when any two of φ₀, φ_k, φ_e are within
/// [`BOUNDARY_TOLERANCE`] of each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrevalenceScenario {
    pub kind: ScenarioKind,
    pub boundary: bool,
}

const BOUNDARY_SUFFIX: &str = "(boundary)";

impl PrevalenceScenario {
    /// Orders `baseline >= shifted` against `threshold`. On exact ties the
    /// kind is resolved as `ThresholdBetween` (φ_k <= φ_e <= φ₀); the
    /// boundary flag records the tie either way.
    pub fn from_ordering(baseline: f64, shifted: f64, threshold: f64) -> Self {
        debug_assert!(baseline >= shifted);
        let kind = if threshold > baseline {
            ScenarioKind::ThresholdAboveBoth
        } else if threshold < shifted {
            ScenarioKind::ThresholdBelowBoth
        } else {
            ScenarioKind::ThresholdBetween
        };
        let near = |x: f64, y: f64| (x - y).abs() < BOUNDARY_TOLERANCE;
        let boundary =
            near(baseline, shifted) || near(baseline, threshold) || near(shifted, threshold);
        Self { kind, boundary }
    }
}

impl fmt::Display for PrevalenceScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.label())?;
        if self.boundary {
            f.write_str(BOUNDARY_SUFFIX)?;
        }
        Ok(())
    }
}

impl FromStr for PrevalenceScenario {
    type Err = ScreenError;

    fn from_str(s: &str) -> Result<Self> {
        let (label, boundary) = match s.strip_suffix(BOUNDARY_SUFFIX) {
            Some(rest) => (rest, true),
            None => (s, false),
        };
        let kind = match label {
            "ThresholdAboveBoth" => ScenarioKind::ThresholdAboveBoth,
            "ThresholdBelowBoth" => ScenarioKind::ThresholdBelowBoth,
            "ThresholdBetween" => ScenarioKind::ThresholdBetween,
            other => return Err(ScreenError::domain(format!("unknown scenario `{other}`"))),
        };
        Ok(Self { kind, boundary })
    }
}

/// ζ together with everything that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaReport {
    pub zeta: f64,
    pub baseline_ppv: f64,
    pub shifted_ppv: f64,
    pub shift: PrevalenceShift,
    /// Prevalence threshold φ_e of the test.
    pub threshold: f64,
    pub scenario: PrevalenceScenario,
}

/// Positive predictive value `aφ / (aφ + (1-b)(1-φ))`.
pub fn ppv(test: &TestCharacteristics, phi: Prevalence) -> Result<f64> {
    let p = phi.value();
    let true_pos = test.sensitivity * p;
    let false_pos = test.false_positive_rate() * (1.0 - p);
    let positives = true_pos + false_pos;
    if positives == 0.0 {
        return Err(ScreenError::IndeterminateForm { prevalence: p });
    }
    Ok(true_pos / positives)
}

/// False discovery rate, the complement of [`ppv`].
pub fn fdr(test: &TestCharacteristics, phi: Prevalence) -> Result<f64> {
    ppv(test, phi).map(|v| 1.0 - v)
}

/// `(φ_k(1-b) + Jφ₀φ_k) / (φ₀(1-b) + Jφ₀φ_k)`, evaluated on raw values.
fn zeta_simplified(test: &TestCharacteristics, phi0: f64, phik: f64) -> Result<f64> {
    if phi0 <= 0.0 {
        return Err(ScreenError::domain(
            "zeta needs a positive baseline prevalence",
        ));
    }
    let fpr = test.false_positive_rate();
    let cross = test.youden_j() * phi0 * phik;
    let den = phi0 * fpr + cross;
    if den == 0.0 {
        return Err(ScreenError::IndeterminateForm { prevalence: phik });
    }
    Ok((phik * fpr + cross) / den)
}

/// Ratio of the PPV after the prevalence drop to the baseline PPV.
pub fn zeta(test: &TestCharacteristics, shift: &PrevalenceShift) -> Result<ZetaReport> {
    let value = zeta_simplified(test, shift.baseline.value(), shift.shifted.value())?;
    let threshold = prevalence_threshold(test)?;
    Ok(ZetaReport {
        zeta: value,
        baseline_ppv: ppv(test, shift.baseline)?,
        shifted_ppv: ppv(test, shift.shifted)?,
        shift: *shift,
        threshold,
        scenario: PrevalenceScenario::from_ordering(
            shift.baseline.value(),
            shift.shifted.value(),
            threshold,
        ),
    })
}

/// ζ in its unsimplified form
/// `(φ-k)[aφ + (1-b)(1-φ)] / (φ[a(φ-k) + (1-b)(1+k-φ)])`.
///
/// Kept alongside [`zeta`] so the two algebraic routes can be compared.
pub fn zeta_expanded(test: &TestCharacteristics, shift: &PrevalenceShift) -> Result<f64> {
    let phi = shift.baseline.value();
    let k = shift.reduction;
    if phi <= 0.0 {
        return Err(ScreenError::domain(
            "zeta needs a positive baseline prevalence",
        ));
    }
    let a = test.sensitivity;
    let fpr = test.false_positive_rate();
    let num = (phi - k) * (a * phi + fpr * (1.0 - phi));
    let den = phi * (a * (phi - k) + fpr * (1.0 + k - phi));
    if den == 0.0 {
        return Err(ScreenError::IndeterminateForm {
            prevalence: phi - k,
        });
    }
    Ok(num / den)
}

/// Partial derivatives of ζ(φ₀, k) with respect to its two arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaPartials {
    pub d_zeta_d_phi0: f64,
    pub d_zeta_d_k: f64,
}

/// Central finite-difference partials of ζ with step [`PARTIALS_STEP`].
pub fn zeta_partials(test: &TestCharacteristics, shift: &PrevalenceShift) -> Result<ZetaPartials> {
    zeta_partials_with_step(test, shift, PARTIALS_STEP)
}

/// As [`zeta_partials`] with an explicit step. Every stencil point
/// `(φ₀ ± h, k)` and `(φ₀, k ± h)` must itself be a valid shift.
pub fn zeta_partials_with_step(
    test: &TestCharacteristics,
    shift: &PrevalenceShift,
    step: f64,
) -> Result<ZetaPartials> {
    if step.is_nan() || step <= 0.0 {
        return Err(ScreenError::domain(format!(
            "step must be positive, got {step}"
        )));
    }
    let phi0 = shift.baseline.value();
    let k = shift.reduction;
    let at = |p0: f64, kk: f64| -> Result<f64> {
        if !(p0 > 0.0 && p0 <= 1.0 && kk >= 0.0 && kk < p0) {
            return Err(ScreenError::domain(format!(
                "finite-difference stencil leaves the valid region at phi0 = {p0}, k = {kk}"
            )));
        }
        zeta_simplified(test, p0, p0 - kk)
    };
    let d_phi0 = (at(phi0 + step, k)? - at(phi0 - step, k)?) / (2.0 * step);
    let d_k = (at(phi0, k + step)? - at(phi0, k - step)?) / (2.0 * step);
    Ok(ZetaPartials {
        d_zeta_d_phi0: d_phi0,
        d_zeta_d_k: d_k,
    })
}

/// Prevalence threshold φ_e, the point on the screening curve below which
/// PPV falls away steeply.
///
/// Evaluated as `√(1-b) / (√a + √(1-b))`, which is
/// `(√(a(1-b)) + b - 1) / J` with the common factor `√a - √(1-b)` cancelled;
/// the cancelled form stays accurate as J approaches 0. A perfectly specific
/// test gives 0.
pub fn prevalence_threshold(test: &TestCharacteristics) -> Result<f64> {
    let j = test.youden_j();
    if j <= 0.0 {
        return Err(ScreenError::UninformativeTest(j));
    }
    let root_fpr = test.false_positive_rate().sqrt();
    Ok(root_fpr / (test.sensitivity.sqrt() + root_fpr))
}

/// PPV at the prevalence threshold, `φ_e · ω`.
pub fn ppv_at_threshold(test: &TestCharacteristics) -> Result<f64> {
    let omega = test
        .omega()
        .ok_or_else(|| ScreenError::domain("omega is undefined for specificity 1"))?;
    Ok(prevalence_threshold(test)? * omega)
}

/// Orders φ₀ and φ_k against the test's prevalence threshold.
pub fn classify_scenario(
    test: &TestCharacteristics,
    shift: &PrevalenceShift,
) -> Result<PrevalenceScenario> {
    let threshold = prevalence_threshold(test)?;
    Ok(PrevalenceScenario::from_ordering(
        shift.baseline.value(),
        shift.shifted.value(),
        threshold,
    ))
}
