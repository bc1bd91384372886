//! The `screenlab` command-line front end.
//!
//! Exit status: 0 on success, 1 on usage or domain errors, 2 when `verify`
//! finds a check outside tolerance.

mod config;
pub mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{ConfigFile, CONFIG_ENV};

use crate::bayes::{
    fdr, ppv, ppv_at_threshold, prevalence_threshold, zeta, Prevalence, PrevalenceShift,
    TestCharacteristics,
};
use crate::dynamics::{paradox_summary, run_trajectory, ProgramConfig};
use crate::error::ScreenError;
use crate::report::{format_opt, format_sig12, write_row, RunManifest};
use crate::serial::{iterations_to_target, iterations_to_threshold};

/// Longest per-step PPV ladder printed by `iterations`.
pub const LADDER_ROWS: usize = 64;

pub const CURVE_HEADER: [&str; 3] = ["phi", "ppv", "fdr"];
pub const SIMULATE_HEADER: [&str; 8] = [
    "step",
    "prevalence",
    "ppv",
    "fdr",
    "zeta_vs_baseline",
    "scenario",
    "pti_required",
    "below_threshold",
];
pub const VERIFY_HEADER: [&str; 8] = [
    "family",
    "case",
    "reference",
    "observed",
    "deviation",
    "tolerance",
    "pass",
    "samples",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] ScreenError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("verification failed: {0} check(s) outside tolerance")]
    VerificationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "screenlab",
    version,
    about = "Predictive-value dynamics of screening tests"
)]
pub struct Cli {
    /// Plain-text `key = value` file supplying defaults; flags override it.
    /// Falls back to $SCREENLAB_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct TestArgs {
    #[arg(long)]
    sensitivity: Option<f64>,
    #[arg(long)]
    specificity: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// PPV and FDR over a prevalence grid, as CSV.
    Curve {
        #[command(flatten)]
        test: TestArgs,
        #[arg(long)]
        phi_min: Option<f64>,
        #[arg(long)]
        phi_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Ratio of PPVs before and after a prevalence drop.
    Zeta {
        #[command(flatten)]
        test: TestArgs,
        /// Baseline prevalence φ₀.
        #[arg(long)]
        prevalence: Option<f64>,
        /// Absolute prevalence reduction k.
        #[arg(long)]
        reduction: Option<f64>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Prevalence threshold and the PPV there.
    Threshold {
        #[command(flatten)]
        test: TestArgs,
    },
    /// Consecutive positive results needed to reach a target PPV.
    Iterations {
        #[command(flatten)]
        test: TestArgs,
        #[arg(long)]
        prevalence: Option<f64>,
        #[arg(long, conflicts_with = "to_threshold")]
        target: Option<f64>,
        /// Use the PPV at the prevalence threshold as target.
        #[arg(long)]
        to_threshold: bool,
    },
    /// Screen-and-treat trajectory, as CSV.
    Simulate {
        #[command(flatten)]
        test: TestArgs,
        #[arg(long)]
        prevalence: Option<f64>,
        #[arg(long)]
        coverage: Option<f64>,
        #[arg(long)]
        efficacy: Option<f64>,
        #[arg(long)]
        incidence: Option<f64>,
        #[arg(long)]
        steps: Option<u32>,
        #[arg(long)]
        stop_at_threshold: bool,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Check the closed forms against Monte Carlo and exact-chaining oracles.
    Verify {
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_200_715;

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `stdout` and diagnostics to `stderr`. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::error::ErrorKind;

    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let rendered = err.render().to_string();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            err.exit_code()
        }
    }
}

fn load_config(path: Option<PathBuf>) -> Result<ConfigFile, CliError> {
    let path = path.or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        Some(p) => ConfigFile::load(&p),
        None => Ok(ConfigFile::default()),
    }
}

fn resolve_test(
    cfg: &ConfigFile,
    args: TestArgs,
    manifest: &mut RunManifest,
) -> Result<TestCharacteristics, CliError> {
    let a = cfg.require(args.sensitivity, "sensitivity")?;
    let b = cfg.require(args.specificity, "specificity")?;
    manifest.param("sensitivity", a).param("specificity", b);
    Ok(TestCharacteristics::new(a, b)?)
}

fn prevalence(value: f64) -> Result<Prevalence, CliError> {
    Ok(Prevalence::new(value)?)
}

/// Destination of a data stream: the `--csv` file when given, else stdout.
fn with_output<F>(csv: Option<PathBuf>, stdout: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match csv {
        Some(path) => {
            let file = File::create(&path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut writer = BufWriter::new(file);
            body(&mut writer)?;
            writer.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(cli.config)?;
    match cli.command {
        Command::Curve {
            test,
            phi_min,
            phi_max,
            points,
            csv,
        } => {
            let mut manifest = RunManifest::new("curve");
            let test = resolve_test(&cfg, test, &mut manifest)?;
            let phi_min = cfg.or(phi_min, "phi-min", 0.0)?;
            let phi_max = cfg.or(phi_max, "phi-max", 1.0)?;
            let points = cfg.or(points, "points", 101usize)?;
            if !(0.0 <= phi_min && phi_min < phi_max && phi_max <= 1.0) {
                return Err(CliError::Usage(format!(
                    "need 0 <= phi-min < phi-max <= 1, got [{phi_min}, {phi_max}]"
                )));
            }
            if points < 2 {
                return Err(CliError::Usage(format!(
                    "need at least 2 points, got {points}"
                )));
            }
            manifest
                .param("phi-min", phi_min)
                .param("phi-max", phi_max)
                .param("points", points);
            with_output(csv, stdout, |out| {
                write_curve(out, &manifest, &test, phi_min, phi_max, points)
            })
        }
        Command::Zeta {
            test,
            prevalence: phi0,
            reduction,
            csv,
        } => {
            let mut manifest = RunManifest::new("zeta");
            let test = resolve_test(&cfg, test, &mut manifest)?;
            let phi0 = cfg.require(phi0, "prevalence")?;
            let k = cfg.require(reduction, "reduction")?;
            manifest.param("prevalence", phi0).param("reduction", k);
            let shift = PrevalenceShift::new(prevalence(phi0)?, k)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let report = zeta(&test, &shift)?;
            writeln!(stdout, "baseline prevalence (phi0): {}", format_sig12(phi0))?;
            writeln!(stdout, "reduction (k):              {}", format_sig12(k))?;
            writeln!(
                stdout,
                "shifted prevalence (phi_k): {}",
                format_sig12(shift.shifted().value())
            )?;
            writeln!(
                stdout,
                "ppv at phi0:                {}",
                format_sig12(report.baseline_ppv)
            )?;
            writeln!(
                stdout,
                "ppv at phi_k:               {}",
                format_sig12(report.shifted_ppv)
            )?;
            writeln!(
                stdout,
                "zeta:                       {}",
                format_sig12(report.zeta)
            )?;
            writeln!(
                stdout,
                "prevalence threshold:       {}",
                format_sig12(report.threshold)
            )?;
            writeln!(stdout, "scenario:                   {}", report.scenario)?;
            if let Some(path) = csv {
                let mut sink = io::sink();
                with_output(Some(path), &mut sink, |out| {
                    manifest.write_header(out)?;
                    write_row(
                        out,
                        &[
                            "phi0",
                            "k",
                            "phi_k",
                            "baseline_ppv",
                            "shifted_ppv",
                            "zeta",
                            "phi_e",
                            "scenario",
                        ],
                    )?;
                    write_row(
                        out,
                        &[
                            format_sig12(phi0),
                            format_sig12(k),
                            format_sig12(shift.shifted().value()),
                            format_sig12(report.baseline_ppv),
                            format_sig12(report.shifted_ppv),
                            format_sig12(report.zeta),
                            format_sig12(report.threshold),
                            report.scenario.to_string(),
                        ],
                    )?;
                    Ok(())
                })?;
            }
            Ok(())
        }
        Command::Threshold { test } => {
            let mut manifest = RunManifest::new("threshold");
            let test = resolve_test(&cfg, test, &mut manifest)?;
            let phi_e = prevalence_threshold(&test)?;
            writeln!(stdout, "youden_j:     {}", format_sig12(test.youden_j()))?;
            writeln!(
                stdout,
                "lr_positive:  {}",
                format_opt(test.positive_likelihood_ratio())
            )?;
            writeln!(stdout, "omega:        {}", format_opt(test.omega()))?;
            writeln!(stdout, "phi_e:        {}", format_sig12(phi_e))?;
            writeln!(
                stdout,
                "ppv_at_phi_e: {}",
                format_opt(ppv_at_threshold(&test).ok())
            )?;
            Ok(())
        }
        Command::Iterations {
            test,
            prevalence: phi,
            target,
            to_threshold,
        } => {
            let mut manifest = RunManifest::new("iterations");
            let test = resolve_test(&cfg, test, &mut manifest)?;
            let phi = prevalence(cfg.require(phi, "prevalence")?)?;
            let to_threshold = cfg.switch(to_threshold, "to-threshold")?;
            let target = if to_threshold {
                None
            } else {
                cfg.get(target, "target")?
            };
            let plan = match target {
                Some(t) => iterations_to_target(&test, phi, t)?,
                None if to_threshold => iterations_to_threshold(&test, phi)?,
                None => {
                    return Err(CliError::Usage(
                        "pass either --target or --to-threshold".to_owned(),
                    ))
                }
            };
            writeln!(stdout, "prevalence: {}", format_sig12(phi.value()))?;
            if to_threshold {
                writeln!(
                    stdout,
                    "phi_e:      {}",
                    format_sig12(prevalence_threshold(&test)?)
                )?;
            }
            writeln!(stdout, "target_ppv: {}", format_sig12(plan.target_ppv))?;
            writeln!(stdout, "omega:      {}", format_sig12(plan.omega))?;
            writeln!(stdout, "iterations: {}", plan.iterations)?;
            writeln!(stdout, "n,ppv")?;
            for (j, v) in plan.per_step_ppv.iter().take(LADDER_ROWS).enumerate() {
                writeln!(stdout, "{},{}", j + 1, format_sig12(*v))?;
            }
            if plan.per_step_ppv.len() > LADDER_ROWS {
                writeln!(
                    stdout,
                    "# ladder truncated: {} more row(s)",
                    plan.per_step_ppv.len() - LADDER_ROWS
                )?;
            }
            Ok(())
        }
        Command::Simulate {
            test,
            prevalence: phi0,
            coverage,
            efficacy,
            incidence,
            steps,
            stop_at_threshold,
            csv,
        } => {
            let mut manifest = RunManifest::new("simulate");
            let test = resolve_test(&cfg, test, &mut manifest)?;
            let config = ProgramConfig {
                test,
                initial_prevalence: prevalence(cfg.require(phi0, "prevalence")?)?,
                coverage: cfg.require(coverage, "coverage")?,
                treatment_efficacy: cfg.require(efficacy, "efficacy")?,
                incidence: cfg.or(incidence, "incidence", 0.0)?,
                steps: cfg.or(steps, "steps", 10)?,
                stop_at_threshold: cfg.switch(stop_at_threshold, "stop-at-threshold")?,
            };
            config
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            manifest
                .param("prevalence", config.initial_prevalence.value())
                .param("coverage", config.coverage)
                .param("efficacy", config.treatment_efficacy)
                .param("incidence", config.incidence)
                .param("steps", config.steps)
                .param("stop-at-threshold", config.stop_at_threshold);
            with_output(csv, stdout, |out| write_simulation(out, &manifest, &config))
        }
        Command::Verify {
            samples,
            seed,
            csv,
            inject_fault,
        } => {
            let samples = cfg.or(samples, "samples", DEFAULT_SAMPLES)?;
            let seed = cfg.or(seed, "seed", DEFAULT_SEED)?;
            if samples < crate::oracle::MIN_PPV_SAMPLES {
                return Err(CliError::Usage(format!(
                    "--samples must be at least {}, got {samples}",
                    crate::oracle::MIN_PPV_SAMPLES
                )));
            }
            let mut manifest = RunManifest::new("verify");
            manifest.param("samples", samples);
            manifest.seed = Some(seed);
            let checks = verify::run_checks(samples, seed, inject_fault)?;
            write_verify_report(stdout, &checks)?;
            if let Some(path) = csv {
                let mut sink = io::sink();
                with_output(Some(path), &mut sink, |out| {
                    write_verify_csv(out, &manifest, &checks, samples)
                })?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::VerificationFailed(failed));
            }
            Ok(())
        }
    }
}

/// Uniformly spaced grid on `[lo, hi]` whose last point is exactly `hi`.
pub fn curve_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(move |i| {
        if i + 1 == points {
            hi
        } else {
            lo + i as f64 * step
        }
    })
}

fn write_curve(
    out: &mut dyn Write,
    manifest: &RunManifest,
    test: &TestCharacteristics,
    phi_min: f64,
    phi_max: f64,
    points: usize,
) -> Result<(), CliError> {
    manifest.write_header(out)?;
    writeln!(out, "# phi_e={}", format_sig12(prevalence_threshold(test)?))?;
    match ppv_at_threshold(test) {
        Ok(v) => writeln!(out, "# ppv_at_phi_e={}", format_sig12(v))?,
        Err(_) => writeln!(out, "# ppv_at_phi_e=undefined")?,
    }
    write_row(out, &CURVE_HEADER)?;
    for phi in curve_grid(phi_min, phi_max, points) {
        let p = Prevalence::new(phi)?;
        write_row(
            out,
            &[
                format_sig12(phi),
                format_opt(ppv(test, p).ok()),
                format_opt(fdr(test, p).ok()),
            ],
        )?;
    }
    Ok(())
}

fn write_simulation(
    out: &mut dyn Write,
    manifest: &RunManifest,
    config: &ProgramConfig,
) -> Result<(), CliError> {
    let records = run_trajectory(config)?;
    manifest.write_header(out)?;
    writeln!(
        out,
        "# phi_e={}",
        format_sig12(prevalence_threshold(&config.test)?)
    )?;
    write_row(out, &SIMULATE_HEADER)?;
    for r in &records {
        write_row(
            out,
            &[
                r.step.to_string(),
                format_sig12(r.prevalence),
                format_opt(r.ppv),
                format_opt(r.fdr),
                format_opt(r.zeta_vs_baseline),
                r.scenario.map(|s| s.to_string()).unwrap_or_default(),
                r.pti_required.map(|n| n.to_string()).unwrap_or_default(),
                r.below_threshold.to_string(),
            ],
        )?;
    }
    let summary = paradox_summary(&records)?;
    let opt = |v: Option<String>| v.unwrap_or_else(|| "none".to_owned());
    writeln!(
        out,
        "# summary.first_crossing_step={}",
        opt(summary.first_crossing_step.map(|s| s.to_string()))
    )?;
    writeln!(
        out,
        "# summary.total_zeta_loss={}",
        opt(summary.total_zeta_loss.map(format_sig12))
    )?;
    writeln!(
        out,
        "# summary.max_pti_required={}",
        opt(summary.max_pti_required.map(|n| n.to_string()))
    )?;
    writeln!(
        out,
        "# summary.final_scenario={}",
        opt(summary.final_scenario.map(|s| s.to_string()))
    )?;
    Ok(())
}

fn write_verify_report(out: &mut dyn Write, checks: &[verify::CheckOutcome]) -> io::Result<()> {
    for family in verify::FAMILIES {
        let group: Vec<_> = checks.iter().filter(|c| c.family == family).collect();
        if group.is_empty() {
            continue;
        }
        let failed = group.iter().filter(|c| !c.passed).count();
        let max_dev = group.iter().map(|c| c.deviation).fold(0.0_f64, f64::max);
        writeln!(
            out,
            "{family:<17} checks={:<4} max_deviation={:<16} tolerance={:<8} {}",
            group.len(),
            format_sig12(max_dev),
            format_sig12(group[0].tolerance),
            if failed == 0 {
                "ok".to_owned()
            } else {
                format!("FAILED ({failed})")
            }
        )?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(
        out,
        "{}",
        if failed == 0 {
            "verification passed"
        } else {
            "verification FAILED"
        }
    )
}

fn write_verify_csv(
    out: &mut dyn Write,
    manifest: &RunManifest,
    checks: &[verify::CheckOutcome],
    samples: u64,
) -> Result<(), CliError> {
    manifest.write_header(out)?;
    write_row(out, &VERIFY_HEADER)?;
    for c in checks {
        write_row(
            out,
            &[
                c.family.to_owned(),
                c.case.clone(),
                format_sig12(c.reference),
                format_sig12(c.observed),
                format_sig12(c.deviation),
                format_sig12(c.tolerance),
                c.passed.to_string(),
                samples.to_string(),
            ],
        )?;
    }
    Ok(())
}
