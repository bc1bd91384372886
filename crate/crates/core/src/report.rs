//! Number formatting, run manifests and CSV rows.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::{self, Write};

use chrono::{DateTime, SecondsFormat, Utc};

pub const TOOL_NAME: &str = "screenlab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats `x` with 12 significant digits, `%g` style: plain decimal for
/// exponents in `[-5, 12)`, scientific otherwise, trailing zeros removed.
///
/// Rounding to 12 digits is done once by the standard formatter, which
/// rounds exact decimal ties to even.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    if x == 0.0 {
        return "0".to_owned();
    }
    let sci = format!("{:.11e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };

    if (-5..12).contains(&exp) {
        let (int_part, frac_part) = if exp >= 0 {
            let split = exp as usize + 1;
            (digits[..split].to_owned(), digits[split..].to_owned())
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            ("0".to_owned(), format!("{zeros}{digits}"))
        };
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        }
    }
}

/// Formats an optional value; absent values become an empty CSV field.
pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_sig12).unwrap_or_default()
}

/// Current time as ISO-8601 UTC, or the time given by `SOURCE_DATE_EPOCH`
/// when set so that repeated runs can produce identical files.
pub fn timestamp_now() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0));
    fixed
        .unwrap_or_else(Utc::now)
        .to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Metadata emitted as `#` comment lines at the head of every data file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub parameters: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            tool_version: format!("{TOOL_NAME} {TOOL_VERSION}"),
            subcommand: subcommand.to_owned(),
            parameters: Vec::new(),
            seed: None,
            timestamp: timestamp_now(),
        }
    }

    /// Records a resolved parameter. Floats are written with `Display`,
    /// which round-trips exactly.
    pub fn param(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.parameters.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn write_header(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# tool={}", self.tool_version)?;
        writeln!(out, "# subcommand={}", self.subcommand)?;
        for (k, v) in &self.parameters {
            writeln!(out, "# param.{k}={v}")?;
        }
        if let Some(seed) = self.seed {
            writeln!(out, "# seed={seed}")?;
            writeln!(out, "# rng={}", crate::oracle::RNG_ALGORITHM)?;
        }
        writeln!(out, "# timestamp={}", self.timestamp)
    }
}

/// Collects `# key=value` comment lines from emitted text.
pub fn parse_comments(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|line| line.strip_prefix('#'))
        .filter_map(|rest| rest.trim().split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect()
}

pub fn write_row<S: AsRef<str>>(out: &mut dyn Write, fields: &[S]) -> io::Result<()> {
    let mut first = true;
    for field in fields {
        if !first {
            out.write_all(b",")?;
        }
        out.write_all(field.as_ref().as_bytes())?;
        first = false;
    }
    out.write_all(b"\n")
}
