//! Experiment configs and the deterministic output writers behind the
//! command-line front end.
//!
//! An experiment is a list of targets counted under one shared window
//! policy. Runs are reproducible by construction: every float in the CSV
//! is printed with a fixed 12-significant-digit format, rows appear in
//! config order regardless of worker scheduling, and timing capture is
//! off by default so that two runs of the same config are byte-identical.

use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::RationalApprox;
use crate::dissect::ProblemInstance;
use crate::repcount::{self, exact_count_with};
use crate::sseries::SeriesVariant;
use crate::{Error, Result};

/// How the window half-width H is derived from the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HMode {
    /// H = N^value.
    Exponent,
    /// H = value.
    Absolute,
    /// H = value * N^(1-theta) ln^omega N, the analytic admissibility scale.
    Threshold,
}

fn default_mu() -> f64 {
    1.0 / 3.0
}

fn default_h_mode() -> HMode {
    HMode::Exponent
}

fn default_h_value() -> f64 {
    0.9
}

fn default_prime_cutoff() -> u64 {
    repcount::DEFAULT_SERIES_CUTOFF
}

fn default_variant() -> SeriesVariant {
    SeriesVariant::RhoMinusOne
}

fn default_parallel() -> bool {
    true
}

/// Flat TOML experiment description. Unknown keys are rejected so a typo
/// cannot silently fall back to a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub targets: Vec<u64>,
    pub degree: u32,
    #[serde(default = "default_mu")]
    pub mu1: f64,
    #[serde(default = "default_mu")]
    pub mu2: f64,
    #[serde(default = "default_mu")]
    pub mu3: f64,
    #[serde(default = "default_h_mode")]
    pub h_mode: HMode,
    #[serde(default = "default_h_value")]
    pub h_value: f64,
    #[serde(default = "default_prime_cutoff")]
    pub prime_cutoff: u64,
    #[serde(default = "default_variant")]
    pub variant: SeriesVariant,
    /// Record wall-clock times. Leaves elapsed_ms at zero when off, which
    /// keeps repeated runs byte-identical.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
    #[serde(default)]
    pub output_csv: Option<String>,
    #[serde(default)]
    pub output_json: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("experiment config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("experiment config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn mu(&self) -> [f64; 3] {
        [self.mu1, self.mu2, self.mu3]
    }

    pub fn half_width_for(&self, target: u64) -> f64 {
        let t = target as f64;
        match self.h_mode {
            HMode::Exponent => t.powf(self.h_value),
            HMode::Absolute => self.h_value,
            HMode::Threshold => self.h_value * repcount::h_threshold(t, self.degree),
        }
    }
}

/// Successful measurements for one target.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub half_width: f64,
    pub exact: u64,
    pub series_value: f64,
    pub main_term: f64,
    pub ratio: Option<f64>,
    pub m_values: u64,
    pub elapsed_ms: f64,
}

/// Per-target outcome; a failed target carries its error text instead of
/// aborting the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutcome {
    pub target: u64,
    #[serde(flatten)]
    pub row: Option<ExperimentRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn run_one(config: &ExperimentConfig, target: u64) -> ExperimentOutcome {
    let attempt = ProblemInstance::new(
        target,
        config.degree,
        config.mu(),
        config.half_width_for(target),
    )
    .and_then(|inst| exact_count_with(&inst, config.prime_cutoff, config.variant));
    match attempt {
        Ok(report) => ExperimentOutcome {
            target,
            row: Some(ExperimentRow {
                half_width: report.instance.half_width,
                exact: report.exact,
                series_value: report.series_value,
                main_term: report.main_term,
                ratio: report.ratio,
                m_values: report.m_values_used,
                elapsed_ms: if config.record_timing {
                    report.elapsed.as_secs_f64() * 1e3
                } else {
                    0.0
                },
            }),
            error: None,
        },
        Err(e) => ExperimentOutcome {
            target,
            row: None,
            error: Some(e.to_string()),
        },
    }
}

/// Counts every configured target. Output order follows config order
/// whether or not the targets run concurrently.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentOutcome>> {
    if config.targets.is_empty() {
        return Err(Error::Config("experiment config: no targets".into()));
    }
    let outcomes = if config.parallel {
        config
            .targets
            .par_iter()
            .map(|&t| run_one(config, t))
            .collect()
    } else {
        config.targets.iter().map(|&t| run_one(config, t)).collect()
    };
    Ok(outcomes)
}

/// CSV with one row per successful target; failed targets are reported in
/// the JSON form, which carries an error field. All floats use a fixed
/// 12-significant-digit scientific format.
pub fn emit_csv<W: io::Write>(
    config: &ExperimentConfig,
    outcomes: &[ExperimentOutcome],
    out: &mut W,
) -> io::Result<()> {
    writeln!(
        out,
        "N,n,mu1,mu2,mu3,H,exact,sseries,main_term,ratio,m_count,elapsed_ms"
    )?;
    for outcome in outcomes {
        let Some(row) = &outcome.row else {
            continue;
        };
        let ratio = row
            .ratio
            .map(|r| format!("{r:.11e}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{:.11e},{:.11e},{:.11e},{:.11e},{},{:.11e},{:.11e},{},{},{:.11e}",
            outcome.target,
            config.degree,
            config.mu1,
            config.mu2,
            config.mu3,
            row.half_width,
            row.exact,
            row.series_value,
            row.main_term,
            ratio,
            row.m_values,
            row.elapsed_ms,
        )?;
    }
    Ok(())
}

pub fn emit_json<W: io::Write>(outcomes: &[ExperimentOutcome], out: &mut W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, outcomes)?;
    writeln!(out)
}

/// Parses a frequency in split form: "a/q", "a/q+lambda", "a/q-lambda",
/// or a bare float treated as 0/1 + lambda. Keeping the rational and
/// drift parts separate on the way in is what lets the exponential sums
/// run with exact rational phases.
pub fn parse_alpha(text: &str) -> Result<RationalApprox> {
    let text = text.trim();
    let bad = |why: &str| Error::Config(format!("frequency {text:?}: {why}"));
    if let Some(slash) = text.find('/') {
        let a: i64 = text[..slash]
            .parse()
            .map_err(|_| bad("numerator is not an integer"))?;
        let rest = &text[slash + 1..];
        let (q_text, lambda_text) = match rest.find(['+', '-']) {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        let q: u64 = q_text
            .parse()
            .map_err(|_| bad("denominator is not a positive integer"))?;
        let lambda: f64 = if lambda_text.is_empty() {
            0.0
        } else {
            lambda_text
                .parse()
                .map_err(|_| bad("drift is not a float"))?
        };
        RationalApprox::new(a, q, lambda)
    } else {
        let lambda: f64 = text.parse().map_err(|_| bad("not a float"))?;
        RationalApprox::new(0, 1, lambda)
    }
}
