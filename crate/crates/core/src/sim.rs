//! Monte Carlo studies of the smoothed quantile estimator under a known model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::quantile_covariance;
use crate::bootstrap::{bootstrap_quantiles, column_means, replicate, replicate_rng, sample_covariance, ResampleConfig};
use crate::distributions::CountModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smoothing::smoothed_quantiles;
use crate::truncation::{SupportRule, TruncationDesign};

/// Stream index reserved for the single sample drawn in bootstrap validation,
/// kept apart from the replicate streams `0..m`.
const VALIDATION_STREAM: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMode {
    /// Independent samples from the model, one estimate per sample.
    Simulate,
    /// One sample from the model, then a bootstrap on it.
    BootstrapValidate,
    /// Population design with closed-form moments (the `n = inf` targets).
    Theoretical,
}

impl fmt::Display for StudyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyMode::Simulate => "simulate",
            StudyMode::BootstrapValidate => "bootstrap-validate",
            StudyMode::Theoretical => "theoretical",
        })
    }
}

impl FromStr for StudyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simulate" => Ok(StudyMode::Simulate),
            "bootstrap-validate" | "bootstrap" => Ok(StudyMode::BootstrapValidate),
            "theoretical" => Ok(StudyMode::Theoretical),
            other => Err(Error::Parse(format!("unknown study mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StudyConfig<T> {
    pub model: CountModel<T>,
    pub k: T,
    /// Sample size of each generated sample.
    pub n: usize,
    /// Replications; bootstrap replicates in bootstrap-validate mode.
    pub reps: usize,
    pub levels: Vec<T>,
    pub seed: u64,
    pub mode: StudyMode,
    pub workers: Option<usize>,
    pub support: SupportRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StudyReport<T> {
    pub mode: StudyMode,
    pub model: CountModel<T>,
    pub k: T,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub levels: Vec<T>,
    pub means: Vec<T>,
    /// `n` times the covariance of the estimates; the asymptotic `H D H'` in
    /// theoretical mode. Absent with a single replicate.
    pub scaled_cov: Option<Vec<Vec<T>>>,
    /// Monte Carlo standard errors of `means`.
    pub std_errors: Option<Vec<T>>,
    /// Degenerate samples that were redrawn.
    pub skipped: usize,
}

fn validate<T: Scalar>(cfg: &StudyConfig<T>) -> Result<()> {
    if cfg.levels.is_empty() {
        return Err(Error::Domain("at least one level is required".into()));
    }
    if cfg.mode != StudyMode::Theoretical {
        if cfg.reps == 0 {
            return Err(Error::Domain("reps must be at least 1".into()));
        }
        if cfg.n < 2 {
            return Err(Error::Domain("sample size must be at least 2".into()));
        }
    }
    Ok(())
}

fn scaled<T: Scalar>(cov: Vec<Vec<T>>, n: usize) -> Vec<Vec<T>> {
    let n = T::from_usize(n).unwrap();
    cov.into_iter()
        .map(|row| row.into_iter().map(|v| v * n).collect())
        .collect()
}

fn standard_errors<T: Scalar>(cov: &[Vec<T>], reps: usize) -> Vec<T> {
    let reps = T::from_usize(reps).unwrap();
    (0..cov.len())
        .map(|i| (cov[i][i].max(T::zero()) / reps).sqrt())
        .collect()
}

pub fn run_study<T: Scalar>(cfg: &StudyConfig<T>) -> Result<StudyReport<T>> {
    validate(cfg)?;
    let mut report = StudyReport {
        mode: cfg.mode,
        model: cfg.model.clone(),
        k: cfg.k,
        n: cfg.n,
        reps: cfg.reps,
        seed: cfg.seed,
        levels: cfg.levels.clone(),
        means: Vec::new(),
        scaled_cov: None,
        std_errors: None,
        skipped: 0,
    };
    match cfg.mode {
        StudyMode::Theoretical => {
            let design = TruncationDesign::population(&cfg.model, cfg.k)?;
            let qc = quantile_covariance(&design, &cfg.levels, 1)?;
            report.means = qc.estimates;
            report.scaled_cov = Some(qc.sigma);
        }
        StudyMode::Simulate => {
            let rc = ResampleConfig {
                m: cfg.reps,
                seed: cfg.seed,
                workers: cfg.workers,
            };
            let run = replicate(&rc, |rng| {
                let sample = cfg.model.sample(cfg.n, rng)?;
                if sample.distinct() < 2 {
                    return Ok(None);
                }
                let design = TruncationDesign::empirical(&sample, cfg.k, cfg.support)?;
                smoothed_quantiles(&design, &cfg.levels).map(Some)
            })?;
            report.means = column_means(&run.values);
            if let Some(cov) = sample_covariance(&run.values) {
                report.std_errors = Some(standard_errors(&cov, cfg.reps));
                report.scaled_cov = Some(scaled(cov, cfg.n));
            }
            report.skipped = run.skipped;
        }
        StudyMode::BootstrapValidate => {
            let mut rng = replicate_rng(cfg.seed, VALIDATION_STREAM);
            let budget = 1 + cfg.reps / 100;
            let mut sample = cfg.model.sample(cfg.n, &mut rng)?;
            while sample.distinct() < 2 {
                report.skipped += 1;
                if report.skipped > budget {
                    return Err(Error::TooManySkipped {
                        skipped: report.skipped,
                        requested: 1,
                    });
                }
                sample = cfg.model.sample(cfg.n, &mut rng)?;
            }
            let rc = ResampleConfig {
                m: cfg.reps,
                seed: cfg.seed,
                workers: cfg.workers,
            };
            let summary = bootstrap_quantiles(&sample, cfg.k, &cfg.levels, cfg.support, &rc)?;
            report.std_errors = Some(standard_errors(&summary.cov, cfg.reps));
            report.scaled_cov = Some(summary.scaled_cov());
            report.means = summary.col_means;
            report.skipped += summary.skipped;
        }
    }
    Ok(report)
}
