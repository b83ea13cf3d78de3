//! Data and parameter ingestion.

use std::fmt::Write as _;
use std::fs;

use sha2::{Digest, Sha256};
use smoothq::{fixtures, DiscreteSample};

use crate::CliError;

const BUILTIN_PREFIX: &str = "builtin:";

/// Loads `builtin:NAME` or a CSV file.
pub fn load_sample(source: &str) -> Result<DiscreteSample, CliError> {
    if let Some(name) = source.strip_prefix(BUILTIN_PREFIX) {
        return fixtures::data_set(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown built-in data set {name:?}; expected one of {}",
                fixtures::DATA_SET_NAMES.join(", ")
            ))
        });
    }
    let text = fs::read_to_string(source).map_err(|e| CliError::Domain(format!("cannot read {source}: {e}")))?;
    DiscreteSample::parse_csv(&text).map_err(|e| CliError::Domain(format!("{source}: {e}")))
}

/// SHA-256 of the canonical form of an input, as `sha256:<hex>`.
pub fn digest(canonical: &str) -> String {
    let hash = Sha256::digest(canonical.as_bytes());
    let mut out = String::from("sha256:");
    for b in hash.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

pub fn sample_digest(sample: &DiscreteSample) -> String {
    digest(&sample.to_csv())
}

/// Parses a comma-separated list of reals.
pub fn real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("expected a real number, got {p:?}"))
        })
        .collect()
}

/// Parses a comma-separated list of levels in (0, 1).
pub fn level_list(s: &str) -> Result<Vec<f64>, String> {
    let levels = real_list(s)?;
    match levels.iter().find(|&&u| !(u > 0.0 && u < 1.0)) {
        Some(bad) => Err(format!("levels must lie in (0, 1), got {bad}")),
        None => Ok(levels),
    }
}
