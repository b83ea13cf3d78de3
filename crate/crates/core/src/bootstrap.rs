//! Nonparametric bootstrap of smoothed quantile vectors.
//!
//! Replicates run in parallel, each on its own ChaCha8 stream split from the
//! master seed, and are reduced in replicate order so that results do not
//! depend on the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empirical::DiscreteSample;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::smoothing::smoothed_quantiles;
use crate::truncation::{SupportRule, TruncationDesign};

/// Share of replicates that may be redrawn before a run is aborted.
pub const MAX_SKIP_FRACTION: f64 = 0.01;

/// Settings shared by every replicated computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleConfig {
    pub m: usize,
    pub seed: u64,
    /// Worker cap; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl ResampleConfig {
    pub fn new(m: usize, seed: u64) -> Self {
        Self { m, seed, workers: None }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Output of [`replicate`]: one value per replicate plus the number of redraws.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicates<V> {
    pub values: Vec<V>,
    pub skipped: usize,
}

/// The RNG for replicate `index` under `seed`.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn skip_budget(m: usize) -> usize {
    (MAX_SKIP_FRACTION * m as f64).floor() as usize
}

fn with_workers<R: Send>(workers: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Error::Domain("worker count must be positive".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs `cfg.m` replicates of `draw`. A draw returning `Ok(None)` is
/// degenerate and is redrawn from the same stream; more than 1% redraws in
/// total aborts the run.
pub fn replicate<V, F>(cfg: &ResampleConfig, draw: F) -> Result<Replicates<V>>
where
    V: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<Option<V>> + Sync,
{
    if cfg.m == 0 {
        return Err(Error::Domain("replicate count must be positive".into()));
    }
    let budget = skip_budget(cfg.m);
    let too_many = |skipped| Error::TooManySkipped {
        skipped,
        requested: cfg.m,
    };
    let results: Vec<Result<(V, usize)>> = with_workers(cfg.workers, || {
        (0..cfg.m)
            .into_par_iter()
            .map(|i| {
                let mut rng = replicate_rng(cfg.seed, i);
                let mut skipped = 0;
                loop {
                    match draw(&mut rng)? {
                        Some(v) => return Ok((v, skipped)),
                        None if skipped >= budget => return Err(too_many(skipped + 1)),
                        None => skipped += 1,
                    }
                }
            })
            .collect()
    })?;
    let mut values = Vec::with_capacity(cfg.m);
    let mut skipped = 0;
    for r in results {
        let (v, s) = r?;
        skipped += s;
        values.push(v);
    }
    if skipped > budget {
        return Err(too_many(skipped));
    }
    Ok(Replicates { values, skipped })
}

/// Resamples `sample.n()` observations with replacement as a multinomial draw
/// over the frequency table.
pub fn resample<R: rand::Rng + ?Sized>(sample: &DiscreteSample, rng: &mut R) -> DiscreteSample {
    let mut left = sample.n();
    let mut mass_left = sample.n();
    let mut counts = Vec::with_capacity(sample.distinct());
    for &c in sample.counts() {
        let take = if left == 0 {
            0
        } else if c == mass_left {
            left
        } else {
            Binomial::new(left, c as f64 / mass_left as f64)
                .expect("probability lies in [0, 1]")
                .sample(rng)
        };
        counts.push(take);
        left -= take;
        mass_left -= c;
    }
    let rows = sample
        .values()
        .iter()
        .zip(counts)
        .map(|(&v, c)| (v as i64, c as i64));
    DiscreteSample::from_counts(rows).expect("resample keeps n observations")
}

/// Column means of a row-major matrix.
pub fn column_means<T: Scalar>(rows: &[Vec<T>]) -> Vec<T> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let m = T::from_usize(rows.len()).unwrap();
    (0..first.len())
        .map(|j| rows.iter().map(|r| r[j]).sum::<T>() / m)
        .collect()
}

/// Sample covariance of the columns with the `m - 1` divisor; `None` when
/// there are fewer than two rows.
pub fn sample_covariance<T: Scalar>(rows: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    if rows.len() < 2 {
        return None;
    }
    let means = column_means(rows);
    let l = means.len();
    let denom = T::from_usize(rows.len() - 1).unwrap();
    let mut cov = vec![vec![T::zero(); l]; l];
    for i in 0..l {
        for j in i..l {
            let s: T = rows
                .iter()
                .map(|r| (r[i] - means[i]) * (r[j] - means[j]))
                .sum();
            cov[i][j] = s / denom;
            cov[j][i] = cov[i][j];
        }
    }
    Some(cov)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BootstrapSummary<T> {
    pub levels: Vec<T>,
    /// `m` rows, one smoothed quantile vector per replicate.
    pub replicates: Vec<Vec<T>>,
    pub col_means: Vec<T>,
    pub cov: Vec<Vec<T>>,
    pub m: usize,
    pub seed: u64,
    /// Degenerate resamples that were redrawn.
    pub skipped: usize,
    /// Size of the original sample.
    pub n: u64,
}

impl<T: Scalar> BootstrapSummary<T> {
    /// `n` times the bootstrap covariance, comparable with the asymptotic `H D H'`.
    pub fn scaled_cov(&self) -> Vec<Vec<T>> {
        let n = T::from_count(self.n);
        self.cov
            .iter()
            .map(|row| row.iter().map(|&v| v * n).collect())
            .collect()
    }
}

/// Bootstrap distribution of the smoothed quantiles at `levels`.
pub fn bootstrap_quantiles<T: Scalar>(
    sample: &DiscreteSample,
    k: T,
    levels: &[T],
    rule: SupportRule,
    cfg: &ResampleConfig,
) -> Result<BootstrapSummary<T>> {
    if sample.distinct() < 2 {
        return Err(Error::DegenerateSample);
    }
    if cfg.m < 2 {
        return Err(Error::Domain("bootstrap needs at least two replicates".into()));
    }
    if levels.is_empty() {
        return Err(Error::Domain("at least one level is required".into()));
    }
    // Surface design errors on the original sample before resampling.
    smoothed_quantiles(&TruncationDesign::empirical(sample, k, rule)?, levels)?;
    let run = replicate(cfg, |rng| {
        let resampled = resample(sample, rng);
        if resampled.distinct() < 2 {
            return Ok(None);
        }
        let design = TruncationDesign::empirical(&resampled, k, rule)?;
        smoothed_quantiles(&design, levels).map(Some)
    })?;
    let col_means = column_means(&run.values);
    let cov = sample_covariance(&run.values).expect("m >= 2");
    Ok(BootstrapSummary {
        levels: levels.to_vec(),
        replicates: run.values,
        col_means,
        cov,
        m: cfg.m,
        seed: cfg.seed,
        skipped: run.skipped,
        n: sample.n(),
    })
}
