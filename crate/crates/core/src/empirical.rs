//! Frequency-table samples of nonnegative integer counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Observed counts stored as a sorted frequency table.
///
/// Only values with a positive frequency are stored; gaps between the smallest
/// and largest value carry zero mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u64, u64)>", into = "Vec<(u64, u64)>")]
pub struct DiscreteSample {
    values: Vec<u64>,
    counts: Vec<u64>,
    /// `cumulative[i]` = number of observations <= `values[i]`.
    cumulative: Vec<u64>,
}

impl DiscreteSample {
    /// Builds a sample from `(value, count)` rows. Rows with a zero count are dropped.
    pub fn from_counts<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let mut table = BTreeMap::new();
        for (value, count) in rows {
            if value < 0 || count < 0 {
                return Err(Error::InvalidSample(format!(
                    "negative entry in row ({value}, {count})"
                )));
            }
            if table.insert(value as u64, count as u64).is_some() {
                return Err(Error::InvalidSample(format!("duplicate value {value}")));
            }
        }
        Self::from_table(table)
    }

    /// Aggregates raw observations into a frequency table.
    pub fn from_observations<I>(obs: I) -> Result<Self>
    where
        I: IntoIterator<Item = i64>,
    {
        let mut table = BTreeMap::new();
        for y in obs {
            if y < 0 {
                return Err(Error::InvalidSample(format!("negative observation {y}")));
            }
            *table.entry(y as u64).or_insert(0u64) += 1;
        }
        Self::from_table(table)
    }

    /// Builds a sample from a dense count vector where index = value.
    pub fn from_dense(counts: &[u64]) -> Result<Self> {
        Self::from_table(
            counts
                .iter()
                .enumerate()
                .map(|(v, &c)| (v as u64, c))
                .collect(),
        )
    }

    fn from_table(table: BTreeMap<u64, u64>) -> Result<Self> {
        let mut values = Vec::with_capacity(table.len());
        let mut counts = Vec::with_capacity(table.len());
        let mut cumulative = Vec::with_capacity(table.len());
        let mut running = 0u64;
        for (v, c) in table.into_iter().filter(|&(_, c)| c > 0) {
            running = running
                .checked_add(c)
                .ok_or_else(|| Error::InvalidSample("total count overflows".into()))?;
            values.push(v);
            counts.push(c);
            cumulative.push(running);
        }
        if running == 0 {
            return Err(Error::InvalidSample("sample holds no observations".into()));
        }
        Ok(Self {
            values,
            counts,
            cumulative,
        })
    }

    /// Parses CSV text: either `value,count` rows (header optional) or one
    /// integer observation per line. Blank lines and `#` comments are ignored.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let Some(&(_, first)) = lines.first() else {
            return Err(Error::Parse("empty input".into()));
        };
        let is_header = first
            .split(',')
            .next()
            .map(|f| f.trim().trim_matches('"').parse::<i64>().is_err())
            .unwrap_or(false);
        let body = if is_header { &lines[1..] } else { &lines[..] };
        let tabular = body.iter().any(|(_, l)| l.contains(','));
        let field = |line: usize, s: &str| -> Result<i64> {
            s.trim()
                .trim_matches('"')
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("line {line}: expected an integer, got {s:?}")))
        };
        if tabular {
            let mut rows = Vec::with_capacity(body.len());
            for &(line, l) in body {
                let fields: Vec<&str> = l.split(',').collect();
                if fields.len() != 2 {
                    return Err(Error::Parse(format!(
                        "line {line}: expected two columns `value,count`"
                    )));
                }
                rows.push((field(line, fields[0])?, field(line, fields[1])?));
            }
            Self::from_counts(rows)
        } else {
            let obs = body
                .iter()
                .map(|&(line, l)| field(line, l))
                .collect::<Result<Vec<_>>>()?;
            Self::from_observations(obs)
        }
    }

    /// Serializes as `value,count` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for (v, c) in self.rows() {
            out.push_str(&format!("{v},{c}\n"));
        }
        out
    }

    pub fn n(&self) -> u64 {
        *self.cumulative.last().expect("sample is non-empty")
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn distinct(&self) -> usize {
        self.values.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.values.iter().copied().zip(self.counts.iter().copied())
    }

    pub fn min_value(&self) -> u64 {
        self.values[0]
    }

    pub fn max_value(&self) -> u64 {
        *self.values.last().unwrap()
    }

    /// Frequency of a single value.
    pub fn frequency(&self, value: i64) -> u64 {
        if value < 0 {
            return 0;
        }
        match self.values.binary_search(&(value as u64)) {
            Ok(i) => self.counts[i],
            Err(_) => 0,
        }
    }

    /// Number of observations `<= value`.
    pub fn count_at_most(&self, value: i64) -> u64 {
        if value < 0 {
            return 0;
        }
        let idx = self.values.partition_point(|&v| v <= value as u64);
        if idx == 0 {
            0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// Sample mean and standard deviation (n - 1 divisor).
    pub fn sample_moments<T: Scalar>(&self) -> Result<(T, T)> {
        let n = self.n();
        if n < 2 {
            return Err(Error::InvalidSample(
                "variance needs at least two observations".into(),
            ));
        }
        let nf = T::from_count(n);
        let mean = self
            .rows()
            .map(|(v, c)| T::from_count(v) * T::from_count(c))
            .sum::<T>()
            / nf;
        let ss = self
            .rows()
            .map(|(v, c)| {
                let dev = T::from_count(v) - mean;
                dev * dev * T::from_count(c)
            })
            .sum::<T>();
        let var = ss / (nf - T::one());
        Ok((mean, var.sqrt()))
    }

    /// Empirical c.d.f.: fraction of observations `<= t`.
    pub fn ecdf<T: Scalar>(&self, t: T) -> T {
        if t.is_nan() || t < T::zero() {
            return T::zero();
        }
        if t >= T::from_count(self.max_value()) {
            return T::one();
        }
        let floor = t.floor().to_i64().unwrap_or(i64::MAX);
        T::from_count(self.count_at_most(floor)) / T::from_count(self.n())
    }
}

impl TryFrom<Vec<(u64, u64)>> for DiscreteSample {
    type Error = Error;

    fn try_from(rows: Vec<(u64, u64)>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (v, c) in rows {
            if table.insert(v, c).is_some() {
                return Err(Error::InvalidSample(format!("duplicate value {v}")));
            }
        }
        Self::from_table(table)
    }
}

impl From<DiscreteSample> for Vec<(u64, u64)> {
    fn from(s: DiscreteSample) -> Self {
        s.rows().collect()
    }
}
