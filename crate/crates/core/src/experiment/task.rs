//! Median-regression task: sets of i.i.d. draws in `[0, 1]`, labelled by
//! their sample median.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution as _, Gamma, Normal};

use crate::error::{Error, Result};
use crate::multiset::{DomainInterval, Multiset};

/// Element distributions. Gaussian and gamma draws are clipped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Distribution {
    /// Uniform on `[0, 1]`.
    Uniform,
    /// Mean 0.5, standard deviation 0.15.
    Gaussian,
    /// Shape 2, scale 0.2.
    Gamma,
}

impl Distribution {
    pub const ALL: [Distribution; 3] = [Distribution::Uniform, Distribution::Gaussian, Distribution::Gamma];

    pub fn sample(self, rng: &mut impl Rng) -> f64 {
        let v = match self {
            Distribution::Uniform => rng.gen::<f64>(),
            Distribution::Gaussian => Normal::new(0.5, 0.15).expect("valid normal").sample(rng),
            Distribution::Gamma => Gamma::new(2.0, 0.2).expect("valid gamma").sample(rng),
        };
        v.clamp(0.0, 1.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Gaussian => "gaussian",
            Distribution::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Distribution::Uniform),
            "gaussian" | "normal" => Ok(Distribution::Gaussian),
            "gamma" => Ok(Distribution::Gamma),
            other => Err(Error::UnknownDistribution(other.to_string())),
        }
    }
}

/// Midpoint of the two central order statistics for even sizes.
pub fn median(set: &Multiset) -> Result<f64> {
    let xs = set.elements();
    if xs.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = xs.len();
    Ok(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

#[derive(Debug, Clone)]
pub struct Task {
    pub inputs: Vec<Multiset>,
    pub labels: Vec<f64>,
}

/// `batch` sets of `set_size` i.i.d. draws from `dist`, labelled by median.
pub fn sample_task(dist: Distribution, set_size: usize, batch: usize, rng: &mut impl Rng) -> Result<Task> {
    if set_size == 0 {
        return Err(Error::Precondition("set size must be >= 1".into()));
    }
    let mut inputs = Vec::with_capacity(batch);
    let mut labels = Vec::with_capacity(batch);
    for _ in 0..batch {
        let xs = (0..set_size).map(|_| dist.sample(rng)).collect();
        let set = Multiset::canonicalize(xs, DomainInterval::unit())?;
        labels.push(median(&set)?);
        inputs.push(set);
    }
    Ok(Task { inputs, labels })
}
