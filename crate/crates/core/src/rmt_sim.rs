//! Seeded Monte Carlo for `W = X⁽¹⁾ X⁽²⁾`, with both factors `n × n` and
//! scaled by `1/√n`.
//!
//! Every replicate is a pure function of `(spec, replicate index)`. The
//! factor streams are ChaCha8 keyed by a splitmix-derived seed per replicate
//! and a stream id per factor, so any replicate can be regenerated on its own
//! and results do not depend on how replicates are scheduled.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::summation::compensated_sum;
use crate::testfn::TestFunction;

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryDistribution {
    Gaussian,
    /// `±1` with equal probability.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// `{-b, 0, b}` with weights `{p/2, 1 - p, p/2}` and `b = 1/√p`.
    ThreePoint { p: f64 },
}

impl EntryDistribution {
    pub fn validate(&self) -> Result<()> {
        if let EntryDistribution::ThreePoint { p } = *self {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "three_point weight p = {p} must lie in (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// `E X⁴` for the unit-variance law.
    pub fn mu4(&self) -> f64 {
        match *self {
            EntryDistribution::Gaussian => 3.0,
            EntryDistribution::Rademacher => 1.0,
            EntryDistribution::Uniform => 9.0 / 5.0,
            EntryDistribution::ThreePoint { p } => 1.0 / p,
        }
    }

    pub fn kappa4(&self) -> f64 {
        self.mu4() - 3.0
    }

    /// One unscaled draw (mean 0, variance 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EntryDistribution::Gaussian => rng.sample(StandardNormal),
            EntryDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryDistribution::Uniform => {
                let s3 = 3f64.sqrt();
                rng.random_range(-s3..s3)
            }
            EntryDistribution::ThreePoint { p } => {
                let u: f64 = rng.random();
                let b = 1.0 / p.sqrt();
                if u < 0.5 * p {
                    -b
                } else if u < p {
                    b
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryDistribution::Gaussian => write!(f, "gaussian"),
            EntryDistribution::Rademacher => write!(f, "rademacher"),
            EntryDistribution::Uniform => write!(f, "uniform"),
            EntryDistribution::ThreePoint { p } => write!(f, "three_point({p})"),
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let dist = match s {
            "gaussian" => EntryDistribution::Gaussian,
            "rademacher" => EntryDistribution::Rademacher,
            "uniform" => EntryDistribution::Uniform,
            _ => {
                let p = s
                    .strip_prefix("three_point(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidSpec(format!(
                            "unknown entry distribution `{s}` (expected gaussian, rademacher, uniform or three_point(p))"
                        ))
                    })?;
                EntryDistribution::ThreePoint { p }
            }
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl Serialize for EntryDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntryDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub entry: EntryDistribution,
    pub master_seed: u64,
    pub replicates: usize,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("n = {} must be at least 2", self.n)));
        }
        if self.replicates < 1 {
            return Err(Error::InvalidSpec("at least one replicate is required".into()));
        }
        self.entry.validate()
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-replicate key derived from the master seed.
pub fn derived_seed(master_seed: u64, replicate: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(replicate as u64))
}

/// Factor `which` (1 or 2) of replicate `replicate`, already scaled by `1/√n`.
pub fn sample_factor(spec: &EnsembleSpec, replicate: usize, which: u8) -> DMatrix<f64> {
    raw_factor(spec, replicate, which) / (spec.n as f64).sqrt()
}

/// Unscaled entries of a factor, in column-major order.
pub fn raw_factor(spec: &EnsembleSpec, replicate: usize, which: u8) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(spec.master_seed, replicate));
    rng.set_stream(u64::from(which));
    let n = spec.n;
    DMatrix::from_iterator(n, n, (0..n * n).map(|_| spec.entry.sample(&mut rng)))
}

/// Eigenvalues of `W Wᵀ` for `W = x1 · x2`, from the singular values of `W`,
/// sorted ascending.
pub fn squared_singular_values(x1: &DMatrix<f64>, x2: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !x1.is_square() || x1.shape() != x2.shape() {
        return Err(Error::domain(
            "squared_singular_values",
            format!("factors must be equal-size square matrices, got {:?} and {:?}", x1.shape(), x2.shape()),
        ));
    }
    let w = x1 * x2;
    let failure = |w: &DMatrix<f64>| Error::Decomposition {
        frobenius_norm: w.norm(),
        max_abs_entry: w.amax(),
    };
    let svd = w.clone().try_svd(false, false, SVD_EPS, SVD_MAX_ITER).ok_or_else(|| failure(&w))?;
    let mut s2: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    if s2.iter().any(|v| !v.is_finite()) {
        return Err(failure(&w));
    }
    s2.sort_by(f64::total_cmp);
    Ok(s2)
}

/// `Σ f(s²_k)` with compensated summation.
pub fn linear_statistic(svals2: &[f64], f: &TestFunction) -> f64 {
    compensated_sum(svals2.iter().map(|&x| f.f(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate_id: usize,
    pub derived_seed: u64,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateFailure {
    pub replicate_id: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateBatch {
    pub spec: EnsembleSpec,
    pub test_function: TestFunction,
    /// Successful replicates in index order.
    pub records: Vec<ReplicateRecord>,
    /// Spectra of the successful replicates, same order as `records`.
    #[serde(skip)]
    pub spectra: Option<Vec<Vec<f64>>>,
    pub failures: Vec<ReplicateFailure>,
}

impl ReplicateBatch {
    pub fn statistics(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.statistic).collect()
    }

    pub fn failure_count(&self) -> usize {
        self.failures.len()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchOptions {
    pub retain_spectra: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Spectrum of a single replicate.
pub fn replicate_spectrum(spec: &EnsembleSpec, replicate: usize) -> Result<Vec<f64>> {
    let x1 = sample_factor(spec, replicate, 1);
    let x2 = sample_factor(spec, replicate, 2);
    squared_singular_values(&x1, &x2)
}

pub fn run_batch(spec: &EnsembleSpec, f: &TestFunction) -> Result<ReplicateBatch> {
    run_batch_with(spec, f, &BatchOptions::default())
}

pub fn run_batch_with(
    spec: &EnsembleSpec,
    f: &TestFunction,
    options: &BatchOptions,
) -> Result<ReplicateBatch> {
    spec.validate()?;
    let work = || -> Vec<Result<Vec<f64>>> {
        (0..spec.replicates)
            .into_par_iter()
            .map(|r| replicate_spectrum(spec, r))
            .collect()
    };
    let outcomes = match options.workers {
        Some(w) => {
            if w == 0 {
                return Err(Error::InvalidSpec("worker count must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?
                .install(work)
        }
        None => work(),
    };

    let mut records = Vec::with_capacity(spec.replicates);
    let mut spectra = options.retain_spectra.then(Vec::new);
    let mut failures = Vec::new();
    for (replicate_id, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(s2) => {
                records.push(ReplicateRecord {
                    replicate_id,
                    derived_seed: derived_seed(spec.master_seed, replicate_id),
                    statistic: linear_statistic(&s2, f),
                });
                if let Some(kept) = spectra.as_mut() {
                    kept.push(s2);
                }
            }
            Err(e) => failures.push(ReplicateFailure {
                replicate_id,
                error: e.to_string(),
            }),
        }
    }
    Ok(ReplicateBatch {
        spec: *spec,
        test_function: f.clone(),
        records,
        spectra,
        failures,
    })
}
