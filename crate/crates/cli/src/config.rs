//! Experiment configuration: a TOML file with sections, overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fc_clt_core::{EntryDistribution, TestFunction};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Largest moment order accepted by `moments`.
pub const MAX_MOMENT_ORDER: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Density,
    Moments,
    Variance,
    Simulate,
    Verify,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Density => "density",
            Command::Moments => "moments",
            Command::Variance => "variance",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilySection {
    pub m: u32,
}

impl Default for FamilySection {
    fn default() -> Self {
        FamilySection { m: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest acceptable quadrature error (moments, predicted variance).
    pub quadrature: f64,
    /// Relative half-width of the acceptance band around the predicted variance.
    pub variance_band: f64,
    /// KS significance level; normality passes when `p > ks_alpha`.
    pub ks_alpha: f64,
    pub bootstrap_resamples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: 1e-6,
            variance_band: 0.15,
            ks_alpha: 0.01,
            bootstrap_resamples: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Required only when the file is run with `run --config`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub family: FamilySection,
    pub test_function: TestFunction,
    pub entry: EntryDistribution,
    /// Fourth cumulant for `variance`; defaults to that of `entry`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa4: Option<f64>,
    pub n: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub output: PathBuf,
    pub retain_spectra: bool,
    pub max_k: u32,
    pub grid_points: usize,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            family: FamilySection::default(),
            test_function: TestFunction::identity(),
            entry: EntryDistribution::Gaussian,
            kappa4: None,
            n: 256,
            replicates: 2000,
            master_seed: 0,
            output: PathBuf::from("fc-clt-out"),
            retain_spectra: false,
            max_k: 8,
            grid_points: 400,
            tolerances: Tolerances::default(),
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    /// Parse without validating; toml diagnostics carry line, column and key.
    fn from_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        text.parse().map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The fourth cumulant used for predictions.
    pub fn effective_kappa4(&self) -> f64 {
        self.kappa4.unwrap_or_else(|| self.entry.kappa4())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.family.m == 0 {
            return bad("family.m must be positive".into());
        }
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if self.replicates == 0 {
            return bad("replicates must be positive".into());
        }
        if self.max_k > MAX_MOMENT_ORDER {
            return bad(format!("max_k = {} exceeds {MAX_MOMENT_ORDER}", self.max_k));
        }
        if self.grid_points < 2 {
            return bad(format!("grid_points = {} must be at least 2", self.grid_points));
        }
        if let Some(k4) = self.kappa4 {
            if !k4.is_finite() {
                return bad("kappa4 must be finite".into());
            }
        }
        let t = &self.tolerances;
        if t.quadrature.is_nan() || t.quadrature <= 0.0 {
            return bad("tolerances.quadrature must be positive".into());
        }
        if t.variance_band.is_nan() || t.variance_band <= 0.0 {
            return bad("tolerances.variance_band must be positive".into());
        }
        if !(t.ks_alpha > 0.0 && t.ks_alpha < 1.0) {
            return bad("tolerances.ks_alpha must lie in (0, 1)".into());
        }
        if t.bootstrap_resamples == 0 {
            return bad("tolerances.bootstrap_resamples must be positive".into());
        }
        self.entry.validate()?;
        Ok(())
    }
}

/// Flag values; `Some` wins over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub m: Option<u32>,
    pub test_function: Option<TestFunction>,
    pub entry: Option<EntryDistribution>,
    pub kappa4: Option<f64>,
    pub n: Option<usize>,
    pub replicates: Option<usize>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub retain_spectra: Option<bool>,
    pub max_k: Option<u32>,
    pub grid_points: Option<usize>,
    pub quadrature: Option<f64>,
    pub variance_band: Option<f64>,
    pub ks_alpha: Option<f64>,
    pub bootstrap_resamples: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        set(&mut cfg.family.m, &self.m);
        set(&mut cfg.test_function, &self.test_function);
        set(&mut cfg.entry, &self.entry);
        if self.kappa4.is_some() {
            cfg.kappa4 = self.kappa4;
        }
        set(&mut cfg.n, &self.n);
        set(&mut cfg.replicates, &self.replicates);
        set(&mut cfg.master_seed, &self.master_seed);
        set(&mut cfg.output, &self.output);
        set(&mut cfg.retain_spectra, &self.retain_spectra);
        set(&mut cfg.max_k, &self.max_k);
        set(&mut cfg.grid_points, &self.grid_points);
        set(&mut cfg.tolerances.quadrature, &self.quadrature);
        set(&mut cfg.tolerances.variance_band, &self.variance_band);
        set(&mut cfg.tolerances.ks_alpha, &self.ks_alpha);
        set(&mut cfg.tolerances.bootstrap_resamples, &self.bootstrap_resamples);
    }
}
