use std::fmt::Write as _;
use std::path::PathBuf;

use fc_clt_core::rmt_sim::{derived_seed, run_batch_with, BatchOptions, ReplicateFailure};
use fc_clt_core::stats::{esd_ks_distance, mean, sample_variance};
use fc_clt_core::variance::total_variance;
use fc_clt_core::{
    fc_number, CltVerdict, EnsembleSpec, EntryDistribution, FussCatalanFamily, ReplicateBatch,
    TestFunction, VarianceBreakdown,
};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, Tolerances};
use crate::error::Result;
use crate::output::{self, Document, Metadata, MomentRow};

/// Execution settings that must not influence results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunContext {
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// False when a check failed; `--strict` turns this into a nonzero exit.
    pub passed: bool,
    /// Human-readable summary for stdout.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

pub fn run(config: &ExperimentConfig, command: Command, ctx: &RunContext) -> Result<RunReport> {
    config.validate()?;
    output::ensure_dir(&config.output)?;
    match command {
        Command::Density => density(config),
        Command::Moments => moments(config),
        Command::Variance => variance(config, ctx),
        Command::Simulate => simulate(config, ctx),
        Command::Verify => verify(config, ctx),
    }
}

fn density(cfg: &ExperimentConfig) -> Result<RunReport> {
    let fam = FussCatalanFamily::new(cfg.family.m)?;
    let n = cfg.grid_points;
    // cell midpoints stay off the divergent origin and the edge
    let mid = |i: usize| (i as f64 + 0.5) / n as f64;
    let plain: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = fam.k_m() * mid(i);
            (x, fam.density_at(x))
        })
        .collect();
    let sym: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let l = fam.a() * (2.0 * mid(i) - 1.0);
            (l, fam.sym_density_at(l))
        })
        .collect();
    let artifacts = vec![
        output::write_bytes(&cfg.output.join("density.csv"), &output::grid_csv(&plain)?)?,
        output::write_bytes(&cfg.output.join("symmetrized_density.csv"), &output::grid_csv(&sym)?)?,
    ];
    let summary = format!(
        "density grids for m = {} on (0, {:.6}) and (-{:.6}, {:.6}), {n} points each\n",
        fam.m(),
        fam.k_m(),
        fam.a(),
        fam.a()
    );
    Ok(RunReport {
        passed: true,
        summary,
        artifacts,
    })
}

fn moments(cfg: &ExperimentConfig) -> Result<RunReport> {
    let fam = FussCatalanFamily::new(cfg.family.m)?;
    let mut rows = Vec::new();
    let mut passed = true;
    for k in 0..=cfg.max_k {
        let exact = fc_number(fam.m(), k)?.to_string();
        let exact_f: f64 = exact.parse().expect("decimal integer");
        let q = fam.moment(k)?.value;
        let abs_diff = (q - exact_f).abs();
        // absolute up to 1, relative beyond
        passed &= abs_diff <= cfg.tolerances.quadrature * exact_f.max(1.0);
        rows.push(MomentRow {
            k,
            fc_number: exact,
            quadrature: q,
            abs_diff,
        });
    }
    let path = output::write_bytes(&cfg.output.join("moments.csv"), &output::moments_csv(&rows)?)?;
    let mut summary = format!("{:>3} {:>24} {:>26} {:>10}\n", "k", "fc_number", "quadrature", "abs_diff");
    for r in &rows {
        writeln!(summary, "{:>3} {:>24} {:>26.12} {:>10.2e}", r.k, r.fc_number, r.quadrature, r.abs_diff).unwrap();
    }
    Ok(RunReport {
        passed,
        summary,
        artifacts: vec![path],
    })
}

#[derive(Serialize)]
struct VariancePayload {
    family_m: u32,
    breakdown: VarianceBreakdown,
}

fn variance(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<RunReport> {
    let fam = FussCatalanFamily::new(cfg.family.m)?;
    let breakdown = total_variance(&cfg.test_function, cfg.effective_kappa4(), &fam)?;
    let passed = breakdown.quadrature_error_estimate <= cfg.tolerances.quadrature;
    let doc = Document::new(
        "variance",
        &VariancePayload {
            family_m: fam.m(),
            breakdown,
        },
        Metadata::now(ctx.workers),
    )?;
    let text = doc.to_pretty()?;
    let path = output::write_bytes(&cfg.output.join("variance.json"), text.as_bytes())?;
    Ok(RunReport {
        passed,
        summary: text,
        artifacts: vec![path],
    })
}

#[derive(Serialize)]
struct EnsembleEcho {
    test_function: TestFunction,
    entry: EntryDistribution,
    n: usize,
    replicates: usize,
    master_seed: u64,
    retain_spectra: bool,
}

impl EnsembleEcho {
    fn of(cfg: &ExperimentConfig) -> Self {
        EnsembleEcho {
            test_function: cfg.test_function.clone(),
            entry: cfg.entry,
            n: cfg.n,
            replicates: cfg.replicates,
            master_seed: cfg.master_seed,
            retain_spectra: cfg.retain_spectra,
        }
    }
}

#[derive(Serialize)]
struct BatchSummary {
    completed: usize,
    failures: Vec<ReplicateFailure>,
    sample_mean: Option<f64>,
    sample_variance: Option<f64>,
    replicates_csv_sha256: String,
    spectra_csv_sha256: Option<String>,
    /// Pooled KS distance of the retained spectra to the limiting law.
    esd_ks_distance: Option<f64>,
}

struct BatchOutcome {
    batch: ReplicateBatch,
    summary: BatchSummary,
    artifacts: Vec<PathBuf>,
}

fn simulate_batch(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<BatchOutcome> {
    let spec = EnsembleSpec {
        n: cfg.n,
        entry: cfg.entry,
        master_seed: cfg.master_seed,
        replicates: cfg.replicates,
    };
    let options = BatchOptions {
        retain_spectra: cfg.retain_spectra,
        workers: ctx.workers,
    };
    let batch = run_batch_with(&spec, &cfg.test_function, &options)?;
    let stats = batch.statistics();

    let replicates = output::replicates_csv(&batch.records)?;
    let mut artifacts = vec![output::write_bytes(&cfg.output.join("replicates.csv"), &replicates)?];
    let mut spectra_hash = None;
    let mut esd = None;
    if let Some(spectra) = &batch.spectra {
        let bytes = output::spectra_csv(&batch.records, spectra)?;
        spectra_hash = Some(output::sha256_hex(&bytes));
        artifacts.push(output::write_bytes(&cfg.output.join("spectra.csv"), &bytes)?);
        if !spectra.is_empty() {
            esd = Some(esd_ks_distance(spectra, &FussCatalanFamily::two())?);
        }
    }
    let summary = BatchSummary {
        completed: batch.records.len(),
        failures: batch.failures.clone(),
        sample_mean: (!stats.is_empty()).then(|| mean(&stats)),
        sample_variance: (stats.len() > 1).then(|| sample_variance(&stats)),
        replicates_csv_sha256: output::sha256_hex(&replicates),
        spectra_csv_sha256: spectra_hash,
        esd_ks_distance: esd,
    };
    Ok(BatchOutcome {
        batch,
        summary,
        artifacts,
    })
}

#[derive(Serialize)]
struct SimulatePayload {
    ensemble: EnsembleEcho,
    batch: BatchSummary,
}

fn simulate(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<RunReport> {
    let BatchOutcome {
        summary, mut artifacts, ..
    } = simulate_batch(cfg, ctx)?;
    let mut text = format!(
        "{} replicates of n = {} ({}, {}): {} completed, {} failed\n",
        cfg.replicates,
        cfg.n,
        cfg.entry,
        cfg.test_function,
        summary.completed,
        summary.failures.len()
    );
    if let (Some(m), Some(v)) = (summary.sample_mean, summary.sample_variance) {
        writeln!(text, "sample mean {m:.6}, sample variance {v:.6}").unwrap();
    }
    let passed = summary.failures.is_empty();
    let doc = Document::new(
        "simulate",
        &SimulatePayload {
            ensemble: EnsembleEcho::of(cfg),
            batch: summary,
        },
        Metadata::now(ctx.workers),
    )?;
    artifacts.push(output::write_bytes(&cfg.output.join("simulate.json"), doc.to_pretty()?.as_bytes())?);
    writeln!(text, "payload sha256 {}", doc.payload_sha256).unwrap();
    Ok(RunReport {
        passed,
        summary: text,
        artifacts,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct VerifyPayload {
    family_m: u32,
    ensemble: EnsembleEcho,
    kappa4: f64,
    tolerances: Tolerances,
    predicted: VarianceBreakdown,
    batch: BatchSummary,
    verdict: CltVerdict,
    checks: Vec<Check>,
    passed: bool,
}

fn verify(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<RunReport> {
    let fam = FussCatalanFamily::new(cfg.family.m)?;
    let tol = cfg.tolerances;
    let kappa4 = cfg.effective_kappa4();
    let predicted = total_variance(&cfg.test_function, kappa4, &fam)?;
    let BatchOutcome {
        batch,
        summary,
        mut artifacts,
    } = simulate_batch(cfg, ctx)?;
    // an index no replicate uses
    let bootstrap_seed = derived_seed(cfg.master_seed, usize::MAX);
    let verdict = CltVerdict::assess(&batch.statistics(), predicted.clone(), tol.bootstrap_resamples, bootstrap_seed)?;

    let checks = vec![
        Check {
            name: "no_failed_replicates",
            passed: summary.failures.is_empty(),
            detail: format!("{} of {} replicates failed", summary.failures.len(), cfg.replicates),
        },
        Check {
            name: "prediction_quadrature_error",
            passed: predicted.quadrature_error_estimate <= tol.quadrature,
            detail: format!("error estimate {:.3e} vs tolerance {:.3e}", predicted.quadrature_error_estimate, tol.quadrature),
        },
        Check {
            name: "variance_ci_meets_band",
            passed: verdict.ci_overlaps_band(tol.variance_band),
            detail: format!(
                "CI [{:.6}, {:.6}] vs band [{:.6}, {:.6}]",
                verdict.ci_low,
                verdict.ci_high,
                predicted.total * (1.0 - tol.variance_band),
                predicted.total * (1.0 + tol.variance_band)
            ),
        },
        Check {
            name: "ks_normality",
            passed: verdict.ks_p_value > tol.ks_alpha,
            detail: format!("p = {:.4} vs alpha {}", verdict.ks_p_value, tol.ks_alpha),
        },
    ];
    let passed = checks.iter().all(|c| c.passed);

    let mut text = format!(
        "predicted variance {:.6} (gaussian {:.6}, kappa4 term {:.6})\nempirical variance {:.6}, 95% CI [{:.6}, {:.6}], KS p = {:.4}\n",
        predicted.total,
        predicted.gaussian_term,
        predicted.kappa4_term,
        verdict.empirical_variance,
        verdict.ci_low,
        verdict.ci_high,
        verdict.ks_p_value
    );
    for c in &checks {
        writeln!(text, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail).unwrap();
    }

    let doc = Document::new(
        "verify",
        &VerifyPayload {
            family_m: fam.m(),
            ensemble: EnsembleEcho::of(cfg),
            kappa4,
            tolerances: tol,
            predicted,
            batch: summary,
            verdict,
            checks,
            passed,
        },
        Metadata::now(ctx.workers),
    )?;
    artifacts.push(output::write_bytes(&cfg.output.join("verify.json"), doc.to_pretty()?.as_bytes())?);
    writeln!(text, "payload sha256 {}", doc.payload_sha256).unwrap();
    Ok(RunReport {
        passed,
        summary: text,
        artifacts,
    })
}
