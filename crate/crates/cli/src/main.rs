use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fc_clt_cli::{run, workers_from_env, CliError, Command, ExperimentConfig, Overrides, RunContext};
use fc_clt_core::{EntryDistribution, TestFunction};

/// Fuss-Catalan spectral laws and CLT variance checks for products of two
/// random matrices.
#[derive(Parser)]
#[command(name = "fc-clt-lab", version)]
struct Cli {
    /// Exit with status 2 when a check fails.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the command named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Density grids of the limiting law and its symmetrization.
    Density {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid points per curve.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Exact Fuss-Catalan numbers against quadrature moments.
    Moments {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        max_k: Option<u32>,
    },
    /// Predicted limiting variance of a linear statistic.
    Variance {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        function: FunctionArgs,
        /// Fourth cumulant of the entries; defaults to that of --entry.
        #[arg(long, allow_negative_numbers = true)]
        kappa4: Option<f64>,
        #[arg(long)]
        entry: Option<EntryDistribution>,
    },
    /// Monte Carlo batch of linear statistics.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        ensemble: EnsembleArgs,
    },
    /// Prediction, simulation and statistical checks in one run.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Relative half-width of the variance acceptance band.
        #[arg(long)]
        band: Option<f64>,
        /// KS significance level.
        #[arg(long)]
        ks_alpha: Option<f64>,
        #[arg(long)]
        resamples: Option<usize>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Order of the product family.
    #[arg(long)]
    m: Option<u32>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Acceptable quadrature error.
    #[arg(long)]
    quad_tol: Option<f64>,
}

#[derive(Args)]
struct FunctionArgs {
    /// Test function, e.g. identity, square, monomial(3), gaussian_bump(1.25,0.25), cosine(1.5).
    #[arg(long = "f")]
    test_function: Option<TestFunction>,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Entry law: gaussian, rademacher, uniform or three_point(p).
    #[arg(long)]
    entry: Option<EntryDistribution>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep spectra and write spectra.csv.
    #[arg(long)]
    retain_spectra: bool,
}

fn resolve(sub: Sub) -> Result<(ExperimentConfig, Command), CliError> {
    let load = |path: &Option<PathBuf>| match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    };
    let common_overrides = |c: &CommonArgs| Overrides {
        m: c.m,
        output: c.output.clone(),
        quadrature: c.quad_tol,
        ..Default::default()
    };
    let ensemble_overrides = |o: &mut Overrides, e: EnsembleArgs| {
        o.entry = e.entry;
        o.n = e.n;
        o.replicates = e.replicates;
        o.master_seed = e.seed;
        o.retain_spectra = e.retain_spectra.then_some(true);
    };
    let (command, config_path, overrides) = match sub {
        Sub::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let command = cfg
                .command
                .ok_or_else(|| CliError::Config(format!("{}: `command` is required for run", config.display())))?;
            return Ok((cfg, command));
        }
        Sub::Density { common, points } => {
            let mut o = common_overrides(&common);
            o.grid_points = points;
            (Command::Density, common.config, o)
        }
        Sub::Moments { common, max_k } => {
            let mut o = common_overrides(&common);
            o.max_k = max_k;
            (Command::Moments, common.config, o)
        }
        Sub::Variance {
            common,
            function,
            kappa4,
            entry,
        } => {
            let mut o = common_overrides(&common);
            o.test_function = function.test_function;
            o.kappa4 = kappa4;
            o.entry = entry;
            (Command::Variance, common.config, o)
        }
        Sub::Simulate {
            common,
            function,
            ensemble,
        } => {
            let mut o = common_overrides(&common);
            o.test_function = function.test_function;
            ensemble_overrides(&mut o, ensemble);
            (Command::Simulate, common.config, o)
        }
        Sub::Verify {
            common,
            function,
            ensemble,
            band,
            ks_alpha,
            resamples,
        } => {
            let mut o = common_overrides(&common);
            o.test_function = function.test_function;
            ensemble_overrides(&mut o, ensemble);
            o.variance_band = band;
            o.ks_alpha = ks_alpha;
            o.bootstrap_resamples = resamples;
            (Command::Verify, common.config, o)
        }
    };
    let mut cfg = load(&config_path)?;
    if let Some(c) = cfg.command {
        if c != command {
            return Err(CliError::Config(format!("config is for `{c}`, not `{command}`")));
        }
    }
    overrides.apply(&mut cfg);
    Ok((cfg, command))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(cli.command).and_then(|(cfg, command)| {
        let ctx = RunContext {
            workers: workers_from_env()?,
        };
        run(&cfg, command, &ctx)
    });
    match outcome {
        Ok(report) => {
            print!("{}", report.summary);
            for a in &report.artifacts {
                eprintln!("wrote {}", a.display());
            }
            if cli.strict && !report.passed {
                eprintln!("one or more checks failed");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
