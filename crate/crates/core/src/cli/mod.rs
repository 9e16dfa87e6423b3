//! Command-line front end: scenario files, commands and output writers.

mod commands;
mod config;
mod figures;
mod io;

use std::path::PathBuf;
use std::sync::atomic::AtomicBool;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{
    analyze_critical, collapse, collapse_curves, critical, form_value, generate, sweep,
    CollapseOptions, CollapseReport, CriticalOptions, CriticalReport, CrossingObservable,
    EnsembleSummary, GraphStats, MeanDegreeFit, PathReport, RealizationStats, TauReport,
};
pub use config::{GridRange, GridSpec, RunConfig, ScenarioConfig, Spacing, SweepConfig};
pub use figures::figures;
pub use io::{fmt_f64, read_sweep, OutputFile, RunManifest, SweepRow, STATUS_OK, SWEEP_HEADER};

use crate::criticality::{CollapseBounds, FitWindow, ScalingExponents, ScalingForm};
use crate::error::{Error, Result};
use crate::model::PhotonicMode;

/// Raised by the binary's Ctrl-C handler; sweeps stop after the current point.
pub static INTERRUPTED: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Parser)]
#[command(
    name = "qnetsim",
    version,
    about = "Photonic network percolation simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides run.base_seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides run.realizations.
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    /// Output directory; overrides run.output_dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Affects speed only, never output.
    #[arg(long, global = true, env = "QNETSIM_THREADS")]
    pub threads: Option<usize>,
    /// Draw photonic links on all pairs instead of over fibers only.
    #[arg(long, global = true)]
    pub photonic_on_all_pairs: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one realization and write its nodes, edges and statistics.
    Generate {
        /// Also average the statistics over run.realizations realizations.
        #[arg(long)]
        ensemble: bool,
    },
    /// Run one ensemble per grid point of the [sweep] section.
    Sweep,
    /// Locate the critical density and fit exponents from sweep tables.
    Critical(CriticalArgs),
    /// Optimize a finite-size-scaling collapse of sweep tables.
    Collapse(CollapseArgs),
    /// Assemble per-figure CSVs from earlier outputs.
    Figures {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// sweep.csv files covering at least two system sizes.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = CrossingObservable::S2OverS1)]
    pub observable: CrossingObservable,
    /// Lower end of the relative Δρ window of the β fit.
    #[arg(long, default_value_t = 0.1)]
    pub beta_window_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta_window_max: f64,
    #[arg(long, default_value_t = 2)]
    pub tau_min_size: usize,
    #[arg(long)]
    pub tau_max_size: Option<usize>,
    /// Logarithmic bins per decade for n(s); 0 fits raw sizes.
    #[arg(long, default_value_t = 5)]
    pub tau_bins_per_decade: u32,
    /// Path scaling uses rows with ρ at least this multiple of ρ_c.
    #[arg(long, default_value_t = 1.1)]
    pub path_min_rho_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    OrderParameter,
    Susceptibility,
    ClusterSize,
    S2Ratio,
}

impl From<FormArg> for ScalingForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::OrderParameter => ScalingForm::OrderParameter,
            FormArg::Susceptibility => ScalingForm::Susceptibility,
            FormArg::ClusterSize => ScalingForm::ClusterSize,
            FormArg::S2Ratio => ScalingForm::S2Ratio,
        }
    }
}

#[derive(Debug, Args)]
pub struct CollapseArgs {
    /// sweep.csv files covering at least two system sizes.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub form: FormArg,
    /// Critical density; alternatively read from --critical.
    #[arg(long, conflicts_with = "critical")]
    pub rho_c: Option<f64>,
    /// critical.json whose rho_c is used.
    #[arg(long)]
    pub critical: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub nu_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub nu_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub amp_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub amp_max: f64,
    #[arg(long, default_value_t = 41)]
    pub grid_steps: usize,
    #[arg(long, default_value_t = 2.0)]
    pub nu0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub amp0: f64,
    /// Keep only points with |ρ − ρ_c|/ρ_c at most this.
    #[arg(long)]
    pub max_abs_delta: Option<f64>,
    /// Ignore recorded standard errors.
    #[arg(long)]
    pub unweighted: bool,
}

impl Cli {
    /// Scenario from `--config` (or defaults) with command-line overrides applied.
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.base_seed = s;
        }
        if let Some(r) = self.realizations {
            cfg.run.realizations = r;
        }
        if let Some(o) = &self.out {
            cfg.run.output_dir = o.clone();
        }
        if self.photonic_on_all_pairs {
            cfg.model.photonic_mode = PhotonicMode::AllPairs;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn analysis_out_dir(&self) -> Result<PathBuf> {
        Ok(match (&self.out, &self.config) {
            (Some(o), _) => o.clone(),
            (None, Some(_)) => self.scenario()?.run.output_dir,
            (None, None) => RunConfig::default().output_dir,
        })
    }
}

fn read_rho_c(path: &std::path::Path) -> Result<f64> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    v.get("rho_c")
        .and_then(|r| r.as_f64())
        .ok_or_else(|| Error::Schema {
            path: path.to_path_buf(),
            reason: "no numeric rho_c field".into(),
        })
}

fn dispatch(cli: &Cli) -> Result<Vec<OutputFile>> {
    match &cli.command {
        Command::Generate { ensemble } => generate(&cli.scenario()?, *ensemble),
        Command::Sweep => sweep(&cli.scenario()?, &INTERRUPTED),
        Command::Critical(a) => {
            let opts = CriticalOptions {
                observable: a.observable,
                beta_window: FitWindow::new(Some(a.beta_window_min), Some(a.beta_window_max)),
                tau_min_size: a.tau_min_size,
                tau_max_size: a.tau_max_size,
                tau_bins_per_decade: a.tau_bins_per_decade,
                path_min_rho_ratio: a.path_min_rho_ratio,
            };
            critical(&a.inputs, &opts, &cli.analysis_out_dir()?)
        }
        Command::Collapse(a) => {
            let rho_c = match (a.rho_c, &a.critical) {
                (Some(r), _) => r,
                (None, Some(p)) => read_rho_c(p)?,
                (None, None) => {
                    return Err(Error::Config("collapse needs --rho-c or --critical".into()))
                }
            };
            let opts = CollapseOptions {
                form: a.form.into(),
                rho_c,
                bounds: CollapseBounds {
                    nu: (a.nu_min, a.nu_max),
                    amplitude: (a.amp_min, a.amp_max),
                    grid_steps: a.grid_steps,
                },
                initial: ScalingExponents {
                    nu: a.nu0,
                    amplitude: a.amp0,
                },
                max_abs_delta: a.max_abs_delta,
                use_stderr: !a.unweighted,
            };
            collapse(&a.inputs, &opts, &cli.analysis_out_dir()?)
        }
        Command::Figures { input } => figures(input, &cli.analysis_out_dir()?),
    }
}

/// Runs the parsed command on a pool of `--threads` workers.
pub fn run(cli: &Cli) -> Result<Vec<OutputFile>> {
    match cli.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}
