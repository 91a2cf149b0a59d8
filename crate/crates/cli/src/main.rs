//! `sturmian`: continued-fraction statistics, approximant spectra, wavepacket
//! transport and the constant dashboard, with reproducible CSV/JSON output.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, ModelName, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sturmian", version, about = "Sturmian Jacobi operators: spectra, trace maps and transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partial-quotient statistics of a continued fraction.
    CfStats(CfStatsArgs),
    /// Band enumeration, counting tables and dimension bounds.
    Spectrum(SpectrumArgs),
    /// Wavepacket spreading, outside probabilities and exponent fits.
    Transport(TransportArgs),
    /// D, C, ξ_c and the golden-mean dimension bound.
    Constants(ConstantsArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "STURMIAN_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for `--cf random`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (recorded; the pipelines run on one thread).
    #[arg(long, env = "STURMIAN_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    /// golden, silver, random[:SEED] or a comma list of quotients.
    #[arg(long)]
    cf: Option<String>,
}

#[derive(Debug, Args)]
struct CfStatsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    cf: Option<String>,
    /// Number of partial quotients.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    level: Option<usize>,
    /// Add the [4L_τ(Q), 4L_τ(P)] length bounds per band.
    #[arg(long)]
    bounds: bool,
    /// Report ξ_c and the transport exponent bound.
    #[arg(long)]
    alpha: bool,
    /// Band-edge bisection tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct TransportArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// Box size (odd).
    #[arg(long = "L")]
    size: Option<usize>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of log-spaced times.
    #[arg(long)]
    times: Option<usize>,
    /// Compare with the transfer-matrix bound at the scale N(T).
    #[arg(long)]
    bound: bool,
}

#[derive(Debug, Args)]
struct ConstantsArgs {
    #[command(flatten)]
    common: Common,
    /// Terms of the D series.
    #[arg(long)]
    d_terms: Option<u64>,
    /// c grid for ξ_c as a:b:step.
    #[arg(long)]
    xi_grid: Option<String>,
    /// λ1 of the golden-mean dimension bound.
    #[arg(long)]
    l1: Option<f64>,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl Common {
    fn apply(&self, cfg: RunConfig) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            format: self.format,
            seed: self.seed,
            threads: self.threads,
            out_dir: self.out.clone(),
            ..cfg
        };
        Ok(base.override_with(&flags))
    }
}

impl ModelArgs {
    fn into_config(self) -> RunConfig {
        RunConfig { model: self.model, l1: self.l1, l2: self.l2, cf: self.cf, ..Default::default() }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, cfg) = match cli.command {
        Command::CfStats(a) => {
            let c = RunConfig { cf: a.cf, k: a.k, ..Default::default() };
            ("cf-stats", a.common.apply(c)?)
        }
        Command::Spectrum(a) => {
            let c = RunConfig {
                level: a.level,
                bounds: flag(a.bounds),
                alpha: flag(a.alpha),
                tol: a.tol,
                ..a.model.into_config()
            };
            ("spectrum", a.common.apply(c)?)
        }
        Command::Transport(a) => {
            let c = RunConfig {
                size: a.size,
                tmin: a.tmin,
                tmax: a.tmax,
                times: a.times,
                bound: flag(a.bound),
                ..a.model.into_config()
            };
            ("transport", a.common.apply(c)?)
        }
        Command::Constants(a) => {
            let c = RunConfig { d_terms: a.d_terms, xi_grid: a.xi_grid, l1: a.l1, ..Default::default() };
            ("constants", a.common.apply(c)?)
        }
    };
    cfg.check_common()?;
    let (cfg, report, status) = match name {
        "cf-stats" => commands::cf_stats(cfg)?,
        "spectrum" => commands::spectrum(cfg)?,
        "transport" => commands::transport(cfg)?,
        _ => commands::constants(cfg)?,
    };
    for p in report::write(&report, name, &cfg)? {
        println!("wrote {}", p.display());
    }
    status
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
