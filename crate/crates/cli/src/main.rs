//! `pbn`: persistent Betti numbers from point clouds, graphs and filtered
//! complexes, computed classically and by a simulated quantum estimator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::StageError;
use config::{InputKind, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "pbn", version, about = "Persistent Betti number estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate one persistent Betti number and write a JSON report.
    Run {
        #[command(flatten)]
        common: Common,
        /// Filtration scale of K.
        #[arg(long)]
        t: Option<f64>,
        /// Filtration scale of L (defaults to t).
        #[arg(long)]
        s: Option<f64>,
        /// Include wall-clock timings in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Persistent Betti numbers over a grid of scale pairs, as CSV.
    Curve {
        #[command(flatten)]
        common: Common,
        /// Comma-separated scales used for both t and s.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        /// Scales for t (overrides --grid).
        #[arg(long, value_delimiter = ',')]
        t_grid: Vec<f64>,
        /// Scales for s (overrides --grid).
        #[arg(long, value_delimiter = ',')]
        s_grid: Vec<f64>,
    },
    /// Write complexes, boundary matrices, the persistent Laplacian and its spectrum.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        /// Output directory.
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format (default: points).
    #[arg(long, value_enum)]
    kind: Option<InputKind>,
    /// Comma-separated landmark indices for witness input.
    #[arg(long, value_delimiter = ',')]
    landmarks: Option<Vec<usize>>,
    /// Vertex count for graph input.
    #[arg(long)]
    vertices: Option<usize>,
    /// Homology dimension (default: 1).
    #[arg(long)]
    q: Option<usize>,
    /// Which estimators to run (default: classical).
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Target accuracy of the simulated estimate.
    #[arg(long)]
    eps: Option<f64>,
    /// Failure probability of the sampled estimate.
    #[arg(long)]
    eta: Option<f64>,
    /// Seed for the sampled estimate.
    #[arg(long)]
    seed: Option<u64>,
    /// Lower bound on the nonzero spectrum of the L-only up-Laplacian block.
    #[arg(long)]
    gamma: Option<f64>,
    /// Lower bound on the nonzero spectrum of the persistent Laplacian.
    #[arg(long)]
    lambda: Option<f64>,
    /// Use dense exact surrogates for every approximate stage.
    #[arg(long)]
    exact: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(self, t: Option<f64>, s: Option<f64>) -> Result<RunConfig, StageError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path).map_err(|error| StageError { stage: "configuration", error })?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $( if self.$field.is_some() { c.$field = self.$field; } )* };
        }
        set!(kind, q, mode, eps, eta, seed);
        set_opt!(input, landmarks, vertices, gamma, lambda, out);
        if t.is_some() {
            c.t = t;
        }
        if s.is_some() {
            c.s = s;
        }
        c.exact |= self.exact;
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Run { common, t, s, timings } => {
            commands::run(common.resolve(t, s)?, timings)?;
        }
        Command::Curve { common, grid, t_grid, s_grid } => {
            let t_grid = if t_grid.is_empty() { grid.clone() } else { t_grid };
            let s_grid = if s_grid.is_empty() { grid } else { s_grid };
            commands::curve(common.resolve(None, None)?, &t_grid, &s_grid)?;
        }
        Command::Export { common, t, s, dir } => {
            for name in commands::export(common.resolve(t, s)?, &dir)? {
                log::info!("wrote {}", dir.join(name).display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PBN_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
