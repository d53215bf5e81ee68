mod commands;
mod config;
mod error;
mod report;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};
use grassmannian::grassmann::Tolerances;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::report::SuiteReport;

/// Geometry of complex Grassmannians and reconstruction of the operators
/// inducing their transformations.
#[derive(Debug, Parser)]
#[command(name = "grassmannian", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Principal angles, transition probability and relations of two subspaces.
    Angles(Common),
    /// Relation table for sampled or supplied pairs.
    Relations(Common),
    /// Grassmann graph of an apartment or of supplied vertices.
    Graph(Common),
    /// Run the combinatorial and operator invariant suites.
    VerifyLemmas {
        #[command(flatten)]
        common: Common,
        /// Tighten every tolerance to 1e-30 so that checks fail.
        #[arg(long)]
        force_failure: bool,
    },
    /// Reconstruct the operator inducing a transformation.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Generate an anti-unitary ground truth instead of a unitary one.
        #[arg(long)]
        antiunitary: bool,
        /// Stars sampled per level for the descent witness.
        #[arg(long, default_value_t = 5)]
        stars: usize,
    },
    /// Wild orthogonality-preserving map at n = 2k.
    WildDemo(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Ambient dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Subspace dimension.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative rank tolerance.
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Angle tolerance in radians.
    #[arg(long)]
    tol_angle: Option<f64>,
    /// Sample count (pairs, operators or validation subspaces).
    #[arg(long)]
    pairs: Option<usize>,
    /// Input JSON file; repeat for commands taking two.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Common {
    fn into_config(self, command: &str) -> Result<RunConfig, CliError> {
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            rank: self.tol_rank.unwrap_or(defaults.rank),
            angle: self.tol_angle.unwrap_or(defaults.angle),
            commutator: defaults.commutator,
        };
        for (flag, v) in [("--tol-rank", tolerances.rank), ("--tol-angle", tolerances.angle)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{flag} must be a positive number")));
            }
        }
        Ok(RunConfig {
            command: command.to_string(),
            n: self.n,
            k: self.k,
            seed: self.seed,
            tolerances,
            pairs: self.pairs,
            inputs: self.inputs,
            output: self.out,
            format: self.format,
            force_failure: false,
            antiunitary: false,
            stars: 5,
        })
    }
}

fn run(cli: Cli) -> Result<SuiteReport, CliError> {
    let started = SystemTime::now();
    let mut report = match cli.command {
        Command::Angles(c) => commands::angles(c.into_config("angles")?),
        Command::Relations(c) => commands::relations(c.into_config("relations")?),
        Command::Graph(c) => commands::graph(c.into_config("graph")?),
        Command::VerifyLemmas { common, force_failure } => {
            let mut cfg = common.into_config("verify-lemmas")?;
            cfg.force_failure = force_failure;
            commands::verify_lemmas(cfg)
        }
        Command::Reconstruct { common, antiunitary, stars } => {
            let mut cfg = common.into_config("reconstruct")?;
            cfg.antiunitary = antiunitary;
            cfg.stars = stars;
            commands::reconstruct(cfg)
        }
        Command::WildDemo(c) => commands::wild_demo(c.into_config("wild-demo")?),
    }?;
    report.stamp(started);
    Ok(report)
}

fn emit(report: &SuiteReport) -> Result<(), CliError> {
    let text = match report.config.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    match &report.config.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write { path: path.clone(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Failed(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli).and_then(|report| {
        emit(&report)?;
        Ok(report)
    });
    match outcome {
        Ok(report) if report.pass => ExitCode::SUCCESS,
        Ok(report) => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {}", c.name, c.detail);
            }
            if let Some(f) = &report.failure {
                eprintln!("failed at stage {}: {}", f.stage, f.message);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
