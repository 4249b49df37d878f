//! `graphnas`: generate relational graphs, featurize them, fit and select
//! surrogates, rewire under surrogate guidance and export plot data.

mod artifacts;
mod commands;
mod manifest;
mod toy;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphnas_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_CONVERGED: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

/// A command outcome other than plain success.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }

    pub fn converged(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONVERGED,
            message: message.into(),
        }
    }

    /// Prefixes the message with what was being done.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        Failure {
            code: self.code,
            message: format!("{what}: {}", self.message),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_INVALID,
            Error::Io(_) | Error::Diverged { .. } => EXIT_INTERNAL,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

#[derive(Parser, Debug)]
#[command(name = "graphnas", version, about = "Architecture search in relational-graph space")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Experiment manifest (TOML). Defaults apply when omitted.
    #[arg(long, global = true, env = "GRAPHNAS_MANIFEST")]
    pub manifest: Option<PathBuf>,
    /// Root seed; overrides the manifest.
    #[arg(long, global = true, env = "GRAPHNAS_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for featurization, training and multi-seed search.
    #[arg(long, global = true, env = "GRAPHNAS_WORKERS")]
    pub workers: Option<usize>,
    /// Artifact directory; overrides the manifest.
    #[arg(long, global = true, env = "GRAPHNAS_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the WS-flex graph pool.
    Generate,
    /// Compute the 26 features of every pool graph.
    Featurize,
    /// Train the toy masked MLP of every pool graph and join the errors
    /// onto the feature table.
    TrainToy,
    /// Fit the linear surrogate.
    Fit,
    /// Sequential forward selection, fixed-first sweep and similarity matrix.
    Sfs,
    /// Surrogate-guided rewiring.
    Search(SearchArgs),
    /// Collect per-figure CSVs from the artifact directory.
    ExportPlots,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Surrogate model JSON; defaults to `model.json` in the output directory.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Start graph: `auto`, `worst`, `best`, a pool id or an edge-list file.
    #[arg(long)]
    pub start: Option<String>,
    /// Run this many seeds and write bucketed quartiles.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Measure every accepted graph; `toy` trains the toy MLP.
    #[arg(long, value_parser = ["toy"])]
    pub validate: Option<String>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(w) = cli.global.workers {
        if w == 0 {
            return Err(Failure::invalid("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::internal(format!("worker pool: {e}")))?;
    }
    let loaded = manifest::Loaded::load(
        cli.global.manifest.as_deref(),
        std::env::vars(),
        cli.global.seed,
        cli.global.out.as_deref(),
    )?;
    let ctx = commands::Context::new(loaded);
    match cli.command {
        Command::Generate => commands::generate(&ctx),
        Command::Featurize => commands::featurize(&ctx),
        Command::TrainToy => commands::train_toy(&ctx),
        Command::Fit => commands::fit(&ctx),
        Command::Sfs => commands::sfs(&ctx),
        Command::Search(args) => commands::search(&ctx, &args),
        Command::ExportPlots => commands::export_plots(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("graphnas: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
