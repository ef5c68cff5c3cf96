//! Command-line front end for `onetangle`.
//!
//! Each subcommand reads an optional TOML configuration, runs inside a rayon
//! pool of the requested size and writes CSV or JSON files into `--out`.
//! Exit codes: 0 success, 2 configuration error, 3 numerical invariant
//! violated, 4 resource limit, 1 anything else (I/O).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use onetangle::evolution::EvolutionKind;

pub mod commands;
pub mod config;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("{0}")]
    Core(#[from] onetangle::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use onetangle::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) | E::Unsupported(_) | E::Parse(_) => 2,
                E::NoCrossing(_) => 3,
                E::ResourceLimit(_) => 4,
                E::Io(_) | E::Csv(_) => 1,
            },
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvolutionArg {
    Free,
    Cpmg,
}

impl From<EvolutionArg> for EvolutionKind {
    fn from(e: EvolutionArg) -> Self {
        match e {
            EvolutionArg::Free => EvolutionKind::Free,
            EvolutionArg::Cpmg => EvolutionKind::Cpmg,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tangle", version, about = "One-tangling power of central-spin evolutions")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "TANGLE_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Makhlin invariant and one-tangling power of one nucleus against time.
    G1 {
        #[arg(long, value_enum)]
        evolution: Option<EvolutionArg>,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Electronic one-tangling power of a Gaussian dot and its dephasing time.
    Ensemble {
        #[arg(long, value_enum)]
        evolution: Option<EvolutionArg>,
        #[arg(long)]
        n: Option<u32>,
        /// Scan the Larmor frequency and report dephasing times.
        #[arg(long)]
        omega_sweep: bool,
    },
    /// One-tangling power over (|a|/nu, Delta_Q/nu).
    Sweep2d {
        #[arg(long, value_enum)]
        evolution: Option<EvolutionArg>,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Smallest nuclear level spacing over (|a|/nu, Delta_Q/nu).
    Gapmap {
        /// Include the non-collinear term in the eigenvalues.
        #[arg(long)]
        full: bool,
    },
    /// Zeros of the simplified invariant.
    Resonances,
    /// Level-crossing conditions of the diagonal Hamiltonian.
    DegeneracyTable,
    /// Brute-force oracles against the closed-form one-tangling powers.
    OracleCheck,
}

/// Parsed invocation with the configuration already loaded.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
    pub format: Format,
}

impl Invocation {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let config = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Ok(Self {
            seed: cli.seed.or(config.seed).unwrap_or(0),
            threads: cli.threads.or(config.threads).unwrap_or(0),
            command: cli.command,
            config,
            out: cli.out,
            format: cli.format,
        })
    }
}

/// Runs the invocation in its own thread pool; returns the files written.
pub fn run(inv: &Invocation) -> Result<Vec<PathBuf>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(inv.threads)
        .build()
        .map_err(|e| CliError::Resource(format!("cannot start thread pool: {e}")))?;
    std::fs::create_dir_all(&inv.out)?;
    pool.install(|| commands::dispatch(inv))
}

/// Parses arguments, runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = Invocation::from_cli(cli).and_then(|inv| run(&inv));
    match outcome {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("tangle: {e}");
            e.exit_code()
        }
    }
}
