//! `blowup-profiler`: roots, scans, branches, spectra and table reproduction
//! for self-similar blow-up profiles.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "blowup-profiler", version, about = "Self-similar blow-up profiles of the complex Ginzburg-Landau equation")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    /// Worker threads.
    #[arg(long, global = true, env = "BLOWUP_PROFILER_JOBS")]
    jobs: Option<usize>,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    d: Option<String>,
    #[arg(long, global = true)]
    sigma: Option<String>,
    #[arg(long, global = true)]
    eps: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    /// `zero` or `proportional:<r>`.
    #[arg(long, global = true)]
    delta_rule: Option<String>,
    /// `omega` (unknowns μ, κ) or `amplitude` (unknowns κ, ω).
    #[arg(long, global = true)]
    normalization: Option<String>,
    #[arg(long, global = true)]
    xi1: Option<String>,
    #[arg(long, global = true)]
    n_terms: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    grid_n: Option<String>,
    #[arg(long, global = true)]
    output_dir: Option<String>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Newton solve from a guess in the unknown plane of the normalization.
    Solve {
        /// `x0,x1`: `μ,κ` for `omega`, `κ,ω` for `amplitude`.
        #[arg(long)]
        guess: String,
    },
    /// All roots in a rectangle of the unknown plane, by degree bisection.
    Scan {
        /// `x0_lo,x0_hi,x1_lo,x1_hi`.
        #[arg(long)]
        rect: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Trace a branch from an `ε = 0` root, or resume a branch file.
    Branch {
        /// `μ,κ` near the `ε = 0` root with `ω = 1`.
        #[arg(long, required_unless_present = "resume", conflicts_with = "resume")]
        seed: Option<String>,
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Spectrum and stability verdict of a root or of branch points.
    Spectrum {
        /// Guess as for `solve`, at the configured `ε`, `δ`.
        #[arg(long, required_unless_present = "branch", conflicts_with = "branch")]
        root: Option<String>,
        #[arg(long)]
        branch: Option<PathBuf>,
        /// Every k-th branch point (the last one is always included).
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Reproduce the reference root tables.
    Tables {
        /// Turning points for every row, not only j ≤ 2.
        #[arg(long)]
        full: bool,
        /// Restrict to `table:j` rows, e.g. `table1:3`.
        #[arg(long = "row")]
        rows: Vec<String>,
        /// CSV `table,j,eps_star,kappa,mu,kappa_q,omega_q` replacing embedded values.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Special-function identity checks.
    KummerCheck,
}

/// How a command ended, when not successfully.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<blowup_core::Error> for Failure {
    fn from(e: blowup_core::Error) -> Self {
        // inputs are validated before any solve, so what is left is numerical
        match e {
            blowup_core::Error::Parse { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let flags = [
        ("d", &cli.d),
        ("sigma", &cli.sigma),
        ("eps", &cli.eps),
        ("delta", &cli.delta),
        ("delta_rule", &cli.delta_rule),
        ("normalization", &cli.normalization),
        ("xi1", &cli.xi1),
        ("n_terms", &cli.n_terms),
        ("tol", &cli.tol),
        ("grid_n", &cli.grid_n),
        ("output_dir", &cli.output_dir),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).map_err(Failure::Usage)?;
        }
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v).map_err(Failure::Usage)?;
    }
    cfg.validate().map_err(Failure::Usage)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli)?;
    if cli.print_config {
        print!("{}", cfg.render());
        return Ok(());
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let command = cli.command.ok_or_else(|| Failure::Usage("no subcommand given (see --help)".into()))?;
    match command {
        Command::Solve { guess } => commands::solve(&cfg, &guess),
        Command::Scan { rect, depth } => commands::scan(&cfg, &rect, depth),
        Command::Branch { seed, resume } => commands::branch(&cfg, seed.as_deref(), resume.as_deref()),
        Command::Spectrum { root, branch, every } => commands::spectrum(&cfg, root.as_deref(), branch.as_deref(), every),
        Command::Tables { full, rows, reference } => commands::tables(&cfg, full, &rows, reference.as_deref()),
        Command::KummerCheck => commands::kummer_check(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
