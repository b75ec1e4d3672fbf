use std::path::PathBuf;
use std::process::ExitCode;

use blackbody1d::commands::{
    analyze_command, resume_command, run_command, sweep_command, theory_command, TheoryQuery,
};
use blackbody1d::config::{parse_config, Config};
use blackbody1d::error::{Error, Result};
use blackbody1d::model::{DEFAULT_MASS_SCALE, DEFAULT_STIFFNESS};
use clap::{Parser, Subcommand};

/// One-dimensional black-body simulator.
#[derive(Parser)]
#[command(name = "blackbody", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation described by a config file.
    Run {
        config: PathBuf,
        /// Continue from this checkpoint instead of starting afresh
        /// (model and seed come from the checkpoint; `collisions` more steps are run).
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a grid of simulations described by a config file with a [sweep] section.
    Sweep { config: PathBuf },
    /// Print Planck-theory values.
    Theory {
        #[command(subcommand)]
        query: TheoryCmd,
        #[arg(long, global = true, default_value_t = DEFAULT_MASS_SCALE)]
        c: f64,
        #[arg(long, global = true, default_value_t = DEFAULT_STIFFNESS)]
        k: f64,
    },
    /// Recompute fits and the scaling collapse from an existing sweep.csv.
    Analyze {
        sweep_csv: PathBuf,
        /// Output directory (defaults to the directory of sweep.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TheoryCmd {
    /// Inverse temperature β at total energy E.
    Beta {
        #[arg(long)]
        energy: f64,
    },
    /// Planck energies of modes 1..=n.
    Spectrum {
        #[arg(long)]
        energy: f64,
        #[arg(long)]
        n: usize,
    },
    /// Planck localization length (unbounded ladder, or the first n modes).
    Xi {
        #[arg(long)]
        energy: f64,
        #[arg(long)]
        n: Option<usize>,
    },
}

fn read_config(path: &PathBuf) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    parse_config(&text)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, resume } => {
            let Config::Run(cfg) = read_config(&config)? else {
                return Err(Error::Usage(
                    "config has a [sweep] section; use `blackbody sweep`".into(),
                ));
            };
            let summary = match resume {
                Some(cp) => resume_command(&cp, cfg.collisions, &cfg.output_dir)?,
                None => run_command(&cfg)?,
            };
            eprintln!(
                "{} collisions, <E0> = {:.6}, l = {:.4}, xi = {:.4}, drift = {:.3e} -> {}",
                summary.collisions,
                summary.mean_particle,
                summary.l,
                summary.xi,
                summary.drift,
                cfg.output_dir.display()
            );
        }
        Command::Sweep { config } => {
            let Config::Sweep(cfg) = read_config(&config)? else {
                return Err(Error::Usage(
                    "config has no [sweep] section; use `blackbody run`".into(),
                ));
            };
            let outcome = sweep_command(&cfg)?;
            eprintln!(
                "{} cells -> {}",
                outcome.points.len(),
                cfg.output_dir.display()
            );
        }
        Command::Theory { query, c, k } => {
            if !(c > 0.0 && k > 0.0) {
                return Err(Error::Usage("c and k must be positive".into()));
            }
            let q = match query {
                TheoryCmd::Beta { energy } => TheoryQuery::Beta { energy },
                TheoryCmd::Spectrum { energy, n } => TheoryQuery::Spectrum { energy, modes: n },
                TheoryCmd::Xi { energy, n } => TheoryQuery::Xi { energy, modes: n },
            };
            print!("{}", theory_command(q, (k / c).sqrt())?);
        }
        Command::Analyze { sweep_csv, out } => {
            let dir =
                out.unwrap_or_else(|| sweep_csv.parent().map(PathBuf::from).unwrap_or_default());
            let outcome = analyze_command(&sweep_csv, &dir)?;
            eprintln!("{} points -> {}", outcome.points.len(), dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("blackbody: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
