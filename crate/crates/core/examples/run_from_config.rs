//! Parse a config file and write the standard run outputs
//! (spectrum.csv, convergence.csv, summary.json, checkpoint.txt).
//!
//!     cargo run --release --example run_from_config -- path/to/run.cfg

use blackbody1d::commands::run_command;
use blackbody1d::config::{parse_config, Config};

const DEFAULT: &str = "
[model]
mode = discrete
N = 64
E = 60

[run]
collisions = 10000000
seed = 1

[output]
dir = out/run
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let Config::Run(config) = parse_config(&text)? else {
        return Err("expected a run config (no [sweep] section)".into());
    };
    print!("{}", Config::Run(config.clone()).render());
    let summary = run_command(&config)?;
    println!(
        "\n<E0> = {:.4}, l = {:.3}, xi = {:.3}, beta = {:.5}, drift = {:.2e}",
        summary.mean_particle, summary.l, summary.xi, summary.beta, summary.drift
    );
    println!("wrote {}", config.output_dir.display());
    Ok(())
}
