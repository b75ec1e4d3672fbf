//! Finite-size scaling: l/N as a function of ξ/N falls on one curve for all
//! N, and writes sweep.csv, collapse.csv and fits.json to out/collapse.
//!
//!     cargo run --release --example localization_collapse [collisions-per-point] [workers]

use blackbody1d::commands::sweep_command;
use blackbody1d::config::{parse_config, Config};

const GRID: &str = "
[model]
mode = discrete

[sweep]
N = 8,16,32,64
E = 25,100,225,400,1600

[output]
dir = out/collapse
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let Config::Sweep(mut config) = parse_config(GRID)? else {
        unreachable!("grid has a [sweep] section")
    };
    if let Some(c) = args.next() {
        config.collisions = c.parse()?;
    }
    if let Some(w) = args.next() {
        config.workers = w.parse()?;
    }
    let outcome = sweep_command(&config)?;
    let collapse = outcome.collapse.expect("four oscillator counts");

    println!("{:>4} {:>7} {:>8} {:>8}", "N", "E", "xi/N", "l/N");
    let mut rows = collapse.rows.clone();
    rows.sort_by(|a, b| a.x.total_cmp(&b.x));
    for r in &rows {
        println!(
            "{:4} {:7} {:8.4} {:8.4}",
            r.n_oscillators, r.total_energy, r.x, r.y
        );
    }
    println!("binned spread {:.4}", collapse.spread);
    println!("outputs in {}", config.output_dir.display());
    Ok(())
}
