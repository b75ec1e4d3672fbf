//! Running means of a few modes on a logarithmic time grid; low modes
//! converge quickly, high (light, fast) modes much more slowly.
//!
//!     cargo run --release --example convergence [classical|discrete] [collisions]

use blackbody1d::engine::Simulation;
use blackbody1d::model::{InitialCondition, Mode, ModelParams};
use blackbody1d::observables::StatsConfig;
use blackbody1d::quantize::RoundingRule;
use blackbody1d::rng::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mode: Mode = args.next().map_or(Ok(Mode::Classical), |s| s.parse())?;
    let collisions: u64 = args.next().map_or(Ok(10_000_000), |s| s.parse())?;

    let config = StatsConfig {
        snapshot_ratio: 10f64.sqrt(),
        ..StatsConfig::default()
    };
    let mut sim = Simulation::new(
        ModelParams::new(64, 60.0, mode)?,
        &InitialCondition::AllInParticle,
        RngStream::new(1, 0),
        RoundingRule::Fair,
        config.clone(),
    )?;
    sim.run(collisions)?;
    sim.stats_mut().finish();

    print!("{:>10} {:>8}", "t", "E0");
    for i in &config.snapshot_modes {
        print!(" {:>8}", format!("E{i}"));
    }
    println!();
    for s in sim.stats().snapshots() {
        print!("{:>10} {:8.4}", s.collisions, s.mean_particle);
        for e in &s.mean_modes {
            print!(" {e:8.4}");
        }
        println!();
    }
    Ok(())
}
