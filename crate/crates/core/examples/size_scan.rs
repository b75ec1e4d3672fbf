//! E/<E0> against N at fixed energy: it follows N+1 while all modes are
//! excited and saturates at a plateau ∝ √E once the high modes freeze out.
//!
//!     cargo run --release --example size_scan [collisions-per-point]

use blackbody1d::engine::Simulation;
use blackbody1d::model::{InitialCondition, Mode, ModelParams};
use blackbody1d::observables::StatsConfig;
use blackbody1d::quantize::RoundingRule;
use blackbody1d::rng::{cell_seed, RngStream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let collisions: u64 = std::env::args()
        .nth(1)
        .map_or(Ok(4_000_000), |s| s.parse())?;
    let sizes = [8, 16, 32, 64];
    let energies = [100.0, 400.0];

    println!(
        "{:>4} {:>12} {:>12} {:>6}",
        "N", "E/<E0> @100", "E/<E0> @400", "N+1"
    );
    let mut last = [0.0; 2];
    for n in sizes {
        let mut ratios = [0.0; 2];
        for (k, &e) in energies.iter().enumerate() {
            let mut sim = Simulation::new(
                ModelParams::new(n, e, Mode::Discrete)?,
                &InitialCondition::AllInParticle,
                RngStream::new(cell_seed(1, n, k, 0), 0),
                RoundingRule::Fair,
                StatsConfig::default(),
            )?;
            ratios[k] = e / sim.run(collisions)?.means.particle;
        }
        println!("{n:4} {:12.3} {:12.3} {:6}", ratios[0], ratios[1], n + 1);
        last = ratios;
    }
    println!(
        "plateau ratio E=400 vs E=100: {:.3} (√4 = 2)",
        last[1] / last[0]
    );
    Ok(())
}
