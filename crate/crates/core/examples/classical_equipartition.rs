//! Classical model: every mode and the particle settle at E/(N+1).
//!
//!     cargo run --release --example classical_equipartition [collisions]

use blackbody1d::engine::Simulation;
use blackbody1d::model::{InitialCondition, Mode, ModelParams};
use blackbody1d::observables::StatsConfig;
use blackbody1d::quantize::RoundingRule;
use blackbody1d::rng::RngStream;
use blackbody1d::theory::equipartition_energy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let collisions: u64 = std::env::args()
        .nth(1)
        .map_or(Ok(40_000_000), |s| s.parse())?;
    let params = ModelParams::new(64, 60.0, Mode::Classical)?;
    let mut sim = Simulation::new(
        params,
        &InitialCondition::AllInParticle,
        RngStream::new(1, 0),
        RoundingRule::Fair,
        StatsConfig::default(),
    )?;
    let report = sim.run(collisions)?;
    let target = equipartition_energy(params.total_energy(), params.n_oscillators());

    println!("equipartition E/(N+1) = {target:.4}");
    println!(
        "particle  {:.4}  ({:+.1}%)",
        report.means.particle,
        100.0 * (report.means.particle / target - 1.0)
    );
    for (i, e) in (1..).zip(&report.means.modes) {
        if i % 8 == 1 || i == 64 {
            println!("mode {i:3}  {e:.4}  ({:+.1}%)", 100.0 * (e / target - 1.0));
        }
    }
    let worst = report
        .means
        .modes
        .iter()
        .map(|e| (e / target - 1.0).abs())
        .fold(0.0, f64::max);
    println!(
        "worst mode deviation {:.1}%, drift {:.2e}",
        100.0 * worst,
        report.drift
    );
    Ok(())
}
