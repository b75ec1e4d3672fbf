//! Discrete (integer-action) model: the time-averaged spectrum follows Planck's
//! law at the β fixed by the total energy, whatever the initial condition.
//!
//!     cargo run --release --example planck_spectrum [collisions]

use blackbody1d::analysis::spectrum_distance;
use blackbody1d::engine::Simulation;
use blackbody1d::model::{InitialCondition, Mode, ModelParams};
use blackbody1d::observables::{ipr, StatsConfig};
use blackbody1d::quantize::RoundingRule;
use blackbody1d::rng::RngStream;
use blackbody1d::theory::{equipartition_energy, xi_theoretical, TheorySpectrum, Truncation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let collisions: u64 = std::env::args()
        .nth(1)
        .map_or(Ok(10_000_000), |s| s.parse())?;
    let params = ModelParams::new(64, 60.0, Mode::Discrete)?;
    let n = params.n_oscillators();
    let theory =
        TheorySpectrum::at_energy(params.total_energy(), params.alpha(), Truncation::Modes(n))?;
    let flat = vec![equipartition_energy(params.total_energy(), n); n];

    let mut spectra = Vec::new();
    for (label, ic) in [
        ("all in particle", InitialCondition::AllInParticle),
        ("all in mode 32", InitialCondition::AllInOscillator(32)),
    ] {
        let mut sim = Simulation::new(
            params,
            &ic,
            RngStream::new(1, 0),
            RoundingRule::Fair,
            StatsConfig::default(),
        )?;
        let means = sim.run(collisions)?.means;
        println!(
            "{label:16} <E0> = {:.3}  l = {:.2}  d(Planck) = {:.4}  d(flat) = {:.4}",
            means.particle,
            ipr(&means.modes)?,
            spectrum_distance(&means.modes, &theory.modes)?,
            spectrum_distance(&means.modes, &flat)?,
        );
        spectra.push(means.modes);
    }
    println!(
        "mutual distance {:.4}",
        spectrum_distance(&spectra[0], &spectra[1])?
    );
    println!(
        "beta = {:.5}, xi = {:.2}",
        theory.beta,
        xi_theoretical(params.total_energy(), params.alpha())?
    );

    println!("\n  i   measured   Planck");
    for i in [1, 2, 4, 8, 16, 24, 32, 40, 48, 64] {
        println!(
            "{i:3}  {:9.4}  {:7.4}",
            spectra[0][i - 1],
            theory.modes[i - 1]
        );
    }
    Ok(())
}
