//! Energy against particle temperature at N = 64 in the discrete model:
//! E = σT² at low energy (Stefan-Boltzmann in one dimension), E = (N+1)T
//! once every mode is excited, with the crossover near N²/σ.
//!
//!     cargo run --release --example stefan_boltzmann [collisions-per-point] [workers]

use blackbody1d::commands::run_sweep;
use blackbody1d::config::SweepConfig;
use blackbody1d::model::{
    InitialCondition, Mode, DEFAULT_HEAVY_MASS, DEFAULT_MASS_SCALE, DEFAULT_STIFFNESS,
};
use blackbody1d::observables::StatsConfig;
use blackbody1d::quantize::RoundingRule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let collisions: u64 = args.next().map_or(Ok(4_000_000), |s| s.parse())?;
    let workers: usize = args.next().map_or(Ok(1), |s| s.parse())?;
    let e_values: Vec<f64> = (0..16)
        .map(|j| 10.0 * 400f64.powf(j as f64 / 15.0))
        .collect();

    let config = SweepConfig {
        mode: Mode::Discrete,
        heavy_mass: DEFAULT_HEAVY_MASS,
        mass_scale: DEFAULT_MASS_SCALE,
        stiffness: DEFAULT_STIFFNESS,
        n_values: vec![64],
        e_values,
        seeds_per_cell: 1,
        collisions,
        workers,
        seed: 1,
        initial: InitialCondition::AllInParticle,
        rounding: RoundingRule::Fair,
        stats: StatsConfig::default(),
        output_dir: "out/stefan_boltzmann".into(),
    };
    let outcome = run_sweep(&config)?;

    println!("{:>9} {:>9} {:>9} {:>9}", "E", "<E0>", "E/<E0>²", "E/<E0>");
    for p in &outcome.points {
        let t = p.mean_particle;
        println!(
            "{:9.2} {:9.4} {:9.4} {:9.3}",
            p.total_energy,
            t,
            p.total_energy / (t * t),
            p.total_energy / t
        );
    }
    let fits = &outcome.fits.regimes[0];
    if let Some(low) = fits.low {
        println!("low-energy exponent {:.3}", low.exponent);
    }
    if let Some(high) = fits.high {
        println!("high-energy exponent {:.3}", high.exponent);
    }
    println!(
        "sigma {:?} (continuum {:.3}), high-E prefactor {:?} (N+1 = 65)",
        fits.sigma, outcome.fits.continuum_sigma, fits.high_prefactor
    );
    println!(
        "crossover {:?}, N²/sigma {:?}",
        fits.crossover, fits.crossover_prediction
    );
    Ok(())
}
