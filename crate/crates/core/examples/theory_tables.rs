//! Planck-theory reference values for the default oscillator ladder.
//!
//!     cargo run --example theory_tables

use blackbody1d::model::{DEFAULT_MASS_SCALE, DEFAULT_STIFFNESS};
use blackbody1d::theory::{
    continuum_sigma, solve_beta, total_energy, xi_theoretical, xi_truncated, TheorySpectrum,
    Truncation,
};

fn main() -> Result<(), blackbody1d::error::Error> {
    let alpha = (DEFAULT_STIFFNESS / DEFAULT_MASS_SCALE).sqrt();
    println!(
        "alpha = {alpha:.10}, continuum sigma = {:.6}\n",
        continuum_sigma(alpha)
    );

    println!(
        "{:>7} {:>10} {:>9} {:>9} {:>10} {:>11}",
        "E", "beta", "1/beta", "xi", "xi(N=64)", "residual"
    );
    for e in [1.0, 10.0, 25.0, 60.0, 100.0, 400.0, 1600.0, 10000.0] {
        let beta = solve_beta(e, alpha)?;
        let resid = (total_energy(beta, alpha, Truncation::Converged)? - e).abs() / e;
        println!(
            "{e:7} {beta:10.6} {:9.4} {:9.3} {:10.3} {resid:11.2e}",
            1.0 / beta,
            xi_theoretical(e, alpha)?,
            xi_truncated(e, alpha, Truncation::Modes(64))?,
        );
    }

    let s = TheorySpectrum::at_energy(60.0, alpha, Truncation::Modes(64))?;
    println!("\nPlanck spectrum at E = 60 (beta = {:.6}):", s.beta);
    for i in [1, 2, 4, 8, 16, 32, 64] {
        println!("  E_{i:<2} = {:.6}", s.modes[i - 1]);
    }
    println!(
        "  field energy in 64 modes {:.4}, particle 1/beta {:.4}",
        s.field_energy, s.particle_energy
    );
    Ok(())
}
