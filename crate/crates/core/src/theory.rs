//! Closed-form reference values: the one-dimensional Planck spectrum with
//! `ħ = 1`, the total-energy relation
//!
//! ```text
//! E(β) = 1/β + Σ_{i≥1} ω_i / (exp(β ω_i) − 1),   ω_i = α i
//! ```
//!
//! and quantities derived from it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::observables::{ipr, neumaier_sum};

/// Relative size below which a Planck term ends an unbounded sum.
pub const TAIL_CUTOFF: f64 = 1e-14;
/// Required relative residual of [`solve_beta`].
pub const SOLVE_TOLERANCE: f64 = 1e-10;
/// Hard cap on summed modes, reached only for absurdly hot spectra.
const MAX_MODES: usize = 500_000_000;

/// Where to stop the mode sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Sum until a term drops below [`TAIL_CUTOFF`] of the running total.
    Converged,
    /// Sum exactly the first `n` modes.
    Modes(usize),
}

/// Mean energy `ω / (exp(βω) − 1)` of a mode at inverse temperature `beta`.
///
/// Returns `1/β` at `ω = 0` and underflows cleanly to 0 for large `βω`.
pub fn planck_energy(omega: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::usage(format!("beta must be positive, got {beta}")));
    }
    if !(omega >= 0.0) {
        return Err(Error::usage(format!(
            "frequency must be nonnegative, got {omega}"
        )));
    }
    Ok(planck_unchecked(omega, beta))
}

fn planck_unchecked(omega: f64, beta: f64) -> f64 {
    let x = beta * omega;
    if x < 1e-8 {
        // ω/(e^x − 1) = (1/β)(1 − x/2 + x²/12 − ...)
        (1.0 - x / 2.0 + x * x / 12.0) / beta
    } else if x > 700.0 {
        omega * (-x).exp()
    } else {
        omega / x.exp_m1()
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::usage(format!("{name} must be positive, got {v}")))
    }
}

/// Planck energies of modes `1, 2, ...` on the ladder `ω_i = α i`.
pub fn planck_spectrum(beta: f64, alpha: f64, truncation: Truncation) -> Result<Vec<f64>> {
    check_positive("beta", beta)?;
    check_positive("alpha", alpha)?;
    Ok(spectrum_unchecked(beta, alpha, truncation, 1.0 / beta))
}

fn spectrum_unchecked(beta: f64, alpha: f64, truncation: Truncation, offset: f64) -> Vec<f64> {
    match truncation {
        Truncation::Modes(n) => (1..=n)
            .map(|i| planck_unchecked(alpha * i as f64, beta))
            .collect(),
        Truncation::Converged => {
            let mut terms = Vec::new();
            let mut running = offset;
            for i in 1..=MAX_MODES {
                let term = planck_unchecked(alpha * i as f64, beta);
                running += term;
                terms.push(term);
                if term < TAIL_CUTOFF * running {
                    break;
                }
            }
            terms
        }
    }
}

/// Total energy `1/β + Σ ω_i/(exp(βω_i) − 1)` on the ladder `ω_i = α i`.
pub fn total_energy(beta: f64, alpha: f64, truncation: Truncation) -> Result<f64> {
    check_positive("beta", beta)?;
    check_positive("alpha", alpha)?;
    Ok(total_unchecked(beta, alpha, truncation))
}

fn total_unchecked(beta: f64, alpha: f64, truncation: Truncation) -> f64 {
    let field = spectrum_unchecked(beta, alpha, truncation, 1.0 / beta);
    neumaier_sum(std::iter::once(1.0 / beta).chain(field))
}

/// The unique `β` with `total_energy(β) = energy` (converged sum).
///
/// Bisection in `log β` on a bracket grown geometrically from the
/// continuum estimate `E ≈ 1/β + π²/(6αβ²)`.
pub fn solve_beta(energy: f64, alpha: f64) -> Result<f64> {
    check_positive("energy", energy)?;
    check_positive("alpha", alpha)?;
    let f = |b: f64| total_unchecked(b, alpha, Truncation::Converged);

    let s = continuum_sigma(alpha);
    let guess = (1.0 + (1.0 + 4.0 * s * energy).sqrt()) / (2.0 * energy);
    let (mut lo, mut hi) = (guess / 2.0, guess * 2.0);
    // f decreases in β: need f(lo) ≥ E ≥ f(hi).
    let mut tries = 0;
    while f(lo) < energy {
        lo /= 4.0;
        tries += 1;
        if tries > 60 || lo < 1e-300 {
            return Err(Error::invariant(format!(
                "could not bracket beta for E = {energy}"
            )));
        }
    }
    while f(hi) > energy {
        hi *= 4.0;
        tries += 1;
        if tries > 120 || !hi.is_finite() {
            return Err(Error::invariant(format!(
                "could not bracket beta for E = {energy}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 4.0 * f64::EPSILON {
            break;
        }
    }
    let (r_lo, r_hi) = ((f(lo) - energy).abs(), (f(hi) - energy).abs());
    let (beta, resid) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
    if resid > SOLVE_TOLERANCE * energy {
        return Err(Error::invariant(format!(
            "beta solve for E = {energy} left relative residual {}",
            resid / energy
        )));
    }
    Ok(beta)
}

/// Localization length of the unbounded mode ladder: the inverse
/// participation ratio of the Planck spectrum at `solve_beta(energy)`.
pub fn xi_theoretical(energy: f64, alpha: f64) -> Result<f64> {
    xi_truncated(energy, alpha, Truncation::Converged)
}

/// Like [`xi_theoretical`] but with an explicit truncation of the spectrum
/// (β is still solved against the converged total energy).
pub fn xi_truncated(energy: f64, alpha: f64, truncation: Truncation) -> Result<f64> {
    let beta = solve_beta(energy, alpha)?;
    ipr(&planck_spectrum(beta, alpha, truncation)?)
}

/// Energy per degree of freedom at equipartition, `E/(N+1)`.
pub fn equipartition_energy(energy: f64, n_oscillators: usize) -> f64 {
    energy / (n_oscillators as f64 + 1.0)
}

/// Energy `N²/σ` of the crossover from the Stefan-Boltzmann regime to equipartition.
pub fn crossover_energy(n_oscillators: usize, sigma: f64) -> f64 {
    let n = n_oscillators as f64;
    n * n / sigma
}

/// Stefan-Boltzmann constant of the continuum limit: `Σ ω_i/(e^{βω_i}−1) → π²/(6αβ²)`.
pub fn continuum_sigma(alpha: f64) -> f64 {
    PI * PI / (6.0 * alpha)
}

/// Planck prediction for a given total energy.
#[derive(Clone, Debug, PartialEq)]
pub struct TheorySpectrum {
    pub beta: f64,
    pub alpha: f64,
    pub truncation: Truncation,
    /// Planck energies of modes `1..`.
    pub modes: Vec<f64>,
    pub field_energy: f64,
    /// `1/β`, the particle's share.
    pub particle_energy: f64,
}

impl TheorySpectrum {
    /// Solve for β at `energy` and tabulate the spectrum with `truncation`.
    pub fn at_energy(energy: f64, alpha: f64, truncation: Truncation) -> Result<Self> {
        Self::at_beta(solve_beta(energy, alpha)?, alpha, truncation)
    }

    pub fn at_beta(beta: f64, alpha: f64, truncation: Truncation) -> Result<Self> {
        let modes = planck_spectrum(beta, alpha, truncation)?;
        Ok(Self {
            beta,
            alpha,
            truncation,
            field_energy: neumaier_sum(modes.iter().copied()),
            particle_energy: 1.0 / beta,
            modes,
        })
    }

    pub fn total_energy(&self) -> f64 {
        self.field_energy + self.particle_energy
    }

    /// Inverse participation ratio of the tabulated modes.
    pub fn ipr(&self) -> Result<f64> {
        ipr(&self.modes)
    }
}
