//! Post-processing of sweeps: power-law fits for the Stefan-Boltzmann and
//! equipartition regimes, spectrum distances, crossover detection and the
//! finite-size scaling table `(ξ/N, l/N)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Mode;

/// Result of one finished run inside a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub n_oscillators: usize,
    pub total_energy: f64,
    pub mode: Mode,
    pub replicate: usize,
    pub seed: u64,
    pub collisions: u64,
    pub mean_particle: f64,
    /// Mean energy of every mode, `spectrum[i - 1]` for mode `i`.
    pub spectrum: Vec<f64>,
    /// Measured localization length (inverse participation ratio of `spectrum`).
    pub ipr: f64,
    /// Theoretical localization length of the unbounded ladder at this energy.
    pub xi: f64,
    pub drift: f64,
}

impl SweepPoint {
    /// `E / ⟨E0⟩`, total energy in units of the particle temperature.
    pub fn energy_ratio(&self) -> f64 {
        self.total_energy / self.mean_particle
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual of `ln y` about the fitted line.
    pub residual: f64,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

fn check_points(points: &[(f64, f64)], min: usize) -> Result<()> {
    if points.len() < min {
        return Err(Error::usage(format!(
            "need at least {min} points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::usage("power-law data must be strictly positive"));
    }
    Ok(())
}

/// Least-squares line through `(ln x, ln y)`: `y = prefactor · x^exponent`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    check_points(points, 3)?;
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 1e-24 * (1.0 + mx * mx)) {
        return Err(Error::usage("degenerate fit: all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = logs
        .iter()
        .map(|&(lx, ly)| {
            let r = ly - (intercept + slope * lx);
            r * r
        })
        .sum();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual: (ss / n).sqrt(),
    })
}

/// Best prefactor `a` of `y = a · x^exponent` with the exponent held fixed
/// (geometric mean of `y / x^exponent`).
pub fn fixed_exponent_prefactor(points: &[(f64, f64)], exponent: f64) -> Result<f64> {
    check_points(points, 1)?;
    let mean_log = points
        .iter()
        .map(|&(x, y)| y.ln() - exponent * x.ln())
        .sum::<f64>()
        / points.len() as f64;
    Ok(mean_log.exp())
}

/// Relative RMS distance `√(Σ(m−r)² / Σr²)`.
pub fn spectrum_distance(measured: &[f64], reference: &[f64]) -> Result<f64> {
    if measured.len() != reference.len() {
        return Err(Error::usage(format!(
            "spectrum lengths differ: {} vs {}",
            measured.len(),
            reference.len()
        )));
    }
    let den: f64 = reference.iter().map(|r| r * r).sum();
    if !(den > 0.0) {
        return Err(Error::usage("reference spectrum is all zero"));
    }
    let num: f64 = measured
        .iter()
        .zip(reference)
        .map(|(m, r)| (m - r) * (m - r))
        .sum();
    Ok((num / den).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossoverConfig {
    /// Local slope marking the transition (halfway between 2 and 1 by default).
    pub threshold: f64,
    /// Points per sliding-window fit, at least 4.
    pub window: usize,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self {
            threshold: 1.5,
            window: 4,
        }
    }
}

/// Local log-log slopes of `E` against `T` over a sliding window, paired with
/// the geometric-mean energy of each window. Points are `(T, E)`.
pub fn local_slopes(points: &[(f64, f64)], window: usize) -> Result<Vec<(f64, f64)>> {
    if window < 4 {
        return Err(Error::usage("crossover window must hold at least 4 points"));
    }
    check_points(points, window)?;
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    sorted
        .windows(window)
        .map(|w| {
            let fit = fit_power_law(w)?;
            let centre = (w.iter().map(|p| p.1.ln()).sum::<f64>() / w.len() as f64).exp();
            Ok((centre, fit.exponent))
        })
        .collect()
}

/// Energy at which the local slope of `E(T)` first falls through the
/// threshold, interpolated in `ln E`. `None` when the sweep does not
/// bracket the transition.
pub fn detect_crossover(points: &[(f64, f64)], config: CrossoverConfig) -> Result<Option<f64>> {
    let slopes = local_slopes(points, config.window)?;
    for pair in slopes.windows(2) {
        let ((e0, s0), (e1, s1)) = (pair[0], pair[1]);
        if s0 >= config.threshold && s1 < config.threshold {
            let f = (s0 - config.threshold) / (s0 - s1);
            return Ok(Some((e0.ln() + f * (e1.ln() - e0.ln())).exp()));
        }
    }
    Ok(None)
}

/// Regime fits of `E` against `T = ⟨E0⟩` at one oscillator count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeFits {
    #[serde(rename = "N")]
    pub n_oscillators: usize,
    /// Free fit over points with `E < N²/10`.
    pub low: Option<PowerLawFit>,
    /// Stefan-Boltzmann constant: slope-two prefactor over the low-energy points.
    pub sigma: Option<f64>,
    /// Free fit over points with `E ≥ 2N²/σ`.
    pub high: Option<PowerLawFit>,
    /// Slope-one prefactor over the high-energy points (equipartition predicts `N+1`).
    pub high_prefactor: Option<f64>,
    pub crossover: Option<f64>,
    /// `N²/σ`.
    pub crossover_prediction: Option<f64>,
}

/// Fit both regimes and locate the crossover for one `N`.
///
/// Points are `(T, E)` pairs, all belonging to the same `N`.
pub fn regime_fits(
    n_oscillators: usize,
    points: &[(f64, f64)],
    config: CrossoverConfig,
) -> RegimeFits {
    let n2 = (n_oscillators * n_oscillators) as f64;
    let low_pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 < n2 / 10.0).collect();
    let low = fit_power_law(&low_pts).ok();
    let sigma = fixed_exponent_prefactor(&low_pts, 2.0).ok();
    let crossover_prediction = sigma.map(|s| n2 / s);
    let high_pts: Vec<(f64, f64)> = match crossover_prediction {
        Some(e_star) => points
            .iter()
            .copied()
            .filter(|p| p.1 >= 2.0 * e_star)
            .collect(),
        None => Vec::new(),
    };
    let high = fit_power_law(&high_pts).ok();
    let high_prefactor = if high_pts.is_empty() {
        None
    } else {
        fixed_exponent_prefactor(&high_pts, 1.0).ok()
    };
    let crossover = detect_crossover(points, config).ok().flatten();
    RegimeFits {
        n_oscillators,
        low,
        sigma,
        high,
        high_prefactor,
        crossover,
        crossover_prediction,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    /// `ξ/N`
    pub x: f64,
    /// `l/N`
    pub y: f64,
    #[serde(rename = "N")]
    pub n_oscillators: usize,
    #[serde(rename = "E")]
    pub total_energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseTable {
    pub rows: Vec<CollapseRow>,
    /// Mean over occupied x-bins (with at least two rows) of the
    /// coefficient of variation of y.
    pub spread: f64,
}

/// Logarithmic x-bins used for the collapse spread.
pub const COLLAPSE_BINS: usize = 8;

/// Scaling-collapse table from sweep points spanning at least two values of `N`.
pub fn build_collapse(points: &[SweepPoint]) -> Result<CollapseTable> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.n_oscillators).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::usage(
            "collapse needs points from at least two oscillator counts",
        ));
    }
    let rows: Vec<CollapseRow> = points
        .iter()
        .map(|p| {
            let n = p.n_oscillators as f64;
            CollapseRow {
                x: p.xi / n,
                y: p.ipr / n,
                n_oscillators: p.n_oscillators,
                total_energy: p.total_energy,
            }
        })
        .collect();
    if rows.iter().any(|r| !(r.x > 0.0 && r.y > 0.0)) {
        return Err(Error::usage("collapse rows need positive ξ and l"));
    }
    let spread = binned_spread(&rows);
    Ok(CollapseTable { rows, spread })
}

fn binned_spread(rows: &[CollapseRow]) -> f64 {
    let lo = rows.iter().map(|r| r.x).fold(f64::INFINITY, f64::min).ln();
    let hi = rows
        .iter()
        .map(|r| r.x)
        .fold(f64::NEG_INFINITY, f64::max)
        .ln();
    let width = (hi - lo) / COLLAPSE_BINS as f64;
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); COLLAPSE_BINS];
    for r in rows {
        let k = if width > 0.0 {
            (((r.x.ln() - lo) / width) as usize).min(COLLAPSE_BINS - 1)
        } else {
            0
        };
        bins[k].push(r.y);
    }
    let cvs: Vec<f64> = bins
        .iter()
        .filter(|b| b.len() >= 2)
        .map(|b| {
            let n = b.len() as f64;
            let mean = b.iter().sum::<f64>() / n;
            let var = b.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
            var.sqrt() / mean
        })
        .collect();
    if cvs.is_empty() {
        0.0
    } else {
        cvs.iter().sum::<f64>() / cvs.len() as f64
    }
}
