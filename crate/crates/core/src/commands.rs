//! The four operations behind the `blackbody` binary, usable as a library.
//!
//! Output files (all numbers with 17 significant digits):
//!
//! | file | columns / content |
//! |------|-------------------|
//! | `spectrum.csv` | `i, omega, mean_energy, planck_prediction, equipartition_prediction` |
//! | `convergence.csv` | `t, mean_E0, mean_E<i>...` for the configured convergence modes |
//! | `summary.json` | run parameters, final means, `l`, `xi`, `beta`, conservation drift |
//! | `checkpoint.txt` | full resumable state, see [`Simulation::to_checkpoint`] |
//! | `sweep.csv` | `N, E, mode, alpha, replicate, seed, collisions, mean_E0, E_over_E0, l, xi, drift, spectrum` (spectrum `;`-separated) |
//! | `collapse.csv` | `xi_over_N, l_over_N, N, E` |
//! | `fits.json` | per-`N` regime fits, crossover, collapse spread, failed cells |

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    build_collapse, regime_fits, CollapseTable, CrossoverConfig, RegimeFits, SweepPoint,
};
use crate::config::{RunConfig, SweepConfig};
use crate::engine::Simulation;
use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::model::Mode;
use crate::observables::ipr;
use crate::rng::{cell_seed, RngStream};
use crate::theory::{
    continuum_sigma, equipartition_energy, planck_energy, solve_beta, xi_theoretical, xi_truncated,
    Truncation,
};

/// Hard gate on the relative energy drift of a finished run.
pub const DRIFT_GATE: f64 = 1e-9;

pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const COLLAPSE_FILE: &str = "collapse.csv";
pub const FITS_FILE: &str = "fits.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(rename = "E")]
    pub total_energy: f64,
    #[serde(rename = "N")]
    pub n_oscillators: usize,
    pub mode: String,
    pub seed: u64,
    pub collisions: u64,
    #[serde(rename = "M")]
    pub heavy_mass: f64,
    pub c: f64,
    pub k: f64,
    pub alpha: f64,
    pub rounding: String,
    pub averaging: String,
    pub burn_in: u64,
    pub samples: u64,
    #[serde(rename = "mean_E0")]
    pub mean_particle: f64,
    pub mean_field_energy: f64,
    pub mean_modes: Vec<f64>,
    /// Measured localization length (inverse participation ratio of `mean_modes`).
    pub l: f64,
    /// Planck localization length of the unbounded ladder.
    pub xi: f64,
    /// Planck localization length restricted to the `N` simulated modes.
    pub xi_truncated: f64,
    pub beta: f64,
    pub drift: f64,
}

impl RunConfig {
    /// Fresh simulation for this configuration, seeded with `RngStream::new(seed, 0)`.
    pub fn simulation(&self) -> Result<Simulation> {
        Simulation::new(
            self.params,
            &self.initial,
            RngStream::new(self.seed, 0),
            self.rounding,
            self.stats.clone(),
        )
    }
}

/// Run a configuration to completion and write all run outputs.
pub fn run_command(config: &RunConfig) -> Result<RunSummary> {
    let mut sim = config.simulation()?;
    sim.run(config.collisions)?;
    write_run_outputs(&sim, &config.output_dir)
}

/// Continue a checkpointed run for `collisions` more steps.
pub fn resume_command(checkpoint: &Path, collisions: u64, output_dir: &Path) -> Result<RunSummary> {
    let mut sim = Simulation::load_checkpoint(checkpoint)?;
    sim.run(collisions)?;
    write_run_outputs(&sim, output_dir)
}

/// Summary scalars of a simulation in its current state.
pub fn summarize(sim: &Simulation) -> Result<RunSummary> {
    let p = sim.params();
    let means = sim.stats().means();
    let drift = sim.drift();
    if !(drift < DRIFT_GATE) {
        return Err(Error::invariant(format!(
            "relative energy drift {drift:e} exceeds {DRIFT_GATE:e}"
        )));
    }
    let cfg = sim.stats().config();
    let e = p.total_energy();
    Ok(RunSummary {
        total_energy: e,
        n_oscillators: p.n_oscillators(),
        mode: p.mode().to_string(),
        seed: sim.rng().master(),
        collisions: sim.state().collisions,
        heavy_mass: p.heavy_mass(),
        c: p.mass_scale(),
        k: p.stiffness(),
        alpha: p.alpha(),
        rounding: sim.rounding().as_str().into(),
        averaging: cfg.averaging.as_str().into(),
        burn_in: cfg.burn_in,
        samples: sim.stats().samples(),
        mean_particle: means.particle,
        mean_field_energy: means.field_energy(),
        l: ipr(&means.modes)?,
        mean_modes: means.modes,
        xi: xi_theoretical(e, p.alpha())?,
        xi_truncated: xi_truncated(e, p.alpha(), Truncation::Modes(p.n_oscillators()))?,
        beta: solve_beta(e, p.alpha())?,
        drift,
    })
}

/// Write `spectrum.csv`, `convergence.csv`, `summary.json` and `checkpoint.txt`.
pub fn write_run_outputs(sim: &Simulation, dir: &Path) -> Result<RunSummary> {
    let summary = summarize(sim)?;
    create_dir(dir)?;
    let p = sim.params();

    let mut rows = Vec::with_capacity(p.n_oscillators());
    for (i, &mean) in (1..).zip(&summary.mean_modes) {
        let omega = p.oscillator_params(i)?.1;
        rows.push(vec![
            i.to_string(),
            fmt17(omega),
            fmt17(mean),
            fmt17(planck_energy(omega, summary.beta)?),
            fmt17(equipartition_energy(
                summary.total_energy,
                p.n_oscillators(),
            )),
        ]);
    }
    write_csv(
        &dir.join(SPECTRUM_FILE),
        &[
            "i",
            "omega",
            "mean_energy",
            "planck_prediction",
            "equipartition_prediction",
        ],
        rows,
    )?;

    // Final snapshot on a copy, so the checkpoint still resumes the live schedule.
    let mut stats = sim.stats().clone();
    stats.finish();
    let modes: Vec<usize> = stats
        .config()
        .snapshot_modes
        .iter()
        .copied()
        .filter(|&i| i >= 1 && i <= p.n_oscillators())
        .collect();
    let mut header = vec!["t".to_string(), "mean_E0".to_string()];
    header.extend(modes.iter().map(|i| format!("mean_E{i}")));
    let rows = stats
        .snapshots()
        .iter()
        .map(|s| {
            let mut row = vec![s.collisions.to_string(), fmt17(s.mean_particle)];
            row.extend(s.mean_modes.iter().map(|&x| fmt17(x)));
            row
        })
        .collect();
    write_csv(&dir.join(CONVERGENCE_FILE), &header, rows)?;

    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    sim.save_checkpoint(&dir.join(CHECKPOINT_FILE))?;
    Ok(summary)
}

/// One grid cell of a sweep, in output order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub n_oscillators: usize,
    pub energy_index: usize,
    pub total_energy: f64,
    pub replicate: usize,
    pub seed: u64,
}

/// Cells in `N`-major, then `E`, then replicate order, with their derived seeds.
pub fn sweep_cells(config: &SweepConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &n in &config.n_values {
        for (ei, &e) in config.e_values.iter().enumerate() {
            for rep in 0..config.seeds_per_cell {
                cells.push(Cell {
                    n_oscillators: n,
                    energy_index: ei,
                    total_energy: e,
                    replicate: rep,
                    seed: cell_seed(config.seed, n, ei, rep),
                });
            }
        }
    }
    cells
}

/// The single-run configuration equivalent to one sweep cell.
pub fn cell_run_config(config: &SweepConfig, cell: &Cell) -> Result<RunConfig> {
    Ok(RunConfig {
        params: config.params(cell.n_oscillators, cell.total_energy)?,
        collisions: config.collisions,
        seed: cell.seed,
        initial: config.initial.clone(),
        rounding: config.rounding,
        stats: config.stats.clone(),
        output_dir: config.output_dir.clone(),
    })
}

/// Run one cell and reduce it to a sweep point.
pub fn run_cell(config: &SweepConfig, cell: &Cell) -> Result<SweepPoint> {
    let mut sim = cell_run_config(config, cell)?.simulation()?;
    sim.run(config.collisions)?;
    let s = summarize(&sim)?;
    Ok(SweepPoint {
        n_oscillators: s.n_oscillators,
        total_energy: s.total_energy,
        mode: sim.params().mode(),
        replicate: cell.replicate,
        seed: cell.seed,
        collisions: s.collisions,
        mean_particle: s.mean_particle,
        ipr: s.l,
        xi: s.xi,
        drift: s.drift,
        spectrum: s.mean_modes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    #[serde(rename = "N")]
    pub n_oscillators: usize,
    #[serde(rename = "E")]
    pub total_energy: f64,
    pub replicate: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFits {
    pub mode: String,
    pub alpha: f64,
    /// Continuum-limit Stefan-Boltzmann constant `π²/(6α)`, for comparison with the fitted σ.
    pub continuum_sigma: f64,
    pub regimes: Vec<RegimeFits>,
    /// `None` when the sweep has fewer than two oscillator counts.
    pub collapse_spread: Option<f64>,
    pub cells: usize,
    pub failures: Vec<CellFailure>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub failures: Vec<CellFailure>,
    pub collapse: Option<CollapseTable>,
    pub fits: SweepFits,
}

/// Run every cell on a pool of `workers` threads and reduce in cell order.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    let cells = sweep_cells(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::invariant(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<SweepPoint>> =
        pool.install(|| cells.par_iter().map(|c| run_cell(config, c)).collect());

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (cell, res) in cells.iter().zip(results) {
        match res {
            Ok(p) => points.push(p),
            Err(e) => failures.push(CellFailure {
                n_oscillators: cell.n_oscillators,
                total_energy: cell.total_energy,
                replicate: cell.replicate,
                seed: cell.seed,
                error: e.to_string(),
            }),
        }
    }
    let alpha = config
        .params(config.n_values[0], config.e_values[0])?
        .alpha();
    Ok(analyze_points(
        config.mode,
        alpha,
        points,
        failures,
        cells.len(),
    ))
}

/// Run a sweep and write `sweep.csv`, `collapse.csv` and `fits.json`.
///
/// Outputs are written even when some cells fail; the error then reports how many.
pub fn sweep_command(config: &SweepConfig) -> Result<SweepOutcome> {
    let outcome = run_sweep(config)?;
    write_sweep_outputs(&outcome, config.output_dir.as_path())?;
    if !outcome.failures.is_empty() {
        return Err(Error::PartialSweep {
            failed: outcome.failures.len(),
            total: outcome.fits.cells,
        });
    }
    Ok(outcome)
}

/// Fits and collapse for a set of sweep points.
///
/// Replicates of one `(N, E)` are averaged before fitting.
pub fn analyze_points(
    mode: Mode,
    alpha: f64,
    points: Vec<SweepPoint>,
    failures: Vec<CellFailure>,
    cells: usize,
) -> SweepOutcome {
    let mut by_n: BTreeMap<usize, BTreeMap<u64, (f64, f64, usize)>> = BTreeMap::new();
    for p in &points {
        let slot = by_n
            .entry(p.n_oscillators)
            .or_default()
            .entry(p.total_energy.to_bits())
            .or_insert((p.total_energy, 0.0, 0));
        slot.1 += p.mean_particle;
        slot.2 += 1;
    }
    let regimes = by_n
        .iter()
        .map(|(&n, cells)| {
            let mut pts: Vec<(f64, f64)> =
                cells.values().map(|&(e, t, k)| (t / k as f64, e)).collect();
            pts.sort_by(|a, b| a.1.total_cmp(&b.1));
            regime_fits(n, &pts, CrossoverConfig::default())
        })
        .collect();
    let collapse = build_collapse(&points).ok();
    SweepOutcome {
        fits: SweepFits {
            mode: mode.to_string(),
            alpha,
            continuum_sigma: continuum_sigma(alpha),
            regimes,
            collapse_spread: collapse.as_ref().map(|c| c.spread),
            cells,
            failures: failures.clone(),
        },
        points,
        failures,
        collapse,
    }
}

const SWEEP_HEADER: [&str; 13] = [
    "N",
    "E",
    "mode",
    "alpha",
    "replicate",
    "seed",
    "collisions",
    "mean_E0",
    "E_over_E0",
    "l",
    "xi",
    "drift",
    "spectrum",
];

pub fn write_sweep_outputs(outcome: &SweepOutcome, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let alpha = outcome.fits.alpha;
    let rows = outcome
        .points
        .iter()
        .map(|p| {
            vec![
                p.n_oscillators.to_string(),
                fmt17(p.total_energy),
                p.mode.to_string(),
                fmt17(alpha),
                p.replicate.to_string(),
                p.seed.to_string(),
                p.collisions.to_string(),
                fmt17(p.mean_particle),
                fmt17(p.energy_ratio()),
                fmt17(p.ipr),
                fmt17(p.xi),
                fmt17(p.drift),
                p.spectrum
                    .iter()
                    .map(|&x| fmt17(x))
                    .collect::<Vec<_>>()
                    .join(";"),
            ]
        })
        .collect();
    write_csv(&dir.join(SWEEP_FILE), &SWEEP_HEADER, rows)?;
    write_analysis_outputs(outcome, dir)
}

fn write_analysis_outputs(outcome: &SweepOutcome, dir: &Path) -> Result<()> {
    let rows = outcome
        .collapse
        .iter()
        .flat_map(|c| &c.rows)
        .map(|r| {
            vec![
                fmt17(r.x),
                fmt17(r.y),
                r.n_oscillators.to_string(),
                fmt17(r.total_energy),
            ]
        })
        .collect();
    write_csv(
        &dir.join(COLLAPSE_FILE),
        &["xi_over_N", "l_over_N", "N", "E"],
        rows,
    )?;
    write_json(&dir.join(FITS_FILE), &outcome.fits)
}

#[derive(Deserialize)]
struct SweepRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "E")]
    e: f64,
    mode: String,
    alpha: f64,
    replicate: usize,
    seed: u64,
    collisions: u64,
    #[serde(rename = "mean_E0")]
    mean_particle: f64,
    l: f64,
    xi: f64,
    drift: f64,
    spectrum: String,
}

/// Read a `sweep.csv` back into sweep points; also returns the mode and `α`.
pub fn read_sweep(path: &Path) -> Result<(Mode, f64, Vec<SweepPoint>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut points = Vec::new();
    let mut meta: Option<(Mode, f64)> = None;
    for row in reader.deserialize() {
        let row: SweepRow = row?;
        let mode: Mode = row.mode.parse()?;
        match meta {
            None => meta = Some((mode, row.alpha)),
            Some((m, a)) if m != mode || a != row.alpha => {
                return Err(Error::usage(format!(
                    "{}: rows mix modes or oscillator ladders",
                    path.display()
                )));
            }
            Some(_) => {}
        }
        let spectrum = row
            .spectrum
            .split(';')
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    Error::usage(format!("{}: bad spectrum value `{s}`", path.display()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if spectrum.len() != row.n {
            return Err(Error::usage(format!(
                "{}: spectrum of N = {} has {} values",
                path.display(),
                row.n,
                spectrum.len()
            )));
        }
        points.push(SweepPoint {
            n_oscillators: row.n,
            total_energy: row.e,
            mode,
            replicate: row.replicate,
            seed: row.seed,
            collisions: row.collisions,
            mean_particle: row.mean_particle,
            spectrum,
            ipr: row.l,
            xi: row.xi,
            drift: row.drift,
        });
    }
    let (mode, alpha) =
        meta.ok_or_else(|| Error::usage(format!("{}: no sweep rows", path.display())))?;
    Ok((mode, alpha, points))
}

/// Recompute `collapse.csv` and `fits.json` from an existing `sweep.csv`.
pub fn analyze_command(sweep_csv: &Path, output_dir: &Path) -> Result<SweepOutcome> {
    let (mode, alpha, points) = read_sweep(sweep_csv)?;
    let cells = points.len();
    let outcome = analyze_points(mode, alpha, points, Vec::new(), cells);
    create_dir(output_dir)?;
    write_analysis_outputs(&outcome, output_dir)?;
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TheoryQuery {
    /// Inverse temperature at total energy `energy`.
    Beta { energy: f64 },
    /// Planck energies of modes `1..=modes`.
    Spectrum { energy: f64, modes: usize },
    /// Planck localization length, unbounded or restricted to `modes` modes.
    Xi { energy: f64, modes: Option<usize> },
}

/// Theory values as CSV text with a header line.
pub fn theory_command(query: TheoryQuery, alpha: f64) -> Result<String> {
    let out = match query {
        TheoryQuery::Beta { energy } => {
            format!(
                "E,beta\n{},{}\n",
                fmt17(energy),
                fmt17(solve_beta(energy, alpha)?)
            )
        }
        TheoryQuery::Spectrum { energy, modes } => {
            if modes == 0 {
                return Err(Error::usage("--n must be at least 1"));
            }
            let beta = solve_beta(energy, alpha)?;
            let mut s = String::from("i,omega,planck_energy\n");
            for i in 1..=modes {
                let omega = alpha * i as f64;
                s += &format!(
                    "{i},{},{}\n",
                    fmt17(omega),
                    fmt17(planck_energy(omega, beta)?)
                );
            }
            s
        }
        TheoryQuery::Xi { energy, modes } => {
            let beta = solve_beta(energy, alpha)?;
            let xi = match modes {
                None => xi_theoretical(energy, alpha)?,
                Some(0) => return Err(Error::usage("--n must be at least 1")),
                Some(n) => xi_truncated(energy, alpha, Truncation::Modes(n))?,
            };
            format!(
                "E,beta,xi\n{},{},{}\n",
                fmt17(energy),
                fmt17(beta),
                fmt17(xi)
            )
        }
    };
    Ok(out)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv<S: AsRef<str>>(path: &Path, header: &[S], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header.iter().map(AsRef::as_ref))?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
