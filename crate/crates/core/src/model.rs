//! Physical constants, per-mode quantities, collision kinematics and
//! initial conditions of the heavy-particle/oscillator system.
//!
//! Oscillator `i` (1-based) has mass `c / i²` and angular frequency
//! `α·i` with `α = √(k/c)`. Every oscillator collides elastically with the
//! heavy particle of mass `M` whenever it passes its centre.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Golden-ratio heavy mass `(√5 + 1)/2`.
pub const DEFAULT_HEAVY_MASS: f64 = 1.618_033_988_749_895;
pub const DEFAULT_MASS_SCALE: f64 = 0.51;
pub const DEFAULT_STIFFNESS: f64 = 0.1;
/// Action quantum of the discrete model.
pub const HBAR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Exact classical hard-core dynamics.
    Classical,
    /// Oscillator actions rounded to integers after every collision.
    Discrete,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Classical => "classical",
            Mode::Discrete => "discrete",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Mode::Classical),
            "discrete" => Ok(Mode::Discrete),
            other => Err(Error::usage(format!(
                "unknown mode `{other}` (expected classical or discrete)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A velocity direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    heavy_mass: f64,
    mass_scale: f64,
    stiffness: f64,
    alpha: f64,
    n_oscillators: usize,
    total_energy: f64,
    mode: Mode,
}

impl ModelParams {
    /// Parameters with the default constants `M = (√5+1)/2`, `c = 0.51`, `k = 0.1`.
    pub fn new(n_oscillators: usize, total_energy: f64, mode: Mode) -> Result<Self> {
        Self::with_constants(
            n_oscillators,
            total_energy,
            mode,
            DEFAULT_HEAVY_MASS,
            DEFAULT_MASS_SCALE,
            DEFAULT_STIFFNESS,
        )
    }

    pub fn with_constants(
        n_oscillators: usize,
        total_energy: f64,
        mode: Mode,
        heavy_mass: f64,
        mass_scale: f64,
        stiffness: f64,
    ) -> Result<Self> {
        if n_oscillators == 0 {
            return Err(Error::usage("number of oscillators must be at least 1"));
        }
        if !(total_energy.is_finite() && total_energy > 0.0) {
            return Err(Error::usage(format!(
                "total energy must be positive, got {total_energy}"
            )));
        }
        for (name, v) in [("M", heavy_mass), ("c", mass_scale), ("k", stiffness)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::usage(format!("{name} must be positive, got {v}")));
            }
        }
        // The heaviest oscillator is i = 1 with mass c.
        if heavy_mass <= mass_scale {
            return Err(Error::usage(format!(
                "heavy mass M = {heavy_mass} must exceed every oscillator mass (max {mass_scale})"
            )));
        }
        Ok(Self {
            heavy_mass,
            mass_scale,
            stiffness,
            alpha: (stiffness / mass_scale).sqrt(),
            n_oscillators,
            total_energy,
            mode,
        })
    }

    pub fn heavy_mass(&self) -> f64 {
        self.heavy_mass
    }

    pub fn mass_scale(&self) -> f64 {
        self.mass_scale
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    /// Frequency step `√(k/c)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_oscillators(&self) -> usize {
        self.n_oscillators
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Same constants, different run configuration.
    pub fn reconfigured(
        &self,
        n_oscillators: usize,
        total_energy: f64,
        mode: Mode,
    ) -> Result<Self> {
        Self::with_constants(
            n_oscillators,
            total_energy,
            mode,
            self.heavy_mass,
            self.mass_scale,
            self.stiffness,
        )
    }

    /// `(mass, frequency)` of oscillator `i`, 1-based.
    pub fn oscillator_params(&self, i: usize) -> Result<(f64, f64)> {
        if i == 0 || i > self.n_oscillators {
            return Err(Error::usage(format!(
                "oscillator index {i} outside 1..={}",
                self.n_oscillators
            )));
        }
        Ok((self.mass(i), self.frequency(i)))
    }

    pub(crate) fn mass(&self, i: usize) -> f64 {
        let fi = i as f64;
        self.mass_scale / (fi * fi)
    }

    pub(crate) fn frequency(&self, i: usize) -> f64 {
        self.alpha * i as f64
    }
}

/// Elastic collision of a light body `(m, v)` with a heavy body `(heavy_mass, heavy_v)`.
///
/// Evaluated in centre-of-mass form, `v' = 2u − v`, `V' = 2u − V`, which is
/// algebraically identical to `((m−M)v + 2MV)/(m+M)` and its partner.
pub fn elastic_collision(m: f64, v: f64, heavy_mass: f64, heavy_v: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 && heavy_mass > 0.0) {
        return Err(Error::usage(format!(
            "collision masses must be positive, got m = {m}, M = {heavy_mass}"
        )));
    }
    // Centre-of-mass velocity as an unevaluated sum u + u_lo, so that each
    // outgoing velocity is rounded essentially once.
    let (p1, p2) = (m * v, heavy_mass * heavy_v);
    let (p, p_err) = two_sum(p1, p2);
    let p_lo = p_err + m.mul_add(v, -p1) + heavy_mass.mul_add(heavy_v, -p2);
    let (s, s_err) = two_sum(m, heavy_mass);
    let u = p / s;
    let u_lo = ((-u).mul_add(s, p) + p_lo - u * s_err) / s;
    let out = |w: f64| {
        let (t, t_err) = two_sum(2.0 * u, -w);
        t + (t_err + 2.0 * u_lo)
    };
    Ok((out(v), out(heavy_v)))
}

/// Knuth's error-free sum: `a + b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Signed velocity of an oscillator passing its centre, where all its energy is kinetic.
pub fn velocity_at_crossing(energy: f64, mass: f64, parity: Sign) -> Result<f64> {
    if energy < 0.0 || energy.is_nan() {
        return Err(Error::invariant(format!(
            "negative oscillator energy {energy}"
        )));
    }
    if !(mass > 0.0) {
        return Err(Error::usage(format!("mass must be positive, got {mass}")));
    }
    Ok(parity.as_f64() * (2.0 * energy / mass).sqrt())
}

/// Time of the first centre crossing for an oscillator at phase `phase ∈ (0, π]`
/// of its half cycle: `(π − phase)/ω`.
pub fn first_crossing_time(phase: f64, omega: f64) -> f64 {
    (PI - phase) / omega
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorState {
    /// 1-based mode index.
    pub index: usize,
    pub mass: f64,
    pub frequency: f64,
    pub energy: f64,
    /// `energy / ω`; an exact integer in discrete mode.
    pub action: f64,
    /// Sign of the velocity at the next centre crossing.
    pub parity: Sign,
    /// Absolute time of the next centre crossing.
    pub next_crossing: f64,
}

impl OscillatorState {
    pub fn half_period(&self) -> f64 {
        PI / self.frequency
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleState {
    pub energy: f64,
    pub direction: Sign,
}

impl ParticleState {
    pub fn speed(&self, heavy_mass: f64) -> f64 {
        (2.0 * self.energy / heavy_mass).sqrt()
    }

    pub fn velocity(&self, heavy_mass: f64) -> f64 {
        self.direction.as_f64() * self.speed(heavy_mass)
    }
}

/// Full dynamical state between collisions.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub particle: ParticleState,
    /// `oscillators[i - 1]` is mode `i`.
    pub oscillators: Vec<OscillatorState>,
    /// Time of the last processed collision (0 before the first).
    pub time: f64,
    pub collisions: u64,
}

impl SystemState {
    pub fn oscillator_energies(&self) -> Vec<f64> {
        self.oscillators.iter().map(|o| o.energy).collect()
    }

    /// Compensated sum of the particle and all oscillator energies.
    pub fn total_energy(&self) -> f64 {
        crate::observables::neumaier_sum(
            std::iter::once(self.particle.energy).chain(self.oscillators.iter().map(|o| o.energy)),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// All energy in the heavy particle.
    AllInParticle,
    /// All energy in oscillator `j` (1-based). In discrete mode the oscillator
    /// receives `⌊E/ω_j⌋` quanta and the remainder goes to the particle.
    AllInOscillator(usize),
    /// Explicit energies. Discrete mode floors each mode to an integer
    /// action and moves the remainders to the particle.
    Explicit { particle: f64, modes: Vec<f64> },
}

/// Relative tolerance on the energy budget of an initial condition.
pub const BUDGET_TOLERANCE: f64 = 1e-12;

/// Build the initial state.
///
/// Random draws, in order: particle direction, then for each mode `i = 1..=N`
/// a uniform first-crossing time in `[0, π/ω_i)` followed by its parity.
pub fn init_state(
    ic: &InitialCondition,
    params: &ModelParams,
    rng: &mut RngStream,
) -> Result<SystemState> {
    let n = params.n_oscillators();
    let e_total = params.total_energy();
    let mut particle_energy;
    let mut modes = vec![0.0; n];

    match ic {
        InitialCondition::AllInParticle => particle_energy = e_total,
        InitialCondition::AllInOscillator(j) => {
            let (_, omega) = params.oscillator_params(*j)?;
            match params.mode() {
                Mode::Classical => {
                    modes[j - 1] = e_total;
                    particle_energy = 0.0;
                }
                Mode::Discrete => {
                    let quanta = (e_total / (omega * HBAR)).floor();
                    modes[j - 1] = quanta * omega * HBAR;
                    particle_energy = e_total - modes[j - 1];
                }
            }
        }
        InitialCondition::Explicit {
            particle,
            modes: given,
        } => {
            if given.len() != n {
                return Err(Error::usage(format!(
                    "explicit initial condition lists {} modes, expected {n}",
                    given.len()
                )));
            }
            if std::iter::once(particle)
                .chain(given)
                .any(|e| !(*e >= 0.0) || !e.is_finite())
            {
                return Err(Error::usage(
                    "explicit initial energies must be finite and nonnegative",
                ));
            }
            let sum = crate::observables::neumaier_sum(
                std::iter::once(*particle).chain(given.iter().copied()),
            );
            if (sum - e_total).abs() > BUDGET_TOLERANCE * e_total {
                return Err(Error::usage(format!(
                    "explicit initial energies sum to {sum}, expected {e_total}"
                )));
            }
            particle_energy = *particle;
            modes.copy_from_slice(given);
            if params.mode() == Mode::Discrete {
                for (i, e) in modes.iter_mut().enumerate() {
                    let omega = params.frequency(i + 1);
                    let quanta = (*e / omega).floor();
                    let kept = quanta * omega;
                    particle_energy += *e - kept;
                    *e = kept;
                }
            }
        }
    }
    particle_energy = particle_energy.max(0.0);

    let direction = rng.sign();
    let oscillators = modes
        .iter()
        .enumerate()
        .map(|(k, &energy)| {
            let index = k + 1;
            let mass = params.mass(index);
            let frequency = params.frequency(index);
            let next_crossing = rng.uniform() * PI / frequency;
            let parity = rng.sign();
            let action = match params.mode() {
                Mode::Discrete => (energy / frequency).round(),
                Mode::Classical => energy / frequency,
            };
            OscillatorState {
                index,
                mass,
                frequency,
                energy,
                action,
                parity,
                next_crossing,
            }
        })
        .collect();

    let state = SystemState {
        particle: ParticleState {
            energy: particle_energy,
            direction,
        },
        oscillators,
        time: 0.0,
        collisions: 0,
    };
    let total = state.total_energy();
    if (total - e_total).abs() > BUDGET_TOLERANCE * e_total {
        return Err(Error::invariant(format!(
            "initial state holds energy {total}, expected {e_total}"
        )));
    }
    Ok(state)
}
