//! Event-driven evolution of the collision model.
//!
//! Between collisions every energy is constant, so the engine only jumps
//! from one centre crossing to the next. Oscillator `i` crosses its centre
//! every half period `π/ω_i` whatever its amplitude; a mode with zero energy
//! keeps its phase clock and can be re-excited at its next crossing.
//!
//! One step:
//! 1. pop the earliest `(time, index)` crossing;
//! 2. collide the oscillator (velocity `±√(2E_i/m_i)`) with the particle
//!    (velocity `direction·√(2E_0/M)`);
//! 3. in discrete mode round the new action to a neighbouring integer and
//!    credit the roundoff to the particle;
//! 4. give the particle a fresh random direction;
//! 5. reschedule the oscillator half a period later.

mod checkpoint;
mod queue;

pub use queue::{Event, EventQueue};

use crate::error::{Error, Result};
use crate::model::{
    elastic_collision, init_state, velocity_at_crossing, InitialCondition, Mode, ModelParams, Sign,
    SystemState,
};
use crate::observables::{conservation_drift, Means, RunningStats, StatsConfig};
use crate::quantize::{quantize, RoundingRule};
use crate::rng::RngStream;

/// One processed collision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionRecord {
    /// 1-based collision counter.
    pub collision: u64,
    pub time: f64,
    /// 1-based index of the colliding oscillator.
    pub oscillator: usize,
    pub oscillator_before: f64,
    pub particle_before: f64,
    pub oscillator_after: f64,
    pub particle_after: f64,
    /// Energy moved to the particle by quantization (0 in classical mode).
    pub roundoff: f64,
}

/// Hook called after every collision of [`Simulation::run_with`].
pub trait Observer {
    fn observe(&mut self, record: &CollisionRecord, state: &SystemState);
}

impl Observer for RunningStats {
    fn observe(&mut self, record: &CollisionRecord, _state: &SystemState) {
        self.record(record);
    }
}

impl<F: FnMut(&CollisionRecord, &SystemState)> Observer for F {
    fn observe(&mut self, record: &CollisionRecord, state: &SystemState) {
        self(record, state)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub collisions: u64,
    pub state: SystemState,
    pub means: Means,
    pub drift: f64,
}

/// A single simulation run: state, schedule, random stream and running means.
#[derive(Clone, Debug)]
pub struct Simulation {
    params: ModelParams,
    state: SystemState,
    queue: EventQueue,
    rng: RngStream,
    rounding: RoundingRule,
    stats: RunningStats,
}

/// Energies this far below zero are float noise and are clamped; anything
/// more negative is an invariant violation.
const NEGATIVE_SLACK: f64 = 64.0 * f64::EPSILON;

impl Simulation {
    pub fn new(
        params: ModelParams,
        initial: &InitialCondition,
        rng: RngStream,
        rounding: RoundingRule,
        stats: StatsConfig,
    ) -> Result<Self> {
        let mut rng = rng;
        let state = init_state(initial, &params, &mut rng)?;
        Self::from_parts(params, state, rng, rounding, stats)
    }

    /// Start from an explicit state.
    pub fn from_parts(
        params: ModelParams,
        state: SystemState,
        rng: RngStream,
        rounding: RoundingRule,
        stats: StatsConfig,
    ) -> Result<Self> {
        let stats = RunningStats::new(stats, &state)?;
        Self::assemble(params, state, rng, rounding, stats)
    }

    fn assemble(
        params: ModelParams,
        state: SystemState,
        rng: RngStream,
        rounding: RoundingRule,
        stats: RunningStats,
    ) -> Result<Self> {
        if state.oscillators.len() != params.n_oscillators() {
            return Err(Error::usage(format!(
                "state has {} oscillators, parameters say {}",
                state.oscillators.len(),
                params.n_oscillators()
            )));
        }
        let queue = EventQueue::with_events(state.oscillators.iter().map(|o| Event {
            time: o.next_crossing,
            index: o.index,
        }));
        Ok(Self {
            params,
            state,
            queue,
            rng,
            rounding,
            stats,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn stats(&self) -> &RunningStats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut RunningStats {
        &mut self.stats
    }

    pub fn rng(&self) -> &RngStream {
        &self.rng
    }

    pub fn rounding(&self) -> RoundingRule {
        self.rounding
    }

    pub fn queue(&self) -> &EventQueue {
        &self.queue
    }

    pub fn drift(&self) -> f64 {
        conservation_drift(&self.state, &self.params)
    }

    /// Time of the next scheduled crossing of mode `i`.
    pub fn next_crossing(&self, i: usize) -> Result<f64> {
        self.params.oscillator_params(i)?;
        Ok(self.state.oscillators[i - 1].next_crossing)
    }

    /// Process the earliest pending collision.
    pub fn step(&mut self) -> Result<CollisionRecord> {
        let event = self
            .queue
            .pop()
            .ok_or_else(|| Error::invariant("event queue is empty"))?;
        if event.time < self.state.time {
            return Err(Error::invariant(format!(
                "event at {} precedes current time {}",
                event.time, self.state.time
            )));
        }
        let heavy_mass = self.params.heavy_mass();
        let particle = &mut self.state.particle;
        let osc = &mut self.state.oscillators[event.index - 1];

        let osc_before = osc.energy;
        let particle_before = particle.energy;
        let pair = osc_before + particle_before;

        let v = velocity_at_crossing(osc.energy, osc.mass, osc.parity)?;
        let (v_out, _) = elastic_collision(osc.mass, v, heavy_mass, particle.velocity(heavy_mass))?;
        let kinetic = (0.5 * osc.mass * v_out * v_out).min(pair);

        let roundoff = match self.params.mode() {
            Mode::Classical => {
                osc.energy = kinetic;
                osc.action = kinetic / osc.frequency;
                0.0
            }
            Mode::Discrete => {
                let raw = kinetic / osc.frequency;
                let available = pair - kinetic;
                let out = quantize(
                    raw,
                    osc.frequency,
                    available.max(0.0),
                    self.rounding,
                    &mut self.rng,
                )?;
                osc.action = out.quanta as f64;
                osc.energy = osc.action * osc.frequency;
                out.roundoff
            }
        };
        let mut particle_energy = pair - osc.energy;
        if particle_energy < 0.0 {
            if particle_energy < -NEGATIVE_SLACK * pair {
                return Err(Error::invariant(format!(
                    "particle energy {particle_energy} after collision {}",
                    self.state.collisions + 1
                )));
            }
            particle_energy = 0.0;
        }
        particle.energy = particle_energy;
        particle.direction = self.rng.sign();

        // The oscillator leaves the centre with v_out and returns with -v_out.
        osc.parity = if v_out > 0.0 {
            Sign::Minus
        } else if v_out < 0.0 {
            Sign::Plus
        } else {
            osc.parity.flip()
        };
        let next = event.time + osc.half_period();
        if next <= event.time {
            return Err(Error::invariant("crossing time failed to advance"));
        }
        osc.next_crossing = next;
        self.queue.push(Event {
            time: next,
            index: event.index,
        });

        self.state.time = event.time;
        self.state.collisions += 1;
        let record = CollisionRecord {
            collision: self.state.collisions,
            time: event.time,
            oscillator: event.index,
            oscillator_before: osc_before,
            particle_before,
            oscillator_after: osc.energy,
            particle_after: particle_energy,
            roundoff,
        };
        self.stats.record(&record);
        Ok(record)
    }

    /// Run `n_collisions` steps.
    pub fn run(&mut self, n_collisions: u64) -> Result<RunReport> {
        self.run_with(n_collisions, &mut [])
    }

    /// Run `n_collisions` steps, calling every observer after each one.
    pub fn run_with(
        &mut self,
        n_collisions: u64,
        observers: &mut [&mut dyn Observer],
    ) -> Result<RunReport> {
        if n_collisions == 0 {
            return Err(Error::usage("number of collisions must be at least 1"));
        }
        for _ in 0..n_collisions {
            let record = self.step()?;
            for obs in observers.iter_mut() {
                obs.observe(&record, &self.state);
            }
        }
        Ok(self.report())
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            collisions: self.state.collisions,
            state: self.state.clone(),
            means: self.stats.means(),
            drift: self.drift(),
        }
    }
}
