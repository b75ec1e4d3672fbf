//! Heavy particle colliding with a ladder of harmonic oscillators: a
//! one-dimensional black body.
//!
//! A particle of mass `M` bounces elastically off `N` oscillators with
//! masses `c/i²` and frequencies `αi`, each of which it meets whenever the
//! oscillator passes through the origin. In [`Mode::Classical`] the dynamics
//! drives the system to equipartition; in [`Mode::Discrete`] every
//! oscillator action is rounded to an integer after each collision and the
//! time-averaged spectrum follows Planck's law instead.
//!
//! ```no_run
//! use blackbody1d::{engine::Simulation, model::*, observables::StatsConfig,
//!                   quantize::RoundingRule, rng::RngStream};
//!
//! let params = ModelParams::new(64, 60.0, Mode::Discrete)?;
//! let mut sim = Simulation::new(params, &InitialCondition::AllInParticle,
//!     RngStream::new(1, 0), RoundingRule::Fair, StatsConfig::default())?;
//! let report = sim.run(10_000_000)?;
//! println!("<E0> = {}", report.means.particle);
//! # Ok::<(), blackbody1d::error::Error>(())
//! ```

// `!(x > 0.0)` is used deliberately throughout so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod engine;
pub mod error;
pub mod format;
pub mod model;
pub mod observables;
pub mod quantize;
pub mod rng;
pub mod theory;

pub use model::Mode;
