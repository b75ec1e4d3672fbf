//! Action discretization of the discrete model.
//!
//! After a collision the oscillator action `I = E/ω` is replaced by one of
//! its neighbouring integers and the roundoff energy `(I − n)·ω` is handed to
//! the heavy particle, so the pair's energy is unchanged.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Direction chosen for a non-integer action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Floor,
    Ceil,
}

/// How the rounding direction is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RoundingRule {
    /// 50/50 coin, independent of the fractional part.
    #[default]
    Fair,
    /// Ceiling with probability `frac(I)`, preserving the mean action.
    Weighted,
}

impl RoundingRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundingRule::Fair => "fair",
            RoundingRule::Weighted => "weighted",
        }
    }

    pub fn draw(self, raw_action: f64, rng: &mut RngStream) -> Rounding {
        let up = match self {
            RoundingRule::Fair => rng.coin(),
            RoundingRule::Weighted => rng.bernoulli(raw_action - raw_action.floor()),
        };
        if up {
            Rounding::Ceil
        } else {
            Rounding::Floor
        }
    }
}

impl std::str::FromStr for RoundingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fair" => Ok(RoundingRule::Fair),
            "weighted" => Ok(RoundingRule::Weighted),
            other => Err(Error::usage(format!(
                "unknown rounding rule `{other}` (expected fair or weighted)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizeOutcome {
    /// Integer action kept by the oscillator.
    pub quanta: u64,
    /// Energy credited to the particle, `(I_raw − n)·ω`. Negative when rounding up.
    pub roundoff: f64,
    /// The ceiling was requested but would have left the particle with negative energy.
    pub forced: bool,
}

/// Round `raw_action` to a neighbouring integer in the direction `choice`.
///
/// An integer action is kept as is. A ceiling that would overdraw the
/// particle (`particle_energy + (I − ⌈I⌉)·ω < 0`) is replaced by the floor,
/// which never costs the particle energy.
pub fn discretize(
    raw_action: f64,
    omega: f64,
    particle_energy: f64,
    choice: Rounding,
) -> Result<QuantizeOutcome> {
    if !(raw_action >= 0.0 && raw_action.is_finite()) {
        return Err(Error::usage(format!(
            "action must be nonnegative, got {raw_action}"
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::usage(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    if !(particle_energy >= 0.0) {
        return Err(Error::usage(format!(
            "particle energy must be nonnegative, got {particle_energy}"
        )));
    }

    let floor = raw_action.floor();
    if floor == raw_action {
        return Ok(QuantizeOutcome {
            quanta: floor as u64,
            roundoff: 0.0,
            forced: false,
        });
    }
    let ceil = floor + 1.0;
    let (n, forced) = match choice {
        Rounding::Floor => (floor, false),
        Rounding::Ceil if particle_energy + (raw_action - ceil) * omega < 0.0 => (floor, true),
        Rounding::Ceil => (ceil, false),
    };
    Ok(QuantizeOutcome {
        quanta: n as u64,
        roundoff: (raw_action - n) * omega,
        forced,
    })
}

/// Draw a rounding direction with `rule` (only for non-integer actions) and discretize.
pub fn quantize(
    raw_action: f64,
    omega: f64,
    particle_energy: f64,
    rule: RoundingRule,
    rng: &mut RngStream,
) -> Result<QuantizeOutcome> {
    let choice = if raw_action.fract() == 0.0 {
        Rounding::Floor
    } else {
        rule.draw(raw_action, rng)
    };
    discretize(raw_action, omega, particle_energy, choice)
}
