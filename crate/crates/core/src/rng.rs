//! Reproducible random streams.
//!
//! Every run draws from its own ChaCha8 stream. The stream key is a
//! SplitMix64 mix of a 64-bit master seed and a run index:
//!
//! ```text
//! key = splitmix64(splitmix64(master) ^ run)
//! ```
//!
//! Sweep cells first fold their coordinates into a cell seed with
//! [`cell_seed`] and then open run 0 of that seed, so a cell can be
//! reproduced by a single run given the same derived seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Sign;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream key for run `run` under `master`.
pub fn stream_key(master: u64, run: u64) -> u64 {
    splitmix64(splitmix64(master) ^ run)
}

/// Seed of one sweep cell: oscillator count, energy-grid index and replicate.
pub fn cell_seed(master: u64, n_oscillators: usize, energy_index: usize, replicate: usize) -> u64 {
    let mut h = splitmix64(master);
    for word in [n_oscillators as u64, energy_index as u64, replicate as u64] {
        h = splitmix64(h ^ word);
    }
    h
}

#[derive(Clone, Debug)]
pub struct RngStream {
    master: u64,
    run: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master: u64, run: u64) -> Self {
        Self {
            master,
            run,
            rng: ChaCha8Rng::seed_from_u64(stream_key(master, run)),
        }
    }

    /// Reopen a stream at a saved word position.
    pub fn resume(master: u64, run: u64, word_pos: u128) -> Self {
        let mut s = Self::new(master, run);
        s.rng.set_word_pos(word_pos);
        s
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn run(&self) -> u64 {
        self.run
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.next_u32() & 1 == 1
    }

    pub fn sign(&mut self) -> Sign {
        if self.coin() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
