//! Running averages, localization measure and conservation monitoring.

use crate::engine::CollisionRecord;
use crate::error::{Error, Result};
use crate::model::{ModelParams, SystemState};

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn from_parts(sum: f64, comp: f64) -> Self {
        Self { sum, comp }
    }

    pub fn parts(&self) -> (f64, f64) {
        (self.sum, self.comp)
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Adds `a·b` including the rounding error of the product.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let err = a.mul_add(b, -p);
        self.add(p);
        self.comp += err;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Compensated::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Inverse participation ratio `(Σ m)² / Σ m²` of a nonnegative spectrum.
///
/// Lies in `[1, len]`: 1 for a single excited mode, `len` for a flat one.
pub fn ipr(mean_energies: &[f64]) -> Result<f64> {
    if mean_energies.iter().any(|m| *m < 0.0 || !m.is_finite()) {
        return Err(Error::usage("ipr needs finite nonnegative energies"));
    }
    let peak = mean_energies.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::usage("ipr is undefined for an all-zero spectrum"));
    }
    // Normalise by the peak so squares neither overflow nor underflow.
    let sum = neumaier_sum(mean_energies.iter().map(|m| m / peak));
    let sum_sq = neumaier_sum(mean_energies.iter().map(|m| (m / peak) * (m / peak)));
    Ok(sum * sum / sum_sq)
}

/// `|E_now − E_total| / E_total` with a compensated sum of the current energies.
pub fn conservation_drift(state: &SystemState, params: &ModelParams) -> f64 {
    let e_total = params.total_energy();
    (state.total_energy() - e_total).abs() / e_total
}

/// Weighting of samples in the running means.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Averaging {
    /// Every collision contributes one sample of the post-collision state.
    #[default]
    PerCollision,
    /// Every post-collision state is weighted by the time until the next collision.
    TimeWeighted,
}

impl Averaging {
    pub fn as_str(self) -> &'static str {
        match self {
            Averaging::PerCollision => "collision",
            Averaging::TimeWeighted => "time",
        }
    }
}

impl std::str::FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collision" => Ok(Averaging::PerCollision),
            "time" => Ok(Averaging::TimeWeighted),
            other => Err(Error::usage(format!(
                "unknown averaging `{other}` (expected collision or time)"
            ))),
        }
    }
}

/// Default snapshot ratio, eight snapshots per decade.
pub fn default_snapshot_ratio() -> f64 {
    10f64.powf(0.125)
}

/// Oscillators tracked in convergence snapshots by default.
pub const DEFAULT_SNAPSHOT_MODES: [usize; 6] = [1, 8, 16, 24, 32, 40];

#[derive(Clone, Debug, PartialEq)]
pub struct StatsConfig {
    pub averaging: Averaging,
    /// Collisions discarded before averaging starts.
    pub burn_in: u64,
    /// Ratio between consecutive snapshot collision counts (> 1).
    pub snapshot_ratio: f64,
    /// 1-based modes recorded in snapshots; modes beyond `N` are ignored.
    pub snapshot_modes: Vec<usize>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            averaging: Averaging::PerCollision,
            burn_in: 0,
            snapshot_ratio: default_snapshot_ratio(),
            snapshot_modes: DEFAULT_SNAPSHOT_MODES.to_vec(),
        }
    }
}

/// Running means at one collision count.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub collisions: u64,
    pub mean_particle: f64,
    /// Means of `StatsConfig::snapshot_modes` (restricted to existing modes), in order.
    pub mean_modes: Vec<f64>,
}

/// Running means of the particle and every mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Means {
    /// Total weight behind the means (sample count, or elapsed time).
    pub weight: f64,
    pub particle: f64,
    pub modes: Vec<f64>,
}

impl Means {
    pub fn field_energy(&self) -> f64 {
        neumaier_sum(self.modes.iter().copied())
    }

    /// Weighted combination of means from runs with identical parameters.
    pub fn merge(parts: &[Means]) -> Result<Means> {
        let first = parts
            .first()
            .ok_or_else(|| Error::usage("nothing to merge"))?;
        let n = first.modes.len();
        if parts.iter().any(|p| p.modes.len() != n) {
            return Err(Error::usage(
                "cannot merge means with different mode counts",
            ));
        }
        let weight = neumaier_sum(parts.iter().map(|p| p.weight));
        if !(weight > 0.0) {
            return Err(Error::usage("cannot merge runs without samples"));
        }
        let combine = |f: &dyn Fn(&Means) -> f64| {
            let mut acc = Compensated::default();
            for p in parts {
                acc.add_product(f(p), p.weight);
            }
            acc.value() / weight
        };
        Ok(Means {
            weight,
            particle: combine(&|p| p.particle),
            modes: (0..n).map(|i| combine(&|p| p.modes[i])).collect(),
        })
    }
}

/// Lazily updated running means.
///
/// Only the particle and the colliding mode change in a collision, so each
/// slot keeps its current value and the clock reading up to which that
/// value has been folded into its accumulator. A slot is flushed only when
/// it changes, which makes a record O(1) while the means stay equal to the
/// naive per-sample averages. Slot 0 is the particle, slot `i` mode `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunningStats {
    config: StatsConfig,
    current: Vec<f64>,
    acc: Vec<Compensated>,
    flushed_at: Vec<f64>,
    /// Total weight seen so far.
    clock: f64,
    /// Collisions recorded, including burn-in.
    collisions: u64,
    /// Time of the first averaged collision (time-weighted mode).
    origin_time: Option<f64>,
    snapshot_index: u32,
    next_snapshot: u64,
    snapshots: Vec<Snapshot>,
}

impl RunningStats {
    pub fn new(config: StatsConfig, initial: &SystemState) -> Result<Self> {
        if !(config.snapshot_ratio > 1.0) {
            return Err(Error::usage(format!(
                "snapshot ratio must exceed 1, got {}",
                config.snapshot_ratio
            )));
        }
        let slots = initial.oscillators.len() + 1;
        let mut current = Vec::with_capacity(slots);
        current.push(initial.particle.energy);
        current.extend(initial.oscillators.iter().map(|o| o.energy));
        let mut stats = Self {
            config,
            current,
            acc: vec![Compensated::default(); slots],
            flushed_at: vec![0.0; slots],
            clock: 0.0,
            collisions: initial.collisions,
            origin_time: None,
            snapshot_index: 0,
            next_snapshot: 0,
            snapshots: Vec::new(),
        };
        stats.advance_schedule();
        Ok(stats)
    }

    pub fn config(&self) -> &StatsConfig {
        &self.config
    }

    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    /// Collisions that entered the averages (after burn-in).
    pub fn samples(&self) -> u64 {
        self.collisions.saturating_sub(self.config.burn_in)
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Fold one completed collision into the means.
    pub fn record(&mut self, rec: &CollisionRecord) {
        self.collisions = rec.collision;
        let counted = rec.collision > self.config.burn_in;
        let (start, end) = if !counted {
            (0.0, 0.0)
        } else {
            match self.config.averaging {
                Averaging::PerCollision => {
                    let t = (rec.collision - self.config.burn_in) as f64;
                    (t - 1.0, t)
                }
                Averaging::TimeWeighted => {
                    let origin = *self.origin_time.get_or_insert(rec.time);
                    let t = rec.time - origin;
                    (t, t)
                }
            }
        };
        self.update_slot(0, rec.particle_after, start);
        self.update_slot(rec.oscillator, rec.oscillator_after, start);
        self.clock = end;

        if counted && rec.collision >= self.next_snapshot {
            self.take_snapshot();
            self.advance_schedule();
        }
    }

    fn update_slot(&mut self, slot: usize, value: f64, start: f64) {
        let held = start - self.flushed_at[slot];
        if held > 0.0 {
            self.acc[slot].add_product(self.current[slot], held);
        }
        self.flushed_at[slot] = start;
        self.current[slot] = value;
    }

    fn advance_schedule(&mut self) {
        let floor = self.config.burn_in + 1;
        loop {
            let target = self
                .config
                .snapshot_ratio
                .powi(self.snapshot_index as i32)
                .ceil() as u64;
            self.snapshot_index += 1;
            let target = target.max(floor);
            if target > self.collisions
                && target > self.snapshots.last().map_or(0, |s| s.collisions)
            {
                self.next_snapshot = target;
                return;
            }
        }
    }

    fn slot_mean(&self, slot: usize) -> f64 {
        if self.clock > 0.0 {
            let mut a = self.acc[slot];
            a.add_product(self.current[slot], self.clock - self.flushed_at[slot]);
            a.value() / self.clock
        } else {
            self.current[slot]
        }
    }

    fn take_snapshot(&mut self) {
        let n = self.current.len() - 1;
        let mean_modes = self
            .config
            .snapshot_modes
            .iter()
            .filter(|&&i| i >= 1 && i <= n)
            .map(|&i| self.slot_mean(i))
            .collect();
        self.snapshots.push(Snapshot {
            collisions: self.collisions,
            mean_particle: self.slot_mean(0),
            mean_modes,
        });
    }

    /// Append a snapshot at the current collision count unless one exists.
    pub fn finish(&mut self) {
        let have = self.snapshots.last().map(|s| s.collisions);
        if self.samples() > 0 && have != Some(self.collisions) {
            self.take_snapshot();
        }
    }

    /// Current means. Before any averaged collision these are the current energies.
    pub fn means(&self) -> Means {
        Means {
            weight: self.clock,
            particle: self.slot_mean(0),
            modes: (1..self.current.len()).map(|s| self.slot_mean(s)).collect(),
        }
    }

    pub(crate) fn raw_parts(&self) -> StatsParts<'_> {
        StatsParts {
            current: &self.current,
            acc: &self.acc,
            flushed_at: &self.flushed_at,
            clock: self.clock,
            collisions: self.collisions,
            origin_time: self.origin_time,
            snapshot_index: self.snapshot_index,
            next_snapshot: self.next_snapshot,
            snapshots: &self.snapshots,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_raw(
        config: StatsConfig,
        current: Vec<f64>,
        acc: Vec<Compensated>,
        flushed_at: Vec<f64>,
        clock: f64,
        collisions: u64,
        origin_time: Option<f64>,
        snapshot_index: u32,
        next_snapshot: u64,
        snapshots: Vec<Snapshot>,
    ) -> Self {
        Self {
            config,
            current,
            acc,
            flushed_at,
            clock,
            collisions,
            origin_time,
            snapshot_index,
            next_snapshot,
            snapshots,
        }
    }
}

/// Borrowed view of the accumulator internals, used by checkpoints.
pub(crate) struct StatsParts<'a> {
    pub current: &'a [f64],
    pub acc: &'a [Compensated],
    pub flushed_at: &'a [f64],
    pub clock: f64,
    pub collisions: u64,
    pub origin_time: Option<f64>,
    pub snapshot_index: u32,
    pub next_snapshot: u64,
    pub snapshots: &'a [Snapshot],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ParticleState, Sign};
    use proptest::prelude::*;

    fn state(particle: f64, modes: &[f64]) -> SystemState {
        use crate::model::OscillatorState;
        SystemState {
            particle: ParticleState {
                energy: particle,
                direction: Sign::Plus,
            },
            oscillators: modes
                .iter()
                .enumerate()
                .map(|(k, &e)| OscillatorState {
                    index: k + 1,
                    mass: 1.0,
                    frequency: 1.0,
                    energy: e,
                    action: e,
                    parity: Sign::Plus,
                    next_crossing: 1.0,
                })
                .collect(),
            time: 0.0,
            collisions: 0,
        }
    }

    fn rec(t: u64, time: f64, j: usize, osc: f64, particle: f64) -> CollisionRecord {
        CollisionRecord {
            collision: t,
            time,
            oscillator: j,
            oscillator_before: 0.0,
            particle_before: 0.0,
            oscillator_after: osc,
            particle_after: particle,
            roundoff: 0.0,
        }
    }

    /// Deterministic pseudo-random trace of (mode, oscillator energy, particle energy).
    fn trace(n_modes: usize, len: usize, seed: u64) -> Vec<(usize, f64, f64)> {
        let mut rng = crate::rng::RngStream::new(seed, 0);
        (0..len)
            .map(|_| {
                let j = 1 + (rng.uniform() * n_modes as f64) as usize;
                (j, rng.uniform() * 10.0, rng.uniform() * 3.0)
            })
            .collect()
    }

    fn ulps(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn ipr_examples() {
        assert_eq!(ipr(&[0.7; 64]).unwrap(), 64.0);
        let mut delta = vec![0.0; 10];
        delta[3] = 5.0;
        assert_eq!(ipr(&delta).unwrap(), 1.0);
        assert!(ipr(&[0.0; 4]).is_err());
        assert!(ipr(&[]).is_err());
        assert!(ipr(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn one_collision_means_equal_post_state() {
        let s0 = state(5.0, &[1.0, 2.0, 3.0]);
        let mut st = RunningStats::new(StatsConfig::default(), &s0).unwrap();
        st.record(&rec(1, 0.5, 2, 4.0, 3.0));
        let m = st.means();
        assert_eq!(m.particle, 3.0);
        assert_eq!(m.modes, vec![1.0, 4.0, 3.0]);
        assert_eq!(m.weight, 1.0);
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let s0 = state(5.0, &[1.0, 2.0]);
        let mut st = RunningStats::new(StatsConfig::default(), &s0).unwrap();
        for t in 1..=17 {
            st.record(&rec(
                t,
                t as f64,
                1 + (t as usize % 2),
                if t % 2 == 0 { 1.0 } else { 2.0 },
                5.0,
            ));
        }
        let m = st.means();
        assert_eq!(m.particle, 5.0);
        assert_eq!(m.modes, vec![1.0, 2.0]);
    }

    #[test]
    fn lazy_matches_naive_accumulation() {
        let n = 16;
        let init: Vec<f64> = (0..n).map(|i| i as f64 * 0.37).collect();
        let s0 = state(2.5, &init);
        let mut st = RunningStats::new(StatsConfig::default(), &s0).unwrap();

        // Naive oracle: keep the full state, add every slot after every collision.
        let mut full = std::iter::once(2.5)
            .chain(init.iter().copied())
            .collect::<Vec<_>>();
        let mut sums = vec![Compensated::default(); n + 1];
        let tr = trace(n, 1000, 4);
        for (t, &(j, e, p)) in tr.iter().enumerate() {
            st.record(&rec(t as u64 + 1, t as f64, j, e, p));
            full[0] = p;
            full[j] = e;
            for (acc, v) in sums.iter_mut().zip(&full) {
                acc.add(*v);
            }
        }
        let m = st.means();
        let naive: Vec<f64> = sums.iter().map(|a| a.value() / 1000.0).collect();
        assert!(ulps(m.particle, naive[0]) <= 2);
        for (lazy, nv) in m.modes.iter().zip(&naive[1..]) {
            assert!(ulps(*lazy, *nv) <= 2, "{lazy} vs {nv}");
        }
    }

    #[test]
    fn linearity_on_dyadic_trace() {
        let s0 = state(1.0, &[0.5, 0.25, 2.0]);
        let mut st = RunningStats::new(StatsConfig::default(), &s0).unwrap();
        let samples = [
            (1, 0.75, 1.5),
            (3, 1.25, 0.5),
            (2, 4.0, 0.25),
            (1, 0.0, 8.0),
            (3, 0.125, 2.0),
        ];
        let mut full = [1.0, 0.5, 0.25, 2.0];
        let mut sums = [0.0; 4];
        for (t, &(j, e, p)) in samples.iter().enumerate() {
            st.record(&rec(t as u64 + 1, 0.0, j, e, p));
            full[0] = p;
            full[j] = e;
            for k in 0..4 {
                sums[k] += full[k];
            }
        }
        let m = st.means();
        let t = samples.len() as f64;
        assert_eq!(m.particle * t, sums[0]);
        for k in 0..3 {
            assert_eq!(m.modes[k] * t, sums[k + 1]);
        }
    }

    #[test]
    fn burn_in_discards_early_samples() {
        let s0 = state(1.0, &[0.0]);
        let cfg = StatsConfig {
            burn_in: 2,
            ..StatsConfig::default()
        };
        let mut st = RunningStats::new(cfg, &s0).unwrap();
        st.record(&rec(1, 1.0, 1, 100.0, 0.0));
        st.record(&rec(2, 2.0, 1, 1.0, 0.0));
        st.record(&rec(3, 3.0, 1, 3.0, 0.0));
        st.record(&rec(4, 4.0, 1, 5.0, 0.0));
        assert_eq!(st.samples(), 2);
        assert_eq!(st.means().modes, vec![4.0]);
    }

    #[test]
    fn time_weighted_means() {
        let s0 = state(0.0, &[0.0]);
        let cfg = StatsConfig {
            averaging: Averaging::TimeWeighted,
            ..StatsConfig::default()
        };
        let mut st = RunningStats::new(cfg, &s0).unwrap();
        // value 2 held on [1, 2), value 6 held on [2, 5)
        st.record(&rec(1, 1.0, 1, 2.0, 0.0));
        st.record(&rec(2, 2.0, 1, 6.0, 0.0));
        st.record(&rec(3, 5.0, 1, 0.0, 0.0));
        let m = st.means();
        assert_eq!(m.weight, 4.0);
        assert_eq!(m.modes, vec![(2.0 + 18.0) / 4.0]);
    }

    #[test]
    fn snapshots_increase_and_end_at_final_count() {
        let s0 = state(1.0, &[0.0; 40]);
        let mut st = RunningStats::new(StatsConfig::default(), &s0).unwrap();
        for t in 1..=1234u64 {
            st.record(&rec(t, t as f64, 1 + (t as usize % 40), 1.0, 0.5));
        }
        st.finish();
        let counts: Vec<u64> = st.snapshots().iter().map(|s| s.collisions).collect();
        assert!(counts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*counts.last().unwrap(), 1234);
        assert_eq!(counts[0], 1);
        // roughly eight per decade
        assert!(counts.len() > 20 && counts.len() < 30, "{counts:?}");
        assert_eq!(st.snapshots()[0].mean_modes.len(), 6);
    }

    #[test]
    fn merge_weights_by_samples() {
        let a = Means {
            weight: 1.0,
            particle: 1.0,
            modes: vec![2.0],
        };
        let b = Means {
            weight: 3.0,
            particle: 5.0,
            modes: vec![6.0],
        };
        let m = Means::merge(&[a, b]).unwrap();
        assert_eq!(m.weight, 4.0);
        assert_eq!(m.particle, 4.0);
        assert_eq!(m.modes, vec![5.0]);
        assert!(Means::merge(&[]).is_err());
    }

    #[test]
    fn fresh_state_has_zero_drift() {
        let p = ModelParams::new(3, 6.0, crate::model::Mode::Classical).unwrap();
        let s = state(1.0, &[2.0, 0.5, 2.5]);
        assert!(conservation_drift(&s, &p) <= 2.0 * f64::EPSILON);
    }

    proptest! {
        #[test]
        fn ipr_scale_invariant_and_bounded(
            v in prop::collection::vec(0.0f64..100.0, 1..80), c in 1e-3f64..1e3,
        ) {
            prop_assume!(v.iter().any(|x| *x > 0.0));
            let l = ipr(&v).unwrap();
            prop_assert!(l >= 1.0 - 1e-12 && l <= v.len() as f64 * (1.0 + 1e-12));
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let ls = ipr(&scaled).unwrap();
            prop_assert!((ls - l).abs() <= 4.0 * f64::EPSILON * l);
        }
    }
}
