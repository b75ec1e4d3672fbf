//! Run and sweep configuration files.
//!
//! Flat `key = value` pairs grouped in `[model]`, `[run]`, `[sweep]` and
//! `[output]` sections; `#` starts a comment. A file with a `[sweep]`
//! section describes a sweep, otherwise a single run.
//!
//! ```text
//! [model]
//! mode = discrete        # required: classical | discrete
//! N = 64
//! E = 60
//! # M, c, k default to (√5+1)/2, 0.51, 0.1
//!
//! [run]
//! collisions = 10000000
//! seed = 1
//! initial = particle     # particle | oscillator:<j> | explicit:<E0>,<E1>,...,<EN>
//! rounding = fair        # fair | weighted
//! averaging = collision  # collision | time
//! burn_in = 0
//! snapshot_ratio = 1.333521432163324
//! convergence_modes = 1,8,16,24,32,40
//!
//! [sweep]
//! N = 8,16,32,64
//! E = 25,100,225,400,1600
//! seeds_per_cell = 1
//! collisions = 4000000
//! workers = 1
//!
//! [output]
//! dir = out
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    InitialCondition, Mode, ModelParams, DEFAULT_HEAVY_MASS, DEFAULT_MASS_SCALE, DEFAULT_STIFFNESS,
};
use crate::observables::{Averaging, StatsConfig};
use crate::quantize::RoundingRule;

pub const DEFAULT_RUN_COLLISIONS: u64 = 10_000_000;
pub const DEFAULT_SWEEP_COLLISIONS: u64 = 4_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub collisions: u64,
    pub seed: u64,
    pub initial: InitialCondition,
    pub rounding: RoundingRule,
    pub stats: StatsConfig,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub mode: Mode,
    pub heavy_mass: f64,
    pub mass_scale: f64,
    pub stiffness: f64,
    pub n_values: Vec<usize>,
    pub e_values: Vec<f64>,
    pub seeds_per_cell: usize,
    pub collisions: u64,
    pub workers: usize,
    pub seed: u64,
    pub initial: InitialCondition,
    pub rounding: RoundingRule,
    pub stats: StatsConfig,
    pub output_dir: PathBuf,
}

impl SweepConfig {
    /// Model parameters of one grid cell.
    pub fn params(&self, n_oscillators: usize, total_energy: f64) -> Result<ModelParams> {
        ModelParams::with_constants(
            n_oscillators,
            total_energy,
            self.mode,
            self.heavy_mass,
            self.mass_scale,
            self.stiffness,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Config {
    Run(RunConfig),
    Sweep(SweepConfig),
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("model", &["mode", "N", "E", "M", "c", "k"]),
    (
        "run",
        &[
            "collisions",
            "seed",
            "initial",
            "rounding",
            "averaging",
            "burn_in",
            "snapshot_ratio",
            "convergence_modes",
        ],
    ),
    (
        "sweep",
        &["N", "E", "seeds_per_cell", "collisions", "workers"],
    ),
    ("output", &["dir"]),
];

struct Entry {
    line: usize,
    section: &'static str,
    key: &'static str,
    value: String,
}

struct Entries {
    items: Vec<Entry>,
    has_sweep: bool,
}

impl Entries {
    fn find(&self, section: &str, key: &str) -> Option<&Entry> {
        self.items
            .iter()
            .find(|e| e.section == section && e.key == key)
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.find(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| Error::Config {
                line: e.line,
                key: key.into(),
                message: format!("cannot parse `{}`", e.value),
            }),
        }
    }

    fn get_with<T>(
        &self,
        section: &str,
        key: &str,
        parse: impl Fn(&str) -> Result<T>,
    ) -> Result<Option<T>> {
        match self.find(section, key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|err| Error::Config {
                line: e.line,
                key: key.into(),
                message: match err {
                    Error::Usage(m) => m,
                    other => other.to_string(),
                },
            }),
        }
    }

    fn required<T: FromStr>(&self, section: &str, key: &str) -> Result<T> {
        self.get(section, key)?.ok_or_else(|| Error::Config {
            line: 0,
            key: key.into(),
            message: format!("missing required key in [{section}]"),
        })
    }

    fn fail(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.find(section, key).map_or(0, |e| e.line),
            key: key.into(),
            message: message.into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut items: Vec<Entry> = Vec::new();
    let mut section: Option<&'static str> = None;
    let mut has_sweep = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            let found = SECTIONS
                .iter()
                .find(|(s, _)| *s == name)
                .ok_or_else(|| Error::Config {
                    line,
                    key: name.into(),
                    message: "unknown section".into(),
                })?;
            has_sweep |= found.0 == "sweep";
            section = Some(found.0);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            key: content.into(),
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let sec = section.ok_or_else(|| Error::Config {
            line,
            key: key.into(),
            message: "key outside of any section".into(),
        })?;
        let known = SECTIONS
            .iter()
            .find(|(s, _)| *s == sec)
            .and_then(|(_, keys)| keys.iter().find(|k| **k == key))
            .ok_or_else(|| Error::Config {
                line,
                key: key.into(),
                message: format!("unknown key in [{sec}]"),
            })?;
        if items.iter().any(|e| e.section == sec && e.key == *known) {
            return Err(Error::Config {
                line,
                key: key.into(),
                message: "duplicate key".into(),
            });
        }
        items.push(Entry {
            line,
            section: sec,
            key: known,
            value: value.trim().to_string(),
        });
    }
    Ok(Entries { items, has_sweep })
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(|w| {
            w.parse()
                .map_err(|_| Error::usage(format!("cannot parse list item `{w}`")))
        })
        .collect()
}

/// `particle`, `oscillator:<j>` or `explicit:<E0>,<E1>,...`.
pub fn parse_initial(s: &str) -> Result<InitialCondition> {
    if s == "particle" {
        return Ok(InitialCondition::AllInParticle);
    }
    if let Some(j) = s.strip_prefix("oscillator:") {
        return j
            .trim()
            .parse()
            .map(InitialCondition::AllInOscillator)
            .map_err(|_| Error::usage(format!("bad oscillator index `{j}`")));
    }
    if let Some(list) = s.strip_prefix("explicit:") {
        let values: Vec<f64> = parse_list(list)?;
        let (particle, modes) = values
            .split_first()
            .ok_or_else(|| Error::usage("explicit initial condition needs energies"))?;
        return Ok(InitialCondition::Explicit {
            particle: *particle,
            modes: modes.to_vec(),
        });
    }
    Err(Error::usage(format!(
        "unknown initial condition `{s}` (expected particle, oscillator:<j> or explicit:<E0>,...)"
    )))
}

pub fn render_initial(ic: &InitialCondition) -> String {
    match ic {
        InitialCondition::AllInParticle => "particle".into(),
        InitialCondition::AllInOscillator(j) => format!("oscillator:{j}"),
        InitialCondition::Explicit { particle, modes } => {
            let mut s = format!("explicit:{particle}");
            for m in modes {
                let _ = write!(s, ",{m}");
            }
            s
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

struct Common {
    mode: Mode,
    heavy_mass: f64,
    mass_scale: f64,
    stiffness: f64,
    seed: u64,
    initial: InitialCondition,
    rounding: RoundingRule,
    stats: StatsConfig,
    output_dir: PathBuf,
}

fn common(e: &Entries) -> Result<Common> {
    let mode = e
        .get_with("model", "mode", Mode::from_str)?
        .ok_or_else(|| e.fail("model", "mode", "missing required key in [model]"))?;
    let defaults = StatsConfig::default();
    let stats = StatsConfig {
        averaging: e
            .get_with("run", "averaging", Averaging::from_str)?
            .unwrap_or_default(),
        burn_in: e.get("run", "burn_in")?.unwrap_or(0),
        snapshot_ratio: e
            .get("run", "snapshot_ratio")?
            .unwrap_or(defaults.snapshot_ratio),
        snapshot_modes: e
            .get_with("run", "convergence_modes", parse_list::<usize>)?
            .unwrap_or(defaults.snapshot_modes),
    };
    if !(stats.snapshot_ratio > 1.0) {
        return Err(e.fail("run", "snapshot_ratio", "must exceed 1"));
    }
    if stats.snapshot_modes.contains(&0) {
        return Err(e.fail("run", "convergence_modes", "mode indices start at 1"));
    }
    let c = Common {
        mode,
        heavy_mass: e.get("model", "M")?.unwrap_or(DEFAULT_HEAVY_MASS),
        mass_scale: e.get("model", "c")?.unwrap_or(DEFAULT_MASS_SCALE),
        stiffness: e.get("model", "k")?.unwrap_or(DEFAULT_STIFFNESS),
        seed: e.get("run", "seed")?.unwrap_or(DEFAULT_SEED),
        initial: e
            .get_with("run", "initial", parse_initial)?
            .unwrap_or(InitialCondition::AllInParticle),
        rounding: e
            .get_with("run", "rounding", RoundingRule::from_str)?
            .unwrap_or_default(),
        stats,
        output_dir: e
            .get::<String>("output", "dir")?
            .unwrap_or_else(|| "out".into())
            .into(),
    };
    for (key, v) in [("M", c.heavy_mass), ("c", c.mass_scale), ("k", c.stiffness)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(e.fail("model", key, "must be positive"));
        }
    }
    if c.heavy_mass <= c.mass_scale {
        return Err(e.fail("model", "M", "must exceed the heaviest oscillator mass c"));
    }
    Ok(c)
}

/// Parse and validate a configuration, filling in defaults.
pub fn parse_config(text: &str) -> Result<Config> {
    let e = tokenize(text)?;
    let c = common(&e)?;
    if e.has_sweep {
        for key in ["N", "E"] {
            if e.find("model", key).is_some() {
                return Err(e.fail("model", key, "sweeps take N and E from [sweep]"));
            }
        }
        if e.find("run", "collisions").is_some() {
            return Err(e.fail("run", "collisions", "sweeps take collisions from [sweep]"));
        }
        let n_values: Vec<usize> = e
            .get_with("sweep", "N", parse_list)?
            .ok_or_else(|| e.fail("sweep", "N", "missing required key in [sweep]"))?;
        let e_values: Vec<f64> = e
            .get_with("sweep", "E", parse_list)?
            .ok_or_else(|| e.fail("sweep", "E", "missing required key in [sweep]"))?;
        if n_values.is_empty() || n_values.contains(&0) {
            return Err(e.fail("sweep", "N", "needs one or more positive oscillator counts"));
        }
        if e_values.is_empty() || e_values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(e.fail("sweep", "E", "needs one or more positive energies"));
        }
        let seeds_per_cell = e.get("sweep", "seeds_per_cell")?.unwrap_or(1);
        if seeds_per_cell == 0 {
            return Err(e.fail("sweep", "seeds_per_cell", "must be at least 1"));
        }
        let collisions = e
            .get("sweep", "collisions")?
            .unwrap_or(DEFAULT_SWEEP_COLLISIONS);
        if collisions == 0 {
            return Err(e.fail("sweep", "collisions", "must be at least 1"));
        }
        let workers = e.get("sweep", "workers")?.unwrap_or(1);
        if workers == 0 {
            return Err(e.fail("sweep", "workers", "must be at least 1"));
        }
        let min_n = *n_values.iter().min().unwrap_or(&1);
        match c.initial {
            InitialCondition::Explicit { .. } => {
                return Err(e.fail("run", "initial", "sweeps accept particle or oscillator:<j>"));
            }
            InitialCondition::AllInOscillator(j) if j == 0 || j > min_n => {
                return Err(e.fail(
                    "run",
                    "initial",
                    format!("oscillator index must lie in 1..={min_n}"),
                ));
            }
            _ => {}
        }
        return Ok(Config::Sweep(SweepConfig {
            mode: c.mode,
            heavy_mass: c.heavy_mass,
            mass_scale: c.mass_scale,
            stiffness: c.stiffness,
            n_values,
            e_values,
            seeds_per_cell,
            collisions,
            workers,
            seed: c.seed,
            initial: c.initial,
            rounding: c.rounding,
            stats: c.stats,
            output_dir: c.output_dir,
        }));
    }

    let n: usize = e.required("model", "N")?;
    if n == 0 {
        return Err(e.fail("model", "N", "must be at least 1"));
    }
    let energy: f64 = e.required("model", "E")?;
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(e.fail("model", "E", "must be positive"));
    }
    let params =
        ModelParams::with_constants(n, energy, c.mode, c.heavy_mass, c.mass_scale, c.stiffness)
            .map_err(|err| e.fail("model", "N", err.to_string()))?;
    let collisions = e
        .get("run", "collisions")?
        .unwrap_or(DEFAULT_RUN_COLLISIONS);
    if collisions == 0 {
        return Err(e.fail("run", "collisions", "must be at least 1"));
    }
    match &c.initial {
        InitialCondition::AllInOscillator(j) if *j == 0 || *j > n => {
            return Err(e.fail(
                "run",
                "initial",
                format!("oscillator index must lie in 1..={n}"),
            ));
        }
        InitialCondition::Explicit { modes, .. } if modes.len() != n => {
            return Err(e.fail(
                "run",
                "initial",
                format!("explicit list needs 1 + {n} energies"),
            ));
        }
        _ => {}
    }
    Ok(Config::Run(RunConfig {
        params,
        collisions,
        seed: c.seed,
        initial: c.initial,
        rounding: c.rounding,
        stats: c.stats,
        output_dir: c.output_dir,
    }))
}

impl Config {
    /// Canonical text form; `parse_config(render(c)) == c`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let (mode, m, c, k, seed, initial, rounding, stats, dir) = match self {
            Config::Run(r) => (
                r.params.mode(),
                r.params.heavy_mass(),
                r.params.mass_scale(),
                r.params.stiffness(),
                r.seed,
                &r.initial,
                r.rounding,
                &r.stats,
                &r.output_dir,
            ),
            Config::Sweep(w) => (
                w.mode,
                w.heavy_mass,
                w.mass_scale,
                w.stiffness,
                w.seed,
                &w.initial,
                w.rounding,
                &w.stats,
                &w.output_dir,
            ),
        };
        let _ = writeln!(s, "[model]\nmode = {mode}");
        if let Config::Run(r) = self {
            let _ = writeln!(
                s,
                "N = {}\nE = {}",
                r.params.n_oscillators(),
                r.params.total_energy()
            );
        }
        let _ = writeln!(s, "M = {m}\nc = {c}\nk = {k}\n\n[run]");
        if let Config::Run(r) = self {
            let _ = writeln!(s, "collisions = {}", r.collisions);
        }
        let _ = writeln!(
            s,
            "seed = {seed}\ninitial = {}\nrounding = {}\naveraging = {}\nburn_in = {}\nsnapshot_ratio = {}\nconvergence_modes = {}",
            render_initial(initial),
            rounding.as_str(),
            stats.averaging.as_str(),
            stats.burn_in,
            stats.snapshot_ratio,
            join(&stats.snapshot_modes),
        );
        if let Config::Sweep(w) = self {
            let _ = writeln!(
                s,
                "\n[sweep]\nN = {}\nE = {}\nseeds_per_cell = {}\ncollisions = {}\nworkers = {}",
                join(&w.n_values),
                join(&w.e_values),
                w.seeds_per_cell,
                w.collisions,
                w.workers
            );
        }
        let _ = writeln!(s, "\n[output]\ndir = {}", dir.display());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("[model]\nmode = discrete\nN = 64\nE = 60\n").unwrap();
        let Config::Run(r) = cfg else {
            panic!("expected a run config")
        };
        assert_eq!(r.params.heavy_mass(), (5f64.sqrt() + 1.0) / 2.0);
        assert_eq!(r.params.mass_scale(), 0.51);
        assert_eq!(r.params.stiffness(), 0.1);
        assert_eq!(r.params.mode(), Mode::Discrete);
        assert_eq!(r.collisions, DEFAULT_RUN_COLLISIONS);
        assert_eq!(r.initial, InitialCondition::AllInParticle);
        assert_eq!(r.stats.snapshot_modes, vec![1, 8, 16, 24, 32, 40]);
    }

    #[test]
    fn render_is_normal_form() {
        let text = "# comment\n[model]\nmode=classical # trailing\nN= 8\nE =12.5\n[run]\ninitial = oscillator:3\nseed = 99\n";
        let cfg = parse_config(text).unwrap();
        let rendered = cfg.render();
        assert_eq!(parse_config(&rendered).unwrap(), cfg);
        assert_eq!(parse_config(&rendered).unwrap().render(), rendered);
    }

    #[test]
    fn sweep_config_round_trip() {
        let text = "[model]\nmode = discrete\n[sweep]\nN = 8, 16\nE = 25,100\nworkers = 2\n[output]\ndir = /tmp/x\n";
        let cfg = parse_config(text).unwrap();
        let Config::Sweep(w) = &cfg else {
            panic!("expected a sweep config")
        };
        assert_eq!(w.n_values, vec![8, 16]);
        assert_eq!(w.e_values, vec![25.0, 100.0]);
        assert_eq!(w.collisions, DEFAULT_SWEEP_COLLISIONS);
        assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);
    }

    fn err_key(text: &str) -> (usize, String) {
        match parse_config(text) {
            Err(Error::Config { line, key, .. }) => (line, key),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_key_and_line() {
        assert_eq!(
            err_key("[model]\nmode = discrete\nN = 0\nE = 60\n"),
            (3, "N".into())
        );
        assert_eq!(
            err_key("[model]\nmode = discrete\nN = 4\nE = -1\n"),
            (4, "E".into())
        );
        assert_eq!(
            err_key("[model]\nmode = discrete\nN = four\nE = 1\n"),
            (3, "N".into())
        );
        assert_eq!(
            err_key("[model]\nmode = discrete\nN = 4\nE = 1\nbogus = 2\n"),
            (5, "bogus".into())
        );
        assert_eq!(
            err_key("[model]\nmode = quantum\nN = 4\nE = 1\n"),
            (2, "mode".into())
        );
        assert_eq!(err_key("[model]\nN = 4\nE = 1\n").1, "mode");
        assert_eq!(
            err_key("[model]\nmode = discrete\nN = 4\nN = 5\nE = 1\n"),
            (4, "N".into())
        );
        assert_eq!(err_key("[nope]\n"), (1, "nope".into()));
        assert_eq!(
            err_key("[model]\nmode = discrete\nN = 4\nE = 1\n[run]\ninitial = oscillator:5\n"),
            (6, "initial".into())
        );
        assert_eq!(
            err_key("[model]\nmode = discrete\n[sweep]\nN = 8,0\nE = 1\n"),
            (4, "N".into())
        );
    }

    #[test]
    fn initial_condition_syntax() {
        assert_eq!(
            parse_initial("particle").unwrap(),
            InitialCondition::AllInParticle
        );
        assert_eq!(
            parse_initial("oscillator:32").unwrap(),
            InitialCondition::AllInOscillator(32)
        );
        assert_eq!(
            parse_initial("explicit:1,2.5,0").unwrap(),
            InitialCondition::Explicit {
                particle: 1.0,
                modes: vec![2.5, 0.0]
            }
        );
        assert!(parse_initial("everywhere").is_err());
    }

    proptest! {
        #[test]
        fn run_config_round_trips(
            n in 1usize..200, e in 1e-3f64..1e5, discrete in any::<bool>(), seed in any::<u64>(),
            collisions in 1u64..1_000_000_000, burn in 0u64..1000, ratio in 1.01f64..10.0,
            weighted in any::<bool>(), timed in any::<bool>(),
        ) {
            let text = format!(
                "[model]\nmode = {}\nN = {n}\nE = {e}\n[run]\nseed = {seed}\ncollisions = {collisions}\nburn_in = {burn}\nsnapshot_ratio = {ratio}\nrounding = {}\naveraging = {}\n",
                if discrete { "discrete" } else { "classical" },
                if weighted { "weighted" } else { "fair" },
                if timed { "time" } else { "collision" },
            );
            let cfg = parse_config(&text).unwrap();
            let again = parse_config(&cfg.render()).unwrap();
            prop_assert_eq!(&again, &cfg);
            prop_assert_eq!(again.render(), cfg.render());
        }
    }
}
