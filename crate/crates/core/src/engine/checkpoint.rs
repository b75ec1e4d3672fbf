//! Plain-text checkpoints.
//!
//! Line-oriented `key = value` header followed by one `osc`, `slot` and
//! `snapshot` line per entry. Floats use 17 significant digits, which
//! round-trips every `f64`, so a resumed run continues bit-exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::Simulation;
use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::model::{Mode, ModelParams, OscillatorState, ParticleState, Sign, SystemState};
use crate::observables::{Averaging, Compensated, RunningStats, Snapshot, StatsConfig};
use crate::quantize::RoundingRule;
use crate::rng::RngStream;

const MAGIC: &str = "blackbody1d-checkpoint 1";

impl Simulation {
    pub fn to_checkpoint(&self) -> String {
        let p = &self.params;
        let s = &self.state;
        let stats = self.stats.raw_parts();
        let cfg = self.stats.config();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("mode", p.mode().to_string());
        kv("N", p.n_oscillators().to_string());
        kv("E", fmt17(p.total_energy()));
        kv("M", fmt17(p.heavy_mass()));
        kv("c", fmt17(p.mass_scale()));
        kv("k", fmt17(p.stiffness()));
        kv("rounding", self.rounding.as_str().into());
        kv("averaging", cfg.averaging.as_str().into());
        kv("burn_in", cfg.burn_in.to_string());
        kv("snapshot_ratio", fmt17(cfg.snapshot_ratio));
        kv(
            "snapshot_modes",
            cfg.snapshot_modes
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("seed", self.rng.master().to_string());
        kv("stream", self.rng.run().to_string());
        kv("word_pos", self.rng.word_pos().to_string());
        kv("time", fmt17(s.time));
        kv("collisions", s.collisions.to_string());
        kv("particle_energy", fmt17(s.particle.energy));
        kv(
            "particle_direction",
            s.particle.direction.as_i8().to_string(),
        );
        kv("stats_clock", fmt17(stats.clock));
        kv("stats_collisions", stats.collisions.to_string());
        kv(
            "stats_origin",
            stats.origin_time.map_or("none".into(), fmt17),
        );
        kv("stats_snapshot_index", stats.snapshot_index.to_string());
        kv("stats_next_snapshot", stats.next_snapshot.to_string());

        let mut body = String::new();
        for o in &s.oscillators {
            let _ = writeln!(
                body,
                "osc {} {} {} {} {}",
                o.index,
                fmt17(o.energy),
                fmt17(o.action),
                o.parity.as_i8(),
                fmt17(o.next_crossing)
            );
        }
        for k in 0..stats.current.len() {
            let (sum, comp) = stats.acc[k].parts();
            let _ = writeln!(
                body,
                "slot {k} {} {} {} {}",
                fmt17(stats.current[k]),
                fmt17(sum),
                fmt17(comp),
                fmt17(stats.flushed_at[k])
            );
        }
        for snap in stats.snapshots {
            let _ = write!(
                body,
                "snapshot {} {}",
                snap.collisions,
                fmt17(snap.mean_particle)
            );
            for m in &snap.mean_modes {
                let _ = write!(body, " {}", fmt17(*m));
            }
            body.push('\n');
        }
        format!("{MAGIC}\n{out}{body}")
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(bad(1, "missing checkpoint header")),
        }

        let mut header = Header::default();
        let mut oscillators = Vec::new();
        let mut slots = Vec::new();
        let mut snapshots = Vec::new();
        for (ln, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut words = line.split_whitespace();
            match words.next() {
                Some("osc") => {
                    let f: Vec<&str> = words.collect();
                    if f.len() != 5 {
                        return Err(bad(ln, "osc line needs 5 fields"));
                    }
                    oscillators.push((
                        ln,
                        num::<usize>(ln, f[0])?,
                        num::<f64>(ln, f[1])?,
                        num::<f64>(ln, f[2])?,
                        sign(ln, f[3])?,
                        num::<f64>(ln, f[4])?,
                    ));
                }
                Some("slot") => {
                    let f: Vec<&str> = words.collect();
                    if f.len() != 5 {
                        return Err(bad(ln, "slot line needs 5 fields"));
                    }
                    if num::<usize>(ln, f[0])? != slots.len() {
                        return Err(bad(ln, "slots out of order"));
                    }
                    slots.push((
                        num::<f64>(ln, f[1])?,
                        Compensated::from_parts(num(ln, f[2])?, num(ln, f[3])?),
                        num::<f64>(ln, f[4])?,
                    ));
                }
                Some("snapshot") => {
                    let f: Vec<&str> = words.collect();
                    if f.len() < 2 {
                        return Err(bad(ln, "snapshot line needs at least 2 fields"));
                    }
                    snapshots.push(Snapshot {
                        collisions: num(ln, f[0])?,
                        mean_particle: num(ln, f[1])?,
                        mean_modes: f[2..].iter().map(|w| num(ln, w)).collect::<Result<_>>()?,
                    });
                }
                _ => {
                    let (key, value) = line
                        .split_once('=')
                        .ok_or_else(|| bad(ln, "expected `key = value`"))?;
                    header.set(ln, key.trim(), value.trim())?;
                }
            }
        }

        let h = header;
        let params = ModelParams::with_constants(
            h.get("N")?,
            h.get("E")?,
            h.get::<Mode>("mode")?,
            h.get("M")?,
            h.get("c")?,
            h.get("k")?,
        )?;
        let n = params.n_oscillators();
        if oscillators.len() != n {
            return Err(bad(
                0,
                format!("expected {n} osc lines, found {}", oscillators.len()),
            ));
        }
        let oscillators = oscillators
            .into_iter()
            .enumerate()
            .map(|(k, (ln, index, energy, action, parity, next_crossing))| {
                if index != k + 1 {
                    return Err(bad(ln, "osc lines out of order"));
                }
                let (mass, frequency) = params.oscillator_params(index)?;
                Ok(OscillatorState {
                    index,
                    mass,
                    frequency,
                    energy,
                    action,
                    parity,
                    next_crossing,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let state = SystemState {
            particle: ParticleState {
                energy: h.get("particle_energy")?,
                direction: sign(h.line("particle_direction"), h.raw("particle_direction")?)?,
            },
            oscillators,
            time: h.get("time")?,
            collisions: h.get("collisions")?,
        };

        let snapshot_modes = h
            .raw("snapshot_modes")?
            .split(',')
            .filter(|w| !w.is_empty())
            .map(|w| num::<usize>(h.line("snapshot_modes"), w))
            .collect::<Result<Vec<_>>>()?;
        let config = StatsConfig {
            averaging: h.get::<Averaging>("averaging")?,
            burn_in: h.get("burn_in")?,
            snapshot_ratio: h.get("snapshot_ratio")?,
            snapshot_modes,
        };
        if slots.len() != n + 1 {
            return Err(bad(
                0,
                format!("expected {} slot lines, found {}", n + 1, slots.len()),
            ));
        }
        let origin = match h.raw("stats_origin")? {
            "none" => None,
            w => Some(num(h.line("stats_origin"), w)?),
        };
        let (current, rest): (Vec<f64>, Vec<(Compensated, f64)>) =
            slots.into_iter().map(|(c, a, f)| (c, (a, f))).unzip();
        let (acc, flushed_at) = rest.into_iter().unzip();
        let stats = RunningStats::from_raw(
            config,
            current,
            acc,
            flushed_at,
            h.get("stats_clock")?,
            h.get("stats_collisions")?,
            origin,
            h.get("stats_snapshot_index")?,
            h.get("stats_next_snapshot")?,
            snapshots,
        );
        let rng = RngStream::resume(h.get("seed")?, h.get("stream")?, h.get("word_pos")?);
        let rounding = h.get::<RoundingRule>("rounding")?;
        Self::assemble(params, state, rng, rounding, stats)
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_checkpoint()).map_err(|e| Error::io(path, e))
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_checkpoint(&text)
    }
}

#[derive(Default)]
struct Header {
    entries: Vec<(usize, String, String)>,
}

impl Header {
    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        if self.entries.iter().any(|(_, k, _)| k == key) {
            return Err(bad(line, format!("duplicate key `{key}`")));
        }
        self.entries
            .push((line, key.to_string(), value.to_string()));
        Ok(())
    }

    fn line(&self, key: &str) -> usize {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map_or(0, |e| e.0)
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_str())
            .ok_or_else(|| bad(0, format!("missing key `{key}`")))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        num(self.line(key), self.raw(key)?)
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Checkpoint {
        line,
        message: message.into(),
    }
}

fn num<T: FromStr>(line: usize, word: &str) -> Result<T> {
    word.parse()
        .map_err(|_| bad(line, format!("cannot parse `{word}`")))
}

fn sign(line: usize, word: &str) -> Result<Sign> {
    num::<i8>(line, word)
        .ok()
        .and_then(Sign::from_i8)
        .ok_or_else(|| bad(line, format!("bad sign `{word}`")))
}
