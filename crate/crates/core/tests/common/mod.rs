//! Helpers shared by the property and acceptance suites.
#![allow(dead_code)]

use blackbody1d::model::{elastic_collision, DEFAULT_HEAVY_MASS, DEFAULT_MASS_SCALE};
use blackbody1d::observables::Compensated;
use blackbody1d::rng::RngStream;

pub const EPS: f64 = f64::EPSILON;

/// `Σ a_k b_k` with error far below one ulp of the largest term.
fn exact_dot(terms: &[(f64, f64)]) -> f64 {
    let mut acc = Compensated::default();
    for &(a, b) in terms {
        acc.add_product(a, b);
    }
    acc.value()
}

/// `Σ s_k m_k v_k²` with the square split exactly.
fn exact_kinetic(terms: &[(f64, f64, f64)]) -> f64 {
    let mut acc = Compensated::default();
    for &(s, m, v) in terms {
        let sq = v * v;
        let sq_err = v.mul_add(v, -sq);
        acc.add_product(s * m, sq);
        acc.add_product(s * m, sq_err);
    }
    acc.value()
}

/// Worst momentum and energy error, in ulps of the incoming scale, over
/// `cases` random collisions.
pub fn collision_fuzz(cases: u32, seed: u64) -> (f64, f64) {
    let mut rng = RngStream::new(seed, 0);
    let (mut worst_p, mut worst_e) = (0.0f64, 0.0f64);
    for case in 0..cases {
        // Ladder masses c/i² against the heavy particle, plus arbitrary pairs.
        let (m, big_m) = if case % 2 == 0 {
            let i = 1 + (rng.uniform() * 64.0) as usize;
            (DEFAULT_MASS_SCALE / (i * i) as f64, DEFAULT_HEAVY_MASS)
        } else {
            let m = 10f64.powf(-4.0 + 6.0 * rng.uniform());
            (m, m * 10f64.powf(4.0 * rng.uniform()))
        };
        let speed = |u: f64| (u - 0.5) * 2.0 * 10f64.powf(-3.0 + 6.0 * u);
        let v = speed(rng.uniform());
        let big_v = speed(rng.uniform()) * (m / big_m).sqrt();
        let (v2, big_v2) = elastic_collision(m, v, big_m, big_v).unwrap();

        let dp = exact_dot(&[(m, v), (big_m, big_v), (-m, v2), (-big_m, big_v2)]);
        let p_scale = (m * v).abs() + (big_m * big_v).abs();
        let de = exact_kinetic(&[
            (0.5, m, v),
            (0.5, big_m, big_v),
            (-0.5, m, v2),
            (-0.5, big_m, big_v2),
        ]);
        let e_scale = 0.5 * (m * v * v + big_m * big_v * big_v);
        worst_p = worst_p.max(dp.abs() / (EPS * p_scale));
        worst_e = worst_e.max(de.abs() / (EPS * e_scale));
    }
    (worst_p, worst_e)
}

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Quantization picks a neighbouring integer, credits exactly `(I − n)ω`,
/// conserves the pair energy and never overdraws the particle.
pub fn check_quantize(action: f64, omega: f64, e0: f64, weighted: bool, seed: u64) -> Check {
    use blackbody1d::quantize::{quantize, RoundingRule};
    let rule = if weighted {
        RoundingRule::Weighted
    } else {
        RoundingRule::Fair
    };
    let out = quantize(action, omega, e0, rule, &mut RngStream::new(seed, 0))
        .map_err(|e| e.to_string())?;
    let n = out.quanta as f64;
    ensure(n == action.floor() || n == action.ceil(), || {
        format!("{action} -> {n}")
    })?;
    ensure(out.roundoff == (action - n) * omega, || {
        format!("roundoff {} at I = {action}", out.roundoff)
    })?;
    let before = action * omega + e0;
    let after = n * omega + (e0 + out.roundoff);
    let scale = (action * omega).max(n * omega).max(e0);
    ensure((after - before).abs() <= 4.0 * EPS * scale, || {
        format!("energy {before} -> {after}")
    })?;
    ensure(e0 + out.roundoff >= 0.0, || {
        format!("particle overdrawn: {e0} + {}", out.roundoff)
    })
}

/// `1 ≤ ipr ≤ len` and `ipr(c·v) == ipr(v)` to 4 ulps.
pub fn check_ipr(v: &[f64], c: f64) -> Check {
    use blackbody1d::observables::ipr;
    let l = ipr(v).map_err(|e| e.to_string())?;
    ensure(
        l >= 1.0 - 4.0 * EPS && l <= v.len() as f64 * (1.0 + 4.0 * EPS),
        || format!("ipr {l} of {} entries", v.len()),
    )?;
    let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
    let ls = ipr(&scaled).map_err(|e| e.to_string())?;
    ensure((ls - l).abs() <= 4.0 * EPS * l, || {
        format!("ipr not scale invariant: {ls} vs {l}")
    })
}

/// Planck energy decreases in ω and β, stays below 1/β and tends to 1/β as ω → 0.
pub fn check_planck(omega: f64, beta: f64, f: f64) -> Check {
    use blackbody1d::theory::planck_energy;
    let p = |w: f64, b: f64| planck_energy(w, b).map_err(|e| e.to_string());
    let e = p(omega, beta)?;
    ensure(e >= 0.0 && e < 1.0 / beta, || {
        format!("E({omega}, {beta}) = {e}")
    })?;
    ensure(p(omega * f, beta)? <= e, || {
        format!("not decreasing in omega at {omega}")
    })?;
    ensure(p(omega, beta * f)? <= e, || {
        format!("not decreasing in beta at {beta}")
    })?;
    ensure((p(1e-13 / beta, beta)? * beta - 1.0).abs() < 1e-12, || {
        "omega -> 0 limit".into()
    })?;
    ensure(p(0.0, beta)? == 1.0 / beta, || "omega = 0".into())
}

/// `solve_beta` and `total_energy` invert each other to 1e-10.
pub fn check_beta_inverse(beta: f64, energy: f64, alpha: f64) -> Check {
    use blackbody1d::theory::{solve_beta, total_energy, Truncation};
    let err = |e: blackbody1d::error::Error| e.to_string();
    let total = total_energy(beta, alpha, Truncation::Converged).map_err(err)?;
    let back = solve_beta(total, alpha).map_err(err)?;
    ensure((back / beta - 1.0).abs() < 1e-10, || {
        format!("beta {beta} -> {back}")
    })?;
    let b = solve_beta(energy, alpha).map_err(err)?;
    let resid =
        (total_energy(b, alpha, Truncation::Converged).map_err(err)? - energy).abs() / energy;
    ensure(resid < 1e-10, || {
        format!("residual {resid} at E = {energy}")
    })
}
