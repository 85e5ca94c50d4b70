//! Random instances shared by the integration suites.
#![allow(dead_code)]

use distrisk::dependence::GapEntry;
use distrisk::{
    ClosedSet, DistortionFn, GapCopula, GapCopulaSpec, Knot, MonoFn, Piece, Plrv, Shape, Spectrum,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values on a coarse grid half of the time so that ties and atoms occur.
fn value(r: &mut ChaCha8Rng) -> f64 {
    if r.gen_bool(0.5) {
        r.gen_range(-6i32..=6) as f64 * 0.5
    } else {
        r.gen_range(-4.0..4.0)
    }
}

/// Sorted cut points `0 = c_0 < … < c_n = 1`.
fn cuts(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for x in w.iter_mut() {
        acc += *x / total;
        out.push(acc);
    }
    out[n] = 1.0;
    out
}

pub fn random_rv(r: &mut ChaCha8Rng) -> Plrv {
    let n = r.gen_range(1..=6);
    let c = cuts(r, n);
    let pieces = (0..n)
        .map(|k| {
            let v0 = value(r);
            let v1 = if r.gen_bool(0.35) { v0 } else { value(r) };
            Piece::new(c[k], c[k + 1], v0, v1)
        })
        .collect();
    Plrv::new(pieces).expect("generated variable is valid")
}

pub fn random_nonneg_rv(r: &mut ChaCha8Rng) -> Plrv {
    let x = random_rv(r);
    x.shift(-x.ess_inf())
}

/// Increasing function with flats and upward jumps.
pub fn random_monofn(r: &mut ChaCha8Rng) -> MonoFn {
    let n = r.gen_range(1..=5);
    let c = cuts(r, n);
    let mut level = r.gen_range(-2.0..2.0);
    let mut pieces = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 && r.gen_bool(0.4) {
            level += r.gen_range(0.1..1.5);
        }
        let rise = if r.gen_bool(0.3) { 0.0 } else { r.gen_range(0.0..3.0) };
        pieces.push(Piece::new(c[k], c[k + 1], level, level + rise));
        level += rise;
    }
    MonoFn::new(pieces).expect("generated function is increasing")
}

/// Closed set with at most `max_parts` parts; endpoints on a grid of 1/64
/// half of the time.
pub fn random_set(r: &mut ChaCha8Rng, max_parts: usize) -> ClosedSet {
    let n = r.gen_range(0..=max_parts);
    let on_grid = r.gen_bool(0.5);
    let mut iv = Vec::with_capacity(n);
    for _ in 0..n {
        let pick = |r: &mut ChaCha8Rng| if on_grid { r.gen_range(0..=64) as f64 / 64.0 } else { r.gen_range(0.0..1.0) };
        let a = pick(r);
        if r.gen_bool(0.4) {
            iv.push((a, a));
        } else {
            let b = pick(r);
            iv.push((a.min(b), a.max(b)));
        }
    }
    ClosedSet::new(iv).expect("generated set is valid")
}

/// A closed set that is neither empty-modulo-{0,1} nor everything.
pub fn random_proper_set(r: &mut ChaCha8Rng, max_parts: usize) -> ClosedSet {
    loop {
        let k = random_set(r, max_parts);
        if !k.is_full() {
            return k;
        }
    }
}

pub fn random_copula(r: &mut ChaCha8Rng) -> (GapCopula, Option<f64>) {
    match r.gen_range(0..4) {
        0 => (GapCopula::Comonotone, None),
        1 => (GapCopula::Countermonotone, None),
        2 => (GapCopula::Independent, Some(r.gen_range(2..=6) as f64)),
        _ => (GapCopula::SwapBlocks, Some(r.gen_range(0.2..0.8))),
    }
}

pub fn random_spec(r: &mut ChaCha8Rng, k: &ClosedSet) -> GapCopulaSpec {
    let gaps = k
        .gaps()
        .into_iter()
        .map(|(a, b)| {
            let (copula, param) = random_copula(r);
            GapEntry { interval: [a, b], copula, param }
        })
        .collect();
    GapCopulaSpec { gaps }
}

/// A generated `K`-concentrated vector with random marginals.
pub fn generated_vector(r: &mut ChaCha8Rng, k: &ClosedSet, dim: usize) -> Vec<Plrv> {
    let spec = random_spec(r, k);
    let marginals: Vec<MonoFn> = if r.gen_bool(0.3) { vec![] } else { (0..dim).map(|_| random_monofn(r)).collect() };
    let seed = r.gen();
    distrisk::generate(k, &spec, &marginals, dim, seed).expect("generator accepts its own spec")
}

/// Random distortion: jumps at knots, mostly linear segments, some curved.
pub fn random_distortion(r: &mut ChaCha8Rng) -> DistortionFn {
    let n = r.gen_range(1..=5);
    let c = cuts(r, n);
    let mut knots = Vec::with_capacity(n + 1);
    for (j, &t) in c.iter().enumerate() {
        let value = if j == 0 { 0.0 } else { r.gen_range(-1.0..2.0) };
        let jitter = |r: &mut ChaCha8Rng| if r.gen_bool(0.25) { value + r.gen_range(-0.5..0.5) } else { value };
        let left = jitter(r);
        let right = jitter(r);
        knots.push(Knot { t, left, value, right });
    }
    let shapes = (0..n)
        .map(|_| match r.gen_range(0..6) {
            0 => Shape::Quadratic { c: r.gen_range(-1.0..1.0) },
            1 => Shape::Power { exponent: r.gen_range(0.3..3.0), flipped: r.gen_bool(0.5) },
            _ => Shape::Linear,
        })
        .collect();
    DistortionFn::new(knots, shapes).expect("generated distortion is valid")
}

/// Random distortion that is affine on the closure of every reflected gap
/// of `k`, so that `I_h` is `K`-additive by construction.
pub fn additive_distortion(r: &mut ChaCha8Rng, k: &ClosedSet) -> DistortionFn {
    let reflected: Vec<(f64, f64)> = k.gaps().iter().map(|&(a, b)| (1.0 - b, 1.0 - a)).collect();
    let inside_gap = |t: f64| reflected.iter().any(|&(c, d)| t > c + 1e-9 && t < d - 1e-9);
    let mut ts: Vec<f64> = vec![0.0, 1.0];
    for &(c, d) in &reflected {
        ts.push(c);
        ts.push(d);
    }
    for _ in 0..r.gen_range(0..6) {
        let t: f64 = r.gen_range(0.0..1.0);
        if !inside_gap(t) {
            ts.push(t);
        }
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-6);
    let mut knots = Vec::with_capacity(ts.len());
    for (j, &t) in ts.iter().enumerate() {
        let value = if j == 0 { 0.0 } else { r.gen_range(-1.0..2.0) };
        let gap_right_end = reflected.iter().any(|&(_, d)| (t - d).abs() <= 1e-9);
        let gap_left_end = reflected.iter().any(|&(c, _)| (t - c).abs() <= 1e-9);
        let left = if !gap_right_end && r.gen_bool(0.3) { value + r.gen_range(-0.5..0.5) } else { value };
        let right = if !gap_left_end && r.gen_bool(0.3) { value + r.gen_range(-0.5..0.5) } else { value };
        knots.push(Knot { t, left, value, right });
    }
    let shapes = ts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            if inside_gap(mid) {
                return Shape::Linear;
            }
            match r.gen_range(0..4) {
                0 => Shape::Quadratic { c: r.gen_range(-1.0..1.0) },
                1 => Shape::Power { exponent: r.gen_range(0.3..3.0), flipped: r.gen_bool(0.5) },
                _ => Shape::Linear,
            }
        })
        .collect();
    DistortionFn::new(knots, shapes).expect("generated distortion is valid")
}

/// Random step spectrum.
pub fn random_step_spectrum(r: &mut ChaCha8Rng) -> Spectrum {
    let n = r.gen_range(1..=5);
    let c = cuts(r, n);
    let mut level = if r.gen_bool(0.3) { 0.0 } else { r.gen_range(0.0..1.0) };
    let mut pieces = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            level += r.gen_range(0.05..2.0);
        }
        pieces.push(Piece::constant(c[k], c[k + 1], level));
    }
    normalize(pieces)
}

/// Random spectrum with sloped pieces and jumps.
pub fn random_spectrum(r: &mut ChaCha8Rng) -> Spectrum {
    let g = random_monofn(r);
    let low = g.pieces()[0].v0;
    let pieces = g.pieces().iter().map(|p| Piece::new(p.t0, p.t1, p.v0 - low, p.v1 - low)).collect();
    normalize(pieces)
}

fn normalize(pieces: Vec<Piece>) -> Spectrum {
    let mass: f64 = pieces.iter().map(|p| 0.5 * (p.v0 + p.v1) * (p.t1 - p.t0)).sum();
    let pieces: Vec<Piece> = if mass <= 1e-12 {
        vec![Piece::constant(0.0, 1.0, 1.0)]
    } else {
        pieces.iter().map(|p| Piece::new(p.t0, p.t1, p.v0 / mass, p.v1 / mass)).collect()
    };
    Spectrum::new(MonoFn::new(pieces).expect("increasing")).expect("normalized spectrum")
}

pub fn rv_strategy() -> impl Strategy<Value = Plrv> {
    any::<u64>().prop_map(|s| random_rv(&mut rng(s)))
}

pub fn set_strategy() -> impl Strategy<Value = ClosedSet> {
    any::<u64>().prop_map(|s| random_set(&mut rng(s), 8))
}

pub fn monofn_strategy() -> impl Strategy<Value = MonoFn> {
    any::<u64>().prop_map(|s| random_monofn(&mut rng(s)))
}

pub fn distortion_strategy() -> impl Strategy<Value = DistortionFn> {
    any::<u64>().prop_map(|s| random_distortion(&mut rng(s)))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
