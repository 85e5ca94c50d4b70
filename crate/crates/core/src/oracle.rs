//! Slow reference evaluators.
//!
//! Nothing here goes through quantile functions, rank transforms or the
//! layer decomposition used by the exact engines: the Choquet integral is
//! integrated along the value axis from survival probabilities, and
//! concentration is screened through Expected Shortfall additivity with ES
//! computed from the minimization formula `ES_p = min_t t + E(X−t)₊/(1−p)`.

use crate::distortion::DistortionFn;
use crate::error::{invalid, Result};
use crate::indexsets::ClosedSet;
use crate::randvar::Plrv;

/// Finite-atom random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRv {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteRv {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|&(v, p)| !v.is_finite() || p.is_nan() || p <= 0.0) {
            return Err(invalid("atoms need finite values and positive probabilities"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("atom probabilities sum to {total}")));
        }
        Ok(Self { atoms })
    }

    /// Atoms of a step variable (every piece constant).
    pub fn from_steps(x: &Plrv) -> Result<Self> {
        if x.pieces().iter().any(|p| p.v0 != p.v1) {
            return Err(invalid("variable is not a step function"));
        }
        Self::new(x.pieces().iter().map(|p| (p.v0, p.t1 - p.t0)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// `P(X > v)` summed piece by piece.
pub fn survival(x: &Plrv, v: f64) -> f64 {
    let mut s = 0.0;
    for p in x.pieces() {
        let len = p.t1 - p.t0;
        let (lo, hi) = (p.v0.min(p.v1), p.v0.max(p.v1));
        if lo > v {
            s += len;
        } else if hi > v {
            s += len * (hi - v) / (hi - lo);
        }
    }
    s.clamp(0.0, 1.0)
}

/// The defining integral evaluated by the trapezoid rule on `grid_n`
/// intervals of `[ess inf, ess sup]`:
/// `I_h(X) = m·h(1) + ∫_m^M h(P(X > x)) dx`.
pub fn choquet_numeric(h: &DistortionFn, x: &Plrv, grid_n: usize) -> f64 {
    let n = grid_n.max(1);
    let lo = x.pieces().iter().map(|p| p.v0.min(p.v1)).fold(f64::INFINITY, f64::min);
    let hi = x.pieces().iter().map(|p| p.v0.max(p.v1)).fold(f64::NEG_INFINITY, f64::max);
    let base = lo * h.eval(1.0);
    if hi - lo <= 0.0 {
        return base;
    }
    let dx = (hi - lo) / n as f64;
    // endpoints: P(X > lo) may be < 1 at an atom, P(X > hi) = 0
    let mut acc = 0.5 * (h.eval(survival(x, lo)) + h.eval(survival(x, hi)));
    for k in 1..n {
        acc += h.eval(survival(x, lo + k as f64 * dx));
    }
    base + acc * dx
}

/// `Σ_k v_(k) (h(S_k) − h(S_{k−1}))` over values sorted decreasingly, with
/// `S_k = P(X ≥ v_(k))`.
pub fn choquet_discrete(h: &DistortionFn, x: &DiscreteRv) -> f64 {
    let mut atoms = x.atoms.clone();
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    let mut total = 0.0;
    let mut prev = 0.0;
    let mut s = 0.0;
    let last = merged.len().saturating_sub(1);
    for (k, (v, p)) in merged.iter().enumerate() {
        s += p;
        let hs = if k == last { h.eval(1.0) } else { h.eval(s) };
        total += v * (hs - prev);
        prev = hs;
    }
    total
}

/// `E(X − t)₊`, exact per piece.
fn excess(x: &Plrv, t: f64) -> f64 {
    let mut acc = 0.0;
    for p in x.pieces() {
        let len = p.t1 - p.t0;
        let (a, b) = (p.v0 - t, p.v1 - t);
        if a >= 0.0 && b >= 0.0 {
            acc += len * (a + b) / 2.0;
        } else if a > 0.0 || b > 0.0 {
            let top = a.max(b);
            let frac = top / (top - a.min(b));
            acc += len * frac * top / 2.0;
        }
    }
    acc
}

/// `ES_p` by golden-section minimization of `t + E(X − t)₊ / (1 − p)`.
pub fn es_minimization(x: &Plrv, p: f64) -> f64 {
    let f = |t: f64| t + excess(x, t) / (1.0 - p);
    let mut lo = x.pieces().iter().map(|q| q.v0.min(q.v1)).fold(f64::INFINITY, f64::min);
    let mut hi = x.pieces().iter().map(|q| q.v0.max(q.v1)).fold(f64::NEG_INFINITY, f64::max);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        let m1 = hi - r * (hi - lo);
        let m2 = lo + r * (hi - lo);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

/// Screen `K`-concentration on a grid: at `grid_n` evenly spaced levels in
/// each interval of `K` (one level for a point), require
/// `ES_p(ΣX_i) = Σ ES_p(X_i)`, which holds iff the vector is
/// `p`-concentrated.
pub fn concentration_grid(xs: &[Plrv], k: &ClosedSet, grid_n: usize) -> bool {
    if xs.len() <= 1 {
        return true;
    }
    let mut s = xs[0].clone();
    for x in &xs[1..] {
        s = s.add(x);
    }
    let n = grid_n.max(2);
    let mut levels = Vec::new();
    for &(a, b) in k.intervals() {
        if b - a <= 1e-12 {
            levels.push(a);
        } else {
            levels.extend((0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64));
        }
    }
    levels.into_iter().filter(|&p| p > 1e-9 && p < 1.0 - 1e-9).all(|p| {
        let whole = es_minimization(&s, p);
        let parts: f64 = xs.iter().map(|x| es_minimization(x, p)).sum();
        (whole - parts).abs() <= 1e-11 * (1.0 + whole.abs())
    })
}
