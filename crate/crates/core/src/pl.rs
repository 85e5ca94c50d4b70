//! Shared piecewise-linear arithmetic.

use serde::{Deserialize, Serialize};

use crate::EPS;

/// Pieces shorter than this are treated as null sets and dropped.
pub(crate) const NULL_LEN: f64 = 1e-13;

/// One linear piece on `[t0, t1]`, running from `v0` to `v1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub t0: f64,
    pub t1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Piece {
    pub fn new(t0: f64, t1: f64, v0: f64, v1: f64) -> Self {
        Self { t0, t1, v0, v1 }
    }

    pub fn constant(t0: f64, t1: f64, v: f64) -> Self {
        Self::new(t0, t1, v, v)
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.t1 - self.t0
    }

    #[inline]
    pub fn slope(&self) -> f64 {
        (self.v1 - self.v0) / (self.t1 - self.t0)
    }

    #[inline]
    pub fn is_flat(&self) -> bool {
        close(self.v0, self.v1)
    }

    /// Linear interpolation; `t` is not clamped.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        let w = self.t1 - self.t0;
        if w <= 0.0 {
            return self.v0;
        }
        self.v0 + (self.v1 - self.v0) * ((t - self.t0) / w)
    }

    /// Restriction to `[a, b] ⊆ [t0, t1]`.
    pub fn clip(&self, a: f64, b: f64) -> Piece {
        let a = a.max(self.t0);
        let b = b.min(self.t1);
        let v0 = if a == self.t0 { self.v0 } else { self.at(a) };
        let v1 = if b == self.t1 { self.v1 } else { self.at(b) };
        Piece::new(a, b, v0, v1)
    }

    pub fn integral(&self) -> f64 {
        0.5 * (self.v0 + self.v1) * self.len()
    }

    pub fn min(&self) -> f64 {
        self.v0.min(self.v1)
    }

    pub fn max(&self) -> f64 {
        self.v0.max(self.v1)
    }
}

/// Tolerance-aware equality scaled by magnitude.
#[inline]
pub(crate) fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * (1.0 + a.abs().max(b.abs()))
}

#[inline]
pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b || close(a, b)
}

/// `∫_0^w (a0 + (a1-a0) s/w)(b0 + (b1-b0) s/w) ds`, exact.
#[inline]
pub(crate) fn product_integral(w: f64, a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    w * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1) / 6.0
}

/// Sorted, deduplicated union of breakpoints (within `EPS`).
pub(crate) fn merge_breaks<I: IntoIterator<Item = f64>>(points: I) -> Vec<f64> {
    let mut all: Vec<f64> = points.into_iter().collect();
    all.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for p in all {
        match out.last() {
            Some(&last) if (p - last).abs() <= EPS => {}
            _ => out.push(p),
        }
    }
    out
}

/// Cluster sorted values: consecutive values closer than the tolerance share
/// one representative (the first member).
pub(crate) fn cluster(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(&last) if close(last, v) => {}
            _ => out.push(v),
        }
    }
    out
}

/// Index of the cluster representative closest to `v`.
pub(crate) fn cluster_index(reps: &[f64], v: f64) -> usize {
    let i = reps.partition_point(|&r| r < v);
    if i == 0 {
        return 0;
    }
    if i == reps.len() {
        return reps.len() - 1;
    }
    if (reps[i] - v).abs() < (v - reps[i - 1]).abs() {
        i
    } else {
        i - 1
    }
}

/// Split a list of pieces that partition an interval at the given points.
pub(crate) fn refine(pieces: &[Piece], cuts: &[f64]) -> Vec<Piece> {
    let mut out = Vec::with_capacity(pieces.len() + cuts.len());
    for pc in pieces {
        let lo = cuts.partition_point(|&c| c <= pc.t0 + EPS);
        let mut start = pc.t0;
        for &c in &cuts[lo..] {
            if c >= pc.t1 - EPS {
                break;
            }
            out.push(pc.clip(start, c));
            start = c;
        }
        out.push(pc.clip(start, pc.t1));
    }
    out
}

/// Merge adjacent pieces that continue the same line.
pub(crate) fn merge_collinear(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for pc in pieces {
        if let Some(last) = out.last_mut() {
            if close(last.v1, pc.v0) {
                let joined = Piece::new(last.t0, pc.t1, last.v0, pc.v1);
                let mid_ok = close(joined.at(last.t1), last.v1);
                let end_ok = close(joined.at(last.t0 + 0.5 * last.len()), last.at(last.t0 + 0.5 * last.len()))
                    && close(joined.at(pc.t0 + 0.5 * pc.len()), pc.at(pc.t0 + 0.5 * pc.len()));
                if mid_ok && end_ok {
                    *last = joined;
                    continue;
                }
            }
        }
        out.push(pc);
    }
    out
}

/// Find the piece whose closed interval contains `t`, preferring the one to
/// the left at shared boundaries.
pub(crate) fn locate_left(pieces: &[Piece], t: f64) -> usize {
    let i = pieces.partition_point(|pc| pc.t1 < t - EPS);
    i.min(pieces.len() - 1)
}

/// Like [`locate_left`] but preferring the piece to the right.
pub(crate) fn locate_right(pieces: &[Piece], t: f64) -> usize {
    let i = pieces.partition_point(|pc| pc.t1 <= t + EPS);
    i.min(pieces.len() - 1)
}
