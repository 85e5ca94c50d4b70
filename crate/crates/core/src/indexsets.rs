//! Closed index sets `K ⊆ [0,1]`, increasing index functions, and the maps
//! between them.
//!
//! A [`ClosedSet`] is a finite union of closed intervals. A [`MonoFn`] is an
//! increasing piecewise-linear function on `[0,1]` that is right-continuous
//! at 0 and left-continuous elsewhere; the set of such functions is the class
//! `G`. [`v_map`] sends `K` to `g(p) = sup((0,p) ∩ K)` and [`psi`] sends `g`
//! to its set of points of strict increase. Sets are compared modulo the
//! endpoints `{0, 1}`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::pl::{self, close, le, merge_breaks, refine, Piece, NULL_LEN};
use crate::randvar::validate_partition;
use crate::EPS;

/// Which one-sided quantile a statement refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Finite union of disjoint closed subintervals of `[0,1]`.
///
/// Isolated points `{0}` and `{1}` are dropped on construction since every
/// comparison is modulo `{0,1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetRepr", into = "SetRepr")]
pub struct ClosedSet {
    intervals: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<SetRepr> for ClosedSet {
    type Error = crate::Error;
    fn try_from(r: SetRepr) -> Result<Self> {
        ClosedSet::new(r.intervals.iter().map(|iv| (iv[0], iv[1])).collect())
    }
}

impl From<ClosedSet> for SetRepr {
    fn from(k: ClosedSet) -> Self {
        SetRepr { intervals: k.intervals.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl ClosedSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite()) {
                return Err(invalid("closed set: non-finite endpoint"));
            }
            if a < -EPS || b > 1.0 + EPS || a > b + EPS {
                return Err(invalid(format!("closed set: bad interval [{a}, {b}]")));
            }
        }
        Ok(Self::normalized(intervals))
    }

    fn normalized(mut iv: Vec<(f64, f64)>) -> Self {
        for (a, b) in iv.iter_mut() {
            *a = a.clamp(0.0, 1.0);
            *b = b.clamp(0.0, 1.0).max(*a);
        }
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match out.last_mut() {
                Some(last) if a <= last.1 + EPS => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        out.retain(|&(a, b)| !(b - a <= EPS && (b <= EPS || a >= 1.0 - EPS)));
        Self { intervals: out }
    }

    pub fn empty() -> Self {
        Self { intervals: vec![] }
    }

    pub fn full() -> Self {
        Self { intervals: vec![(0.0, 1.0)] }
    }

    pub fn point(p: f64) -> Result<Self> {
        Self::new(vec![(p, p)])
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn points(ps: &[f64]) -> Result<Self> {
        Self::new(ps.iter().map(|&p| (p, p)).collect())
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_full(&self) -> bool {
        self.gaps().is_empty()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a - EPS <= p && p <= b + EPS)
    }

    pub fn union(&self, other: &ClosedSet) -> ClosedSet {
        let mut iv = self.intervals.clone();
        iv.extend_from_slice(&other.intervals);
        Self::normalized(iv)
    }

    /// Maximal open intervals of `(0,1) ∖ K`, in order.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut start = 0.0;
        for &(a, b) in &self.intervals {
            if a > start + EPS {
                out.push((start, a));
            }
            start = b;
        }
        if start < 1.0 - EPS {
            out.push((start, 1.0));
        }
        out
    }

    /// `K ∩ (0,1) ⊆ other ∩ (0,1)`, up to tolerance.
    pub fn is_subset(&self, other: &ClosedSet) -> bool {
        // K ⊆ L iff no gap of L meets K
        other.gaps().iter().all(|&(c, d)| {
            self.intervals.iter().all(|&(a, b)| b <= c + EPS || a >= d - EPS)
        })
    }

    /// Equality modulo `{0,1}`, up to tolerance.
    pub fn approx_eq(&self, other: &ClosedSet) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }
}

/// `V(K)`: `g(p) = sup((0,p) ∩ K)` with `sup ∅ = 0`.
pub fn v_map(k: &ClosedSet) -> MonoFn {
    let mut pieces = Vec::new();
    let mut t = 0.0;
    let mut level = 0.0;
    for &(a, b) in k.intervals() {
        if a > t {
            pieces.push(Piece::constant(t, a, level));
        }
        if b > a {
            pieces.push(Piece::new(a, b, a, b));
        }
        t = b;
        level = b;
    }
    if t < 1.0 {
        pieces.push(Piece::constant(t, 1.0, level));
    }
    MonoFn::from_valid(pieces)
}

/// `PSI(g)`: points of strict increase, i.e. `[0,1]` minus the maximal open
/// intervals on which `g` is constant.
pub fn psi(g: &MonoFn) -> ClosedSet {
    let mut flats: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<&Piece> = None;
    for pc in g.pieces() {
        if pc.is_flat() {
            let continues = prev.is_some_and(|q| q.is_flat() && close(q.v1, pc.v0));
            match flats.last_mut() {
                Some(last) if continues => last.1 = pc.t1,
                _ => flats.push((pc.t0, pc.t1)),
            }
        }
        prev = Some(pc);
    }
    let mut out = Vec::with_capacity(flats.len() + 1);
    let mut start = 0.0;
    for (s, e) in flats {
        if s >= start {
            out.push((start, s));
        }
        start = e;
    }
    if start <= 1.0 {
        out.push((start, 1.0));
    }
    ClosedSet::normalized(out)
}

/// The preorder `f ≾ g`, decided as `PSI(f) ⊆ PSI(g)`.
pub fn precedes(f: &MonoFn, g: &MonoFn) -> bool {
    psi(f).is_subset(&psi(g))
}

/// An increasing `h` with `LC(h ∘ g) = f`, if `f ≾ g`.
///
/// `h` is read off the common refinement of `f` and `g`: linear where `g`
/// increases, fixed at `f`'s level where `g` is flat, and linear across the
/// value gaps left by jumps of `g`.
pub fn factor(f: &MonoFn, g: &MonoFn) -> Option<IncreasingMap> {
    if !precedes(f, g) {
        return None;
    }
    let cuts = merge_breaks(f.breaks().chain(g.breaks()));
    let fp = refine(&f.pieces, &cuts);
    let gp = refine(&g.pieces, &cuts);
    // (y, f-value) pairs; flat levels of g pin the knot value
    let mut pts: Vec<(f64, f64, bool)> = Vec::with_capacity(4 * fp.len());
    for (a, b) in fp.iter().zip(&gp) {
        if b.is_flat() {
            pts.push((b.v0, a.v0, true));
        } else {
            pts.push((b.v0, a.v0, false));
            pts.push((b.v1, a.v1, false));
        }
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut knots: Vec<MapKnot> = Vec::new();
    let mut i = 0;
    while i < pts.len() {
        let y = pts[i].0;
        let mut j = i;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut pinned = None;
        while j < pts.len() && close(pts[j].0, y) {
            lo = lo.min(pts[j].1);
            hi = hi.max(pts[j].1);
            if pts[j].2 {
                pinned = Some(pts[j].1);
            }
            j += 1;
        }
        knots.push(MapKnot { t: y, left: lo, value: pinned.unwrap_or(lo), right: hi });
        i = j;
    }
    let h = IncreasingMap::from_knots(knots).ok()?;
    let ok = (0..1000).all(|k| {
        let p = (k as f64 + 0.382) / 1000.0;
        let lhs = h.eval(g.eval(p));
        let rhs = f.eval(p);
        (lhs - rhs).abs() <= 1e-7 * (1.0 + rhs.abs())
    });
    ok.then_some(h)
}

/// `LC(f)`: the member of `G` equal to `f` almost everywhere.
pub fn lc_normalize(raw: &IncreasingMap) -> Result<MonoFn> {
    let k = &raw.knots;
    if k.len() < 2 || k[0].t.abs() > EPS || (k[k.len() - 1].t - 1.0).abs() > EPS {
        return Err(domain("lc_normalize: function must be given on [0,1] with knots at 0 and 1"));
    }
    let pieces = k.windows(2).map(|w| Piece::new(w[0].t, w[1].t, w[0].right, w[1].left)).collect();
    MonoFn::new(pieces)
}

/// Whether `VaR_p` (left) or `VaR⁺_p` (right) is `K`-additive: `K` must
/// accumulate at `p` from the left (resp. right), which for finite unions
/// of intervals means `a < p ≤ b` (resp. `a ≤ p < b`) for some `[a,b] ⊆ K`.
pub fn var_additivity_condition(k: &ClosedSet, p: f64, side: Side) -> Result<bool> {
    match side {
        Side::Left if !(p > 0.0 && p <= 1.0) => Err(domain(format!("left condition needs p in (0,1], got {p}"))),
        Side::Right if !(0.0..1.0).contains(&p) => Err(domain(format!("right condition needs p in [0,1), got {p}"))),
        Side::Left => Ok(k.intervals().iter().any(|&(a, b)| a < p - EPS && p <= b + EPS)),
        Side::Right => Ok(k.intervals().iter().any(|&(a, b)| a <= p + EPS && p < b - EPS)),
    }
}

/// Increasing piecewise-linear function on `[0,1]` in the class `G`.
///
/// The value at an interior knot is the left limit and the value at 0 is the
/// right limit, so membership in `G` holds by construction. Upward jumps
/// between pieces are allowed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MonoRepr", into = "MonoRepr")]
pub struct MonoFn {
    pieces: Vec<Piece>,
}

#[derive(Serialize, Deserialize)]
struct MonoRepr {
    pieces: Vec<Piece>,
}

impl TryFrom<MonoRepr> for MonoFn {
    type Error = crate::Error;
    fn try_from(r: MonoRepr) -> Result<Self> {
        MonoFn::new(r.pieces)
    }
}

impl From<MonoFn> for MonoRepr {
    fn from(g: MonoFn) -> Self {
        MonoRepr { pieces: g.pieces }
    }
}

impl MonoFn {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let pieces = validate_partition(pieces, "increasing function")?;
        for (k, pc) in pieces.iter().enumerate() {
            if !le(pc.v0, pc.v1) {
                return Err(domain(format!("function decreases on [{}, {}]", pc.t0, pc.t1)));
            }
            if k > 0 && !le(pieces[k - 1].v1, pc.v0) {
                return Err(domain(format!("function jumps down at {}", pc.t0)));
            }
        }
        Ok(Self::from_valid(pieces))
    }

    pub(crate) fn from_valid(pieces: Vec<Piece>) -> Self {
        let pieces: Vec<Piece> = pieces.into_iter().filter(|p| p.len() > NULL_LEN).collect();
        let mut pieces = pl::merge_collinear(pieces);
        if let Some(first) = pieces.first_mut() {
            first.t0 = 0.0;
        }
        for k in 1..pieces.len() {
            pieces[k].t0 = pieces[k - 1].t1;
        }
        if let Some(last) = pieces.last_mut() {
            last.t1 = 1.0;
        }
        Self { pieces }
    }

    pub fn identity() -> Self {
        Self { pieces: vec![Piece::new(0.0, 1.0, 0.0, 1.0)] }
    }

    pub fn constant(c: f64) -> Self {
        Self { pieces: vec![Piece::constant(0.0, 1.0, c)] }
    }

    /// `0` on `[0,p]` and `c` on `(p,1]`.
    pub fn step(p: f64, c: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("step position must lie in (0,1), got {p}")));
        }
        Self::new(vec![Piece::constant(0.0, p, 0.0), Piece::constant(p, 1.0, c)])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub(crate) fn breaks(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.pieces.iter().map(|p| p.t1))
    }

    /// `g(p)`: left limit on `(0,1]`, right limit at 0.
    pub fn eval(&self, p: f64) -> f64 {
        if p <= EPS {
            return self.pieces[0].v0;
        }
        let pc = &self.pieces[pl::locate_left(&self.pieces, p)];
        if (p - pc.t1).abs() <= EPS {
            pc.v1
        } else {
            pc.at(p.min(pc.t1))
        }
    }

    /// `g(p+)`, the right limit (at 1 the value itself).
    pub fn eval_right(&self, p: f64) -> f64 {
        if p >= 1.0 - EPS {
            return self.pieces[self.pieces.len() - 1].v1;
        }
        let pc = &self.pieces[pl::locate_right(&self.pieces, p)];
        if (p - pc.t0).abs() <= EPS {
            pc.v0
        } else {
            pc.at(p.max(pc.t0))
        }
    }

    /// `∫_a^b g(p) dp`, exact.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|pc| pc.t1 > a && pc.t0 < b)
            .map(|pc| pc.clip(a, b).integral())
            .sum()
    }

    /// Jumps as `(position, size)` with positive size.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.pieces
            .windows(2)
            .filter(|w| !close(w[0].v1, w[1].v0))
            .map(|w| (w[1].t0, w[1].v0 - w[0].v1))
            .collect()
    }

    pub fn approx_eq(&self, other: &MonoFn) -> bool {
        let cuts = merge_breaks(self.breaks().chain(other.breaks()));
        let a = refine(&self.pieces, &cuts);
        let b = refine(&other.pieces, &cuts);
        a.len() == b.len() && a.iter().zip(&b).all(|(p, q)| close(p.v0, q.v0) && close(p.v1, q.v1))
    }

    /// The same function as a value map with explicit one-sided limits.
    pub fn to_map(&self) -> IncreasingMap {
        let n = self.pieces.len();
        let mut knots = Vec::with_capacity(n + 1);
        let first = self.pieces[0];
        knots.push(MapKnot { t: 0.0, left: first.v0, value: first.v0, right: first.v0 });
        for k in 0..n {
            let pc = self.pieces[k];
            let right = if k + 1 < n { self.pieces[k + 1].v0 } else { pc.v1 };
            knots.push(MapKnot { t: pc.t1, left: pc.v1, value: pc.v1, right });
        }
        IncreasingMap { knots }
    }
}

/// A knot of an [`IncreasingMap`] or a raw increasing function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapKnot {
    pub t: f64,
    pub left: f64,
    pub value: f64,
    pub right: f64,
}

/// Increasing piecewise-linear map `ℝ → ℝ` with possible jumps at knots.
///
/// Between knots `j` and `j+1` the map runs linearly from `right_j` to
/// `left_{j+1}`. Beyond the outer knots it continues with the slope of the
/// adjacent segment (constant if there is a single knot).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct IncreasingMap {
    knots: Vec<MapKnot>,
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    knots: Vec<RawKnot>,
}

#[derive(Serialize, Deserialize)]
struct RawKnot {
    t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<f64>,
    value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<f64>,
}

impl TryFrom<MapRepr> for IncreasingMap {
    type Error = crate::Error;
    fn try_from(r: MapRepr) -> Result<Self> {
        IncreasingMap::from_knots(
            r.knots
                .into_iter()
                .map(|k| MapKnot { t: k.t, left: k.left.unwrap_or(k.value), value: k.value, right: k.right.unwrap_or(k.value) })
                .collect(),
        )
    }
}

impl From<IncreasingMap> for MapRepr {
    fn from(m: IncreasingMap) -> Self {
        MapRepr {
            knots: m
                .knots
                .into_iter()
                .map(|k| RawKnot { t: k.t, left: Some(k.left), value: k.value, right: Some(k.right) })
                .collect(),
        }
    }
}

impl IncreasingMap {
    pub fn from_knots(knots: Vec<MapKnot>) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("increasing map: no knots"));
        }
        for (j, k) in knots.iter().enumerate() {
            if ![k.t, k.left, k.value, k.right].iter().all(|v| v.is_finite()) {
                return Err(invalid("increasing map: non-finite number"));
            }
            if !(le(k.left, k.value) && le(k.value, k.right)) {
                return Err(domain(format!("map is not increasing at knot {}", k.t)));
            }
            if j > 0 {
                let prev = &knots[j - 1];
                if k.t <= prev.t {
                    return Err(invalid("increasing map: knots must be strictly sorted"));
                }
                if !le(prev.right, k.left) {
                    return Err(domain(format!("map decreases on [{}, {}]", prev.t, k.t)));
                }
            }
        }
        Ok(Self { knots })
    }

    pub fn identity() -> Self {
        Self::affine(1.0, 0.0)
    }

    /// `y ↦ a·y + b` with `a ≥ 0`.
    pub fn affine(a: f64, b: f64) -> Self {
        let a = a.max(0.0);
        Self {
            knots: vec![
                MapKnot { t: 0.0, left: b, value: b, right: b },
                MapKnot { t: 1.0, left: a + b, value: a + b, right: a + b },
            ],
        }
    }

    pub fn knots(&self) -> &[MapKnot] {
        &self.knots
    }

    pub(crate) fn knot_positions(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.t).collect()
    }

    fn knot_near(&self, y: f64) -> Option<&MapKnot> {
        let i = self.knots.partition_point(|k| k.t < y - EPS);
        self.knots.get(i).filter(|k| (k.t - y).abs() <= EPS)
    }

    /// Value of the linear segment containing `y` (knots excluded).
    fn on_segment(&self, y: f64) -> f64 {
        let n = self.knots.len();
        if n == 1 {
            return self.knots[0].value;
        }
        let i = self.knots.partition_point(|k| k.t <= y);
        let (a, b) = match i {
            0 => (&self.knots[0], &self.knots[1]),
            i if i >= n => (&self.knots[n - 2], &self.knots[n - 1]),
            i => (&self.knots[i - 1], &self.knots[i]),
        };
        let slope = (b.left - a.right) / (b.t - a.t);
        if i == 0 {
            a.left + slope * (y - a.t)
        } else if i >= n {
            b.right + slope * (y - b.t)
        } else {
            a.right + slope * (y - a.t)
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self.knot_near(y) {
            Some(k) => k.value,
            None => self.on_segment(y),
        }
    }

    pub fn eval_left(&self, y: f64) -> f64 {
        match self.knot_near(y) {
            Some(k) => k.left,
            None => self.on_segment(y),
        }
    }

    pub fn eval_right(&self, y: f64) -> f64 {
        match self.knot_near(y) {
            Some(k) => k.right,
            None => self.on_segment(y),
        }
    }

    /// One-sided values at both ends of `[lo, hi]`, assumed to lie within a
    /// single linear segment: `(f(lo+), f(hi−))`.
    pub(crate) fn segment_values(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mid = 0.5 * (lo + hi);
        let n = self.knots.len();
        if n == 1 {
            let v = self.knots[0].value;
            return (v, v);
        }
        let i = self.knots.partition_point(|k| k.t <= mid);
        let (a, b) = match i {
            0 => (&self.knots[0], &self.knots[1]),
            i if i >= n => (&self.knots[n - 2], &self.knots[n - 1]),
            i => (&self.knots[i - 1], &self.knots[i]),
        };
        let slope = (b.left - a.right) / (b.t - a.t);
        let base = |y: f64| {
            if i == 0 {
                a.left + slope * (y - a.t)
            } else if i >= n {
                b.right + slope * (y - b.t)
            } else {
                a.right + slope * (y - a.t)
            }
        };
        (base(lo), base(hi))
    }
}
