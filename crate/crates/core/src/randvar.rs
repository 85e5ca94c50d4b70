//! Bounded random variables on `Ω = [0,1]` stored as linear pieces.
//!
//! Everything here is exact up to the global tolerance [`crate::EPS`]: the
//! distribution of a [`Plrv`] is a finite mixture of atoms and uniform value
//! cells, so its quantile function is again piecewise linear and every
//! riskmetric reduces to closed-form piece integrals.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::indexsets::{IncreasingMap, MonoFn};
use crate::pl::{self, close, cluster, cluster_index, le, merge_breaks, refine, NULL_LEN};
use crate::EPS;

pub use crate::pl::Piece;

/// A piecewise-linear random variable on `[0,1]`.
///
/// Pieces partition `[0,1]`; values at shared boundaries are immaterial.
/// Construction merges collinear neighbours so that equal a.e. classes have
/// the same canonical form (up to tolerance).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PlrvRepr", into = "PlrvRepr")]
pub struct Plrv {
    pieces: Vec<Piece>,
}

#[derive(Serialize, Deserialize)]
struct PlrvRepr {
    pieces: Vec<Piece>,
}

impl TryFrom<PlrvRepr> for Plrv {
    type Error = crate::Error;
    fn try_from(r: PlrvRepr) -> Result<Self> {
        Plrv::new(r.pieces)
    }
}

impl From<Plrv> for PlrvRepr {
    fn from(x: Plrv) -> Self {
        PlrvRepr { pieces: x.pieces }
    }
}

/// Validate a piece list that must partition `[0,1]` and snap boundaries.
pub(crate) fn validate_partition(mut pieces: Vec<Piece>, what: &str) -> Result<Vec<Piece>> {
    if pieces.is_empty() {
        return Err(invalid(format!("{what}: no pieces")));
    }
    for pc in &pieces {
        if ![pc.t0, pc.t1, pc.v0, pc.v1].iter().all(|v| v.is_finite()) {
            return Err(invalid(format!("{what}: non-finite number in piece")));
        }
        if pc.t0 >= pc.t1 {
            return Err(invalid(format!("{what}: piece with t0 >= t1 at t0={}", pc.t0)));
        }
    }
    if pieces[0].t0.abs() > EPS {
        return Err(invalid(format!("{what}: first piece must start at 0")));
    }
    pieces[0].t0 = 0.0;
    let n = pieces.len();
    if (pieces[n - 1].t1 - 1.0).abs() > EPS {
        return Err(invalid(format!("{what}: last piece must end at 1")));
    }
    pieces[n - 1].t1 = 1.0;
    for k in 1..n {
        let gap = pieces[k].t0 - pieces[k - 1].t1;
        if gap > EPS {
            return Err(invalid(format!("{what}: gap between {} and {}", pieces[k - 1].t1, pieces[k].t0)));
        }
        if gap < -EPS {
            return Err(invalid(format!("{what}: overlapping pieces at {}", pieces[k].t0)));
        }
        pieces[k].t0 = pieces[k - 1].t1;
    }
    Ok(pieces)
}

impl Plrv {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let pieces = validate_partition(pieces, "random variable")?;
        Ok(Self::from_valid(pieces))
    }

    pub(crate) fn from_valid(pieces: Vec<Piece>) -> Self {
        let pieces: Vec<Piece> = pieces.into_iter().filter(|p| p.len() > NULL_LEN).collect();
        let mut pieces = pl::merge_collinear(pieces);
        // dropping null pieces can open tiny holes; close them
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

    pub fn constant(c: f64) -> Self {
        Self { pieces: vec![Piece::constant(0.0, 1.0, c)] }
    }

    /// `ω ↦ ω`, a standard uniform variable.
    pub fn identity() -> Self {
        Self { pieces: vec![Piece::new(0.0, 1.0, 0.0, 1.0)] }
    }

    /// Continuous variable through the given `(ω, value)` breakpoints.
    pub fn from_breakpoints(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("need at least two breakpoints"));
        }
        let pieces = points
            .windows(2)
            .map(|w| Piece::new(w[0].0, w[1].0, w[0].1, w[1].1))
            .collect();
        Self::new(pieces)
    }

    /// Step variable: value `values[k]` on `[cuts[k], cuts[k+1])`.
    pub fn step(cuts: &[f64], values: &[f64]) -> Result<Self> {
        if cuts.len() != values.len() + 1 {
            return Err(invalid("step: need one more cut than values"));
        }
        let pieces = values
            .iter()
            .enumerate()
            .map(|(k, &v)| Piece::constant(cuts[k], cuts[k + 1], v))
            .collect();
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Value at `ω` (left piece at boundaries). Only meaningful a.e.
    pub fn eval(&self, omega: f64) -> f64 {
        self.pieces[pl::locate_left(&self.pieces, omega)].at(omega)
    }

    pub fn ess_inf(&self) -> f64 {
        self.pieces.iter().map(Piece::min).fold(f64::INFINITY, f64::min)
    }

    pub fn ess_sup(&self) -> f64 {
        self.pieces.iter().map(Piece::max).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.pieces.iter().map(Piece::integral).sum()
    }

    /// `ω ↦ a·x(ω) + b`.
    pub fn apply_affine(&self, a: f64, b: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.t0, p.t1, a * p.v0 + b, a * p.v1 + b))
            .collect();
        Self::from_valid(pieces)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        self.apply_affine(lambda, 0.0)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.apply_affine(1.0, c)
    }

    /// Break points of the piece partition, including 0 and 1.
    pub fn breaks(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.pieces.iter().map(|p| p.t1))
    }

    /// Pointwise sum on the common refinement.
    pub fn add(&self, other: &Plrv) -> Plrv {
        let cuts = merge_breaks(self.breaks().chain(other.breaks()));
        let a = refine(&self.pieces, &cuts);
        let b = refine(&other.pieces, &cuts);
        debug_assert_eq!(a.len(), b.len());
        let pieces = a
            .iter()
            .zip(&b)
            .map(|(p, q)| Piece::new(p.t0, p.t1, p.v0 + q.v0, p.v1 + q.v1))
            .collect();
        Self::from_valid(pieces)
    }

    /// Equality of a.e. classes within tolerance.
    pub fn approx_eq(&self, other: &Plrv) -> bool {
        let cuts = merge_breaks(self.breaks().chain(other.breaks()));
        let a = refine(&self.pieces, &cuts);
        let b = refine(&other.pieces, &cuts);
        a.len() == b.len()
            && a.iter().zip(&b).all(|(p, q)| close(p.v0, q.v0) && close(p.v1, q.v1))
    }

    pub(crate) fn law(&self) -> Law {
        Law::of(&self.pieces)
    }

    /// Left quantile `Q⁻(p) = VaR_p = inf{v : P(X ≤ v) ≥ p}` for `p ∈ (0,1]`.
    pub fn quantile_left(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(domain(format!("left quantile needs p in (0,1], got {p}")));
        }
        Ok(self.quantile_fn().eval(p))
    }

    /// Right quantile `Q⁺(p) = inf{v : P(X ≤ v) > p}` for `p ∈ [0,1)`.
    pub fn quantile_right(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(domain(format!("right quantile needs p in [0,1), got {p}")));
        }
        Ok(self.quantile_fn().eval_right(p))
    }

    /// The quantile function: `Q⁻` on `(0,1]` and `Q⁺` at 0, i.e. the
    /// increasing rearrangement of `x` as an element of the class `G`.
    pub fn quantile_fn(&self) -> MonoFn {
        self.law().quantile_fn()
    }

    pub fn var(&self, p: f64) -> Result<f64> {
        self.quantile_left(p)
    }

    pub fn var_plus(&self, p: f64) -> Result<f64> {
        self.quantile_right(p)
    }

    /// Expected Shortfall `ES_p = (1-p)⁻¹ ∫_p^1 Q(q) dq`, with `ES_0 = E`
    /// and `ES_1 = ess-sup`.
    pub fn es(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("ES needs p in [0,1], got {p}")));
        }
        if p >= 1.0 {
            return Ok(self.ess_sup());
        }
        Ok(self.quantile_fn().integral(p, 1.0) / (1.0 - p))
    }

    /// Essential infimum and supremum restricted to an event.
    pub fn range_on(&self, event: &Event) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(a, b) in &event.intervals {
            for pc in &self.pieces {
                let s = a.max(pc.t0);
                let e = b.min(pc.t1);
                if e - s > NULL_LEN {
                    let c = pc.clip(s, e);
                    lo = lo.min(c.min());
                    hi = hi.max(c.max());
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// `{ω : x(ω) > t}` as an event.
    pub fn superlevel(&self, t: f64) -> Event {
        let mut iv = Vec::new();
        for pc in &self.pieces {
            let above0 = pc.v0 > t;
            let above1 = pc.v1 > t;
            match (above0, above1) {
                (true, true) => iv.push((pc.t0, pc.t1)),
                (false, false) => {}
                _ => {
                    let w = pc.t0 + (t - pc.v0) / (pc.v1 - pc.v0) * pc.len();
                    if above1 {
                        iv.push((w, pc.t1));
                    } else {
                        iv.push((pc.t0, w));
                    }
                }
            }
        }
        Event::from_intervals(iv)
    }

    /// Distributional transform `U` of `x` with ties broken by ascending `ω`.
    ///
    /// `U` is uniform on `[0,1]`, `x = Q_x(U)` a.e., and `{U > p}` is a
    /// `p`-tail event of `x` for every `p`. The family `{U > p}` is nested.
    pub fn rank_transform(&self) -> Plrv {
        let law = self.law();
        let mut consumed = vec![0.0; law.values.len()];
        let mut out = Vec::with_capacity(self.pieces.len() * 2);
        for pc in &self.pieces {
            let lo = pc.min();
            let hi = pc.max();
            let ilo = cluster_index(&law.values, lo);
            let ihi = cluster_index(&law.values, hi);
            if pc.is_flat() || ilo == ihi {
                let start = law.below[ilo] + consumed[ilo];
                consumed[ilo] += pc.len();
                out.push(Piece::new(pc.t0, pc.t1, start, start + pc.len()));
                continue;
            }
            let rising = pc.v1 > pc.v0;
            // value-ordered cut points inside the piece
            let mut segs: Vec<Piece> = Vec::with_capacity(ihi - ilo);
            for j in ilo..ihi {
                let wa = if j == ilo { lo } else { law.values[j] };
                let wb = if j + 1 == ihi { hi } else { law.values[j + 1] };
                let oa = if j == ilo { if rising { pc.t0 } else { pc.t1 } } else { omega_at(pc, wa) };
                let ob = if j + 1 == ihi { if rising { pc.t1 } else { pc.t0 } } else { omega_at(pc, wb) };
                let ua = law.below[j] + law.atoms[j];
                let ub = law.below[j + 1];
                if rising {
                    segs.push(Piece::new(oa, ob, ua, ub));
                } else {
                    segs.push(Piece::new(ob, oa, ub, ua));
                }
            }
            if !rising {
                segs.reverse();
            }
            out.extend(segs.into_iter().filter(|s| s.len() > 0.0));
        }
        Self::from_valid(out)
    }
}

fn omega_at(pc: &Piece, v: f64) -> f64 {
    let w = pc.t0 + (v - pc.v0) / (pc.v1 - pc.v0) * pc.len();
    w.clamp(pc.t0, pc.t1)
}

/// Exact pointwise sum of a nonempty list.
pub fn sum(xs: &[Plrv]) -> Result<Plrv> {
    let (first, rest) = xs.split_first().ok_or_else(|| domain("sum of an empty list"))?;
    Ok(rest.iter().fold(first.clone(), |acc, x| acc.add(x)))
}

/// `E[x·y]`, exact.
pub fn expectation_product(x: &Plrv, y: &Plrv) -> f64 {
    let cuts = merge_breaks(x.breaks().chain(y.breaks()));
    let a = refine(&x.pieces, &cuts);
    let b = refine(&y.pieces, &cuts);
    a.iter()
        .zip(&b)
        .map(|(p, q)| pl::product_integral(p.len(), p.v0, p.v1, q.v0, q.v1))
        .sum()
}

/// Pointwise composition `f ∘ x` for an increasing value map `f`.
///
/// Decreasing maps are rejected earlier, by [`IncreasingMap::from_knots`].
pub fn apply_increasing(x: &Plrv, f: &IncreasingMap) -> Result<Plrv> {
    let ys = f.knot_positions();
    let mut out = Vec::with_capacity(x.pieces.len());
    for pc in &x.pieces {
        if pc.is_flat() {
            out.push(Piece::constant(pc.t0, pc.t1, f.eval(pc.v0)));
            continue;
        }
        let (lo, hi) = (pc.min(), pc.max());
        let inner: Vec<f64> = ys.iter().copied().filter(|&y| y > lo + EPS && y < hi - EPS).collect();
        let mut vals = vec![lo];
        vals.extend(inner);
        vals.push(hi);
        let mut segs = Vec::with_capacity(vals.len() - 1);
        for w in vals.windows(2) {
            let (fa, fb) = f.segment_values(w[0], w[1]);
            let oa = omega_at(pc, w[0]);
            let ob = omega_at(pc, w[1]);
            if oa <= ob {
                segs.push(Piece::new(oa, ob, fa, fb));
            } else {
                segs.push(Piece::new(ob, oa, fb, fa));
            }
        }
        if pc.v1 < pc.v0 {
            segs.reverse();
        }
        out.extend(segs.into_iter().filter(|s| s.len() > 0.0));
    }
    Ok(Plrv::from_valid(out))
}

/// Whether the vector is comonotonic: for a.e. `ω, ω'` and all `i, j`,
/// `(x_i(ω) − x_i(ω'))(x_j(ω) − x_j(ω')) ≥ 0`.
pub fn is_comonotonic(xs: &[Plrv]) -> bool {
    comonotonic_on(xs, &Event::full())
}

/// One cell of a common refinement: all components are linear on `[w0, w1]`.
struct Cell {
    w0: f64,
    w1: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

fn common_cells(xs: &[Plrv], event: &Event) -> Vec<Cell> {
    let mut cuts: Vec<f64> = xs.iter().flat_map(|x| x.breaks()).collect();
    for &(a, b) in &event.intervals {
        cuts.push(a);
        cuts.push(b);
    }
    let cuts = merge_breaks(cuts);
    let refined: Vec<Vec<Piece>> = xs.iter().map(|x| refine(&x.pieces, &cuts)).collect();
    let n = refined[0].len();
    let mut cells = Vec::new();
    for k in 0..n {
        let p0 = refined[0][k];
        let mid = 0.5 * (p0.t0 + p0.t1);
        if p0.len() <= NULL_LEN || !event.contains(mid) {
            continue;
        }
        cells.push(Cell {
            w0: p0.t0,
            w1: p0.t1,
            a: refined.iter().map(|r| r[k].v0).collect(),
            b: refined.iter().map(|r| r[k].v1).collect(),
        });
    }
    cells
}

/// Comonotonicity of the vector restricted to `event` (conditional
/// comonotonicity on a layer).
///
/// With two or more components this holds iff every component is a.e. a
/// nondecreasing function of the sum `S`. Cells are cut at every breakpoint
/// value of `S`, grouped by the value cell they cover, and checked for a
/// common graph and for monotone order across consecutive groups.
pub(crate) fn comonotonic_on(xs: &[Plrv], event: &Event) -> bool {
    let d = xs.len();
    if d <= 1 {
        return true;
    }
    let cells = common_cells(xs, event);
    if cells.is_empty() {
        return true;
    }
    let sums: Vec<(f64, f64)> = cells.iter().map(|c| (c.a.iter().sum(), c.b.iter().sum())).collect();
    let levels = cluster(sums.iter().flat_map(|&(s, t)| [s, t]).collect());

    // key = 2k for the atom at levels[k], 2k+1 for the open cell (levels[k], levels[k+1])
    struct Group {
        lo: Vec<f64>,
        hi: Vec<f64>,
    }
    let mut groups: std::collections::BTreeMap<usize, Group> = Default::default();
    let mut visit = |key: usize, lo: Vec<f64>, hi: Vec<f64>| -> bool {
        if lo.iter().zip(&hi).any(|(l, h)| !le(*l, *h)) {
            return false;
        }
        match groups.get(&key) {
            Some(g) => {
                g.lo.iter().zip(&lo).all(|(a, b)| close(*a, *b))
                    && g.hi.iter().zip(&hi).all(|(a, b)| close(*a, *b))
            }
            None => {
                groups.insert(key, Group { lo, hi });
                true
            }
        }
    };

    for (cell, &(s0, s1)) in cells.iter().zip(&sums) {
        let i0 = cluster_index(&levels, s0);
        let i1 = cluster_index(&levels, s1);
        if i0 == i1 {
            // the sum is flat here, so every component must be flat as well
            if cell.a.iter().zip(&cell.b).any(|(a, b)| !close(*a, *b)) {
                return false;
            }
            if !visit(2 * i0, cell.a.clone(), cell.a.clone()) {
                return false;
            }
            continue;
        }
        let (ilo, ihi) = (i0.min(i1), i0.max(i1));
        let rising = i1 > i0;
        let at = |omega: f64| -> Vec<f64> {
            let f = (omega - cell.w0) / (cell.w1 - cell.w0);
            cell.a.iter().zip(&cell.b).map(|(a, b)| a + (b - a) * f).collect()
        };
        let omega_of = |v: f64| -> f64 {
            let w = cell.w0 + (v - s0) / (s1 - s0) * (cell.w1 - cell.w0);
            w.clamp(cell.w0, cell.w1)
        };
        for j in ilo..ihi {
            let (va, vb) = (levels[j], levels[j + 1]);
            let oa = if j == ilo { if rising { cell.w0 } else { cell.w1 } } else { omega_of(va) };
            let ob = if j + 1 == ihi { if rising { cell.w1 } else { cell.w0 } } else { omega_of(vb) };
            if (ob - oa).abs() <= NULL_LEN {
                continue;
            }
            let lo = if j == ilo { if rising { cell.a.clone() } else { cell.b.clone() } } else { at(oa) };
            let hi = if j + 1 == ihi { if rising { cell.b.clone() } else { cell.a.clone() } } else { at(ob) };
            if !visit(2 * j + 1, lo, hi) {
                return false;
            }
        }
    }

    let ordered: Vec<&Group> = groups.values().collect();
    ordered.windows(2).all(|w| w[0].hi.iter().zip(&w[1].lo).all(|(h, l)| le(*h, *l)))
}

/// The distribution of a [`Plrv`]: atoms at clustered breakpoint values and
/// uniform mass on the open cells between them.
#[derive(Debug, Clone)]
pub(crate) struct Law {
    pub values: Vec<f64>,
    pub atoms: Vec<f64>,
    /// `cells[k]` is the mass in `(values[k], values[k+1])`.
    pub cells: Vec<f64>,
    /// `below[k] = P(X < values[k])`.
    pub below: Vec<f64>,
}

impl Law {
    fn of(pieces: &[Piece]) -> Law {
        let values = cluster(pieces.iter().flat_map(|p| [p.v0, p.v1]).collect());
        let m = values.len();
        let mut atoms = vec![0.0; m];
        let mut cells = vec![0.0; m.saturating_sub(1)];
        for pc in pieces {
            let ilo = cluster_index(&values, pc.min());
            let ihi = cluster_index(&values, pc.max());
            if pc.is_flat() || ilo == ihi {
                atoms[ilo] += pc.len();
                continue;
            }
            let span = values[ihi] - values[ilo];
            for (k, cell) in cells.iter_mut().enumerate().take(ihi).skip(ilo) {
                *cell += pc.len() * (values[k + 1] - values[k]) / span;
            }
        }
        let mut below = vec![0.0; m];
        for k in 1..m {
            below[k] = below[k - 1] + atoms[k - 1] + cells[k - 1];
        }
        Law { values, atoms, cells, below }
    }

    pub fn quantile_fn(&self) -> MonoFn {
        let mut pieces = Vec::new();
        let mut p = 0.0;
        let m = self.values.len();
        for k in 0..m {
            let a = self.atoms[k];
            if a > NULL_LEN {
                pieces.push(Piece::constant(p, p + a, self.values[k]));
                p += a;
            }
            if k + 1 < m && self.cells[k] > NULL_LEN {
                let c = self.cells[k];
                pieces.push(Piece::new(p, p + c, self.values[k], self.values[k + 1]));
                p += c;
            }
        }
        if let Some(last) = pieces.last_mut() {
            last.t1 = 1.0;
        }
        MonoFn::from_valid(pieces)
    }
}

/// A finite union of subintervals of `[0,1]`, modulo null sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EventRepr", into = "EventRepr")]
pub struct Event {
    intervals: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct EventRepr {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<EventRepr> for Event {
    type Error = crate::Error;
    fn try_from(r: EventRepr) -> Result<Self> {
        for iv in &r.intervals {
            if !(iv[0].is_finite() && iv[1].is_finite()) || iv[0] < -EPS || iv[1] > 1.0 + EPS || iv[0] > iv[1] {
                return Err(invalid(format!("bad event interval [{}, {}]", iv[0], iv[1])));
            }
        }
        Ok(Event::from_intervals(r.intervals.iter().map(|iv| (iv[0], iv[1])).collect()))
    }
}

impl From<Event> for EventRepr {
    fn from(e: Event) -> Self {
        EventRepr { intervals: e.intervals.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl Event {
    pub fn empty() -> Self {
        Self { intervals: vec![] }
    }

    pub fn full() -> Self {
        Self { intervals: vec![(0.0, 1.0)] }
    }

    /// Sort, clamp to `[0,1]`, drop null intervals and merge touching ones.
    pub fn from_intervals(mut iv: Vec<(f64, f64)>) -> Self {
        iv.iter_mut().for_each(|(a, b)| {
            *a = a.clamp(0.0, 1.0);
            *b = b.clamp(0.0, 1.0);
        });
        iv.retain(|(a, b)| b - a > NULL_LEN);
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (a, b) in iv {
            match out.last_mut() {
                Some(last) if a <= last.1 + EPS => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, omega: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= omega && omega <= b)
    }

    pub fn complement(&self) -> Event {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut start = 0.0;
        for &(a, b) in &self.intervals {
            out.push((start, a));
            start = b;
        }
        out.push((start, 1.0));
        Event::from_intervals(out)
    }

    pub fn intersect(&self, other: &Event) -> Event {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let lo = a.max(c);
                let hi = b.min(d);
                if hi > lo {
                    out.push((lo, hi));
                }
            }
        }
        Event::from_intervals(out)
    }

    /// Equality modulo null sets (within tolerance).
    pub fn approx_eq(&self, other: &Event) -> bool {
        let sym = self.intersect(&other.complement()).measure() + other.intersect(&self.complement()).measure();
        sym <= 1e-8
    }
}

/// Whether `event` is a tail event of `x`: `x` on the event dominates `x`
/// off the event almost surely.
pub fn is_tail_event(x: &Plrv, event: &Event) -> bool {
    let inside = x.range_on(event);
    let outside = x.range_on(&event.complement());
    match (inside, outside) {
        (Some((lo, _)), Some((_, hi))) => le(hi, lo),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn grid_cdf_quantile(x: &Plrv, p: f64, right: bool) -> f64 {
        // brute-force: sample 10^6 cell midpoints, sort, read the order statistic
        let n = 1_000_000usize;
        let mut v: Vec<f64> = (0..n).map(|k| x.eval((k as f64 + 0.5) / n as f64)).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        let idx = if right { (p * n as f64).ceil() as usize } else { ((p * n as f64).ceil() as usize).max(1) - 1 };
        v[idx.min(n - 1)]
    }

    #[test]
    fn quantile_left_examples() {
        assert_eq!(Plrv::constant(5.0).quantile_left(0.3).unwrap(), 5.0);
        let x = fixtures::paper_x();
        let q = x.quantile_left(5.0 / 6.0).unwrap();
        assert!((q - 3.0).abs() < 1e-9, "{q}");
        assert!((grid_cdf_quantile(&x, 5.0 / 6.0, false) - 3.0).abs() < 1e-4);
        assert!((Plrv::identity().quantile_left(0.25).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn quantile_right_examples() {
        let x = fixtures::paper_x();
        let q = x.quantile_right(2.0 / 3.0).unwrap();
        assert!((q - 1.5).abs() < 1e-9, "{q}");
        assert!((grid_cdf_quantile(&x, 2.0 / 3.0, true) - 1.5).abs() < 1e-4);
        assert_eq!(Plrv::identity().quantile_right(0.0).unwrap(), 0.0);
        let step = Plrv::step(&[0.0, 0.5, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(step.quantile_right(0.5).unwrap(), 1.0);
        assert_eq!(step.quantile_left(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_domain_errors() {
        let x = Plrv::identity();
        assert!(x.quantile_left(0.0).is_err());
        assert!(x.quantile_left(1.5).is_err());
        assert!(x.quantile_right(1.0).is_err());
        assert!(x.quantile_right(-0.1).is_err());
        assert!(x.es(-0.1).is_err());
        assert!((x.es(0.0).unwrap() - x.mean()).abs() < 1e-15);
    }

    #[test]
    fn quantile_fn_sorts_values() {
        let x = Plrv::new(vec![Piece::new(0.0, 0.5, 2.0, 2.0), Piece::new(0.5, 1.0, 0.0, 1.0)]).unwrap();
        let q = x.quantile_fn();
        let expect = MonoFn::new(vec![Piece::new(0.0, 0.5, 0.0, 1.0), Piece::constant(0.5, 1.0, 2.0)]).unwrap();
        assert!(q.approx_eq(&expect), "{q:?}");
        assert!(Plrv::identity().quantile_fn().approx_eq(&MonoFn::identity()));

        let qx = fixtures::paper_x().quantile_fn();
        let expect = MonoFn::new(vec![
            Piece::constant(0.0, 2.0 / 3.0, 0.0),
            Piece::new(2.0 / 3.0, 5.0 / 6.0, 1.5, 3.0),
            Piece::constant(5.0 / 6.0, 1.0, 3.0),
        ])
        .unwrap();
        assert!(qx.approx_eq(&expect));
    }

    #[test]
    fn es_examples() {
        let x = fixtures::x_fix();
        assert!((x.es(0.9).unwrap() - 2.5).abs() < 1e-9);
        assert!((x.es(0.95).unwrap() - 3.0).abs() < 1e-9);
        assert!((Plrv::constant(1.7).es(0.4).unwrap() - 1.7).abs() < 1e-12);
        assert_eq!(x.es(1.0).unwrap(), 3.5);
    }

    #[test]
    fn sum_examples() {
        let s = sum(&[fixtures::paper_x(), fixtures::paper_y()]).unwrap();
        let expect = Plrv::step(&[0.0, 2.0 / 3.0, 5.0 / 6.0, 1.0], &[0.0, 3.0, 6.0]).unwrap();
        assert!(s.approx_eq(&expect));
        let x = fixtures::x_fix();
        assert!(sum(&[x.clone(), Plrv::constant(0.0)]).unwrap().approx_eq(&x));
        let z = sum(&[x.clone(), x.apply_affine(-1.0, 0.0)]).unwrap();
        assert!(z.approx_eq(&Plrv::constant(0.0)));
        assert!(sum(&[]).is_err());
    }

    #[test]
    fn apply_increasing_examples() {
        let x = fixtures::x_fix();
        assert!(apply_increasing(&x, &IncreasingMap::identity()).unwrap().approx_eq(&x));
        let f = IncreasingMap::affine(2.0, 1.0);
        let y = apply_increasing(&Plrv::identity(), &f).unwrap();
        assert!(y.approx_eq(&Plrv::from_breakpoints(&[(0.0, 1.0), (1.0, 3.0)]).unwrap()));
    }

    #[test]
    fn apply_increasing_with_jumps() {
        // floor-to-{0, 1.5, 3}: jumps at 1.5 and 3
        let f = IncreasingMap::from_knots(vec![
            crate::indexsets::MapKnot { t: 0.0, left: 0.0, value: 0.0, right: 0.0 },
            crate::indexsets::MapKnot { t: 1.5, left: 0.0, value: 1.5, right: 1.5 },
            crate::indexsets::MapKnot { t: 3.0, left: 1.5, value: 3.0, right: 3.0 },
        ])
        .unwrap();
        let y = apply_increasing(&fixtures::paper_x(), &f).unwrap();
        let expect = Plrv::step(&[0.0, 2.0 / 3.0, 5.0 / 6.0, 1.0], &[0.0, 1.5, 3.0]).unwrap();
        assert!(y.approx_eq(&expect), "{y:?}");
    }

    #[test]
    fn comonotonic_examples() {
        assert!(is_comonotonic(&[fixtures::x_fix(), fixtures::x1_fix()]));
        assert!(is_comonotonic(&[fixtures::x_fix(), Plrv::constant(2.0)]));
        assert!(!is_comonotonic(&[fixtures::paper_x(), fixtures::paper_y()]));
        assert!(!is_comonotonic(&[fixtures::x_fix(), fixtures::x2_fix()]));
        assert!(is_comonotonic(&[fixtures::x_fix()]));
    }

    #[test]
    fn rank_transform_is_uniform_and_reproduces_x() {
        let x = fixtures::x2_fix().add(&fixtures::x_fix());
        let u = x.rank_transform();
        assert!(u.quantile_fn().approx_eq(&MonoFn::identity()));
        let back = apply_increasing(&u, &x.quantile_fn().to_map()).unwrap();
        assert!(back.approx_eq(&x), "{back:?}");
    }

    #[test]
    fn rejects_gaps_and_overlaps() {
        assert!(Plrv::new(vec![Piece::new(0.0, 0.4, 0.0, 0.0), Piece::new(0.5, 1.0, 0.0, 0.0)]).is_err());
        assert!(Plrv::new(vec![Piece::new(0.0, 0.6, 0.0, 0.0), Piece::new(0.5, 1.0, 0.0, 0.0)]).is_err());
        assert!(Plrv::new(vec![Piece::new(0.0, 1.0, f64::NAN, 0.0)]).is_err());
        let json = r#"{"pieces":[{"t0":0.0,"t1":0.85,"v0":0.0,"v1":0.0},{"t0":0.85,"t1":1.0,"v0":1.0,"v1":2.0}]}"#;
        let x: Plrv = serde_json::from_str(json).unwrap();
        assert_eq!(x.pieces().len(), 2);
        let bad = r#"{"pieces":[{"t0":0.0,"t1":0.8,"v0":0.0,"v1":0.0},{"t0":0.85,"t1":1.0,"v0":1.0,"v1":2.0}]}"#;
        assert!(serde_json::from_str::<Plrv>(bad).is_err());
    }

    #[test]
    fn event_json_and_ops() {
        let e: Event = serde_json::from_str(r#"{"intervals":[[0.9,1.0]]}"#).unwrap();
        assert!((e.measure() - 0.1).abs() < 1e-15);
        assert!((e.complement().measure() - 0.9).abs() < 1e-15);
        assert!(e.intersect(&e.complement()).measure() < 1e-15);
    }
}
