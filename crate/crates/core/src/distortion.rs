//! Distortion functions and signed Choquet integrals.
//!
//! A [`DistortionFn`] `h` is stored by knots carrying a left limit, a value
//! and a right limit, joined by segments. Most segments are linear; a segment
//! may also carry a quadratic bump or a power curve so that spectral
//! measures with linear spectra (Gini Shortfall, weights like
//! `t ↦ 9t − 4.5`) and MAXVAR are represented exactly.
//!
//! `I_h(X) = ∫_{−∞}^0 (h(P(X>x)) − h(1)) dx + ∫_0^∞ h(P(X>x)) dx`
//! is evaluated in closed form from the quantile function of `X`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, invalid, Result};
use crate::indexsets::{ClosedSet, MonoFn};
use crate::pl::{close, le};
use crate::randvar::Plrv;
use crate::EPS;

pub use crate::indexsets::Side;

/// Curve followed by a segment between two knots.
///
/// With `A` the right limit at the left knot, `B` the left limit at the
/// right knot and `s ∈ [0,1]` the relative position:
/// - `Linear`: `A + (B − A)s`
/// - `Quadratic { c }`: `A + (B − A)s + c·s(1 − s)`
/// - `Power { exponent: γ, flipped }`: `A + (B − A)φ(s)` with `φ(s) = s^γ`,
///   or `φ(s) = 1 − (1 − s)^γ` when flipped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    #[default]
    Linear,
    Quadratic {
        c: f64,
    },
    Power {
        exponent: f64,
        #[serde(default)]
        flipped: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub t: f64,
    pub left: f64,
    pub value: f64,
    pub right: f64,
}

/// A bounded-variation distortion function with `h(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionFn {
    knots: Vec<Knot>,
    shapes: Vec<Shape>,
}

/// One segment, resolved.
#[derive(Debug, Clone, Copy)]
struct Seg {
    t0: f64,
    t1: f64,
    a: f64,
    b: f64,
    shape: Shape,
}

impl Seg {
    fn width(&self) -> f64 {
        self.t1 - self.t0
    }

    fn at_s(&self, s: f64) -> f64 {
        let d = self.b - self.a;
        match self.shape {
            Shape::Linear => self.a + d * s,
            Shape::Quadratic { c } => self.a + d * s + c * s * (1.0 - s),
            Shape::Power { exponent, flipped: false } => self.a + d * s.powf(exponent),
            Shape::Power { exponent, flipped: true } => self.a + d * (1.0 - (1.0 - s).powf(exponent)),
        }
    }

    fn at(&self, t: f64) -> f64 {
        self.at_s(((t - self.t0) / self.width()).clamp(0.0, 1.0))
    }

    /// `∫_0^s` of the segment in relative units.
    fn antideriv_s(&self, s: f64) -> f64 {
        let d = self.b - self.a;
        match self.shape {
            Shape::Linear => self.a * s + d * s * s / 2.0,
            Shape::Quadratic { c } => self.a * s + d * s * s / 2.0 + c * (s * s / 2.0 - s * s * s / 3.0),
            Shape::Power { exponent: g, flipped: false } => self.a * s + d * s.powf(g + 1.0) / (g + 1.0),
            Shape::Power { exponent: g, flipped: true } => {
                self.a * s + d * (s + ((1.0 - s).powf(g + 1.0) - 1.0) / (g + 1.0))
            }
        }
    }

    /// `∫_x^y h(t) dt` for `[x, y] ⊆ [t0, t1]`.
    fn integral(&self, x: f64, y: f64) -> f64 {
        let w = self.width();
        let sx = ((x - self.t0) / w).clamp(0.0, 1.0);
        let sy = ((y - self.t0) / w).clamp(0.0, 1.0);
        w * (self.antideriv_s(sy) - self.antideriv_s(sx))
    }

    fn is_linear(&self) -> bool {
        let scale = EPS * (1.0 + self.a.abs() + self.b.abs());
        match self.shape {
            Shape::Linear => true,
            Shape::Quadratic { c } => c.abs() <= scale,
            Shape::Power { exponent, .. } => (exponent - 1.0).abs() <= EPS || (self.b - self.a).abs() <= scale,
        }
    }

    fn slope(&self) -> f64 {
        (self.b - self.a) / self.width()
    }

    /// One-sided derivatives at the two ends (may be infinite).
    fn end_derivatives(&self) -> (f64, f64) {
        let d = self.b - self.a;
        let w = self.width();
        if d == 0.0 {
            if let Shape::Quadratic { c } = self.shape {
                return (c / w, -c / w);
            }
            return (0.0, 0.0);
        }
        match self.shape {
            Shape::Linear => (d / w, d / w),
            Shape::Quadratic { c } => ((d + c) / w, (d - c) / w),
            Shape::Power { exponent: g, flipped } => {
                let at_zero = if g > 1.0 {
                    0.0
                } else if g < 1.0 {
                    d.signum() * f64::INFINITY
                } else {
                    d / w
                };
                let at_one = d * g / w;
                if flipped {
                    (at_one, at_zero)
                } else {
                    (at_zero, at_one)
                }
            }
        }
    }

    fn is_concave(&self) -> bool {
        let d = self.b - self.a;
        match self.shape {
            Shape::Linear => true,
            Shape::Quadratic { c } => c >= -EPS * (1.0 + d.abs()),
            Shape::Power { exponent: g, flipped: false } => d * g * (g - 1.0) <= EPS,
            Shape::Power { exponent: g, flipped: true } => d * g * (g - 1.0) >= -EPS,
        }
    }
}

/// Where a closed reflected gap fails to carry an affine piece of `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Violation {
    /// `h` is not affine on the open interval `(c, d)`.
    Interior { gap: (f64, f64) },
    /// `h(c)` differs from `h(c+)`.
    LeftEnd { gap: (f64, f64) },
    /// `h(d−)` differs from `h(d)`.
    RightEnd { gap: (f64, f64) },
}

/// A requirement that `K` accumulates at `point` from one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccumulationFlag {
    pub point: f64,
    pub side: Side,
}

impl DistortionFn {
    pub fn new(knots: Vec<Knot>, shapes: Vec<Shape>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(invalid("distortion: need knots at 0 and 1"));
        }
        if shapes.len() != knots.len() - 1 {
            return Err(invalid("distortion: one shape per segment required"));
        }
        let mut knots = knots;
        for k in &knots {
            if ![k.t, k.left, k.value, k.right].iter().all(|v| v.is_finite()) {
                return Err(invalid("distortion: non-finite number"));
            }
        }
        if knots[0].t.abs() > EPS {
            return Err(invalid("distortion: first knot must be at t=0"));
        }
        let n = knots.len();
        if (knots[n - 1].t - 1.0).abs() > EPS {
            return Err(invalid("distortion: last knot must be at t=1"));
        }
        knots[0].t = 0.0;
        knots[n - 1].t = 1.0;
        if knots[0].value.abs() > EPS {
            return Err(invalid("distortion: h(0) must be 0"));
        }
        knots[0].value = 0.0;
        knots[0].left = 0.0;
        knots[n - 1].right = knots[n - 1].value;
        for w in knots.windows(2) {
            if w[1].t <= w[0].t {
                return Err(invalid("distortion: knots must be strictly increasing in t"));
            }
        }
        for s in &shapes {
            match *s {
                Shape::Quadratic { c } if !c.is_finite() => return Err(invalid("distortion: bad quadratic coefficient")),
                Shape::Power { exponent, .. } if !(exponent.is_finite() && exponent > 0.0) => {
                    return Err(invalid("distortion: power exponent must be positive"))
                }
                _ => {}
            }
        }
        Ok(Self { knots, shapes })
    }

    /// Continuous piecewise-linear distortion through `(t, h(t))` points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let knots: Vec<Knot> = points.iter().map(|&(t, v)| Knot { t, left: v, value: v, right: v }).collect();
        let shapes = vec![Shape::Linear; knots.len().saturating_sub(1)];
        Self::new(knots, shapes)
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    fn seg(&self, j: usize) -> Seg {
        Seg {
            t0: self.knots[j].t,
            t1: self.knots[j + 1].t,
            a: self.knots[j].right,
            b: self.knots[j + 1].left,
            shape: self.shapes[j],
        }
    }

    fn segs(&self) -> impl Iterator<Item = Seg> + '_ {
        (0..self.shapes.len()).map(|j| self.seg(j))
    }

    fn knot_near(&self, t: f64) -> Option<&Knot> {
        let i = self.knots.partition_point(|k| k.t < t - EPS);
        self.knots.get(i).filter(|k| (k.t - t).abs() <= EPS)
    }

    fn seg_containing(&self, t: f64) -> Seg {
        let i = self.knots.partition_point(|k| k.t <= t);
        self.seg(i.clamp(1, self.knots.len() - 1) - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.knot_near(t) {
            Some(k) => k.value,
            None => self.seg_containing(t).at(t),
        }
    }

    pub fn eval_left(&self, t: f64) -> f64 {
        match self.knot_near(t) {
            Some(k) => k.left,
            None => self.seg_containing(t).at(t),
        }
    }

    pub fn eval_right(&self, t: f64) -> f64 {
        match self.knot_near(t) {
            Some(k) => k.right,
            None => self.seg_containing(t).at(t),
        }
    }

    /// `h(1)`.
    pub fn total(&self) -> f64 {
        self.knots[self.knots.len() - 1].value
    }

    /// `∫_a^b h(t) dt`, exact.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.segs()
            .filter(|s| s.t1 > a && s.t0 < b)
            .map(|s| s.integral(a.max(s.t0), b.min(s.t1)))
            .sum()
    }

    /// `ĥ(t) = h(1) − h(1 − t)`.
    pub fn conjugate(&self) -> DistortionFn {
        let h1 = self.total();
        let knots = self
            .knots
            .iter()
            .rev()
            .map(|k| Knot { t: 1.0 - k.t, left: h1 - k.right, value: h1 - k.value, right: h1 - k.left })
            .collect();
        let shapes = self
            .shapes
            .iter()
            .rev()
            .map(|s| match *s {
                Shape::Linear => Shape::Linear,
                Shape::Quadratic { c } => Shape::Quadratic { c: -c },
                Shape::Power { exponent, flipped } => Shape::Power { exponent, flipped: !flipped },
            })
            .collect();
        let mut out = DistortionFn { knots, shapes };
        out.knots[0].t = 0.0;
        out.knots[0].value = 0.0;
        out.knots[0].left = 0.0;
        let n = out.knots.len();
        out.knots[n - 1].t = 1.0;
        out
    }

    /// `(h_c, h_l, h_r)` with `h = h_c + h_l + h_r`: `h_l` collects the jumps
    /// `value − left` as steps `1{s ≥ t}`, `h_r` the jumps `right − value` as
    /// steps `1{s > t}`, and `h_c` is the continuous remainder.
    pub fn decompose(&self) -> (DistortionFn, DistortionFn, DistortionFn) {
        let n = self.knots.len();
        let mut l_before = 0.0;
        let mut r_before = 0.0;
        let mut kc = Vec::with_capacity(n);
        let mut kl = Vec::with_capacity(n);
        let mut kr = Vec::with_capacity(n);
        for k in &self.knots {
            let l_at = l_before + (k.value - k.left);
            let r_after = r_before + (k.right - k.value);
            let c = k.value - l_at - r_before;
            kc.push(Knot { t: k.t, left: c, value: c, right: c });
            kl.push(Knot { t: k.t, left: l_before, value: l_at, right: l_at });
            kr.push(Knot { t: k.t, left: r_before, value: r_before, right: r_after });
            l_before = l_at;
            r_before = r_after;
        }
        let lin = vec![Shape::Linear; n - 1];
        (
            DistortionFn { knots: kc, shapes: self.shapes.clone() },
            DistortionFn { knots: kl, shapes: lin.clone() },
            DistortionFn { knots: kr, shapes: lin },
        )
    }

    pub fn is_continuous(&self) -> bool {
        self.knots.iter().all(|k| close(k.left, k.value) && close(k.value, k.right))
    }

    /// `I_h(X)`, exact.
    ///
    /// With `Q` the quantile function of `X` and `m = Q(0)`,
    /// `I_h(X) = m·h(1) + ∫_m^{ess sup} h(P(X > x)) dx`. Over a sloped
    /// quantile piece on `(p0, p1)` the survival runs through `1 − p`, giving
    /// `slope · ∫_{1−p1}^{1−p0} h`; across a quantile jump at `p` the survival
    /// is exactly `1 − p`, giving `jump · h(1 − p)`.
    pub fn choquet(&self, x: &Plrv) -> f64 {
        let q = x.quantile_fn();
        let pieces = q.pieces();
        let mut total = pieces[0].v0 * self.total();
        for (k, pc) in pieces.iter().enumerate() {
            if k > 0 {
                let jump = pc.v0 - pieces[k - 1].v1;
                if jump != 0.0 {
                    total += jump * self.eval(1.0 - pc.t0);
                }
            }
            let rise = pc.v1 - pc.v0;
            if rise != 0.0 {
                total += rise / pc.len() * self.integral(1.0 - pc.t1, 1.0 - pc.t0);
            }
        }
        total
    }

    /// Check whether `h` is affine on the closed interval `[c, d]`.
    fn closed_affinity(&self, c: f64, d: f64, gap: (f64, f64)) -> Option<Violation> {
        let mut slope: Option<f64> = None;
        for s in self.segs().filter(|s| s.t1 > c + EPS && s.t0 < d - EPS) {
            if !s.is_linear() {
                return Some(Violation::Interior { gap });
            }
            match slope {
                Some(m) if !close(m, s.slope()) => return Some(Violation::Interior { gap }),
                _ => slope = Some(s.slope()),
            }
        }
        let inner_jump = self
            .knots
            .iter()
            .filter(|k| k.t > c + EPS && k.t < d - EPS)
            .any(|k| !(close(k.left, k.value) && close(k.value, k.right)));
        if inner_jump {
            return Some(Violation::Interior { gap });
        }
        if let Some(k) = self.knot_near(c) {
            if !close(k.value, k.right) {
                return Some(Violation::LeftEnd { gap });
            }
        }
        if let Some(k) = self.knot_near(d) {
            if !close(k.left, k.value) {
                return Some(Violation::RightEnd { gap });
            }
        }
        None
    }

    /// First gap `(a, b)` of `K` on whose reflected closure `[1−b, 1−a]` the
    /// function fails to be affine.
    pub(crate) fn additivity_violation(&self, k: &ClosedSet) -> Option<Violation> {
        k.gaps().into_iter().find_map(|(a, b)| self.closed_affinity(1.0 - b, 1.0 - a, (a, b)))
    }

    /// Whether `I_h` is additive on every `K`-concentrated vector: `h` must
    /// be affine on `[1−b, 1−a]` for every gap `(a, b)` of `K`.
    pub fn is_k_additive(&self, k: &ClosedSet) -> bool {
        self.additivity_violation(k).is_none()
    }

    /// Maximal open intervals on which `h` is affine.
    fn affinity_groups(&self) -> Vec<(usize, usize)> {
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut prev: Option<Seg> = None;
        for (j, s) in self.segs().enumerate() {
            if !s.is_linear() {
                prev = None;
                continue;
            }
            let joins = prev.is_some_and(|p| {
                let kn = &self.knots[j];
                close(p.slope(), s.slope()) && close(kn.left, kn.value) && close(kn.value, kn.right)
            });
            match groups.last_mut() {
                Some(g) if joins => g.1 = j + 1,
                _ => groups.push((j, j + 1)),
            }
            prev = Some(s);
        }
        groups
    }

    /// The smallest index set `K` for which `I_h` is `K`-additive, together
    /// with the one-sided accumulation requirements created by jumps at the
    /// ends of affine stretches.
    ///
    /// `is_k_additive(K)` holds iff `K ⊇ core` and every flag is met.
    pub fn additivity_core(&self) -> (ClosedSet, Vec<AccumulationFlag>) {
        let mut removed: Vec<(f64, f64)> = Vec::new();
        let mut flags = Vec::new();
        for (j0, j1) in self.affinity_groups() {
            let (c0, d0) = (self.knots[j0].t, self.knots[j1].t);
            removed.push((1.0 - d0, 1.0 - c0));
            let kc = &self.knots[j0];
            if !close(kc.value, kc.right) {
                flags.push(AccumulationFlag { point: 1.0 - c0, side: Side::Left });
            }
            let kd = &self.knots[j1];
            if !close(kd.left, kd.value) {
                flags.push(AccumulationFlag { point: 1.0 - d0, side: Side::Right });
            }
        }
        removed.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut core = Vec::with_capacity(removed.len() + 1);
        let mut start = 0.0;
        for (a, b) in removed {
            if a >= start - EPS {
                core.push((start, a.max(start)));
            }
            start = start.max(b);
        }
        if start <= 1.0 {
            core.push((start, 1.0));
        }
        flags.sort_by(|a, b| a.point.total_cmp(&b.point));
        let core = ClosedSet::new(core).unwrap_or_else(|_| ClosedSet::full());
        (core, flags)
    }

    /// Concavity on `[0,1]`, allowing upward jumps at the two endpoints.
    pub fn is_concave(&self) -> bool {
        let n = self.knots.len();
        if !le(self.knots[0].value, self.knots[0].right) || !le(self.knots[n - 1].value, self.knots[n - 1].left) {
            return false;
        }
        let inner_continuous = self.knots[1..n - 1]
            .iter()
            .all(|k| close(k.left, k.value) && close(k.value, k.right));
        if !inner_continuous || !self.segs().all(|s| s.is_concave()) {
            return false;
        }
        let segs: Vec<Seg> = self.segs().collect();
        segs.windows(2).all(|w| {
            let left_d = w[0].end_derivatives().1;
            let right_d = w[1].end_derivatives().0;
            left_d >= right_d || close(left_d, right_d)
        })
    }

    /// Distortion `h` whose conjugate is `ĥ(t) = ∫_0^t g`, so that
    /// `I_h = ρ_g` for a weight function `g` (not necessarily normalized).
    pub fn from_conjugate_density(g: &MonoFn) -> DistortionFn {
        let mut knots = Vec::with_capacity(g.pieces().len() + 1);
        let mut shapes = Vec::with_capacity(g.pieces().len());
        let mut acc = 0.0;
        knots.push(Knot { t: 0.0, left: 0.0, value: 0.0, right: 0.0 });
        for pc in g.pieces() {
            let w = pc.len();
            acc += w * (pc.v0 + pc.v1) / 2.0;
            knots.push(Knot { t: pc.t1, left: acc, value: acc, right: acc });
            let c = w * (pc.v0 - pc.v1) / 2.0;
            shapes.push(if c == 0.0 { Shape::Linear } else { Shape::Quadratic { c } });
        }
        DistortionFn { knots, shapes }.conjugate()
    }
}

/// `I_h(X)`, exact.
pub fn choquet(h: &DistortionFn, x: &Plrv) -> f64 {
    h.choquet(x)
}

/// Named distortion families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum Builtin {
    /// `VaR_p`: `h(t) = 1{t > 1−p}`, `p ∈ (0,1]`.
    Var { p: f64 },
    /// `VaR⁺_p`: `h(t) = 1{t ≥ 1−p}`, `p ∈ [0,1)`.
    VarPlus { p: f64 },
    /// `ES_p`: `h(t) = min(t/(1−p), 1)`, `p ∈ [0,1]`.
    Es { p: f64 },
    Mean,
    EssSup,
    /// `h(t) = min(t, 1−t)`.
    MeanMedianDev,
    /// `h(t) = min(t/(1−α), 1) + 2λ t (1−t−α)₊ / (1−α)²`.
    GiniShortfall { alpha: f64, lambda: f64 },
    /// `h(t) = t^{1/α}`.
    Maxvar { alpha: f64 },
}

impl Builtin {
    pub fn build(&self) -> Result<DistortionFn> {
        let k = |t: f64, left: f64, value: f64, right: f64| Knot { t, left, value, right };
        match *self {
            Builtin::Var { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(domain(format!("var needs p in (0,1], got {p}")));
                }
                if p >= 1.0 {
                    return Builtin::EssSup.build();
                }
                let q = 1.0 - p;
                DistortionFn::new(
                    vec![k(0.0, 0.0, 0.0, 0.0), k(q, 0.0, 0.0, 1.0), k(1.0, 1.0, 1.0, 1.0)],
                    vec![Shape::Linear; 2],
                )
            }
            Builtin::VarPlus { p } => {
                if !(0.0..1.0).contains(&p) {
                    return Err(domain(format!("var_plus needs p in [0,1), got {p}")));
                }
                if p == 0.0 {
                    return DistortionFn::new(vec![k(0.0, 0.0, 0.0, 0.0), k(1.0, 0.0, 1.0, 1.0)], vec![Shape::Linear]);
                }
                let q = 1.0 - p;
                DistortionFn::new(
                    vec![k(0.0, 0.0, 0.0, 0.0), k(q, 0.0, 1.0, 1.0), k(1.0, 1.0, 1.0, 1.0)],
                    vec![Shape::Linear; 2],
                )
            }
            Builtin::Es { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(domain(format!("es needs p in [0,1], got {p}")));
                }
                if p >= 1.0 {
                    return Builtin::EssSup.build();
                }
                if p == 0.0 {
                    return Builtin::Mean.build();
                }
                DistortionFn::from_points(&[(0.0, 0.0), (1.0 - p, 1.0), (1.0, 1.0)])
            }
            Builtin::Mean => DistortionFn::from_points(&[(0.0, 0.0), (1.0, 1.0)]),
            Builtin::EssSup => DistortionFn::new(vec![k(0.0, 0.0, 0.0, 1.0), k(1.0, 1.0, 1.0, 1.0)], vec![Shape::Linear]),
            Builtin::MeanMedianDev => DistortionFn::from_points(&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]),
            Builtin::GiniShortfall { alpha, lambda } => {
                if !(0.0..1.0).contains(&alpha) || !lambda.is_finite() {
                    return Err(domain(format!("gini_shortfall needs alpha in [0,1), got {alpha}")));
                }
                let q = 1.0 - alpha;
                let bump = Shape::Quadratic { c: 2.0 * lambda };
                if alpha == 0.0 {
                    return DistortionFn::new(vec![k(0.0, 0.0, 0.0, 0.0), k(1.0, 1.0, 1.0, 1.0)], vec![bump]);
                }
                DistortionFn::new(
                    vec![k(0.0, 0.0, 0.0, 0.0), k(q, 1.0, 1.0, 1.0), k(1.0, 1.0, 1.0, 1.0)],
                    vec![bump, Shape::Linear],
                )
            }
            Builtin::Maxvar { alpha } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(domain(format!("maxvar needs alpha > 0, got {alpha}")));
                }
                DistortionFn::new(
                    vec![k(0.0, 0.0, 0.0, 0.0), k(1.0, 1.0, 1.0, 1.0)],
                    vec![Shape::Power { exponent: 1.0 / alpha, flipped: false }],
                )
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct KnotRepr {
    t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<f64>,
    value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<Shape>,
}

#[derive(Serialize, Deserialize)]
struct KnotsRepr {
    knots: Vec<KnotRepr>,
}

impl Serialize for DistortionFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.knots.len();
        let knots = self
            .knots
            .iter()
            .enumerate()
            .map(|(j, k)| KnotRepr {
                t: k.t,
                left: (j > 0).then_some(k.left),
                value: k.value,
                right: (j + 1 < n).then_some(k.right),
                shape: self.shapes.get(j).copied().filter(|s| *s != Shape::Linear),
            })
            .collect();
        KnotsRepr { knots }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DistortionFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(deserializer)?;
        if v.get("builtin").is_some() {
            let b: Builtin = serde_json::from_value(v).map_err(D::Error::custom)?;
            return b.build().map_err(D::Error::custom);
        }
        let r: KnotsRepr = serde_json::from_value(v).map_err(D::Error::custom)?;
        let n = r.knots.len();
        let shapes = r.knots.iter().take(n.saturating_sub(1)).map(|k| k.shape.unwrap_or_default()).collect();
        let knots = r
            .knots
            .iter()
            .map(|k| Knot { t: k.t, left: k.left.unwrap_or(k.value), value: k.value, right: k.right.unwrap_or(k.value) })
            .collect();
        DistortionFn::new(knots, shapes).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn b(x: Builtin) -> DistortionFn {
        x.build().unwrap()
    }

    #[test]
    fn conjugate_examples() {
        let id = b(Builtin::Mean);
        assert_eq!(id.conjugate(), id);
        let p = 0.8;
        let var = b(Builtin::Var { p }).conjugate();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let expect = if t >= p - 1e-12 { 1.0 } else { 0.0 };
            assert_eq!(var.eval(t), expect, "t={t}");
        }
        let es = b(Builtin::Es { p }).conjugate();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let expect = ((t - p) / (1.0 - p)).max(0.0);
            assert!((es.eval(t) - expect).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn conjugate_is_an_involution() {
        let h = fixtures::example_distortion();
        let back = h.conjugate().conjugate();
        for k in 0..=60 {
            let t = k as f64 / 60.0;
            assert!((back.eval(t) - h.eval(t)).abs() < 1e-12);
        }
        let g = b(Builtin::Maxvar { alpha: 2.0 });
        let gg = g.conjugate();
        assert!((gg.eval(0.36) - (1.0 - 0.64f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn decompose_examples() {
        let h = b(Builtin::Es { p: 0.9 });
        let (c, l, r) = h.decompose();
        assert!(c.is_continuous());
        assert!(l.knots().iter().all(|k| k.value == 0.0) && r.knots().iter().all(|k| k.right == 0.0));

        let p = 0.7;
        let (c, l, r) = b(Builtin::Var { p }).decompose();
        assert!(c.knots().iter().all(|k| k.value.abs() < 1e-15));
        assert!(l.knots().iter().all(|k| k.value == 0.0 && k.left == 0.0));
        let q = 1.0 - p;
        assert_eq!(r.eval(q), 0.0);
        assert_eq!(r.eval_right(q), 1.0);

        let h = DistortionFn::new(
            vec![
                Knot { t: 0.0, left: 0.0, value: 0.0, right: 0.0 },
                Knot { t: 0.5, left: 0.3, value: 0.5, right: 0.7 },
                Knot { t: 1.0, left: 1.0, value: 1.0, right: 1.0 },
            ],
            vec![Shape::Linear; 2],
        )
        .unwrap();
        let (c, l, r) = h.decompose();
        assert!((l.eval(0.5) - 0.2).abs() < 1e-15 && l.eval_left(0.5) == 0.0);
        assert!((r.eval_right(0.5) - 0.2).abs() < 1e-15 && r.eval(0.5) == 0.0);
        for k in 0..=40 {
            let t = k as f64 / 40.0;
            let sum = c.eval(t) + l.eval(t) + r.eval(t);
            assert!((sum - h.eval(t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn choquet_examples() {
        let es = b(Builtin::Es { p: 0.9 });
        assert!((es.choquet(&fixtures::x_fix()) - 2.5).abs() < 1e-9);
        let h = fixtures::example_distortion();
        assert!((h.choquet(&fixtures::paper_x()) - 2.375).abs() < 1e-9);
        let s = fixtures::paper_x().add(&fixtures::paper_y());
        assert!((h.choquet(&s) - 4.125).abs() < 1e-9);
        let c = Plrv::constant(-2.5);
        assert!((h.choquet(&c) - (-2.5 * h.total())).abs() < 1e-12);
    }

    #[test]
    fn choquet_var_and_var_plus() {
        let x = fixtures::paper_x();
        let v = b(Builtin::Var { p: 5.0 / 6.0 }).choquet(&x);
        assert!((v - 3.0).abs() < 1e-9);
        let vp = b(Builtin::VarPlus { p: 2.0 / 3.0 }).choquet(&x);
        assert!((vp - 1.5).abs() < 1e-9);
        let step = Plrv::step(&[0.0, 0.5, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(b(Builtin::Var { p: 0.5 }).choquet(&step), 0.0);
        assert_eq!(b(Builtin::VarPlus { p: 0.5 }).choquet(&step), 1.0);
        assert_eq!(b(Builtin::EssSup).choquet(&step), 1.0);
        assert_eq!(b(Builtin::VarPlus { p: 0.0 }).choquet(&step), 0.0);
    }

    #[test]
    fn k_additivity_examples() {
        let mmd = b(Builtin::MeanMedianDev);
        assert!(mmd.is_k_additive(&ClosedSet::point(0.5).unwrap()));
        let alpha = 0.6;
        let gs = b(Builtin::GiniShortfall { alpha, lambda: 0.3 });
        assert!(gs.is_k_additive(&ClosedSet::interval(alpha, 1.0).unwrap()));
        assert!(!gs.is_k_additive(&ClosedSet::interval(alpha + 1e-3, 1.0).unwrap()));
        let mv = b(Builtin::Maxvar { alpha: 2.0 });
        assert!(!mv.is_k_additive(&ClosedSet::new(vec![(0.0, 0.4), (0.41, 1.0)]).unwrap()));
        assert!(mv.is_k_additive(&ClosedSet::full()));
        let p = 0.7;
        let var = b(Builtin::Var { p });
        assert!(!var.is_k_additive(&ClosedSet::point(p).unwrap()));
        assert!(var.is_k_additive(&ClosedSet::interval(p - 0.05, p).unwrap()));
    }

    #[test]
    fn additivity_core_examples() {
        let (core, flags) = b(Builtin::Es { p: 0.9 }).additivity_core();
        assert!(core.approx_eq(&ClosedSet::point(0.9).unwrap()));
        assert!(flags.is_empty());
        let (core, flags) = b(Builtin::MeanMedianDev).additivity_core();
        assert!(core.approx_eq(&ClosedSet::point(0.5).unwrap()));
        assert!(flags.is_empty());
        let (core, flags) = b(Builtin::Var { p: 0.3 }).additivity_core();
        assert!(core.approx_eq(&ClosedSet::point(0.3).unwrap()));
        assert_eq!(flags.len(), 1);
        assert!((flags[0].point - 0.3).abs() < 1e-12 && flags[0].side == Side::Left);
        let (core, flags) = b(Builtin::VarPlus { p: 0.3 }).additivity_core();
        assert!(core.approx_eq(&ClosedSet::point(0.3).unwrap()));
        assert_eq!(flags[0].side, Side::Right);
    }

    #[test]
    fn concavity_examples() {
        assert!(b(Builtin::Mean).is_concave());
        assert!(!DistortionFn::new(
            vec![Knot { t: 0.0, left: 0.0, value: 0.0, right: 0.0 }, Knot { t: 1.0, left: 1.0, value: 1.0, right: 1.0 }],
            vec![Shape::Power { exponent: 2.0, flipped: false }]
        )
        .unwrap()
        .is_concave());
        assert!(b(Builtin::Es { p: 0.9 }).is_concave());
        assert!(b(Builtin::Maxvar { alpha: 2.0 }).is_concave());
        assert!(b(Builtin::GiniShortfall { alpha: 0.5, lambda: 0.25 }).is_concave());
        assert!(b(Builtin::EssSup).is_concave());
        assert!(!b(Builtin::Var { p: 0.5 }).is_concave());
        assert!(b(Builtin::MeanMedianDev).is_concave());
    }

    #[test]
    fn json_forms() {
        let h: DistortionFn =
            serde_json::from_str(r#"{"knots":[{"t":0.0,"value":0.0,"right":0.0},{"t":1.0,"left":1.0,"value":1.0}]}"#).unwrap();
        assert_eq!(h, b(Builtin::Mean));
        let es: DistortionFn = serde_json::from_str(r#"{"builtin":"es","p":0.9}"#).unwrap();
        assert_eq!(es, b(Builtin::Es { p: 0.9 }));
        let gs: DistortionFn = serde_json::from_str(r#"{"builtin":"gini_shortfall","alpha":0.5,"lambda":0.2}"#).unwrap();
        let back: DistortionFn = serde_json::from_str(&serde_json::to_string(&gs).unwrap()).unwrap();
        assert_eq!(gs, back);
        assert!(serde_json::from_str::<DistortionFn>(r#"{"builtin":"var","p":1.5}"#).is_err());
        assert!(serde_json::from_str::<DistortionFn>(r#"{"knots":[{"t":0.0,"value":0.2},{"t":1.0,"value":1.0}]}"#).is_err());
    }
}
