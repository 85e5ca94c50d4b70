//! Tail events, `p`- and `K`-concentration, `g`-comonotonicity, ordinal-sum
//! generation and counterexamples to additivity.
//!
//! All decisions run off one object: the distributional transform `U` of the
//! sum `S = X_1 + ⋯ + X_d` (see [`Plrv::rank_transform`]). The events
//! `A_p = {U > p}` are nested `p`-tail events of `S`, and a vector is
//! `p`-concentrated iff `A_p` is a `p`-tail event of every component.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distortion::{DistortionFn, Violation};
use crate::error::{domain, invalid, Error, Result};
use crate::indexsets::{psi, v_map, ClosedSet, MonoFn};
use crate::randvar::{self, apply_increasing, comonotonic_on, is_comonotonic, is_tail_event, Event, Piece, Plrv};
use crate::EPS;

/// Smallest additivity gap accepted as a genuine counterexample.
pub const GAP_TOL: f64 = 1e-9;

const MAX_TRIES: usize = 64;

/// A `p`-tail event of the sum together with the per-component verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub p: f64,
    pub event: Event,
    pub verdicts: Vec<bool>,
}

impl TailCertificate {
    pub fn holds(&self) -> bool {
        self.verdicts.iter().all(|&v| v)
    }
}

/// Why a vector fails to be `K`-concentrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Refutation {
    /// No common `p`-tail event.
    Level { p: f64 },
    /// The vector is not comonotonic on the layer `{a < U ≤ b}`.
    Layer { a: f64, b: f64 },
}

/// Outcome of [`is_k_concentrated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KConcentration {
    pub concentrated: bool,
    pub certificates: Vec<TailCertificate>,
    pub refutation: Option<Refutation>,
}

fn check_level(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("tail level must lie in (0,1), got {p}")))
    }
}

/// The canonical `p`-tail event `{U > p}` of `x`.
pub fn tail_event(x: &Plrv, p: f64) -> Result<Event> {
    check_level(p)?;
    Ok(x.rank_transform().superlevel(p))
}

fn certificate(xs: &[Plrv], u: &Plrv, p: f64) -> TailCertificate {
    let event = u.superlevel(p);
    let verdicts = xs.iter().map(|x| is_tail_event(x, &event)).collect();
    TailCertificate { p, event, verdicts }
}

fn sum_and_rank(xs: &[Plrv]) -> Option<Plrv> {
    randvar::sum(xs).ok().map(|s| s.rank_transform())
}

/// Whether all components share a common `p`-tail event.
pub fn is_p_concentrated(xs: &[Plrv], p: f64) -> Result<(bool, TailCertificate)> {
    check_level(p)?;
    let u = sum_and_rank(xs).ok_or_else(|| domain("empty vector"))?;
    let cert = certificate(xs, &u, p);
    Ok((cert.holds(), cert))
}

/// `K`-concentration: `p`-concentration at the endpoints of every interval
/// of `K` plus comonotonicity on each layer `{a < U ≤ b}` spanned by a
/// nondegenerate interval `[a, b]`.
pub fn is_k_concentrated(xs: &[Plrv], k: &ClosedSet) -> KConcentration {
    let Some(u) = sum_and_rank(xs) else {
        return KConcentration { concentrated: true, certificates: vec![], refutation: None };
    };
    let mut levels: Vec<f64> = k
        .intervals()
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|&p| p > EPS && p < 1.0 - EPS)
        .collect();
    levels.dedup_by(|a, b| (*a - *b).abs() <= EPS);
    let certificates: Vec<TailCertificate> = levels.iter().map(|&p| certificate(xs, &u, p)).collect();
    let mut refutation = certificates.iter().find(|c| !c.holds()).map(|c| Refutation::Level { p: c.p });
    if refutation.is_none() {
        for &(a, b) in k.intervals() {
            if b - a <= EPS {
                continue;
            }
            let layer = u.superlevel(a).intersect(&u.superlevel(b).complement());
            if !comonotonic_on(xs, &layer) {
                refutation = Some(Refutation::Layer { a, b });
                break;
            }
        }
    }
    KConcentration { concentrated: refutation.is_none(), certificates, refutation }
}

/// The reference variable `Z = V(K) ∘ U` of a `K`-concentrated vector:
/// `Q_Z = V(K)` and every `(X_i, Z)` is comonotonic.
pub fn witness_z(xs: &[Plrv], k: &ClosedSet) -> Result<Plrv> {
    let verdict = is_k_concentrated(xs, k);
    if !verdict.concentrated {
        return Err(Error::NotConcentrated(format!("{:?}", verdict.refutation)));
    }
    let u = sum_and_rank(xs).ok_or_else(|| domain("empty vector"))?;
    apply_increasing(&u, &v_map(k).to_map())
}

/// `g`-comonotonicity, decided through the candidate witness `Z = g ∘ U`.
pub fn is_g_comonotonic(xs: &[Plrv], g: &MonoFn) -> bool {
    let Some(u) = sum_and_rank(xs) else {
        return true;
    };
    let Ok(z) = apply_increasing(&u, &g.to_map()) else {
        return false;
    };
    xs.iter().all(|x| is_comonotonic(&[x.clone(), z.clone()]))
}

/// Coupling used inside one gap of `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapCopula {
    Comonotone,
    /// Components after the first are reflected within the gap.
    Countermonotone,
    /// Components after the first shuffle `param` equal sub-blocks
    /// (default 4) by a seeded permutation.
    Independent,
    /// Components after the first exchange the blocks left and right of
    /// the fraction `param` (default 0.5) of the gap.
    SwapBlocks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub interval: [f64; 2],
    pub copula: GapCopula,
    #[serde(default)]
    pub param: Option<f64>,
}

/// One coupling per gap of `K`, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GapCopulaSpec {
    pub gaps: Vec<GapEntry>,
}

impl GapCopulaSpec {
    /// The same coupling on every gap of `K`.
    pub fn uniform(k: &ClosedSet, copula: GapCopula, param: Option<f64>) -> Self {
        let gaps = k.gaps().into_iter().map(|(a, b)| GapEntry { interval: [a, b], copula, param }).collect();
        Self { gaps }
    }

    fn validate(&self, k: &ClosedSet) -> Result<()> {
        let gaps = k.gaps();
        if gaps.len() != self.gaps.len() {
            return Err(invalid(format!("spec lists {} gaps, K has {}", self.gaps.len(), gaps.len())));
        }
        for (g, e) in gaps.iter().zip(&self.gaps) {
            if (g.0 - e.interval[0]).abs() > 1e-9 || (g.1 - e.interval[1]).abs() > 1e-9 {
                return Err(invalid(format!(
                    "spec interval [{}, {}] does not match gap ({}, {})",
                    e.interval[0], e.interval[1], g.0, g.1
                )));
            }
            match (e.copula, e.param) {
                (GapCopula::Independent, Some(m)) if !(m >= 2.0 && m.fract() == 0.0 && m <= 4096.0) => {
                    return Err(invalid(format!("independent blocks must be an integer >= 2, got {m}")))
                }
                (GapCopula::SwapBlocks, Some(t)) if !(t > 0.0 && t < 1.0) => {
                    return Err(invalid(format!("swap fraction must lie in (0,1), got {t}")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Measure-preserving map of one gap for one component.
fn gap_pieces(a: f64, b: f64, entry: &GapEntry, component: usize, rng: &mut ChaCha8Rng) -> Vec<Piece> {
    let w = b - a;
    if component == 0 {
        return vec![Piece::new(a, b, a, b)];
    }
    match entry.copula {
        GapCopula::Comonotone => vec![Piece::new(a, b, a, b)],
        GapCopula::Countermonotone => vec![Piece::new(a, b, b, a)],
        GapCopula::SwapBlocks => {
            let m = a + entry.param.unwrap_or(0.5) * w;
            let first = m - a;
            vec![Piece::new(a, m, b - first, b), Piece::new(m, b, a, b - first)]
        }
        GapCopula::Independent => {
            let m = entry.param.unwrap_or(4.0) as usize;
            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(rng);
            if perm.iter().enumerate().all(|(i, &p)| i == p) {
                perm.rotate_left(1);
            }
            let bw = w / m as f64;
            let edge = |i: usize| if i == m { b } else { a + i as f64 * bw };
            (0..m).map(|i| Piece::new(edge(i), edge(i + 1), edge(perm[i]), edge(perm[i] + 1))).collect()
        }
    }
}

/// Ordinal-sum sample: components are comonotone on `K` and coupled on each
/// gap as the spec says, then pushed through their marginal quantiles
/// (uniform marginals if `marginals` is empty).
pub fn generate(k: &ClosedSet, spec: &GapCopulaSpec, marginals: &[MonoFn], dim: usize, seed: u64) -> Result<Vec<Plrv>> {
    spec.validate(k)?;
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if !marginals.is_empty() && marginals.len() != dim {
        return Err(invalid(format!("{} marginals given for dimension {dim}", marginals.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = k.gaps();
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut pieces = Vec::new();
        let mut cursor = 0.0;
        for ((a, b), entry) in gaps.iter().zip(&spec.gaps) {
            if *a > cursor {
                pieces.push(Piece::new(cursor, *a, cursor, *a));
            }
            pieces.extend(gap_pieces(*a, *b, entry, i, &mut rng));
            cursor = *b;
        }
        if cursor < 1.0 {
            pieces.push(Piece::new(cursor, 1.0, cursor, 1.0));
        }
        let t = Plrv::new(pieces)?;
        let x = match marginals.get(i) {
            Some(q) => apply_increasing(&t, &q.to_map())?,
            None => t,
        };
        out.push(x);
    }
    Ok(out)
}

/// `X`: `lo` before the window `(a, b)`, rising `lo → hi` across it, `top`
/// after. The second variable follows the same values but falls across the
/// window.
fn window_pair(a: f64, b: f64, levels: [f64; 3], second: [f64; 3]) -> Result<(Plrv, Plrv)> {
    let [lo, hi, top] = levels;
    let [lo2, start2, top2] = second;
    let mut px = Vec::new();
    let mut py = Vec::new();
    if a > 0.0 {
        px.push(Piece::constant(0.0, a, lo));
        py.push(Piece::constant(0.0, a, lo2));
    }
    px.push(Piece::new(a, b, hi, top));
    py.push(Piece::new(a, b, start2, hi));
    if b < 1.0 {
        px.push(Piece::constant(b, 1.0, top));
        py.push(Piece::constant(b, 1.0, top2));
    }
    Ok((Plrv::new(px)?, Plrv::new(py)?))
}

/// Reflection pair on the window: `X = 0 / 1.5 → 3 / 3`, `Y` its mirror
/// image inside the window.
fn reflection_pair(a: f64, b: f64) -> Result<(Plrv, Plrv)> {
    window_pair(a, b, [0.0, 1.5, 3.0], [0.0, 3.0, 3.0])
}

/// Crossing pair on the window: `X = 1 / 1 → 2 / 2` and
/// `Y = 0.9 / 2 → 1 / 2.1`.
fn crossing_pair(a: f64, b: f64) -> Result<(Plrv, Plrv)> {
    window_pair(a, b, [1.0, 1.0, 2.0], [0.9, 2.0, 2.1])
}

fn additivity_gap(h: &DistortionFn, x: &Plrv, y: &Plrv) -> f64 {
    h.choquet(&x.add(y)) - h.choquet(x) - h.choquet(y)
}

/// A `K`-concentrated pair on which `I_h` is not additive, or `None` when
/// `I_h` is `K`-additive.
///
/// The pair lives on a window inside the offending gap of `K`. If `h` is not
/// affine inside the reflected gap, the first attempt reflects a rising
/// variable across the whole gap; further attempts use windows around the
/// knots of `h` and seeded random windows. A jump of `h` at an end of the
/// reflected gap is exposed by a crossing pair on a window touching the
/// corresponding end of the gap. Every returned pair is checked for
/// `K`-concentration and a gap above [`GAP_TOL`].
pub fn counterexample(h: &DistortionFn, k: &ClosedSet, seed: u64) -> Result<Option<(Plrv, Plrv)>> {
    let Some(violation) = h.additivity_violation(k) else {
        return Ok(None);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(f64, f64, bool)> = Vec::new();
    match violation {
        Violation::Interior { gap: (a, b) } => {
            let (c, d) = (1.0 - b, 1.0 - a);
            candidates.push((a, b, false));
            let inner: Vec<f64> = h.knots().iter().map(|kn| kn.t).filter(|&t| t > c + EPS && t < d - EPS).collect();
            let mut marks = vec![c];
            marks.extend(&inner);
            marks.push(d);
            for &t in &inner {
                let delta = (t - c).min(d - t) / 2.0;
                for (lo, hi) in [(c, t), (t, d), (t - delta, t), (t, t + delta), (t - delta, t + delta)] {
                    candidates.push((1.0 - hi, 1.0 - lo, false));
                }
            }
            for w in marks.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                candidates.push((1.0 - w[1], 1.0 - w[0], false));
                candidates.push((1.0 - mid, 1.0 - w[0], false));
                candidates.push((1.0 - w[1], 1.0 - mid, false));
            }
            while candidates.len() < MAX_TRIES {
                let lo = c + rng.gen::<f64>() * (d - c);
                let hi = lo + (0.05 + 0.95 * rng.gen::<f64>()) * (d - lo);
                candidates.push((1.0 - hi, 1.0 - lo, false));
            }
        }
        Violation::LeftEnd { gap: (a, b) } => {
            let mut eps = (b - a) / 2.0;
            while candidates.len() < MAX_TRIES && eps > 1e-6 * (b - a) {
                candidates.push((b - eps, b, true));
                eps /= 2.0;
            }
        }
        Violation::RightEnd { gap: (a, b) } => {
            let mut eps = (b - a) / 2.0;
            while candidates.len() < MAX_TRIES && eps > 1e-6 * (b - a) {
                candidates.push((a, a + eps, true));
                eps /= 2.0;
            }
        }
    }
    for &(a, b, crossing) in candidates.iter().take(MAX_TRIES) {
        if b - a <= 1e-9 {
            continue;
        }
        let (x, y) = if crossing { crossing_pair(a, b)? } else { reflection_pair(a, b)? };
        let gap = additivity_gap(h, &x, &y);
        if gap.abs() > GAP_TOL && is_k_concentrated(&[x.clone(), y.clone()], k).concentrated {
            return Ok(Some((x, y)));
        }
    }
    Err(Error::SearchExhausted(format!(
        "no verified counterexample after {MAX_TRIES} attempts ({violation:?})"
    )))
}

/// Reflect `x` within the window `(c, d)`: `ω ↦ x(c + d − ω)` there.
pub fn reflect_on(x: &Plrv, c: f64, d: f64) -> Plrv {
    let mut pieces = Vec::with_capacity(x.pieces().len() + 2);
    let mut inside = Vec::new();
    for pc in x.pieces() {
        let (s, e) = (pc.t0, pc.t1);
        if s < c {
            pieces.push(pc.clip(s, e.min(c)));
        }
        if e > c && s < d {
            let q = pc.clip(s.max(c), e.min(d));
            inside.push(Piece::new(c + d - q.t1, c + d - q.t0, q.v1, q.v0));
        }
        if e > d {
            pieces.push(pc.clip(s.max(d), e));
        }
    }
    inside.reverse();
    let split = pieces.partition_point(|p| p.t0 < c);
    let tail = pieces.split_off(split);
    pieces.extend(inside);
    pieces.extend(tail);
    Plrv::new(pieces).unwrap_or_else(|_| x.clone())
}

/// When `f ≾ g` fails, a pair that is `g`-comonotonic but not
/// `f`-comonotonic: `X = f(U)` and `Y = f(R(U))` with `R` reflecting a
/// stretch where `g` is flat and `f` is not.
pub fn order_counterexample(f: &MonoFn, g: &MonoFn) -> Option<(Plrv, Plrv)> {
    let flats = psi(g).gaps();
    let (c, d) = flats.into_iter().find(|&(c, d)| f.eval_right(c) < f.eval(d) - EPS * (1.0 + f.eval(d).abs()))?;
    let u = Plrv::identity();
    let x = apply_increasing(&u, &f.to_map()).ok()?;
    let y = reflect_on(&x, c, d);
    let pair = [x, y];
    (is_g_comonotonic(&pair, g) && !is_g_comonotonic(&pair, f)).then(|| {
        let [x, y] = pair;
        (x, y)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Builtin;
    use crate::fixtures;

    #[test]
    fn tail_event_examples() {
        let e = tail_event(&Plrv::identity(), 0.9).unwrap();
        assert!(e.approx_eq(&Event::from_intervals(vec![(0.9, 1.0)])));
        let e = tail_event(&fixtures::x_fix(), 0.95).unwrap();
        assert!(e.approx_eq(&Event::from_intervals(vec![(0.95, 1.0)])));
        let e = tail_event(&Plrv::constant(3.0), 0.5).unwrap();
        assert!(e.approx_eq(&Event::from_intervals(vec![(0.5, 1.0)])));
        assert!(tail_event(&Plrv::identity(), 1.0).is_err());
    }

    #[test]
    fn p_concentration_examples() {
        let xs = [fixtures::x_fix(), fixtures::x2_fix()];
        let (ok, cert) = is_p_concentrated(&xs, 0.9).unwrap();
        assert!(ok);
        assert!(cert.event.approx_eq(&Event::from_intervals(vec![(0.9, 1.0)])));
        assert!(!is_p_concentrated(&xs, 0.95).unwrap().0);
        let co = [fixtures::x_fix(), fixtures::x1_fix()];
        for p in [0.1, 0.5, 0.85, 0.9, 0.93, 0.99] {
            assert!(is_p_concentrated(&co, p).unwrap().0);
        }
        assert!(is_p_concentrated(&co, 0.0).is_err());
    }

    #[test]
    fn k_concentration_examples() {
        let xs = [fixtures::x_fix(), fixtures::x1_fix()];
        assert!(is_k_concentrated(&xs, &fixtures::k_fix()).concentrated);
        let pair = [fixtures::paper_x(), fixtures::paper_y()];
        assert_eq!(is_k_concentrated(&pair, &ClosedSet::full()).concentrated, is_comonotonic(&pair));
        assert!(is_k_concentrated(&pair, &fixtures::example_k()).concentrated);
        let r = is_k_concentrated(&[fixtures::x_fix(), fixtures::x2_fix()], &fixtures::k_fix());
        assert_eq!(r.refutation, Some(Refutation::Level { p: 0.95 }));
    }

    #[test]
    fn witness_examples() {
        let xs = [fixtures::x_fix(), fixtures::x1_fix()];
        let z = witness_z(&xs, &ClosedSet::full()).unwrap();
        assert!(z.quantile_fn().approx_eq(&MonoFn::identity()));
        let k = fixtures::k_fix();
        let z = witness_z(&xs, &k).unwrap();
        assert!(z.quantile_fn().approx_eq(&v_map(&k)));
        assert!(xs.iter().all(|x| is_comonotonic(&[x.clone(), z.clone()])));
        assert!(matches!(
            witness_z(&[fixtures::x_fix(), fixtures::x2_fix()], &k),
            Err(Error::NotConcentrated(_))
        ));
    }

    #[test]
    fn g_comonotonic_examples() {
        let xs = [fixtures::x_fix(), fixtures::x1_fix()];
        assert!(is_g_comonotonic(&xs, &v_map(&fixtures::k_fix())));
        let pair = [fixtures::paper_x(), fixtures::paper_y()];
        assert!(is_g_comonotonic(&pair, &MonoFn::constant(1.0)));
        assert_eq!(is_g_comonotonic(&pair, &MonoFn::identity()), is_comonotonic(&pair));
    }

    #[test]
    fn generate_examples() {
        let k = ClosedSet::new(vec![(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]).unwrap();
        let spec = GapCopulaSpec::uniform(&k, GapCopula::Countermonotone, None);
        let xs = generate(&k, &spec, &[], 2, 7).unwrap();
        assert!(xs[0].approx_eq(&Plrv::identity()));
        assert!((xs[1].eval(0.4) - (1.0 - 0.4)).abs() < 1e-12);
        assert!(is_k_concentrated(&xs, &k).concentrated);

        let xs = generate(&ClosedSet::full(), &GapCopulaSpec::default(), &[], 2, 0).unwrap();
        assert!(is_comonotonic(&xs));

        let p = 0.5;
        let kp = ClosedSet::point(p).unwrap();
        let spec = GapCopulaSpec::uniform(&kp, GapCopula::Independent, Some(5.0));
        let xs = generate(&kp, &spec, &[], 2, 11).unwrap();
        assert!(is_p_concentrated(&xs, p).unwrap().0);
        assert!(!is_p_concentrated(&xs, 0.27).unwrap().0);
        assert!(!is_p_concentrated(&xs, 0.73).unwrap().0);

        assert!(generate(&kp, &GapCopulaSpec::default(), &[], 2, 0).is_err());
    }

    #[test]
    fn counterexample_examples() {
        let p = 5.0 / 6.0;
        let var = Builtin::Var { p }.build().unwrap();
        let k = ClosedSet::new(vec![(0.0, 0.25), (p, 1.0)]).unwrap();
        let (x, y) = counterexample(&var, &k, 0).unwrap().unwrap();
        assert!(var.choquet(&x) + var.choquet(&y) > var.choquet(&x.add(&y)) + GAP_TOL);

        let es = Builtin::Es { p: 0.9 }.build().unwrap();
        assert!(counterexample(&es, &ClosedSet::point(0.9).unwrap(), 0).unwrap().is_none());

        let h = fixtures::example_distortion();
        let (x, y) = counterexample(&h, &fixtures::example_k(), 0).unwrap().unwrap();
        assert!((h.choquet(&x) - 2.375).abs() < 1e-9);
        assert!((h.choquet(&y) - 2.375).abs() < 1e-9);
        assert!(h.choquet(&x.add(&y)) < 2.0 * 2.375 - GAP_TOL);
    }

    #[test]
    fn order_counterexample_example() {
        let f = MonoFn::identity();
        let g = v_map(&fixtures::k_fix());
        let (x, y) = order_counterexample(&f, &g).unwrap();
        assert!(is_g_comonotonic(&[x.clone(), y.clone()], &g));
        assert!(!is_comonotonic(&[x, y]));
        assert!(order_counterexample(&g, &f).is_none());
    }
}
