//! Spectral risk measures `ρ_g(X) = ∫_0^1 g(t) Q_X(t) dt` and their
//! decomposition into Expected Shortfall mixtures.

use serde::{Deserialize, Serialize};

use crate::dependence::is_g_comonotonic;
use crate::distortion::{DistortionFn, Shape};
use crate::error::{domain, Result};
use crate::indexsets::{lc_normalize, MonoFn};
use crate::pl::{self, merge_breaks, refine, Piece};
use crate::randvar::Plrv;

const MASS_TOL: f64 = 1e-9;

/// A risk spectrum: increasing, nonnegative, integrating to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MonoFn", into = "MonoFn")]
pub struct Spectrum {
    g: MonoFn,
}

impl TryFrom<MonoFn> for Spectrum {
    type Error = crate::Error;
    fn try_from(g: MonoFn) -> Result<Self> {
        Spectrum::new(g)
    }
}

impl From<Spectrum> for MonoFn {
    fn from(s: Spectrum) -> Self {
        s.g
    }
}

impl Spectrum {
    pub fn new(g: MonoFn) -> Result<Self> {
        // round trip through the value map puts the function in LC form
        let g = lc_normalize(&g.to_map())?;
        let low = g.pieces()[0].v0;
        if low < -MASS_TOL {
            return Err(domain(format!("spectrum must be nonnegative, starts at {low}")));
        }
        let mass = g.integral(0.0, 1.0);
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(domain(format!("spectrum must integrate to 1, got {mass}")));
        }
        Ok(Self { g })
    }

    /// The spectrum of `ES_p`, `p ∈ [0,1)`.
    pub fn es(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(domain(format!("ES spectrum needs p in [0,1), got {p}")));
        }
        if p == 0.0 {
            return Ok(Self::uniform());
        }
        Self::new(MonoFn::step(p, 1.0 / (1.0 - p))?)
    }

    /// `g ≡ 1`, the expectation.
    pub fn uniform() -> Self {
        Self { g: MonoFn::constant(1.0) }
    }

    pub fn g(&self) -> &MonoFn {
        &self.g
    }

    /// `ρ_g(X)`, exact.
    pub fn rho(&self, x: &Plrv) -> f64 {
        let q = x.quantile_fn();
        let cuts = merge_breaks(
            std::iter::once(0.0)
                .chain(q.pieces().iter().map(|p| p.t1))
                .chain(self.g.pieces().iter().map(|p| p.t1)),
        );
        let a = refine(q.pieces(), &cuts);
        let b = refine(self.g.pieces(), &cuts);
        a.iter()
            .zip(&b)
            .map(|(p, w)| pl::product_integral(p.len(), p.v0, p.v1, w.v0, w.v1))
            .sum()
    }

    /// Whether `ρ_g` is additive on `xs`, decided as `g`-comonotonicity.
    pub fn is_additive_on(&self, xs: &[Plrv]) -> bool {
        is_g_comonotonic(xs, &self.g)
    }

    /// ES-mixture form of a step spectrum; `None` if any piece is sloped.
    ///
    /// For `g = γ_0` on `[0, α_1]` and `γ_i` on `(α_i, α_{i+1}]`, the weights
    /// are `λ_0 = γ_0` and `λ_i = (γ_i − γ_{i−1})(1 − α_i)`.
    pub fn es_mixture(&self) -> Option<EsMixture> {
        let pieces = self.g.pieces();
        if pieces.iter().any(|p| !p.is_flat()) {
            return None;
        }
        let lambda0 = pieces[0].v0;
        let terms = pieces
            .windows(2)
            .map(|w| EsTerm { alpha: w[1].t0, lambda: (w[1].v0 - w[0].v1) * (1.0 - w[1].t0) })
            .collect();
        Some(EsMixture { lambda0, terms })
    }

    /// The distortion `h` with `I_h = ρ_g`.
    pub fn to_distortion(&self) -> DistortionFn {
        DistortionFn::from_conjugate_density(&self.g)
    }

    /// Recover the spectrum from a distortion whose conjugate is a continuous
    /// integral of an increasing step or linear density; `None` otherwise.
    pub fn from_distortion(h: &DistortionFn) -> Option<Spectrum> {
        if !h.is_continuous() {
            return None;
        }
        let hc = h.conjugate();
        let mut pieces = Vec::with_capacity(hc.shapes().len());
        for (j, shape) in hc.shapes().iter().enumerate() {
            let (k0, k1) = (hc.knots()[j], hc.knots()[j + 1]);
            let w = k1.t - k0.t;
            let d = k1.left - k0.right;
            let (s0, s1) = match *shape {
                Shape::Linear => (d / w, d / w),
                Shape::Quadratic { c } => ((d + c) / w, (d - c) / w),
                Shape::Power { .. } => return None,
            };
            pieces.push(Piece::new(k0.t, k1.t, s0, s1));
        }
        MonoFn::new(pieces).ok().and_then(|g| Spectrum::new(g).ok())
    }
}

/// `ρ_g(X)`, exact.
pub fn rho(g: &Spectrum, x: &Plrv) -> f64 {
    g.rho(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsTerm {
    pub alpha: f64,
    pub lambda: f64,
}

/// `λ_0 E + Σ λ_i ES_{α_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsMixture {
    pub lambda0: f64,
    pub terms: Vec<EsTerm>,
}

impl EsMixture {
    pub fn evaluate(&self, x: &Plrv) -> Result<f64> {
        let mut total = self.lambda0 * x.mean();
        for t in &self.terms {
            total += t.lambda * x.es(t.alpha)?;
        }
        Ok(total)
    }

    /// The step spectrum this mixture represents.
    pub fn to_spectrum(&self) -> Result<Spectrum> {
        let mut pieces = Vec::with_capacity(self.terms.len() + 1);
        let mut level = self.lambda0;
        let mut start = 0.0;
        for t in &self.terms {
            if !(t.alpha > start && t.alpha < 1.0) {
                return Err(domain("mixture levels must be strictly increasing in (0,1)"));
            }
            pieces.push(Piece::constant(start, t.alpha, level));
            level += t.lambda / (1.0 - t.alpha);
            start = t.alpha;
        }
        pieces.push(Piece::constant(start, 1.0, level));
        Spectrum::new(MonoFn::new(pieces)?)
    }
}
