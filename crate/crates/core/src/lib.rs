//! Exact distortion riskmetrics and partial comonotonicity.
//!
//! Random variables live on the probability space `[0,1]` with Lebesgue
//! measure and are stored as finitely many linear pieces ([`Plrv`]). On top
//! of that representation the crate evaluates quantiles, Expected Shortfall,
//! signed Choquet integrals and spectral risk measures in closed form, and
//! decides the dependence questions that govern their additivity:
//!
//! - [`randvar`]: piecewise-linear random variables, quantiles, sums,
//!   increasing transforms and comonotonicity.
//! - [`indexsets`]: closed index sets `K`, increasing functions in the class
//!   `G`, the maps `V` / `PSI` and the preorder between index functions.
//! - [`distortion`]: bounded-variation distortion functions, Choquet
//!   integrals and the `K`-additivity decision.
//! - [`dependence`]: tail events, `p`-/`K`-concentration, `g`-comonotonicity,
//!   ordinal-sum generation and counterexample construction.
//! - [`spectral`]: spectral risk measures and Expected Shortfall mixtures.
//! - [`oracle`]: slow, independent evaluators used for cross-checks.

pub mod cli;
pub mod dependence;
pub mod distortion;
mod error;
pub mod fixtures;
pub mod indexsets;
pub mod oracle;
mod pl;
pub mod randvar;
pub mod spectral;

pub use dependence::{
    counterexample, generate, is_g_comonotonic, is_k_concentrated, is_p_concentrated,
    tail_event, witness_z, GapCopula, GapCopulaSpec, KConcentration, TailCertificate,
};
pub use distortion::{AccumulationFlag, Builtin, DistortionFn, Knot, Shape};
pub use error::{Error, Result};
pub use indexsets::{ClosedSet, IncreasingMap, MonoFn, Side};
pub use randvar::{Event, Piece, Plrv};
pub use spectral::{EsMixture, EsTerm, Spectrum};

/// Global comparison tolerance for probabilities and values.
pub const EPS: f64 = 1e-9;
