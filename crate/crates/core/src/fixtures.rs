//! Worked-example variables, weights and index sets used by the tests, the
//! `selftest` command and the acceptance suite.

use crate::distortion::DistortionFn;
use crate::indexsets::{ClosedSet, MonoFn};
use crate::randvar::{Piece, Plrv};
use crate::spectral::Spectrum;

const D_END: f64 = 0.85;
const C_END: f64 = 0.9;
const B_END: f64 = 0.95;

/// `0` on `[0,2/3]`, `9t − 4.5` on `(2/3,5/6)`, `3` on `[5/6,1]`.
pub fn paper_x() -> Plrv {
    Plrv::new(vec![
        Piece::constant(0.0, 2.0 / 3.0, 0.0),
        Piece::new(2.0 / 3.0, 5.0 / 6.0, 1.5, 3.0),
        Piece::constant(5.0 / 6.0, 1.0, 3.0),
    ])
    .expect("valid fixture")
}

/// `0` on `[0,2/3]`, `−9t + 7.5` on `(2/3,5/6)`, `3` on `[5/6,1]`.
pub fn paper_y() -> Plrv {
    Plrv::new(vec![
        Piece::constant(0.0, 2.0 / 3.0, 0.0),
        Piece::new(2.0 / 3.0, 5.0 / 6.0, 1.5, 0.0),
        Piece::constant(5.0 / 6.0, 1.0, 3.0),
    ])
    .expect("valid fixture")
}

/// The weight `g`: `0` on `[0,2/3]`, `9t − 4.5` on `(2/3,5/6]`, `3` on `(5/6,1]`.
pub fn example_weight() -> MonoFn {
    MonoFn::new(vec![
        Piece::constant(0.0, 2.0 / 3.0, 0.0),
        Piece::new(2.0 / 3.0, 5.0 / 6.0, 1.5, 3.0),
        Piece::constant(5.0 / 6.0, 1.0, 3.0),
    ])
    .expect("valid fixture")
}

/// Distortion whose conjugate has derivative [`example_weight`].
pub fn example_distortion() -> DistortionFn {
    DistortionFn::from_conjugate_density(&example_weight())
}

/// `K = [0,2/3] ∪ [5/6,1]`, the index set of the explicit example pair.
pub fn example_k() -> ClosedSet {
    ClosedSet::new(vec![(0.0, 2.0 / 3.0), (5.0 / 6.0, 1.0)]).expect("valid fixture")
}

/// Loss `X`: `0` on `D = [0,.85)`, then linear `0.5 → 3.5` over `C ∪ B ∪ A`.
pub fn x_fix() -> Plrv {
    Plrv::new(vec![
        Piece::constant(0.0, D_END, 0.0),
        Piece::new(D_END, C_END, 0.5, 1.5),
        Piece::new(C_END, B_END, 1.5, 2.5),
        Piece::new(B_END, 1.0, 2.5, 3.5),
    ])
    .expect("valid fixture")
}

fn cells(d: f64, c: f64, b: f64, a: f64) -> Plrv {
    Plrv::step(&[0.0, D_END, C_END, B_END, 1.0], &[d, c, b, a]).expect("valid fixture")
}

/// `0, 1, 2, 3` on `D, C, B, A`.
pub fn x1_fix() -> Plrv {
    cells(0.0, 1.0, 2.0, 3.0)
}

/// `0, 1, 3, 2` on `D, C, B, A`.
pub fn x2_fix() -> Plrv {
    cells(0.0, 1.0, 3.0, 2.0)
}

/// `0, 2, 1, 3` on `D, C, B, A`.
pub fn x3_fix() -> Plrv {
    cells(0.0, 2.0, 1.0, 3.0)
}

/// The spectrum of `(ES_0.9 + ES_0.95) / 2`: `0`, `5`, `15` on
/// `[0,.9]`, `(.9,.95]`, `(.95,1]`.
pub fn half_half_spectrum() -> Spectrum {
    Spectrum::new(
        MonoFn::new(vec![
            Piece::constant(0.0, 0.9, 0.0),
            Piece::constant(0.9, 0.95, 5.0),
            Piece::constant(0.95, 1.0, 15.0),
        ])
        .expect("valid fixture"),
    )
    .expect("valid fixture")
}

/// `K = {0.9, 0.95}`.
pub fn k_fix() -> ClosedSet {
    ClosedSet::points(&[0.9, 0.95]).expect("valid fixture")
}
