//! Solvers for the mean-field vortex-density limit of thin superconducting
//! films.
//!
//! A film occupies `{(x, z) : x ∈ ω, f(x) < z < g(x)}` over a planar
//! footprint `ω`. In the mean-field limit the vortex density is governed by
//! a weighted two-obstacle problem on `ω` with thickness `a = g - f` and an
//! effective perpendicular field `F` induced by the applied field and the
//! shape of the midsurface.
//!
//! * [`grid`] and [`geometry`] discretize the footprint and compute `a`, `F`
//!   and a vector potential `B` with `curl B = F`.
//! * [`obstacle`] solves the obstacle problem by projected SOR and derives
//!   coincidence sets, vorticity, current and energies.
//! * [`hodge`] splits planar fields orthogonally with respect to
//!   `⟨v, w⟩ = Σ a v·w h²`.
//! * [`recovery`] builds point-vortex configurations and compares their
//!   Ginzburg-Landau energy with the mean-field energy.
//! * [`analysis`] holds closed-form and radial reference solutions.
//! * [`export`] writes CSV fields and JSON summaries.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod export;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod hodge;
pub mod linsolve;
pub mod obstacle;
pub mod recovery;
pub mod staggered;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/domains.md")]
    pub mod domains {}
    #[doc = include_str!("../../../book/src/films.md")]
    pub mod films {}
    #[doc = include_str!("../../../book/src/obstacle.md")]
    pub mod obstacle {}
    #[doc = include_str!("../../../book/src/reference.md")]
    pub mod reference {}
    #[doc = include_str!("../../../book/src/hodge.md")]
    pub mod hodge {}
    #[doc = include_str!("../../../book/src/recovery.md")]
    pub mod recovery {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
