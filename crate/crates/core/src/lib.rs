//! Constructive vector balancing against convex bodies.
//!
//! Given vectors `v_1, …, v_n ∈ ℝ^m`, a shift `t ∈ Σ[−v_i, v_i]` and a convex
//! body `K` presented by a membership oracle, the routines here search for a
//! sign vector `χ ∈ {−1, 1}^n` with `Σ χ_i v_i − t ∈ K`:
//!
//! * [`walk`] samples colorings whose residual is `O(√log n)`-subgaussian,
//!   shaping every increment with a vector-Komlós matrix from [`komlos`].
//! * [`recenter`] moves the origin inside the parallelepiped
//!   `P = Σ[−v_i, v_i] − t` until the Gaussian barycenter of the remaining
//!   slice of `K` is small, descending onto faces of `P` as needed.
//! * [`coloring`] wraps both into full colorings for asymmetric bodies, either
//!   by symmetrizing around a recentered point or by the deterministic
//!   nearest-facet descent.
//! * [`subgauss`] estimates subgaussian constants from samples.
//!
//! The crate is `no_std` and only needs `alloc`. All randomness flows through
//! explicit `u64` seeds, so every estimator and pipeline is reproducible.

#![no_std]
// `!(x > 0.0)` style guards are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod body;
pub mod coloring;
pub mod komlos;
pub mod linalg;
pub mod recenter;
pub mod rng;
pub mod special;
pub mod subgauss;
pub mod walk;
pub mod zonotope;

pub use body::{
    barycenter, gauge_norm, gaussian_measure, restrict, symmetrize, BarycenterEstimate,
    BarycenterRequest, ConvexBody, Gauge, MeasureEstimate, MembershipOracle,
};
pub use coloring::{
    color_asymmetric, color_body_centric, AsymOutcome, AsymPipelineConfig, BodyCentricConfig,
    BodyCentricOutcome, DescentStep, SymmetricColoring, WalkStrategy,
};
pub use error::{Error, FailureCounts, Result};
pub use komlos::{psd_factor, solve_komlos, KomlosSolution};
pub use linalg::{Mat, Vect};
pub use recenter::{recenter, recenter_from, FailReason, RecenterParams, RecenterResult, RecenterStatus};
pub use subgauss::{
    coverage_crossing_scale, coverage_test, estimate_subgaussian, laplace_certificate,
    LaplaceCertificate, SubgaussConfig, SubgaussReport,
};
pub use walk::{sample_coloring, walk_params, WalkMode, WalkParams, WalkTrace};
pub use zonotope::{
    dual_basis, lift, reduce_to_independent, BoundaryPoint, FaceState, FractionalColoring,
    RayExit, VectorSystem,
};
