//! Spherical means and local maximal operators on Heisenberg and Métivier
//! groups.
//!
//! The crate is organized around the group datum [`MetivierStructure`]:
//!
//! - [`group`] and [`skew`]: group law, dilations, H-type structures and the
//!   algebraic hypotheses on `J^θ` and `Λ^θ`;
//! - [`sphere`], [`field`], [`averaging`], [`lattice`]: quadrature, spherical
//!   means, maximal values and Lebesgue norms;
//! - [`counterexamples`]: the lower-bound families and the exponent fitter;
//! - [`geometry`]: phase functions, rank and curvature certificates;
//! - [`region`]: exact `(1/p, 1/q)` regions;
//! - [`harness`]: config parsing and the batch subcommands behind the `metlab` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod counterexamples;
pub mod error;
pub mod field;
pub mod geometry;
pub mod group;
pub mod harness;
pub mod lattice;
pub mod linalg;
pub mod region;
pub mod skew;
pub mod sphere;

pub use error::{Error, Result};
pub use group::{dilate, group_multiply, inverse, GroupPoint, MetivierStructure, PointRef};
