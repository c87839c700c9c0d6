//! Numerical toolkit for graded nilpotent Lie groups.
//!
//! Group elements are stored in exponential coordinates of the first kind, so
//! the group law is the truncated Baker–Campbell–Hausdorff series and inversion
//! is negation. On top of the group layer the crate provides homogeneous gauges
//! and ball verifiers, the Heisenberg ball builder, planar constructions for the
//! (2,2) grading, piecewise-constant sub-Finsler controls and sphere regularity
//! estimators.
//!
//! The crate is `no_std` with `alloc`. Sampling routines take an explicit index
//! range so callers can split work across threads; every sample draws from its
//! own counter-based RNG stream, which makes merged results independent of how
//! the range was split.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod control;
mod error;
pub mod heisenberg;
pub mod linalg;
mod lbfgs;
pub mod norms;
pub mod plane;
pub mod sampling;
pub mod sphere;

pub use algebra::{BracketEntry, GradedAlgebraSpec, GradedGroup, GroupPoint, Weight};
pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
