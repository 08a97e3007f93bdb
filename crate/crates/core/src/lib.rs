//! Space-time boundary elements for the 2-D heat equation with a Robin cavity,
//! linear-sampling reconstruction of the cavity, and the 3-D half-space
//! reflected kernel.

// `!(x > tol)` is how NaN gets rejected alongside small values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops read closer to the block-Toeplitz sums they implement
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exec;
pub mod fdm;
pub mod forward;
pub mod geometry;
pub mod halfspace;
pub mod heat_kernel;
pub mod potentials;
pub mod quadrature;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
