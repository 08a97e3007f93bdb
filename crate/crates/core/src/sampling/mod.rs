//! Linear sampling reconstruction of the cavity from the NtD gap map.
//!
//! For every sampling point y the gap equation F g = Γ⁰_{(y,s)} is solved
//! with Tikhonov regularization. ‖g^y‖ stays bounded for y inside the cavity
//! and blows up outside, so 1/‖g^y‖ is thresholded to recover ∂D. The
//! operators H and A are only used to check the factorization F = -AH.

mod contour;
mod factorization;
mod indicator;
mod noise;
mod regularization;

pub use contour::{extract_boundary, extract_boundary_with, extract_level_set, otsu, BoundaryEstimate, OtsuSplit, ThresholdScale, MIN_SEPARATION};
pub use factorization::{a_operator, factorization_residual, h_operator, operator_a, operator_h};
pub use indicator::{indicator_sweep, IndicatorField, IndicatorPoint, SamplingGrid, SweepConfig};
pub use noise::{add_noise, add_noise_to_map};
pub use regularization::{gap_solve, AlphaRule, GapSolution, GapSolver, Projected, RegularizationConfig};
