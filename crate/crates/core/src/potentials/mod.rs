//! Discrete heat layer potentials and the marching-on-in-time solver.
//!
//! Densities are piecewise constant on the time steps ((k)dt, (k+1)dt] and
//! collocated at the step midpoints, so every operator is block-Toeplitz:
//! lag m integrates the kernel exactly over τ ∈ [(m-½)dt, (m+½)dt] (lag 0
//! over [0, dt/2]). In space, rows use the trapezoid rule unless the
//! time-integrated kernel is sharper than about two node spacings, in which
//! case they use product integration against trigonometric cardinal
//! functions on a graded rule.

mod assemble;
mod density;
mod kernel;
mod mot;
mod operator;

pub use assemble::{
    assemble_adjoint_double_layer, assemble_double_layer, assemble_hypersingular, assemble_hypersingular_with,
    assemble_single_layer, evaluate_potential, lag_window, potential_row, HypersingularConfig, MIN_OFFSET,
};
pub use density::BoundaryDensity;
pub use kernel::{integrated_kernel, integrated_kernel_moment, LayerKind, SourceQuadrature, TargetPlacement};
pub use mot::{mot_solve, CausalSystem, FactoredSystem};
pub use operator::{apply, read_blocks, sidecar_path, write_blocks, CausalBlockOperator};
