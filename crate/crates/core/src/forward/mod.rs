//! Forward solves, the representation formula, NtD maps and Γ⁰ traces.
//!
//! Two independent formulations are provided. The indirect one writes
//! u = V_Ω ψ + V_D φ and only needs single and adjoint double layers; it is
//! the production path. The direct one solves for the three boundary traces
//! (u₁, u₂, u₃) and includes the hypersingular operator on ∂D.

mod export;
mod field;
mod green;
mod model;
mod ntd;

pub use export::write_trace_csv;
pub use field::evaluate_field;
pub use green::{neumann_flux_of_source, GreenTrace, GreenTraceBuilder};
pub use model::{row_scaled, CavityModel, DirectOperators, EmptyModel, ForwardSolution, SolvePath, ROBIN_TOLERANCE};
pub use ntd::{NtdGapMatrix, NtdKind};

use crate::error::{Error, Result};
use crate::geometry::Scenario;
use crate::potentials::BoundaryDensity;

/// The direct three-trace system.
pub fn solve_direct(scenario: &Scenario, f: &BoundaryDensity) -> Result<ForwardSolution> {
    let model = CavityModel::from_scenario(scenario)?;
    let ops = model.direct_operators()?;
    model.solve_direct(&ops, f)
}

/// The indirect two-density system; cavity-free scenarios use the single-layer equation.
pub fn solve_indirect(scenario: &Scenario, f: &BoundaryDensity) -> Result<ForwardSolution> {
    if scenario.cavity.is_some() {
        CavityModel::from_scenario(scenario)?.solve_indirect(f)
    } else {
        EmptyModel::from_scenario(scenario)?.solve(f)
    }
}

/// Λ_D (with the cavity) or Λ_∅.
pub fn ntd_matrix(scenario: &Scenario, with_cavity: bool) -> Result<NtdGapMatrix> {
    if with_cavity {
        if scenario.cavity.is_none() {
            return Err(Error::InputDomain("scenario has no cavity".into()));
        }
        CavityModel::from_scenario(scenario)?.ntd_indirect()
    } else {
        EmptyModel::from_scenario(scenario)?.ntd()
    }
}

/// Γ⁰_{(y,s)} on ∂Ω for a cavity-free scenario.
pub fn green_neumann_trace(scenario_outer_only: &Scenario, y: [f64; 2], s: f64) -> Result<GreenTrace> {
    let model = EmptyModel::from_scenario(scenario_outer_only)?;
    let ntd = model.ntd()?;
    GreenTraceBuilder { model: &model, lambda_empty: &ntd }.trace(y, s)
}
