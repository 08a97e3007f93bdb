use super::model::ForwardSolution;
use crate::error::{Error, Result};
use crate::geometry::{point_location, Region, Scenario};
use crate::potentials::{evaluate_potential, LayerKind};

/// u(x, t) from the boundary traces by Green's representation
/// u = -V_D[u₁] + K_D[u₂] + V_Ω[f] - K_Ω[u₃].
pub fn evaluate_field(scenario: &Scenario, solution: &ForwardSolution, points: &[([f64; 2], f64)]) -> Result<Vec<f64>> {
    for &(x, t) in points {
        let loc = point_location(scenario, x);
        if loc.region != Region::InConductor {
            return Err(Error::OutsideConductor { point: x, region: loc.region });
        }
        if !(t >= 0.0 && t <= scenario.horizon * (1.0 + 1e-12)) {
            return Err(Error::InputDomain(format!("time {t} outside [0, T]")));
        }
    }
    let outer = scenario.outer_mesh()?;
    let mut total = evaluate_potential(LayerKind::Single, &outer, &solution.flux, points, None)?;
    let k_out = evaluate_potential(LayerKind::Double, &outer, &solution.u3, points, None)?;
    for (u, k) in total.iter_mut().zip(&k_out) {
        *u -= k;
    }
    if let Some(inner) = scenario.cavity_mesh()? {
        if solution.u1.n_s > 0 {
            let v = evaluate_potential(LayerKind::Single, &inner, &solution.u1, points, None)?;
            let k = evaluate_potential(LayerKind::Double, &inner, &solution.u2, points, None)?;
            for ((u, a), b) in total.iter_mut().zip(&v).zip(&k) {
                *u += b - a;
            }
        }
    }
    Ok(total)
}
