use super::model::EmptyModel;
use super::ntd::NtdGapMatrix;
use crate::error::{Error, Result};
use crate::geometry::SpaceTimeMesh;
use crate::heat_kernel::{gaussian, grad_time_integral};
use crate::potentials::BoundaryDensity;

/// Γ⁰_{(y,s)} on the outer boundary, with accuracy flags.
#[derive(Debug, Clone)]
pub struct GreenTrace {
    pub trace: BoundaryDensity,
    /// Corrector flux -∂_νΓ_{(y,s)} (step averages).
    pub flux: BoundaryDensity,
    /// y is within two node spacings of ∂Ω.
    pub near_boundary: bool,
    /// y lies outside Ω.
    pub outside: bool,
}

/// Step averages of -∂_ν Γ(·, t; y, s) on the mesh.
pub fn neumann_flux_of_source(mesh: &SpaceTimeMesh, y: [f64; 2], s: f64) -> BoundaryDensity {
    let dt = mesh.dt();
    BoundaryDensity::from_fn(mesh.n_s(), mesh.n_t(), |i, k| {
        let hi = (k + 1) as f64 * dt - s;
        if hi <= 0.0 {
            return 0.0;
        }
        let lo = (k as f64 * dt - s).max(0.0);
        let (x, nu) = (mesh.points[i], mesh.normals[i]);
        let d = [x[0] - y[0], x[1] - y[1]];
        (nu[0] * d[0] + nu[1] * d[1]) * grad_time_integral(d[0] * d[0] + d[1] * d[1], lo, hi) / dt
    })
}

/// Builds Γ⁰ traces for many (y, s) against one cavity-free model.
pub struct GreenTraceBuilder<'a> {
    pub model: &'a EmptyModel,
    pub lambda_empty: &'a NtdGapMatrix,
}

impl GreenTraceBuilder<'_> {
    pub fn trace(&self, y: [f64; 2], s: f64) -> Result<GreenTrace> {
        let mesh = &self.model.outer;
        if !(y.iter().all(|v| v.is_finite()) && s.is_finite()) {
            return Err(Error::InputDomain("sampling point must be finite".into()));
        }
        if !(s > 0.0 && s < mesh.time.horizon) {
            return Err(Error::InputDomain(format!("s = {s} must lie in (0, T)")));
        }
        let signed = mesh.curve.signed_distance(y);
        let flux = neumann_flux_of_source(mesh, y, s);
        let mut trace = self.lambda_empty.apply(&flux)?;
        for k in 0..mesh.n_t() {
            let lag = mesh.time.midpoint(k) - s;
            for i in 0..mesh.n_s() {
                let x = mesh.points[i];
                let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                trace.values[k * mesh.n_s() + i] += gaussian(r2, lag, 2);
            }
        }
        Ok(GreenTrace { trace, flux, near_boundary: signed.abs() < 2.0 * mesh.max_spacing(), outside: signed > 0.0 })
    }
}
