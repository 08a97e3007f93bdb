use thiserror::Error;

use crate::geometry::Region;

/// Errors raised by the simulator and the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input domain error: {0}")]
    InputDomain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("scenario validation failed at `{path}`: {reason}")]
    Validation { path: String, reason: String },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("singular step-0 block (reciprocal condition estimate {rcond:.3e})")]
    SingularStep { rcond: f64 },

    #[error("point {point:?} lies in region {region:?}, outside the conductor")]
    OutsideConductor { point: [f64; 2], region: Region },

    #[error("regularization error: {0}")]
    Regularization(String),

    #[error("quadrature did not converge: achieved error estimate {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("no boundary found: {0}")]
    NoBoundary(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InputDomain(format!("non-finite value in {what}")))
    }
}
