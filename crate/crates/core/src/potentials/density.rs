use nalgebra::DVector;

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::SpaceTimeMesh;

/// Scalar field on a space-time mesh, piecewise constant in time.
/// `values[k * n_s + i]` belongs to node i and time step k; values before
/// t = 0 are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDensity {
    pub n_s: usize,
    pub n_t: usize,
    pub values: Vec<f64>,
}

impl BoundaryDensity {
    pub fn zeros(n_s: usize, n_t: usize) -> Self {
        Self { n_s, n_t, values: vec![0.0; n_s * n_t] }
    }

    pub fn zeros_on(mesh: &SpaceTimeMesh) -> Self {
        Self::zeros(mesh.n_s(), mesh.n_t())
    }

    pub fn from_values(n_s: usize, n_t: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_s * n_t {
            return Err(Error::MeshMismatch(format!("{} values for a {n_s}×{n_t} mesh", values.len())));
        }
        ensure_finite(&values, "density")?;
        Ok(Self { n_s, n_t, values })
    }

    /// Sample `f(node, step)` on every space-time index.
    pub fn from_fn(n_s: usize, n_t: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n_s * n_t);
        for k in 0..n_t {
            for i in 0..n_s {
                values.push(f(i, k));
            }
        }
        Self { n_s, n_t, values }
    }

    pub fn get(&self, node: usize, step: usize) -> f64 {
        self.values[step * self.n_s + node]
    }

    pub fn step(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_s..(k + 1) * self.n_s]
    }

    pub fn check_on(&self, mesh: &SpaceTimeMesh, what: &str) -> Result<()> {
        if self.n_s != mesh.n_s() || self.n_t != mesh.n_t() {
            return Err(Error::MeshMismatch(format!(
                "{what} is {}×{}, mesh is {}×{}",
                self.n_s,
                self.n_t,
                mesh.n_s(),
                mesh.n_t()
            )));
        }
        Ok(())
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }

    /// Discrete L² norm with arc-length × time weights.
    pub fn l2_norm(&self, mesh: &SpaceTimeMesh) -> f64 {
        let dt = mesh.dt();
        self.values
            .iter()
            .enumerate()
            .map(|(idx, v)| v * v * mesh.weights[idx % self.n_s] * dt)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        if self.n_s != other.n_s || self.n_t != other.n_t {
            return Err(Error::MeshMismatch("densities differ in shape".into()));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    /// Time reversal: step k ↦ step N_t - 1 - k.
    pub fn time_reversed(&self) -> Self {
        Self::from_fn(self.n_s, self.n_t, |i, k| self.get(i, self.n_t - 1 - k))
    }
}
