use std::f64::consts::PI;

use super::curve::ParametricCurve;
use crate::error::{Error, Result};

/// Uniform time grid on [0, T] with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub steps: usize,
    pub horizon: f64,
}

impl TimeGrid {
    pub fn new(steps: usize, horizon: f64) -> Result<Self> {
        if steps < 1 || !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InputDomain(format!("invalid time grid: N_t = {steps}, T = {horizon}")));
        }
        Ok(Self { steps, horizon })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Collocation time of step `k` (0-based): the midpoint of ((k)dt, (k+1)dt].
    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dt()
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.steps == other.steps && (self.horizon - other.horizon).abs() <= 1e-13 * self.horizon
    }
}

/// A closed curve sampled at equispaced parameters, times a uniform time grid.
#[derive(Debug, Clone)]
pub struct SpaceTimeMesh {
    pub curve: ParametricCurve,
    pub params: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    /// |x'(θ_i)|
    pub speeds: Vec<f64>,
    /// Trapezoid arc-length weights |x'(θ_i)|·2π/N_s.
    pub weights: Vec<f64>,
    pub time: TimeGrid,
}

pub fn build_mesh(curve: &ParametricCurve, n_s: usize, n_t: usize, horizon: f64) -> Result<SpaceTimeMesh> {
    if n_s < 8 {
        return Err(Error::InputDomain(format!("N_s must be at least 8, got {n_s}")));
    }
    if n_t < 4 {
        return Err(Error::InputDomain(format!("N_t must be at least 4, got {n_t}")));
    }
    let time = TimeGrid::new(n_t, horizon)?;
    let dtheta = 2.0 * PI / n_s as f64;
    let scale = curve.bounding_radius();
    let mut mesh = SpaceTimeMesh {
        curve: curve.clone(),
        params: Vec::with_capacity(n_s),
        points: Vec::with_capacity(n_s),
        normals: Vec::with_capacity(n_s),
        speeds: Vec::with_capacity(n_s),
        weights: Vec::with_capacity(n_s),
        time,
    };
    for i in 0..n_s {
        let theta = i as f64 * dtheta;
        let cp = curve.eval(theta);
        let sp = cp.speed();
        if !(sp > 1e-10 * scale) {
            return Err(Error::Geometry(format!("zero tangent at node {i} (θ = {theta:.4})")));
        }
        mesh.params.push(theta);
        mesh.points.push(cp.pos);
        mesh.normals.push(cp.normal());
        mesh.speeds.push(sp);
        mesh.weights.push(sp * dtheta);
    }
    Ok(mesh)
}

impl SpaceTimeMesh {
    pub fn n_s(&self) -> usize {
        self.points.len()
    }

    pub fn n_t(&self) -> usize {
        self.time.steps
    }

    pub fn dt(&self) -> f64 {
        self.time.dt()
    }

    /// Number of space-time unknowns N_s·N_t.
    pub fn len(&self) -> usize {
        self.n_s() * self.n_t()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest chord between neighbouring nodes.
    pub fn max_spacing(&self) -> f64 {
        let n = self.n_s();
        (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .fold(0.0, f64::max)
    }

    /// ½∮ x·ν ds from the node data; positive for counterclockwise curves.
    pub fn signed_area(&self) -> f64 {
        0.5 * (0..self.n_s())
            .map(|i| {
                let (p, n) = (self.points[i], self.normals[i]);
                (p[0] * n[0] + p[1] * n[1]) * self.weights[i]
            })
            .sum::<f64>()
    }

    /// Parameter spacing 2π/N_s.
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_s() as f64
    }

    /// Spatial quadrature weights times dt: the discrete L² weight of each unknown,
    /// laid out time-major like every density (index k·N_s + i).
    pub fn l2_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.n_t()).flat_map(|_| self.weights.iter().map(move |w| w * dt)).collect()
    }
}
