//! Crank–Nicolson finite differences on a polar annulus, used as an
//! independent reference for concentric-circle scenarios.
//!
//! The angular direction is diagonalised by FFT, leaving one tridiagonal
//! radial system per Fourier mode and time step. Boundary conditions use
//! ghost nodes: ∂_r u = λu at the inner circle (normal pointing into the
//! annulus) and ∂_r u = f at the outer circle.

use std::f64::consts::PI;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::SpaceTimeMesh;
use crate::potentials::BoundaryDensity;
use crate::quadrature::trig_cardinal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusGrid {
    pub r_inner: f64,
    pub r_outer: f64,
    /// Radial nodes including both boundaries.
    pub n_r: usize,
    pub n_theta: usize,
    pub n_t: usize,
    pub horizon: f64,
}

impl AnnulusGrid {
    pub fn new(r_inner: f64, r_outer: f64, n_r: usize, n_theta: usize, n_t: usize, horizon: f64) -> Result<Self> {
        let g = Self { r_inner, r_outer, n_r, n_theta, n_t, horizon };
        if !(r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()) {
            return Err(Error::InputDomain(format!("annulus needs 0 < R_inner < R_outer (got {r_inner}, {r_outer})")));
        }
        if n_r < 16 || n_theta < 16 || n_t == 0 || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InputDomain("annulus grid needs N_r, N_theta ≥ 16, N_t ≥ 1 and T > 0".into()));
        }
        Ok(g)
    }

    pub fn h(&self) -> f64 {
        (self.r_outer - self.r_inner) / (self.n_r - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_t as f64
    }

    pub fn radius(&self, j: usize) -> f64 {
        self.r_inner + j as f64 * self.h()
    }

    pub fn theta(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n_theta as f64
    }

    /// Trapezoid weights of ∫ · r dr over the radial nodes.
    fn radial_weights(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n_r)
            .map(|j| {
                let w = if j == 0 || j == self.n_r - 1 { 0.5 * h } else { h };
                w * self.radius(j)
            })
            .collect()
    }
}

/// Field values u[j][i] at radius j and angle i.
pub type Snapshot = Vec<Vec<f64>>;

#[derive(Debug, Clone)]
pub struct FdmSolution {
    pub grid: AnnulusGrid,
    pub lambda: f64,
    /// Outer-circle trace at every time level 0..=N_t, indexed [level][angle].
    pub outer_trace: Vec<Vec<f64>>,
    /// ∫ u dx at every time level.
    pub heat: Vec<f64>,
    /// ∫ u² dx at every time level.
    pub energy: Vec<f64>,
    /// ∮_{∂D} λu ds at every time level.
    pub inner_loss: Vec<f64>,
    /// (time level, field) pairs requested through `snapshot_every`.
    pub snapshots: Vec<(usize, Snapshot)>,
}

impl FdmSolution {
    /// Rows (r, θ, t, u) for every stored snapshot.
    pub fn write_snapshots_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "theta", "t", "u"])?;
        let g = &self.grid;
        for (level, field) in &self.snapshots {
            let t = *level as f64 * g.dt();
            for (j, row) in field.iter().enumerate() {
                for (i, u) in row.iter().enumerate() {
                    w.write_record([
                        format!("{:.17e}", g.radius(j)),
                        format!("{:.17e}", g.theta(i)),
                        format!("{t:.17e}"),
                        format!("{u:.17e}"),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Thomas algorithm for a tridiagonal system with real coefficients.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [Complex<f64>]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    if d.abs() < 1e-300 {
        return Err(Error::Assembly("singular tridiagonal system".into()));
    }
    c[0] = upper[0] / d;
    rhs[0] /= d;
    for j in 1..n {
        d = diag[j] - lower[j] * c[j - 1];
        if d.abs() < 1e-300 {
            return Err(Error::Assembly("singular tridiagonal system".into()));
        }
        if j < n - 1 {
            c[j] = upper[j] / d;
        }
        let prev = rhs[j - 1];
        rhs[j] = (rhs[j] - prev * lower[j]) / d;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= next * c[j];
    }
    Ok(())
}

/// Radial operator for angular wavenumber m, with the ghost nodes eliminated:
/// (L u)_j = lower_j u_{j-1} + diag_j u_j + upper_j u_{j+1}; the outer ghost
/// adds `flux_gain`·f at the last node.
struct RadialOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    flux_gain: f64,
}

fn radial_operator(grid: &AnnulusGrid, lambda: f64, m2: f64) -> RadialOperator {
    let (n, h) = (grid.n_r, grid.h());
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for j in 0..n {
        let r = grid.radius(j);
        let a = 1.0 / (h * h) - 1.0 / (2.0 * h * r);
        let c = 1.0 / (h * h) + 1.0 / (2.0 * h * r);
        diag[j] = -2.0 / (h * h) - m2 / (r * r);
        if j == 0 {
            // u_{-1} = u_1 - 2hλu_0
            upper[j] = a + c;
            diag[j] -= 2.0 * h * lambda * a;
        } else if j == n - 1 {
            // u_n = u_{n-2} + 2hf
            lower[j] = a + c;
        } else {
            lower[j] = a;
            upper[j] = c;
        }
    }
    let r = grid.r_outer;
    let flux_gain = 2.0 * h * (1.0 / (h * h) + 1.0 / (2.0 * h * r));
    RadialOperator { lower, diag, upper, flux_gain }
}

/// Crank–Nicolson solve with zero initial temperature. `flux(θ, t)` is sampled
/// at the half steps. A snapshot of the full field is stored every
/// `snapshot_every` levels (and at the final level) when requested.
pub fn fdm_solve(
    grid: &AnnulusGrid,
    lambda: f64,
    flux: &dyn Fn(f64, f64) -> f64,
    snapshot_every: Option<usize>,
) -> Result<FdmSolution> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InputDomain(format!("λ = {lambda} must be finite and non-negative")));
    }
    let (n_r, n_th, dt) = (grid.n_r, grid.n_theta, grid.dt());
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n_th);
    let inv = planner.plan_fft_inverse(n_th);
    let ops: Vec<RadialOperator> = (0..n_th)
        .map(|k| {
            let m = if k <= n_th / 2 { k as f64 } else { k as f64 - n_th as f64 };
            radial_operator(grid, lambda, m * m)
        })
        .collect();
    // implicit matrices I - dt/2 L
    let implicit: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = ops
        .iter()
        .map(|op| {
            let s = -0.5 * dt;
            (op.lower.iter().map(|x| s * x).collect(), op.diag.iter().map(|x| 1.0 + s * x).collect(), op.upper.iter().map(|x| s * x).collect())
        })
        .collect();

    // modes[k][j]
    let mut modes = vec![vec![Complex::new(0.0, 0.0); n_r]; n_th];
    let weights = grid.radial_weights();
    let dtheta = 2.0 * PI / n_th as f64;
    let mut out = FdmSolution {
        grid: *grid,
        lambda,
        outer_trace: Vec::with_capacity(grid.n_t + 1),
        heat: Vec::with_capacity(grid.n_t + 1),
        energy: Vec::with_capacity(grid.n_t + 1),
        inner_loss: Vec::with_capacity(grid.n_t + 1),
        snapshots: Vec::new(),
    };
    let record = |modes: &Vec<Vec<Complex<f64>>>, level: usize, out: &mut FdmSolution| {
        let mut field = vec![vec![0.0; n_th]; n_r];
        let mut buf = vec![Complex::new(0.0, 0.0); n_th];
        for (j, row) in field.iter_mut().enumerate() {
            for k in 0..n_th {
                buf[k] = modes[k][j];
            }
            inv.process(&mut buf);
            for (i, v) in row.iter_mut().enumerate() {
                *v = buf[i].re / n_th as f64;
            }
        }
        let heat: f64 = field.iter().zip(&weights).map(|(row, w)| w * dtheta * row.iter().sum::<f64>()).sum();
        let energy: f64 = field.iter().zip(&weights).map(|(row, w)| w * dtheta * row.iter().map(|u| u * u).sum::<f64>()).sum();
        out.heat.push(heat);
        out.energy.push(energy);
        out.inner_loss.push(lambda * grid.r_inner * dtheta * field[0].iter().sum::<f64>());
        out.outer_trace.push(field[n_r - 1].clone());
        let snap = snapshot_every.is_some_and(|e| e > 0 && (level.is_multiple_of(e) || level == grid.n_t));
        if snap {
            out.snapshots.push((level, field));
        }
    };
    record(&modes, 0, &mut out);

    let mut fbuf = vec![Complex::new(0.0, 0.0); n_th];
    let mut rhs = vec![Complex::new(0.0, 0.0); n_r];
    for step in 0..grid.n_t {
        let t_half = (step as f64 + 0.5) * dt;
        for (i, v) in fbuf.iter_mut().enumerate() {
            *v = Complex::new(flux(grid.theta(i), t_half), 0.0);
        }
        if fbuf.iter().any(|v| !v.re.is_finite()) {
            return Err(Error::InputDomain(format!("non-finite flux at t = {t_half}")));
        }
        fwd.process(&mut fbuf);
        for k in 0..n_th {
            let op = &ops[k];
            let u = &modes[k];
            for j in 0..n_r {
                let mut lu = op.diag[j] * u[j];
                if j > 0 {
                    lu += u[j - 1] * op.lower[j];
                }
                if j + 1 < n_r {
                    lu += u[j + 1] * op.upper[j];
                }
                rhs[j] = u[j] + lu * (0.5 * dt);
            }
            rhs[n_r - 1] += fbuf[k] * (dt * op.flux_gain);
            let (l, d, up) = &implicit[k];
            thomas(l, d, up, &mut rhs)?;
            modes[k].copy_from_slice(&rhs);
        }
        record(&modes, step + 1, &mut out);
    }
    Ok(out)
}

/// Outer trace resampled onto a BEM mesh of the outer circle: piecewise-constant
/// flux steps drive the solve, and the trace is read at the step midpoints.
///
/// The FDM time step must divide the BEM step an even number of times so
/// every midpoint is a time level, and N_theta must be a multiple of the
/// mesh's N_s so every node is an angular grid line.
pub fn fdm_ntd_trace(grid: &AnnulusGrid, lambda: f64, f: &BoundaryDensity, mesh: &SpaceTimeMesh) -> Result<BoundaryDensity> {
    f.check_on(mesh, "flux")?;
    let (n_s, n_t) = (mesh.n_s(), mesh.n_t());
    if (grid.horizon - mesh.time.horizon).abs() > 1e-12 * grid.horizon || !grid.n_t.is_multiple_of(2 * n_t) {
        return Err(Error::MeshMismatch(format!("FDM steps {} must be a multiple of 2×{n_t} over the same horizon", grid.n_t)));
    }
    if !grid.n_theta.is_multiple_of(n_s) {
        return Err(Error::MeshMismatch(format!("N_theta = {} must be a multiple of N_s = {n_s}", grid.n_theta)));
    }
    let sub = grid.n_t / n_t;
    let per = grid.n_theta / n_s;
    let dt = mesh.dt();
    // node i sits at angle 2πi/N_s; nodal values are interpolated trigonometrically
    let flux = |theta: f64, t: f64| {
        let k = ((t / dt) as usize).min(n_t - 1);
        (0..n_s).map(|i| f.get(i, k) * trig_cardinal(n_s, theta - mesh.params[i])).sum()
    };
    let sol = fdm_solve(grid, lambda, &flux, None)?;
    Ok(BoundaryDensity::from_fn(n_s, n_t, |i, k| sol.outer_trace[k * sub + sub / 2][i * per]))
}

/// Steady state u(r) = c/(λR_D) - c ln R_D + c ln r for f ≡ c (λ > 0).
pub fn annulus_steady_state(r: f64, r_inner: f64, lambda: f64, c: f64) -> f64 {
    c / (lambda * r_inner) - c * r_inner.ln() + c * r.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_flux_gives_zero_field() {
        let g = AnnulusGrid::new(0.4, 1.0, 16, 16, 10, 0.5).unwrap();
        let sol = fdm_solve(&g, 1.0, &|_, _| 0.0, Some(5)).unwrap();
        assert!(sol.outer_trace.iter().flatten().all(|&u| u == 0.0));
        assert_eq!(sol.snapshots.len(), 3);
    }

    #[test]
    fn radially_symmetric_flux_gives_symmetric_trace() {
        let g = AnnulusGrid::new(0.4, 1.0, 24, 32, 40, 1.0).unwrap();
        let sol = fdm_solve(&g, 1.0, &|_, t| 1.0 + t, None).unwrap();
        for row in &sol.outer_trace {
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            assert!(row.iter().all(|u| (u - mean).abs() <= 1e-8 * mean.abs().max(1e-30)));
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(AnnulusGrid::new(1.0, 0.4, 16, 16, 4, 1.0).is_err());
        assert!(AnnulusGrid::new(0.4, 1.0, 8, 16, 4, 1.0).is_err());
    }

    #[test]
    fn tridiagonal_solver_matches_dense() {
        let lower = [0.0, 1.0, -0.5, 0.3];
        let diag = [4.0, 5.0, 3.0, 2.0];
        let upper = [1.0, 0.2, 0.7, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b: Vec<Complex<f64>> = (0..4)
            .map(|j| {
                let mut s = diag[j] * x[j];
                if j > 0 {
                    s += lower[j] * x[j - 1];
                }
                if j < 3 {
                    s += upper[j] * x[j + 1];
                }
                Complex::new(s, -s)
            })
            .collect();
        thomas(&lower, &diag, &upper, &mut b).unwrap();
        for j in 0..4 {
            assert!((b[j].re - x[j]).abs() < 1e-14 && (b[j].im + x[j]).abs() < 1e-14);
        }
    }
}
