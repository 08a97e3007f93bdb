use nalgebra::DMatrix;

use super::density::BoundaryDensity;
use super::kernel::{LayerKind, SourceQuadrature, TargetPlacement};
use super::operator::CausalBlockOperator;
use crate::error::{Error, Result};
use crate::exec::map_range;
use crate::geometry::SpaceTimeMesh;

/// Normal offset for the same-curve hypersingular operator, in units of the
/// source node spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypersingularConfig {
    pub offset: f64,
    /// Treat the density as linear (extrapolated from the previous step) on
    /// the current half step instead of constant.
    pub linear_half_step: bool,
}

impl Default for HypersingularConfig {
    fn default() -> Self {
        Self { offset: 0.5, linear_half_step: true }
    }
}

/// Smallest admissible half-offset, in units of the node spacing.
pub const MIN_OFFSET: f64 = 0.05;

/// Range of τ = t - s covered by lag m under midpoint collocation.
pub fn lag_window(m: usize, dt: f64) -> (f64, f64) {
    (((m as f64) - 0.5).max(0.0) * dt, (m as f64 + 0.5) * dt)
}

fn same_nodes(a: &SpaceTimeMesh, b: &SpaceTimeMesh) -> bool {
    a.curve == b.curve && a.n_s() == b.n_s()
}

fn placements(quad: &SourceQuadrature, src: &SpaceTimeMesh, tgt: &SpaceTimeMesh) -> Vec<TargetPlacement> {
    if same_nodes(src, tgt) {
        (0..tgt.n_s()).map(|i| quad.at_node(i)).collect()
    } else {
        tgt.points
            .iter()
            .map(|&x| {
                let mut p = quad.place(x);
                if p.distance < 1e-12 * quad.h {
                    p.distance = 0.0;
                }
                p
            })
            .collect()
    }
}

fn assemble(kind: LayerKind, src: &SpaceTimeMesh, tgt: &SpaceTimeMesh, cfg: HypersingularConfig) -> Result<CausalBlockOperator> {
    if !src.time.same_as(&tgt.time) {
        return Err(Error::Assembly(format!(
            "time grids differ: {} steps on [0, {}] vs {} steps on [0, {}]",
            src.n_t(),
            src.time.horizon,
            tgt.n_t(),
            tgt.time.horizon
        )));
    }
    let quad = SourceQuadrature::new(src);
    let places = placements(&quad, src, tgt);
    let on_curve = kind == LayerKind::Hypersingular && places.iter().any(|p| p.distance == 0.0);
    let delta = cfg.offset * quad.h;
    if on_curve && !(0.5 * delta >= MIN_OFFSET * quad.h) {
        return Err(Error::Assembly(format!(
            "hypersingular offset {:.3e} is below the resolution floor {:.3e}",
            0.5 * delta,
            MIN_OFFSET * quad.h
        )));
    }
    let (n_t, n_tgt, n_src, dt) = (src.n_t(), tgt.n_s(), src.n_s(), src.dt());
    let corrected = on_curve && cfg.linear_half_step && n_t > 1;
    // rows n_t·n_tgt.. hold the lag-0 τ-moments when corrected
    let extra = if corrected { n_tgt } else { 0 };
    let rows = map_range(n_t * n_tgt + extra, |idx| {
        let moment = idx >= n_t * n_tgt;
        let (m, i) = if moment { (0, idx - n_t * n_tgt) } else { (idx / n_tgt, idx % n_tgt) };
        let (lo, hi) = lag_window(m, dt);
        let (x, nx, place) = (tgt.points[i], tgt.normals[i], places[i]);
        let mut row = vec![0.0; n_src];
        let add = |y: [f64; 2], p: &TargetPlacement, scale: f64, row: &mut Vec<f64>| {
            if moment {
                quad.accumulate_moment_row(kind, y, nx, p, lo, hi, scale, row);
            } else {
                quad.accumulate_row(kind, y, nx, p, lo, hi, scale, row);
            }
        };
        if kind == LayerKind::Hypersingular && place.distance == 0.0 {
            // W ≈ 2A(δ/2) - A(δ), A the two-sided average at offset δ
            for (off, scale) in [(0.5 * delta, 1.0), (delta, -0.5)] {
                for side in [1.0, -1.0] {
                    let y = [x[0] + side * off * nx[0], x[1] + side * off * nx[1]];
                    add(y, &TargetPlacement { distance: off, ..place }, scale, &mut row);
                }
            }
        } else {
            add(x, &place, 1.0, &mut row);
        }
        row
    });
    let mut blocks: Vec<DMatrix<f64>> = (0..n_t)
        .map(|m| DMatrix::from_fn(n_tgt, n_src, |i, j| rows[m * n_tgt + i][j]))
        .collect();
    if corrected {
        // φ(t_k - τ) ≈ φ_k - τ(φ_k - φ_{k-1})/dt on τ ∈ [0, dt/2]
        let moment = DMatrix::from_fn(n_tgt, n_src, |i, j| rows[n_t * n_tgt + i][j] / dt);
        blocks[0] -= &moment;
        blocks[1] += &moment;
    }
    CausalBlockOperator::new(kind, dt, blocks)
}

/// V: ∫∫ Γ φ.
pub fn assemble_single_layer(src: &SpaceTimeMesh, tgt: &SpaceTimeMesh) -> Result<CausalBlockOperator> {
    assemble(LayerKind::Single, src, tgt, HypersingularConfig::default())
}

/// K: ∫∫ ∂Γ/∂ν(y) φ.
pub fn assemble_double_layer(src: &SpaceTimeMesh, tgt: &SpaceTimeMesh) -> Result<CausalBlockOperator> {
    assemble(LayerKind::Double, src, tgt, HypersingularConfig::default())
}

/// N: ∫∫ ∂Γ/∂ν(x) φ.
pub fn assemble_adjoint_double_layer(src: &SpaceTimeMesh, tgt: &SpaceTimeMesh) -> Result<CausalBlockOperator> {
    assemble(LayerKind::AdjointDouble, src, tgt, HypersingularConfig::default())
}

/// W: -∂/∂ν(x) ∫∫ ∂Γ/∂ν(y) φ.
pub fn assemble_hypersingular(src: &SpaceTimeMesh, tgt: &SpaceTimeMesh) -> Result<CausalBlockOperator> {
    assemble(LayerKind::Hypersingular, src, tgt, HypersingularConfig::default())
}

pub fn assemble_hypersingular_with(
    src: &SpaceTimeMesh,
    tgt: &SpaceTimeMesh,
    cfg: HypersingularConfig,
) -> Result<CausalBlockOperator> {
    assemble(LayerKind::Hypersingular, src, tgt, cfg)
}

/// Weights w such that Σ w·φ is the potential of `kind` at (x, t), with
/// target normal `nx` (ignored by kernels that do not use it). Laid out
/// like a density on `quad.mesh`.
pub fn potential_row(quad: &SourceQuadrature, kind: LayerKind, x: [f64; 2], nx: [f64; 2], t: f64) -> Vec<f64> {
    let mesh = quad.mesh;
    let (n_s, n_t, dt) = (mesh.n_s(), mesh.n_t(), mesh.dt());
    let place = quad.place(x);
    let mut out = vec![0.0; n_s * n_t];
    for l in 0..n_t {
        let hi = t - l as f64 * dt;
        if hi <= 0.0 {
            break;
        }
        let lo = (t - (l + 1) as f64 * dt).max(0.0);
        quad.accumulate_row(kind, x, nx, &place, lo, hi, 1.0, &mut out[l * n_s..(l + 1) * n_s]);
    }
    out
}

/// Evaluate a layer potential of `density` at arbitrary space-time points.
pub fn evaluate_potential(
    kind: LayerKind,
    src: &SpaceTimeMesh,
    density: &BoundaryDensity,
    points: &[([f64; 2], f64)],
    normals: Option<&[[f64; 2]]>,
) -> Result<Vec<f64>> {
    density.check_on(src, "density")?;
    if let Some(n) = normals {
        if n.len() != points.len() {
            return Err(Error::InputDomain("one normal per point required".into()));
        }
    }
    let quad = SourceQuadrature::new(src);
    Ok(map_range(points.len(), |p| {
        let (x, t) = points[p];
        let nx = normals.map_or([0.0, 0.0], |n| n[p]);
        let row = potential_row(&quad, kind, x, nx, t);
        row.iter().zip(&density.values).map(|(a, b)| a * b).sum()
    }))
}
