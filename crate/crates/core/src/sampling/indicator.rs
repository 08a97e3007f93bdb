use std::path::Path;

use serde::Serialize;

use super::regularization::{GapSolver, RegularizationConfig};
use crate::error::{Error, Result};
use crate::exec::map_range;
use crate::forward::{EmptyModel, GreenTraceBuilder, NtdGapMatrix};
use crate::geometry::{point_location, BlindScenario, Region};
use crate::potentials::{potential_row, LayerKind, SourceQuadrature};

/// Rectangular lattice of sampling points, row-major in y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingGrid {
    pub origin: [f64; 2],
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl SamplingGrid {
    pub fn new(origin: [f64; 2], spacing: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) || nx < 2 || ny < 2 || !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InputDomain("grid needs a positive spacing and at least 2×2 points".into()));
        }
        Ok(Self { origin, spacing, nx, ny })
    }

    /// Square lattice with `n` points per side over [xmin, xmax] × [ymin, ymin + xmax - xmin].
    pub fn square(xmin: f64, xmax: f64, ymin: f64, n: usize) -> Result<Self> {
        if !(xmax > xmin) || n < 2 {
            return Err(Error::InputDomain("grid needs xmax > xmin and n ≥ 2".into()));
        }
        Self::new([xmin, ymin], (xmax - xmin) / (n - 1) as f64, n, n)
    }

    /// `n` × `n` lattice over the bounding square of the outer curve.
    pub fn covering(blind: &BlindScenario, n: usize) -> Result<Self> {
        let (c, r) = (blind.outer.center, blind.outer.bounding_radius());
        Self::square(c[0] - r, c[0] + r, c[1] - r, n)
    }

    pub fn point(&self, ix: usize, iy: usize) -> [f64; 2] {
        [self.origin[0] + ix as f64 * self.spacing, self.origin[1] + iy as f64 * self.spacing]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Source time of Γ⁰ in the gap equation.
    pub s: f64,
    /// Offset of the pointwise indicator (Sg)(y, s + τ).
    pub tau: f64,
    pub reg: RegularizationConfig,
}

impl SweepConfig {
    /// s = T/4 and τ = (2·spacing)².
    pub fn defaults(horizon: f64, grid: &SamplingGrid, reg: RegularizationConfig) -> Self {
        Self { s: horizon / 4.0, tau: (2.0 * grid.spacing).powi(2), reg }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicatorPoint {
    pub ix: usize,
    pub iy: usize,
    pub y: [f64; 2],
    pub region: Region,
    /// ‖g^y‖ in the discrete L² norm of (∂Ω)_T.
    pub density_norm: f64,
    /// (S g^y)(y, s + τ)
    pub pointwise: f64,
    pub discrepancy: f64,
    /// ‖Γ⁰_{(y,s)}‖ on (∂Ω)_T, same norm as `density_norm`.
    pub rhs_norm: f64,
    pub near_boundary: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicatorField {
    pub grid: SamplingGrid,
    pub s: f64,
    pub tau: f64,
    pub alpha: f64,
    pub points: Vec<IndicatorPoint>,
}

impl IndicatorField {
    /// Points of lattice row `iy`, sorted by x.
    pub fn row(&self, iy: usize) -> Vec<&IndicatorPoint> {
        let mut out: Vec<_> = self.points.iter().filter(|p| p.iy == iy).collect();
        out.sort_by_key(|p| p.ix);
        out
    }

    pub fn at(&self, ix: usize, iy: usize) -> Option<&IndicatorPoint> {
        self.points.iter().find(|p| p.ix == ix && p.iy == iy)
    }

    /// CSV with columns x, y, ix, iy, region, density_norm, pointwise_value, discrepancy, rhs_norm, flags.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y", "ix", "iy", "region", "density_norm", "pointwise_value", "discrepancy", "rhs_norm", "flags"])?;
        for p in &self.points {
            let mut flags = Vec::new();
            if p.near_boundary {
                flags.push("near_boundary".to_string());
            }
            if let Some(f) = &p.failure {
                flags.push(format!("failed: {f}"));
            }
            w.write_record([
                format!("{:.17e}", p.y[0]),
                format!("{:.17e}", p.y[1]),
                p.ix.to_string(),
                p.iy.to_string(),
                p.region.as_str().to_string(),
                format!("{:.17e}", p.density_norm),
                format!("{:.17e}", p.pointwise),
                format!("{:.17e}", p.discrepancy),
                format!("{:.17e}", p.rhs_norm),
                flags.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solve the gap equation at every lattice point inside Ω.
///
/// Only the outer curve and the measured gap map are consumed. The α rule is
/// resolved once per sweep (quasi-optimality averaged over all points), so
/// indicator values at different points are comparable.
pub fn indicator_sweep(blind: &BlindScenario, gap: &NtdGapMatrix, grid: &SamplingGrid, cfg: &SweepConfig) -> Result<IndicatorField> {
    let scenario = blind.as_scenario();
    let model = EmptyModel::from_scenario(&scenario)?;
    let mesh = &model.outer;
    if gap.n_s != mesh.n_s() || gap.n_t() != mesh.n_t() || (gap.dt - mesh.dt()).abs() > 1e-12 * mesh.dt() {
        return Err(Error::MeshMismatch(format!(
            "gap map is {}×{} (dt {}), outer mesh is {}×{} (dt {})",
            gap.n_s,
            gap.n_t(),
            gap.dt,
            mesh.n_s(),
            mesh.n_t(),
            mesh.dt()
        )));
    }
    let horizon = mesh.time.horizon;
    if !(cfg.s > 0.0 && cfg.s < horizon) {
        return Err(Error::InputDomain(format!("s = {} must lie in (0, T)", cfg.s)));
    }
    if !(cfg.tau > 0.0 && cfg.s + cfg.tau <= horizon) {
        return Err(Error::InputDomain(format!("τ = {} must be positive with s + τ ≤ T", cfg.tau)));
    }
    let sites: Vec<(usize, usize, [f64; 2], Region)> = (0..grid.ny)
        .flat_map(|iy| (0..grid.nx).map(move |ix| (ix, iy)))
        .filter_map(|(ix, iy)| {
            let y = grid.point(ix, iy);
            let loc = point_location(&scenario, y);
            (loc.region == Region::InConductor && !loc.on_boundary).then_some((ix, iy, y, loc.region))
        })
        .collect();
    if sites.is_empty() {
        return Err(Error::Validation { path: "grid".into(), reason: "no sampling point lies inside Ω".into() });
    }

    let lambda_empty = model.ntd()?;
    let builder = GreenTraceBuilder { model: &model, lambda_empty: &lambda_empty };
    let solver = GapSolver::new(gap, Some(&mesh.l2_weights()))?;
    let traces = map_range(sites.len(), |p| {
        let t = builder.trace(sites[p].2, cfg.s)?;
        Ok::<_, Error>((solver.project(&t.trace)?, t.near_boundary))
    });
    let samples: Vec<_> = traces.iter().filter_map(|t| t.as_ref().ok().map(|(p, _)| p.clone())).collect();
    let alpha = solver.choose_alpha(&cfg.reg, &samples)?;

    let factored = model.factor()?;
    let quad = SourceQuadrature::new(mesh);
    let t_eval = cfg.s + cfg.tau;
    let points = map_range(sites.len(), |p| {
        let (ix, iy, y, region) = sites[p];
        let mut point = IndicatorPoint {
            ix,
            iy,
            y,
            region,
            density_norm: f64::NAN,
            pointwise: f64::NAN,
            discrepancy: f64::NAN,
            rhs_norm: f64::NAN,
            near_boundary: false,
            failure: None,
        };
        let result = traces[p].as_ref().map_err(|e| e.to_string()).and_then(|(proj, near)| {
            point.near_boundary = *near;
            point.rhs_norm = (proj.coeffs.norm_squared() + proj.orthogonal).sqrt();
            let sol = solver.solve_projected(proj, alpha).map_err(|e| e.to_string())?;
            let psi = factored.solve(std::slice::from_ref(&sol.g)).map_err(|e| e.to_string())?.remove(0);
            let row = potential_row(&quad, LayerKind::Single, y, [0.0, 0.0], t_eval);
            Ok((sol, row.iter().zip(&psi.values).map(|(a, b)| a * b).sum::<f64>()))
        });
        match result {
            Ok((sol, value)) => {
                point.density_norm = sol.norm;
                point.discrepancy = sol.discrepancy;
                point.pointwise = value;
            }
            Err(e) => point.failure = Some(e),
        }
        point
    });
    Ok(IndicatorField { grid: *grid, s: cfg.s, tau: cfg.tau, alpha, points })
}
