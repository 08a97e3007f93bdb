//! Time-integrated 2-D layer kernels and the spatial quadrature of one row.

use serde::Serialize;

use crate::geometry::SpaceTimeMesh;
use crate::heat_kernel::{grad_time_integral, hessian_time_integral, single_time_integral, single_time_moment};
use crate::quadrature::{trig_cardinal, GradedPeriodicRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    /// Γ
    Single,
    /// ∂Γ/∂ν(y)
    Double,
    /// ∂Γ/∂ν(x)
    AdjointDouble,
    /// -∂²Γ/∂ν(x)∂ν(y)
    Hypersingular,
    /// Anything assembled by hand.
    Custom,
}

impl LayerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LayerKind::Single => "single_layer",
            LayerKind::Double => "double_layer",
            LayerKind::AdjointDouble => "adjoint_double_layer",
            LayerKind::Hypersingular => "hypersingular",
            LayerKind::Custom => "custom",
        }
    }
}

/// ∫_{lo}^{hi} k(x, y, τ) dτ for the chosen layer kernel.
#[inline]
pub fn integrated_kernel(kind: LayerKind, x: [f64; 2], nx: [f64; 2], y: [f64; 2], ny: [f64; 2], lo: f64, hi: f64) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r2 = d[0] * d[0] + d[1] * d[1];
    match kind {
        LayerKind::Single => single_time_integral(r2, lo, hi),
        LayerKind::Double => {
            let g = grad_time_integral(r2, lo, hi);
            if g == 0.0 {
                0.0
            } else {
                (ny[0] * d[0] + ny[1] * d[1]) * g
            }
        }
        LayerKind::AdjointDouble => {
            let g = grad_time_integral(r2, lo, hi);
            if g == 0.0 {
                0.0
            } else {
                -(nx[0] * d[0] + nx[1] * d[1]) * g
            }
        }
        LayerKind::Hypersingular => {
            let g1 = grad_time_integral(r2, lo, hi);
            if g1 == 0.0 {
                return 0.0;
            }
            let g2 = hessian_time_integral(r2, lo, hi);
            let nn = nx[0] * ny[0] + nx[1] * ny[1];
            let a = nx[0] * d[0] + nx[1] * d[1];
            let b = ny[0] * d[0] + ny[1] * d[1];
            -(nn * g1 - a * b * g2)
        }
        LayerKind::Custom => 0.0,
    }
}

/// ∫_{lo}^{hi} τ·k(x, y, τ) dτ for the chosen layer kernel.
#[inline]
pub fn integrated_kernel_moment(
    kind: LayerKind,
    x: [f64; 2],
    nx: [f64; 2],
    y: [f64; 2],
    ny: [f64; 2],
    lo: f64,
    hi: f64,
) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1]];
    let r2 = d[0] * d[0] + d[1] * d[1];
    // τ/(2τ) and τ/(4τ²) reduce the moments to the plain integrals one order down
    match kind {
        LayerKind::Single => single_time_moment(r2, lo, hi),
        LayerKind::Double => (ny[0] * d[0] + ny[1] * d[1]) * 0.5 * single_time_integral(r2, lo, hi),
        LayerKind::AdjointDouble => -(nx[0] * d[0] + nx[1] * d[1]) * 0.5 * single_time_integral(r2, lo, hi),
        LayerKind::Hypersingular => {
            let s = single_time_integral(r2, lo, hi);
            if s == 0.0 {
                return 0.0;
            }
            let g1 = grad_time_integral(r2, lo, hi);
            let nn = nx[0] * ny[0] + nx[1] * ny[1];
            let a = nx[0] * d[0] + nx[1] * d[1];
            let b = ny[0] * d[0] + ny[1] * d[1];
            -0.5 * (nn * s - a * b * g1)
        }
        LayerKind::Custom => 0.0,
    }
}

#[derive(Debug, Clone, Copy)]
struct FinePoint {
    pos: [f64; 2],
    normal: [f64; 2],
    /// |y'| times the rule weight.
    jw: f64,
}

/// Where a row's target sits relative to the source curve.
#[derive(Debug, Clone, Copy)]
pub struct TargetPlacement {
    /// Parameter of the nearest source-curve point.
    pub center: f64,
    /// Distance to the source curve.
    pub distance: f64,
    /// Set when `center` is exactly a source node.
    pub node: Option<usize>,
}

/// Spatial quadrature against one source mesh: trapezoid for smooth rows,
/// product integration with trigonometric cardinal functions for nearly
/// singular ones.
pub struct SourceQuadrature<'a> {
    pub mesh: &'a SpaceTimeMesh,
    rule: GradedPeriodicRule,
    /// Largest chord between neighbouring source nodes.
    pub h: f64,
    /// Fine points for every node-centred row, `node * q + k`.
    node_fine: Vec<FinePoint>,
    /// L(σ_k - jΔθ) at `j * q + k`.
    cardinals: Vec<f64>,
}

impl<'a> SourceQuadrature<'a> {
    pub fn new(mesh: &'a SpaceTimeMesh) -> Self {
        let n = mesh.n_s();
        let dtheta = mesh.dtheta();
        let rule = GradedPeriodicRule::new(dtheta);
        let q = rule.points.len();
        let mut node_fine = Vec::with_capacity(n * q);
        for i in 0..n {
            for &(s, w) in &rule.points {
                let cp = mesh.curve.eval(mesh.params[i] + s);
                node_fine.push(FinePoint { pos: cp.pos, normal: cp.normal(), jw: cp.speed() * w });
            }
        }
        let mut cardinals = Vec::with_capacity(n * q);
        for j in 0..n {
            for &(s, _) in &rule.points {
                cardinals.push(trig_cardinal(n, s - j as f64 * dtheta));
            }
        }
        Self { mesh, rule, h: mesh.max_spacing(), node_fine, cardinals }
    }

    /// Placement of an arbitrary point.
    pub fn place(&self, x: [f64; 2]) -> TargetPlacement {
        let (center, distance) = self.mesh.curve.nearest(x);
        TargetPlacement { center, distance, node: None }
    }

    /// Placement of a point on the source curve at node `i`.
    pub fn at_node(&self, i: usize) -> TargetPlacement {
        TargetPlacement { center: self.mesh.params[i], distance: 0.0, node: Some(i) }
    }

    /// Whether the time-integrated kernel over [lo, hi] is too sharp for the trapezoid rule.
    pub fn is_near(&self, placement: &TargetPlacement, lo: f64) -> bool {
        placement.distance * placement.distance + lo < 4.0 * self.h * self.h
    }

    /// Add `scale` times the row of weights for target `x` into `out` (length N_s).
    #[allow(clippy::too_many_arguments)]
    pub fn accumulate_row(
        &self,
        kind: LayerKind,
        x: [f64; 2],
        nx: [f64; 2],
        placement: &TargetPlacement,
        lo: f64,
        hi: f64,
        scale: f64,
        out: &mut [f64],
    ) {
        let near = self.is_near(placement, lo);
        self.accumulate_with(|y, ny| integrated_kernel(kind, x, nx, y, ny, lo, hi), near, placement, scale, out);
    }

    /// As [`Self::accumulate_row`] with the τ-weighted kernel.
    #[allow(clippy::too_many_arguments)]
    pub fn accumulate_moment_row(
        &self,
        kind: LayerKind,
        x: [f64; 2],
        nx: [f64; 2],
        placement: &TargetPlacement,
        lo: f64,
        hi: f64,
        scale: f64,
        out: &mut [f64],
    ) {
        let near = self.is_near(placement, lo);
        self.accumulate_with(|y, ny| integrated_kernel_moment(kind, x, nx, y, ny, lo, hi), near, placement, scale, out);
    }

    fn accumulate_with(
        &self,
        kernel: impl Fn([f64; 2], [f64; 2]) -> f64,
        near: bool,
        placement: &TargetPlacement,
        scale: f64,
        out: &mut [f64],
    ) {
        let mesh = self.mesh;
        let n = mesh.n_s();
        if !near {
            for j in 0..n {
                out[j] += scale * mesh.weights[j] * kernel(mesh.points[j], mesh.normals[j]);
            }
            return;
        }
        let q = self.rule.points.len();
        match placement.node {
            Some(i) => {
                let fine = &self.node_fine[i * q..(i + 1) * q];
                let kq: Vec<f64> = fine.iter().map(|p| p.jw * kernel(p.pos, p.normal)).collect();
                for (j, o) in out.iter_mut().enumerate() {
                    let shift = (j + n - i) % n;
                    let card = &self.cardinals[shift * q..(shift + 1) * q];
                    *o += scale * kq.iter().zip(card).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            None => {
                let dtheta = mesh.dtheta();
                for &(s, w) in &self.rule.points {
                    let theta = placement.center + s;
                    let cp = mesh.curve.eval(theta);
                    let k = cp.speed() * w * kernel(cp.pos, cp.normal());
                    if k == 0.0 {
                        continue;
                    }
                    for (j, o) in out.iter_mut().enumerate() {
                        *o += scale * k * trig_cardinal(n, theta - j as f64 * dtheta);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, ParametricCurve};
    use crate::quadrature::adaptive_gk;
    use std::f64::consts::PI;

    #[test]
    fn near_row_matches_adaptive_quadrature_for_smooth_density() {
        let c = ParametricCurve::ellipse([0.0, 0.0], 1.0, 0.6, 0.2).unwrap();
        let mesh = build_mesh(&c, 48, 8, 1.0).unwrap();
        let quad = SourceQuadrature::new(&mesh);
        let dens = |th: f64| 1.0 + 0.3 * th.cos() - 0.2 * (2.0 * th).sin();
        let phi: Vec<f64> = mesh.params.iter().map(|&t| dens(t)).collect();
        let (lo, hi) = (0.0, 0.01);
        for (i, kind) in [(3usize, LayerKind::Single), (17, LayerKind::Double), (30, LayerKind::AdjointDouble)] {
            let x = mesh.points[i];
            let nx = mesh.normals[i];
            let mut row = vec![0.0; 48];
            quad.accumulate_row(kind, x, nx, &quad.at_node(i), lo, hi, 1.0, &mut row);
            let got: f64 = row.iter().zip(&phi).map(|(a, b)| a * b).sum();
            let t0 = mesh.params[i];
            let f = |s: f64| {
                let cp = c.eval(t0 + s);
                cp.speed() * dens(t0 + s) * integrated_kernel(kind, x, nx, cp.pos, cp.normal(), lo, hi)
            };
            let exact = adaptive_gk(f, -PI, 0.0, 1e-13, 1e-11).unwrap() + adaptive_gk(f, 0.0, PI, 1e-13, 1e-11).unwrap();
            assert!((got - exact).abs() < 1e-6 * exact.abs().max(1e-3), "{kind:?}: {got} vs {exact}");
        }
    }

    #[test]
    fn off_node_row_agrees_with_node_row() {
        let c = ParametricCurve::circle([0.0, 0.0], 1.0).unwrap();
        let mesh = build_mesh(&c, 32, 8, 1.0).unwrap();
        let quad = SourceQuadrature::new(&mesh);
        let i = 5;
        let mut a = vec![0.0; 32];
        let mut b = vec![0.0; 32];
        let place = TargetPlacement { center: mesh.params[i], distance: 0.0, node: None };
        quad.accumulate_row(LayerKind::Single, mesh.points[i], mesh.normals[i], &quad.at_node(i), 0.0, 0.02, 1.0, &mut a);
        quad.accumulate_row(LayerKind::Single, mesh.points[i], mesh.normals[i], &place, 0.0, 0.02, 1.0, &mut b);
        for j in 0..32 {
            assert!((a[j] - b[j]).abs() < 1e-13);
        }
    }
}
