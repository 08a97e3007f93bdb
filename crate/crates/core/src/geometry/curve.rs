//! Closed parametric curves with analytic derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Traversal direction of the parameter. The library contract is
/// counterclockwise; clockwise exists so that the orientation check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Ccw,
    Cw,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape {
    Circle { radius: f64 },
    /// Semi-axes `a`, `b`, rotated by `rotation` radians.
    Ellipse { a: f64, b: f64, rotation: f64 },
    /// (cos t + 0.65 cos 2t - 0.65, 1.5 sin t), scaled.
    Kite { scale: f64 },
    /// Radius R(1 + amplitude·cos(arms·t)).
    Star { radius: f64, amplitude: f64, arms: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCurve {
    pub center: [f64; 2],
    pub shape: CurveShape,
    pub orientation: Orientation,
}

/// Position, first and second parameter derivatives at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub pos: [f64; 2],
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.d1[0].hypot(self.d1[1])
    }

    /// Unit normal (y', -x')/|x'|; outward for a counterclockwise curve.
    pub fn normal(&self) -> [f64; 2] {
        let s = self.speed();
        [self.d1[1] / s, -self.d1[0] / s]
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Geometry(format!("{what} must be positive and finite, got {v}")))
    }
}

impl ParametricCurve {
    pub fn circle(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::new(center, CurveShape::Circle { radius }, Orientation::Ccw)
    }

    pub fn ellipse(center: [f64; 2], a: f64, b: f64, rotation: f64) -> Result<Self> {
        Self::new(center, CurveShape::Ellipse { a, b, rotation }, Orientation::Ccw)
    }

    pub fn kite(center: [f64; 2], scale: f64) -> Result<Self> {
        Self::new(center, CurveShape::Kite { scale }, Orientation::Ccw)
    }

    pub fn star(center: [f64; 2], radius: f64, amplitude: f64, arms: u32) -> Result<Self> {
        Self::new(center, CurveShape::Star { radius, amplitude, arms }, Orientation::Ccw)
    }

    pub fn new(center: [f64; 2], shape: CurveShape, orientation: Orientation) -> Result<Self> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Geometry("center must be finite".into()));
        }
        match shape {
            CurveShape::Circle { radius } => positive(radius, "radius")?,
            CurveShape::Ellipse { a, b, rotation } => {
                positive(a, "a")?;
                positive(b, "b")?;
                if !rotation.is_finite() {
                    return Err(Error::Geometry("rotation must be finite".into()));
                }
            }
            CurveShape::Kite { scale } => positive(scale, "scale")?,
            CurveShape::Star { radius, amplitude, arms } => {
                positive(radius, "radius")?;
                if !(0.0..1.0).contains(&amplitude) {
                    return Err(Error::Geometry(format!("star amplitude must lie in [0, 1), got {amplitude}")));
                }
                if arms == 0 {
                    return Err(Error::Geometry("star needs at least one arm".into()));
                }
            }
        }
        Ok(Self { center, shape, orientation })
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            CurveShape::Circle { .. } => "circle",
            CurveShape::Ellipse { .. } => "ellipse",
            CurveShape::Kite { .. } => "kite",
            CurveShape::Star { .. } => "star",
        }
    }

    /// Evaluate at parameter `theta` ∈ [0, 2π).
    pub fn eval(&self, theta: f64) -> CurvePoint {
        let (t, sign) = match self.orientation {
            Orientation::Ccw => (theta, 1.0),
            Orientation::Cw => (-theta, -1.0),
        };
        let (c, s) = (t.cos(), t.sin());
        let (p, d1, d2) = match self.shape {
            CurveShape::Circle { radius: r } => ([r * c, r * s], [-r * s, r * c], [-r * c, -r * s]),
            CurveShape::Ellipse { a, b, rotation } => {
                let (cr, sr) = (rotation.cos(), rotation.sin());
                let rot = |v: [f64; 2]| [cr * v[0] - sr * v[1], sr * v[0] + cr * v[1]];
                (rot([a * c, b * s]), rot([-a * s, b * c]), rot([-a * c, -b * s]))
            }
            CurveShape::Kite { scale: k } => {
                let (c2, s2) = ((2.0 * t).cos(), (2.0 * t).sin());
                (
                    [k * (c + 0.65 * c2 - 0.65), k * 1.5 * s],
                    [k * (-s - 1.3 * s2), k * 1.5 * c],
                    [k * (-c - 2.6 * c2), -k * 1.5 * s],
                )
            }
            CurveShape::Star { radius, amplitude, arms } => {
                let m = arms as f64;
                let r = radius * (1.0 + amplitude * (m * t).cos());
                let dr = -radius * amplitude * m * (m * t).sin();
                let ddr = -radius * amplitude * m * m * (m * t).cos();
                (
                    [r * c, r * s],
                    [dr * c - r * s, dr * s + r * c],
                    [ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s],
                )
            }
        };
        CurvePoint {
            pos: [self.center[0] + p[0], self.center[1] + p[1]],
            d1: [sign * d1[0], sign * d1[1]],
            d2,
        }
    }

    /// Dense polygon approximation (`n` vertices).
    pub fn polygon(&self, n: usize) -> Vec<[f64; 2]> {
        (0..n).map(|i| self.eval(2.0 * PI * i as f64 / n as f64).pos).collect()
    }

    /// Signed area by the shoelace formula on a dense polygon.
    pub fn signed_area(&self) -> f64 {
        let p = self.polygon(2048);
        let n = p.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    /// Reject curves with a vanishing tangent or a self-intersection.
    pub fn check_regular(&self) -> Result<()> {
        const SAMPLES: usize = 1024;
        let scale = self.bounding_radius();
        for i in 0..SAMPLES {
            let theta = 2.0 * PI * i as f64 / SAMPLES as f64;
            let sp = self.eval(theta).speed();
            if !(sp > 1e-8 * scale) {
                return Err(Error::Geometry(format!("tangent vanishes near parameter {theta:.4}")));
            }
        }
        let p = self.polygon(512);
        let n = p.len();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                    return Err(Error::Geometry("curve is not simple (self-intersection)".into()));
                }
            }
        }
        Ok(())
    }

    /// Counterclockwise contract check.
    pub fn check_orientation(&self) -> Result<()> {
        let area = self.signed_area();
        if area > 0.0 {
            Ok(())
        } else {
            Err(Error::Geometry(format!("curve is clockwise (signed area {area:.4e})")))
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match self.shape {
            CurveShape::Circle { radius } => radius,
            CurveShape::Ellipse { a, b, .. } => a.max(b),
            CurveShape::Kite { scale } => 2.3 * scale,
            CurveShape::Star { radius, amplitude, .. } => radius * (1.0 + amplitude),
        }
    }

    /// Nearest curve parameter to `y`: dense sampling, then Newton on |x(θ) - y|².
    pub fn nearest(&self, y: [f64; 2]) -> (f64, f64) {
        const SAMPLES: usize = 720;
        let step = 2.0 * PI / SAMPLES as f64;
        let d2 = |p: [f64; 2]| (p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2);
        let mut order: Vec<(f64, usize)> = (0..SAMPLES).map(|i| (d2(self.eval(i as f64 * step).pos), i)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = (f64::INFINITY, 0.0);
        for &(_, i) in order.iter().take(3) {
            let mut theta = i as f64 * step;
            for _ in 0..40 {
                let cp = self.eval(theta);
                let r = [cp.pos[0] - y[0], cp.pos[1] - y[1]];
                let g = r[0] * cp.d1[0] + r[1] * cp.d1[1];
                let h = cp.d1[0] * cp.d1[0] + cp.d1[1] * cp.d1[1] + r[0] * cp.d2[0] + r[1] * cp.d2[1];
                let mut delta = if h > 0.0 { -g / h } else { -g.signum() * step };
                delta = delta.clamp(-step, step);
                theta += delta;
                if delta.abs() < 1e-15 {
                    break;
                }
            }
            theta = theta.rem_euclid(2.0 * PI);
            let dist = d2(self.eval(theta).pos).sqrt();
            if dist < best.0 {
                best = (dist, theta);
            }
        }
        (best.1, best.0)
    }

    /// Signed distance: positive outside the region the curve encloses.
    /// Orientation of the parameter does not matter.
    pub fn signed_distance(&self, y: [f64; 2]) -> f64 {
        let (theta, dist) = self.nearest(y);
        let cp = self.eval(theta);
        let nu = cp.normal();
        let side = (y[0] - cp.pos[0]) * nu[0] + (y[1] - cp.pos[1]) * nu[1];
        let outward = match self.orientation {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        };
        if side * outward >= 0.0 {
            dist
        } else {
            -dist
        }
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}
