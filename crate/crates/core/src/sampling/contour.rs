use std::collections::HashMap;

use serde::Serialize;

use super::indicator::{IndicatorField, SamplingGrid};
use crate::error::{Error, Result};

/// Smallest Otsu between-class variance ratio accepted as a two-class field.
/// A single Gaussian population peaks at 2/π ≈ 0.64, a uniform one at 0.75,
/// and the smooth radial ramps of real sweeps sit right around 0.75.
pub const MIN_SEPARATION: f64 = 0.7;

/// Scale on which 1/‖g^y‖ is histogrammed before the Otsu split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdScale {
    /// ln(1/‖g^y‖)
    #[default]
    Log,
    /// 1/‖g^y‖
    Linear,
}

/// Otsu threshold of `values`: the split maximising between-class variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OtsuSplit {
    pub level: f64,
    /// Between-class over total variance, in [0, 1].
    pub separation: f64,
}

pub fn otsu(values: &[f64]) -> Option<OtsuSplit> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.len() < 2 {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let total = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if !(total > 1e-24 * (1.0 + mean * mean)) {
        return None;
    }
    let mut best: Option<OtsuSplit> = None;
    let mut prefix = 0.0;
    for k in 1..v.len() {
        prefix += v[k - 1];
        if v[k] == v[k - 1] {
            continue;
        }
        let (w0, w1) = (k as f64 / n, 1.0 - k as f64 / n);
        let m0 = prefix / k as f64;
        let m1 = (mean * n - prefix) / (n - k as f64);
        let between = w0 * w1 * (m0 - m1).powi(2);
        if best.is_none_or(|b| between / total > b.separation) {
            best = Some(OtsuSplit { level: 0.5 * (v[k - 1] + v[k]), separation: between / total });
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryEstimate {
    /// Threshold on ln(1/‖g^y‖) or 1/‖g^y‖, depending on the scale.
    pub level: f64,
    pub separation: f64,
    /// Closed polyline (first point not repeated).
    pub polyline: Vec<[f64; 2]>,
    /// Number of closed level-set loops found; the largest is returned.
    pub loops: usize,
}

impl BoundaryEstimate {
    pub fn centroid(&self) -> [f64; 2] {
        let n = self.polyline.len() as f64;
        let s = self.polyline.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
        [s[0] / n, s[1] / n]
    }

    /// Mean distance of the polyline vertices from `center`.
    pub fn mean_radius(&self, center: [f64; 2]) -> f64 {
        self.polyline.iter().map(|p| (p[0] - center[0]).hypot(p[1] - center[1])).sum::<f64>() / self.polyline.len() as f64
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.polyline).abs()
    }
}

fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|i| p[i][0] * p[(i + 1) % n][1] - p[(i + 1) % n][0] * p[i][1]).sum::<f64>()
}

/// Threshold ln(1/‖g^y‖) at the Otsu level and trace the level set.
pub fn extract_boundary(field: &IndicatorField) -> Result<BoundaryEstimate> {
    extract_boundary_with(field, ThresholdScale::Log)
}

pub fn extract_boundary_with(field: &IndicatorField, scale: ThresholdScale) -> Result<BoundaryEstimate> {
    let mut values = vec![None; field.grid.len()];
    for p in &field.points {
        if p.density_norm.is_nan() {
            continue;
        }
        let norm = p.density_norm.clamp(1e-300, 1e300);
        values[p.iy * field.grid.nx + p.ix] = Some(match scale {
            ThresholdScale::Log => -norm.ln(),
            ThresholdScale::Linear => 1.0 / norm,
        });
    }
    extract_level_set(&field.grid, &values)
}

/// Otsu split plus marching squares on lattice values (row-major in y).
/// Missing values count as the low class.
pub fn extract_level_set(grid: &SamplingGrid, values: &[Option<f64>]) -> Result<BoundaryEstimate> {
    if values.len() != grid.len() {
        return Err(Error::MeshMismatch("one value per lattice point required".into()));
    }
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let split = otsu(&present).ok_or_else(|| Error::NoBoundary("indicator field is constant".into()))?;
    if split.separation < MIN_SEPARATION {
        return Err(Error::NoBoundary(format!(
            "histogram is not bimodal (separation {:.3} < {MIN_SEPARATION})",
            split.separation
        )));
    }
    let level = split.level;
    let low = present.iter().copied().fold(f64::INFINITY, f64::min).min(level) - 1.0;
    let val = |ix: usize, iy: usize| values[iy * grid.nx + ix].unwrap_or(low);
    let loops = march(grid, &val, level);
    let count = loops.len();
    let polyline = loops
        .into_iter()
        .max_by(|a, b| polygon_area(a).abs().total_cmp(&polygon_area(b).abs()))
        .ok_or_else(|| Error::NoBoundary("no closed level-set contour".into()))?;
    Ok(BoundaryEstimate { level, separation: split.separation, polyline, loops: count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    // from (ix, iy) to (ix + 1, iy)
    H(usize, usize),
    // from (ix, iy) to (ix, iy + 1)
    V(usize, usize),
}

/// Closed loops of the level set through marching squares.
fn march(grid: &SamplingGrid, val: &dyn Fn(usize, usize) -> f64, level: f64) -> Vec<Vec<[f64; 2]>> {
    let crossing = |e: Edge| {
        let (p, q) = match e {
            Edge::H(ix, iy) => ((ix, iy), (ix + 1, iy)),
            Edge::V(ix, iy) => ((ix, iy), (ix, iy + 1)),
        };
        let (a, b) = (val(p.0, p.1), val(q.0, q.1));
        let t = ((level - a) / (b - a)).clamp(0.0, 1.0);
        let (x0, x1) = (grid.point(p.0, p.1), grid.point(q.0, q.1));
        [x0[0] + t * (x1[0] - x0[0]), x0[1] + t * (x1[1] - x0[1])]
    };
    let mut links: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut link = |a: Edge, b: Edge| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for iy in 0..grid.ny - 1 {
        for ix in 0..grid.nx - 1 {
            let corner = [val(ix, iy), val(ix + 1, iy), val(ix + 1, iy + 1), val(ix, iy + 1)];
            let inside = corner.map(|v| v >= level);
            let (bottom, right, top, left) = (Edge::H(ix, iy), Edge::V(ix + 1, iy), Edge::H(ix, iy + 1), Edge::V(ix, iy));
            // edge i joins corners i and i+1
            let edges = [bottom, right, top, left];
            let cut: Vec<Edge> = (0..4).filter(|&i| inside[i] != inside[(i + 1) % 4]).map(|i| edges[i]).collect();
            match cut.len() {
                2 => link(cut[0], cut[1]),
                4 => {
                    let center = corner.iter().sum::<f64>() / 4.0 >= level;
                    // isolate the corners whose class differs from the centre
                    if inside[0] == center {
                        link(bottom, right);
                        link(top, left);
                    } else {
                        link(left, bottom);
                        link(right, top);
                    }
                }
                _ => {}
            }
        }
    }
    let mut keys: Vec<Edge> = links.keys().copied().collect();
    keys.sort_by_key(|e| match *e {
        Edge::H(x, y) => (0, y, x),
        Edge::V(x, y) => (1, y, x),
    });
    let mut seen = std::collections::HashSet::new();
    let mut loops = Vec::new();
    for start in keys {
        if seen.contains(&start) {
            continue;
        }
        let mut chain = vec![start];
        seen.insert(start);
        let (mut prev, mut cur) = (start, start);
        let closed = loop {
            let next = links[&cur].iter().copied().find(|&e| e != prev && !seen.contains(&e));
            match next {
                Some(e) => {
                    seen.insert(e);
                    chain.push(e);
                    prev = cur;
                    cur = e;
                }
                None => break chain.len() > 2 && links[&cur].contains(&start),
            }
        };
        if closed {
            loops.push(chain.into_iter().map(crossing).collect());
        }
    }
    loops
}
