use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::json;

use super::density::BoundaryDensity;
use super::kernel::LayerKind;
use crate::error::{Error, Result};

/// Block lower-triangular, block-Toeplitz operator on piecewise-constant-in-time
/// densities. `blocks[m]` is the N_tgt × N_src block coupling source step l to
/// target step l + m; blocks above the diagonal are zero and not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalBlockOperator {
    pub kind: LayerKind,
    pub n_src: usize,
    pub n_tgt: usize,
    pub dt: f64,
    pub blocks: Vec<DMatrix<f64>>,
}

impl CausalBlockOperator {
    pub fn new(kind: LayerKind, dt: f64, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Assembly("operator needs at least one block".into()))?;
        let (n_tgt, n_src) = first.shape();
        if blocks.iter().any(|b| b.shape() != (n_tgt, n_src)) {
            return Err(Error::Assembly("blocks differ in shape".into()));
        }
        Ok(Self { kind, n_src, n_tgt, dt, blocks })
    }

    pub fn zeros(kind: LayerKind, n_tgt: usize, n_src: usize, n_t: usize, dt: f64) -> Self {
        Self { kind, n_src, n_tgt, dt, blocks: vec![DMatrix::zeros(n_tgt, n_src); n_t] }
    }

    /// Identity at lag 0, zero elsewhere.
    pub fn identity(n: usize, n_t: usize, dt: f64) -> Self {
        let mut op = Self::zeros(LayerKind::Custom, n, n, n_t, dt);
        op.blocks[0] = DMatrix::identity(n, n);
        op
    }

    pub fn n_t(&self) -> usize {
        self.blocks.len()
    }

    /// Block (k, l) of the full matrix; zero when l > k.
    pub fn block(&self, k: usize, l: usize) -> DMatrix<f64> {
        if l > k {
            DMatrix::zeros(self.n_tgt, self.n_src)
        } else {
            self.blocks[k - l].clone()
        }
    }

    /// The full (N_tgt·N_t) × (N_src·N_t) matrix, time-major in both indices.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n_t = self.n_t();
        let mut out = DMatrix::zeros(self.n_tgt * n_t, self.n_src * n_t);
        for k in 0..n_t {
            for l in 0..=k {
                out.view_mut((k * self.n_tgt, l * self.n_src), (self.n_tgt, self.n_src))
                    .copy_from(&self.blocks[k - l]);
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * c).collect(), ..self.clone() }
    }

    /// Write the block sequence as little-endian f64, row-major per block,
    /// with a JSON sidecar next to it (`<path>.json`).
    pub fn dump(&self, path: &Path) -> Result<()> {
        write_blocks(path, &self.blocks, self.dt, self.kind.as_str())
    }
}

/// Raw block writer shared by operators and NtD matrices.
pub fn write_blocks(path: &Path, blocks: &[DMatrix<f64>], dt: f64, kind: &str) -> Result<()> {
    let (n_tgt, n_src) = blocks.first().map(|b| b.shape()).unwrap_or((0, 0));
    let mut bytes = Vec::with_capacity(blocks.len() * n_tgt * n_src * 8);
    for b in blocks {
        for r in 0..n_tgt {
            for c in 0..n_src {
                bytes.extend_from_slice(&b[(r, c)].to_le_bytes());
            }
        }
    }
    std::fs::File::create(path)?.write_all(&bytes)?;
    let sidecar = json!({"N_s_src": n_src, "N_s_tgt": n_tgt, "N_t": blocks.len(), "dt": dt, "kind": kind});
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a block file written by [`write_blocks`]; returns (blocks, dt, kind).
pub fn read_blocks(path: &Path) -> Result<(Vec<DMatrix<f64>>, f64, String)> {
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let field = |k: &str| {
        meta.get(k)
            .and_then(|v| v.as_u64())
            .map(|v| v as usize)
            .ok_or_else(|| Error::Validation { path: k.into(), reason: "missing or not an integer".into() })
    };
    let (n_src, n_tgt, n_t) = (field("N_s_src")?, field("N_s_tgt")?, field("N_t")?);
    let dt = meta
        .get("dt")
        .and_then(|v| v.as_f64())
        .ok_or_else(|| Error::Validation { path: "dt".into(), reason: "missing or not a number".into() })?;
    let kind = meta.get("kind").and_then(|v| v.as_str()).unwrap_or("custom").to_string();
    let bytes = std::fs::read(path)?;
    if bytes.len() != n_src * n_tgt * n_t * 8 {
        return Err(Error::MeshMismatch(format!("{} bytes, sidecar implies {}", bytes.len(), n_src * n_tgt * n_t * 8)));
    }
    let mut vals = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let blocks = (0..n_t)
        .map(|_| DMatrix::from_row_iterator(n_tgt, n_src, vals.by_ref().take(n_tgt * n_src)))
        .collect();
    Ok((blocks, dt, kind))
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Causal block product y_k = Σ_{l ≤ k} B_{k-l} x_l.
pub fn apply(op: &CausalBlockOperator, density: &BoundaryDensity) -> Result<BoundaryDensity> {
    if density.n_s != op.n_src || density.n_t != op.n_t() {
        return Err(Error::MeshMismatch(format!(
            "density is {}×{}, operator source is {}×{}",
            density.n_s,
            density.n_t,
            op.n_src,
            op.n_t()
        )));
    }
    let n_t = op.n_t();
    let xs: Vec<DVector<f64>> = (0..n_t).map(|l| DVector::from_column_slice(density.step(l))).collect();
    let steps = crate::exec::map_range(n_t, |k| {
        let mut y = DVector::zeros(op.n_tgt);
        for l in 0..=k {
            y.gemv(1.0, &op.blocks[k - l], &xs[l], 1.0);
        }
        y
    });
    let values = steps.iter().flat_map(|y| y.iter().copied()).collect();
    Ok(BoundaryDensity { n_s: op.n_tgt, n_t, values })
}
