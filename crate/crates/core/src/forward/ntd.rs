use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{read_blocks, write_blocks, BoundaryDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NtdKind {
    LambdaD,
    LambdaEmpty,
    GapF,
}

impl NtdKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NtdKind::LambdaD => "lambda_D",
            NtdKind::LambdaEmpty => "lambda_empty",
            NtdKind::GapF => "gap_F",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "lambda_D" => Some(NtdKind::LambdaD),
            "lambda_empty" => Some(NtdKind::LambdaEmpty),
            "gap_F" => Some(NtdKind::GapF),
            _ => None,
        }
    }
}

/// Discrete flux-to-trace map on the outer boundary. The system is
/// time-invariant, so the map is block-Toeplitz: `blocks[m]` takes flux on
/// step l to the trace at step l + m.
#[derive(Debug, Clone, PartialEq)]
pub struct NtdGapMatrix {
    pub kind: NtdKind,
    pub n_s: usize,
    pub dt: f64,
    pub blocks: Vec<DMatrix<f64>>,
}

impl NtdGapMatrix {
    pub fn new(kind: NtdKind, dt: f64, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let n_s = blocks.first().map(|b| b.nrows()).unwrap_or(0);
        if blocks.is_empty() || blocks.iter().any(|b| b.shape() != (n_s, n_s)) {
            return Err(Error::MeshMismatch("NtD blocks must be non-empty and square".into()));
        }
        Ok(Self { kind, n_s, dt, blocks })
    }

    pub fn n_t(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.n_s * self.n_t()
    }

    /// Full lower block-triangular matrix, time-major.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, n_t) = (self.n_s, self.n_t());
        let mut out = DMatrix::zeros(n * n_t, n * n_t);
        for k in 0..n_t {
            for l in 0..=k {
                out.view_mut((k * n, l * n), (n, n)).copy_from(&self.blocks[k - l]);
            }
        }
        out
    }

    pub fn apply(&self, f: &BoundaryDensity) -> Result<BoundaryDensity> {
        if f.n_s != self.n_s || f.n_t != self.n_t() {
            return Err(Error::MeshMismatch(format!("flux is {}×{}, map is {}×{}", f.n_s, f.n_t, self.n_s, self.n_t())));
        }
        let n_t = self.n_t();
        let steps: Vec<nalgebra::DVector<f64>> = crate::exec::map_range(n_t, |k| {
            let mut y = nalgebra::DVector::zeros(self.n_s);
            for l in 0..=k {
                y.gemv(1.0, &self.blocks[k - l], &nalgebra::DVector::from_column_slice(f.step(l)), 1.0);
            }
            y
        });
        Ok(BoundaryDensity { n_s: self.n_s, n_t, values: steps.iter().flat_map(|y| y.iter().copied()).collect() })
    }

    /// F = self - other.
    pub fn gap(&self, other: &NtdGapMatrix) -> Result<NtdGapMatrix> {
        if self.n_s != other.n_s || self.n_t() != other.n_t() {
            return Err(Error::MeshMismatch("NtD maps differ in shape".into()));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect();
        Ok(NtdGapMatrix { kind: NtdKind::GapF, n_s: self.n_s, dt: self.dt, blocks })
    }

    /// Frobenius norm of the full matrix.
    pub fn frobenius(&self) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(m, b)| (self.n_t() - m) as f64 * b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry coupling a later flux step to an earlier trace step
    /// (zero by construction).
    pub fn max_acausal(&self) -> f64 {
        let d = self.to_dense();
        let n = self.n_s;
        let mut worst: f64 = 0.0;
        for k in 0..self.n_t() {
            for l in k + 1..self.n_t() {
                worst = worst.max(d.view((k * n, l * n), (n, n)).amax());
            }
        }
        worst
    }

    pub fn dump(&self, path: &Path) -> Result<()> {
        write_blocks(path, &self.blocks, self.dt, self.kind.as_str())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (blocks, dt, kind) = read_blocks(path)?;
        let kind = NtdKind::parse(&kind)
            .ok_or_else(|| Error::Validation { path: "kind".into(), reason: format!("`{kind}` is not an NtD map") })?;
        Self::new(kind, dt, blocks)
    }
}
