use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::density::BoundaryDensity;
use super::operator::CausalBlockOperator;
use crate::error::{Error, Result};
use crate::exec::{map_range, worker_count};

/// Reciprocal condition estimates below this make the step-0 block singular.
pub const RCOND_FLOOR: f64 = 1e-14;

/// A block system of causal operators acting on several stacked densities.
/// `lags[m]` is the stacked lag-m matrix; unknown blocks are ordered by
/// `sizes` within each time step.
#[derive(Debug, Clone)]
pub struct CausalSystem {
    pub sizes: Vec<usize>,
    offsets: Vec<usize>,
    pub lags: Vec<DMatrix<f64>>,
}

impl CausalSystem {
    pub fn new(sizes: &[usize], n_t: usize) -> Self {
        let mut offsets = vec![0];
        for s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let dim = *offsets.last().unwrap();
        Self { sizes: sizes.to_vec(), offsets, lags: vec![DMatrix::zeros(dim, dim); n_t] }
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn n_t(&self) -> usize {
        self.lags.len()
    }

    fn check(&self, row: usize, col: usize, n_tgt: usize, n_src: usize) -> Result<()> {
        if row >= self.sizes.len() || col >= self.sizes.len() {
            return Err(Error::Assembly(format!("block ({row}, {col}) outside a {0}×{0} system", self.sizes.len())));
        }
        if self.sizes[row] != n_tgt || self.sizes[col] != n_src {
            return Err(Error::MeshMismatch(format!(
                "block ({row}, {col}) is {n_tgt}×{n_src}, system expects {}×{}",
                self.sizes[row], self.sizes[col]
            )));
        }
        Ok(())
    }

    /// Add `coef · op` into block (row, col).
    pub fn add_operator(&mut self, row: usize, col: usize, op: &CausalBlockOperator, coef: f64) -> Result<()> {
        self.check(row, col, op.n_tgt, op.n_src)?;
        if op.n_t() != self.n_t() {
            return Err(Error::MeshMismatch(format!("operator has {} steps, system {}", op.n_t(), self.n_t())));
        }
        let (r0, c0) = (self.offsets[row], self.offsets[col]);
        for (lag, b) in self.lags.iter_mut().zip(&op.blocks) {
            let mut v = lag.view_mut((r0, c0), b.shape());
            v += b * coef;
        }
        Ok(())
    }

    /// Add a pointwise multiplication diag(d) at lag 0 into block (row, col).
    pub fn add_diagonal(&mut self, row: usize, col: usize, diag: &[f64]) -> Result<()> {
        self.check(row, col, diag.len(), diag.len())?;
        let (r0, c0) = (self.offsets[row], self.offsets[col]);
        for (i, d) in diag.iter().enumerate() {
            self.lags[0][(r0 + i, c0 + i)] += d;
        }
        Ok(())
    }

    pub fn add_identity(&mut self, row: usize, col: usize, coef: f64) -> Result<()> {
        let n = self.sizes[row.min(self.sizes.len() - 1)];
        self.add_diagonal(row, col, &vec![coef; n])
    }

    /// LU-factor the step-0 block.
    pub fn factor(&self) -> Result<FactoredSystem<'_>> {
        let s0 = &self.lags[0];
        let lu = s0.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::SingularStep { rcond: 0.0 })?;
        let norm1 = |m: &DMatrix<f64>| m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let rcond = 1.0 / (norm1(s0) * norm1(&inv));
        if !(rcond >= RCOND_FLOOR) {
            return Err(Error::SingularStep { rcond: if rcond.is_finite() { rcond } else { 0.0 } });
        }
        Ok(FactoredSystem { system: self, lu, rcond })
    }
}

/// A causal system with its step-0 block factored.
pub struct FactoredSystem<'a> {
    system: &'a CausalSystem,
    lu: LU<f64, Dyn, Dyn>,
    /// 1-norm reciprocal condition number of the step-0 block.
    pub rcond: f64,
}

impl FactoredSystem<'_> {
    /// Forward substitution with one stacked right-hand-side matrix per step.
    pub fn solve_steps(&self, rhs: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(rhs.len());
        for k in 0..rhs.len() {
            let mut b = rhs[k].clone();
            for m in 1..=k {
                b.gemm(-1.0, &self.system.lags[m], &out[k - m], 1.0);
            }
            self.lu.solve_mut(&mut b);
            out.push(b);
        }
        out
    }

    /// As [`Self::solve_steps`], splitting the columns across workers.
    pub fn solve_steps_parallel(&self, rhs: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let cols = rhs.first().map_or(0, |b| b.ncols());
        let chunks = worker_count().clamp(1, cols.max(1));
        if chunks == 1 {
            return self.solve_steps(rhs);
        }
        let bounds: Vec<(usize, usize)> = (0..chunks).map(|c| (c * cols / chunks, (c + 1) * cols / chunks)).collect();
        let parts = map_range(chunks, |c| {
            let (a, b) = bounds[c];
            let sub: Vec<DMatrix<f64>> = rhs.iter().map(|m| m.columns(a, b - a).into_owned()).collect();
            self.solve_steps(&sub)
        });
        (0..rhs.len())
            .map(|k| {
                let mut m = DMatrix::zeros(self.system.dim(), cols);
                for (c, part) in parts.iter().enumerate() {
                    let (a, b) = bounds[c];
                    m.columns_mut(a, b - a).copy_from(&part[k]);
                }
                m
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[BoundaryDensity]) -> Result<Vec<BoundaryDensity>> {
        let sys = self.system;
        if rhs.len() != sys.sizes.len() {
            return Err(Error::MeshMismatch(format!("{} right-hand sides for {} unknowns", rhs.len(), sys.sizes.len())));
        }
        for (r, &n) in rhs.iter().zip(&sys.sizes) {
            if r.n_s != n || r.n_t != sys.n_t() {
                return Err(Error::MeshMismatch(format!("right-hand side is {}×{}, expected {n}×{}", r.n_s, r.n_t, sys.n_t())));
            }
        }
        let steps: Vec<DMatrix<f64>> = (0..sys.n_t())
            .map(|k| {
                let v: Vec<f64> = rhs.iter().flat_map(|r| r.step(k).iter().copied()).collect();
                DMatrix::from_column_slice(sys.dim(), 1, &v)
            })
            .collect();
        let x = self.solve_steps(&steps);
        Ok((0..sys.sizes.len())
            .map(|u| {
                let (o, n) = (sys.offsets[u], sys.sizes[u]);
                BoundaryDensity::from_fn(n, sys.n_t(), |i, k| x[k][(o + i, 0)])
            })
            .collect())
    }

    /// Apply the full system to stacked densities (residual checks).
    pub fn apply(&self, x: &[BoundaryDensity]) -> Vec<DVector<f64>> {
        let sys = self.system;
        let xs: Vec<DVector<f64>> = (0..sys.n_t())
            .map(|k| DVector::from_iterator(sys.dim(), x.iter().flat_map(|r| r.step(k).iter().copied())))
            .collect();
        (0..sys.n_t())
            .map(|k| {
                let mut y = DVector::zeros(sys.dim());
                for l in 0..=k {
                    y.gemv(1.0, &sys.lags[k - l], &xs[l], 1.0);
                }
                y
            })
            .collect()
    }
}

/// Factor and solve in one call.
pub fn mot_solve(system: &CausalSystem, rhs: &[BoundaryDensity]) -> Result<Vec<BoundaryDensity>> {
    system.factor()?.solve(rhs)
}
