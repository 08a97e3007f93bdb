use nalgebra::DMatrix;
use serde::Serialize;

use super::ntd::{NtdGapMatrix, NtdKind};
use crate::error::{Error, Result};
use crate::geometry::{Scenario, SpaceTimeMesh};
use crate::potentials::{
    apply, assemble_adjoint_double_layer, assemble_double_layer, assemble_hypersingular, assemble_hypersingular_with,
    assemble_single_layer, HypersingularConfig,
    BoundaryDensity, CausalBlockOperator, CausalSystem, FactoredSystem,
};

/// Relative Robin residual above which a solution is flagged.
pub const ROBIN_TOLERANCE: f64 = 5e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvePath {
    Direct,
    Indirect,
    SingleLayer,
}

/// Boundary traces of one forward solve. Without a cavity `u1` and `u2` are empty.
#[derive(Debug, Clone)]
pub struct ForwardSolution {
    pub flux: BoundaryDensity,
    /// ∂_ν u on ∂D
    pub u1: BoundaryDensity,
    /// u on ∂D
    pub u2: BoundaryDensity,
    /// u on ∂Ω
    pub u3: BoundaryDensity,
    pub path: SolvePath,
    /// Reciprocal condition estimate of the step-0 block.
    pub rcond: f64,
    pub robin_residual: f64,
    pub flagged: bool,
}

fn robin_residual(u1: &BoundaryDensity, u2: &BoundaryDensity, lambda: &[f64]) -> f64 {
    let n = u1.n_s;
    let (mut num, mut a, mut b) = (0.0, 0.0, 0.0);
    for (idx, (x, y)) in u1.values.iter().zip(&u2.values).enumerate() {
        num += (x - lambda[idx % n] * y).powi(2);
        a += x * x;
        b += y * y;
    }
    num.sqrt() / a.sqrt().max(b.sqrt()).max(1e-300)
}

/// `diag(d) · op`
pub fn row_scaled(op: &CausalBlockOperator, d: &[f64]) -> CausalBlockOperator {
    let mut out = op.clone();
    for b in &mut out.blocks {
        for (i, &s) in d.iter().enumerate() {
            b.row_mut(i).scale_mut(s);
        }
    }
    out
}

fn sum(a: &BoundaryDensity, b: &BoundaryDensity) -> BoundaryDensity {
    let mut out = a.clone();
    out.axpy(1.0, b).expect("same shape");
    out
}

/// Trace `Σ op·x_u` (or `x_u` itself when `op` is None) from step solutions.
type TraceTerm<'a> = (usize, Option<&'a CausalBlockOperator>);

/// Flux-to-trace blocks by one matrix-RHS march: the response to flux on step 0
/// at every node, shifted in time by Toeplitz invariance.
fn ntd_blocks(
    system: &CausalSystem,
    rhs_lags: &[DMatrix<f64>],
    offsets: &[usize],
    trace: &[TraceTerm],
    n_trace: usize,
) -> Result<Vec<DMatrix<f64>>> {
    let factored = system.factor()?;
    let x = factored.solve_steps_parallel(rhs_lags);
    let n_t = system.n_t();
    let cols = rhs_lags[0].ncols();
    Ok((0..n_t)
        .map(|m| {
            let mut out = DMatrix::zeros(n_trace, cols);
            for &(u, op) in trace {
                let rows = |l: usize| x[l].rows(offsets[u], system.sizes[u]);
                match op {
                    None => out += rows(m),
                    Some(op) => {
                        for l in 0..=m {
                            out.gemm(1.0, &op.blocks[m - l], &rows(l), 1.0);
                        }
                    }
                }
            }
            out
        })
        .collect())
}

/// Cavity-free conductor: u = V_Ω ψ with (½I + N₂₂)ψ = f.
pub struct EmptyModel {
    pub outer: SpaceTimeMesh,
    pub v22: CausalBlockOperator,
    pub n22: CausalBlockOperator,
    system: CausalSystem,
}

impl EmptyModel {
    pub fn new(outer: SpaceTimeMesh) -> Result<Self> {
        let v22 = assemble_single_layer(&outer, &outer)?;
        let n22 = assemble_adjoint_double_layer(&outer, &outer)?;
        let mut system = CausalSystem::new(&[outer.n_s()], outer.n_t());
        system.add_operator(0, 0, &n22, 1.0)?;
        system.add_identity(0, 0, 0.5)?;
        Ok(Self { outer, v22, n22, system })
    }

    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        Self::new(s.outer_mesh()?)
    }

    /// Factored (½I + N₂₂) for repeated density solves.
    pub fn factor(&self) -> Result<FactoredSystem<'_>> {
        self.system.factor()
    }

    /// Single-layer density ψ for flux f.
    pub fn density(&self, f: &BoundaryDensity) -> Result<BoundaryDensity> {
        f.check_on(&self.outer, "flux")?;
        Ok(self.system.factor()?.solve(std::slice::from_ref(f))?.remove(0))
    }

    pub fn solve(&self, f: &BoundaryDensity) -> Result<ForwardSolution> {
        let factored = self.system.factor()?;
        f.check_on(&self.outer, "flux")?;
        let psi = factored.solve(std::slice::from_ref(f))?.remove(0);
        let n_t = self.outer.n_t();
        Ok(ForwardSolution {
            flux: f.clone(),
            u1: BoundaryDensity::zeros(0, n_t),
            u2: BoundaryDensity::zeros(0, n_t),
            u3: apply(&self.v22, &psi)?,
            path: SolvePath::SingleLayer,
            rcond: factored.rcond,
            robin_residual: 0.0,
            flagged: false,
        })
    }

    pub fn ntd(&self) -> Result<NtdGapMatrix> {
        let n = self.outer.n_s();
        let mut rhs = vec![DMatrix::zeros(n, n); self.outer.n_t()];
        rhs[0] = DMatrix::identity(n, n);
        let blocks = ntd_blocks(&self.system, &rhs, &[0], &[(0, Some(&self.v22))], n)?;
        NtdGapMatrix::new(NtdKind::LambdaEmpty, self.outer.dt(), blocks)
    }
}

/// Operators coupling the outer boundary (index 2) and the cavity (index 1).
/// `xij` maps densities on boundary i to targets on boundary j.
pub struct CavityModel {
    pub outer: SpaceTimeMesh,
    pub inner: SpaceTimeMesh,
    pub lambda: Vec<f64>,
    pub v11: CausalBlockOperator,
    pub n11: CausalBlockOperator,
    pub v12: CausalBlockOperator,
    pub n12: CausalBlockOperator,
    pub v21: CausalBlockOperator,
    pub n21: CausalBlockOperator,
    pub v22: CausalBlockOperator,
    pub n22: CausalBlockOperator,
    /// Row-scaled λ·V₂₁.
    lv21: CausalBlockOperator,
    indirect: CausalSystem,
}

/// Extra operators of the direct three-trace system.
pub struct DirectOperators {
    pub k11: CausalBlockOperator,
    pub k21: CausalBlockOperator,
    pub k12: CausalBlockOperator,
    pub k22: CausalBlockOperator,
    pub w11: CausalBlockOperator,
    pub w21: CausalBlockOperator,
    system: CausalSystem,
}

impl CavityModel {
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        let inner = s.cavity_mesh()?.ok_or_else(|| Error::InputDomain("scenario has no cavity".into()))?;
        Self::new(s.outer_mesh()?, inner, s.lambda_nodes()?)
    }

    pub fn new(outer: SpaceTimeMesh, inner: SpaceTimeMesh, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != inner.n_s() {
            return Err(Error::MeshMismatch(format!("{} impedance values for {} cavity nodes", lambda.len(), inner.n_s())));
        }
        let v11 = assemble_single_layer(&inner, &inner)?;
        let n11 = assemble_adjoint_double_layer(&inner, &inner)?;
        let v12 = assemble_single_layer(&inner, &outer)?;
        let n12 = assemble_adjoint_double_layer(&inner, &outer)?;
        let v21 = assemble_single_layer(&outer, &inner)?;
        let n21 = assemble_adjoint_double_layer(&outer, &inner)?;
        let v22 = assemble_single_layer(&outer, &outer)?;
        let n22 = assemble_adjoint_double_layer(&outer, &outer)?;
        let lv11 = row_scaled(&v11, &lambda);
        let lv21 = row_scaled(&v21, &lambda);
        // unknowns (ψ on ∂Ω, φ on ∂D)
        let mut indirect = CausalSystem::new(&[outer.n_s(), inner.n_s()], outer.n_t());
        indirect.add_operator(0, 0, &n22, 1.0)?;
        indirect.add_identity(0, 0, 0.5)?;
        indirect.add_operator(0, 1, &n12, 1.0)?;
        indirect.add_operator(1, 0, &n21, 1.0)?;
        indirect.add_operator(1, 0, &lv21, -1.0)?;
        indirect.add_operator(1, 1, &n11, 1.0)?;
        indirect.add_identity(1, 1, -0.5)?;
        indirect.add_operator(1, 1, &lv11, -1.0)?;
        Ok(Self { outer, inner, lambda, v11, n11, v12, n12, v21, n21, v22, n22, lv21, indirect })
    }

    /// Densities (ψ, φ) with ∂_ν u = a on ∂Ω and ∂_ν u - λu = b on ∂D.
    pub fn densities(&self, a: &BoundaryDensity, b: &BoundaryDensity) -> Result<(BoundaryDensity, BoundaryDensity, f64)> {
        a.check_on(&self.outer, "outer data")?;
        b.check_on(&self.inner, "cavity data")?;
        let factored = self.indirect.factor()?;
        let mut x = factored.solve(&[a.clone(), b.clone()])?;
        let phi = x.pop().expect("two unknowns");
        let psi = x.pop().expect("two unknowns");
        Ok((psi, phi, factored.rcond))
    }

    /// Outer trace V₂₂ψ + V₁₂φ.
    pub fn outer_trace(&self, psi: &BoundaryDensity, phi: &BoundaryDensity) -> Result<BoundaryDensity> {
        Ok(sum(&apply(&self.v22, psi)?, &apply(&self.v12, phi)?))
    }

    /// Robin trace (∂_ν - λ) of the single layer V_Ω ψ on ∂D.
    pub fn robin_trace_of_outer_layer(&self, psi: &BoundaryDensity) -> Result<BoundaryDensity> {
        let mut out = apply(&self.n21, psi)?;
        out.axpy(-1.0, &apply(&self.lv21, psi)?)?;
        Ok(out)
    }

    pub fn solve_indirect(&self, f: &BoundaryDensity) -> Result<ForwardSolution> {
        let zero = BoundaryDensity::zeros_on(&self.inner);
        let (psi, phi, rcond) = self.densities(f, &zero)?;
        let u2 = sum(&apply(&self.v11, &phi)?, &apply(&self.v21, &psi)?);
        let mut u1 = apply(&self.n11, &phi)?;
        u1.axpy(-0.5, &phi)?;
        u1.axpy(1.0, &apply(&self.n21, &psi)?)?;
        let u3 = self.outer_trace(&psi, &phi)?;
        let robin_residual = robin_residual(&u1, &u2, &self.lambda);
        Ok(ForwardSolution {
            flux: f.clone(),
            u1,
            u2,
            u3,
            path: SolvePath::Indirect,
            rcond,
            robin_residual,
            flagged: robin_residual > ROBIN_TOLERANCE,
        })
    }

    pub fn direct_operators(&self) -> Result<DirectOperators> {
        self.direct_operators_with(HypersingularConfig::default())
    }

    pub fn direct_operators_with(&self, cfg: HypersingularConfig) -> Result<DirectOperators> {
        let (inner, outer) = (&self.inner, &self.outer);
        let k11 = assemble_double_layer(inner, inner)?;
        let k21 = assemble_double_layer(outer, inner)?;
        let k12 = assemble_double_layer(inner, outer)?;
        let k22 = assemble_double_layer(outer, outer)?;
        let w11 = assemble_hypersingular_with(inner, inner, cfg)?;
        let w21 = assemble_hypersingular(outer, inner)?;
        // unknowns (u₁, u₂ on ∂D, u₃ on ∂Ω)
        let mut s = CausalSystem::new(&[inner.n_s(), inner.n_s(), outer.n_s()], outer.n_t());
        s.add_operator(0, 0, &self.v11, 1.0)?;
        s.add_identity(0, 1, 0.5)?;
        s.add_operator(0, 1, &k11, -1.0)?;
        s.add_operator(0, 2, &k21, 1.0)?;
        s.add_identity(1, 0, -0.5)?;
        s.add_operator(1, 0, &self.n11, 1.0)?;
        s.add_operator(1, 1, &w11, 1.0)?;
        s.add_diagonal(1, 1, &self.lambda)?;
        s.add_operator(1, 2, &w21, -1.0)?;
        s.add_operator(2, 0, &self.v12, 1.0)?;
        s.add_operator(2, 1, &k12, -1.0)?;
        s.add_identity(2, 2, 0.5)?;
        s.add_operator(2, 2, &k22, 1.0)?;
        Ok(DirectOperators { k11, k21, k12, k22, w11, w21, system: s })
    }

    pub fn solve_direct(&self, ops: &DirectOperators, f: &BoundaryDensity) -> Result<ForwardSolution> {
        f.check_on(&self.outer, "flux")?;
        let rhs = [apply(&self.v21, f)?, apply(&self.n21, f)?, apply(&self.v22, f)?];
        let factored = ops.system.factor()?;
        let mut x = factored.solve(&rhs)?;
        let u3 = x.pop().expect("three unknowns");
        let u2 = x.pop().expect("three unknowns");
        let u1 = x.pop().expect("three unknowns");
        let robin_residual = robin_residual(&u1, &u2, &self.lambda);
        Ok(ForwardSolution {
            flux: f.clone(),
            u1,
            u2,
            u3,
            path: SolvePath::Direct,
            rcond: factored.rcond,
            robin_residual,
            flagged: robin_residual > ROBIN_TOLERANCE,
        })
    }

    pub fn ntd_indirect(&self) -> Result<NtdGapMatrix> {
        let (no, ni) = (self.outer.n_s(), self.inner.n_s());
        let mut rhs = vec![DMatrix::zeros(no + ni, no); self.outer.n_t()];
        rhs[0].view_mut((0, 0), (no, no)).fill_with_identity();
        let blocks = ntd_blocks(&self.indirect, &rhs, &[0, no], &[(0, Some(&self.v22)), (1, Some(&self.v12))], no)?;
        NtdGapMatrix::new(NtdKind::LambdaD, self.outer.dt(), blocks)
    }

    /// Blocks of f ↦ (∂_ν - λ)u^f on ∂D, u^f the cavity-free solution.
    pub fn robin_response_blocks(&self) -> Result<Vec<DMatrix<f64>>> {
        let no = self.outer.n_s();
        let mut empty = CausalSystem::new(&[no], self.outer.n_t());
        empty.add_operator(0, 0, &self.n22, 1.0)?;
        empty.add_identity(0, 0, 0.5)?;
        let mut rhs = vec![DMatrix::zeros(no, no); self.outer.n_t()];
        rhs[0] = DMatrix::identity(no, no);
        let mut robin = self.n21.clone();
        for (b, l) in robin.blocks.iter_mut().zip(&self.lv21.blocks) {
            *b -= l;
        }
        ntd_blocks(&empty, &rhs, &[0], &[(0, Some(&robin))], self.inner.n_s())
    }

    /// Blocks of g ↦ z^g on ∂Ω with ∂_ν z - λz = g on ∂D and zero flux on ∂Ω.
    pub fn cavity_response_blocks(&self) -> Result<Vec<DMatrix<f64>>> {
        let (no, ni) = (self.outer.n_s(), self.inner.n_s());
        let mut rhs = vec![DMatrix::zeros(no + ni, ni); self.outer.n_t()];
        rhs[0].view_mut((no, 0), (ni, ni)).fill_with_identity();
        ntd_blocks(&self.indirect, &rhs, &[0, no], &[(0, Some(&self.v22)), (1, Some(&self.v12))], no)
    }

    pub fn ntd_direct(&self, ops: &DirectOperators) -> Result<NtdGapMatrix> {
        let (no, ni) = (self.outer.n_s(), self.inner.n_s());
        let rhs: Vec<DMatrix<f64>> = (0..self.outer.n_t())
            .map(|m| {
                let mut r = DMatrix::zeros(2 * ni + no, no);
                r.view_mut((0, 0), (ni, no)).copy_from(&self.v21.blocks[m]);
                r.view_mut((ni, 0), (ni, no)).copy_from(&self.n21.blocks[m]);
                r.view_mut((2 * ni, 0), (no, no)).copy_from(&self.v22.blocks[m]);
                r
            })
            .collect();
        let blocks = ntd_blocks(&ops.system, &rhs, &[0, ni, 2 * ni], &[(2, None)], no)?;
        NtdGapMatrix::new(NtdKind::LambdaD, self.outer.dt(), blocks)
    }
}
