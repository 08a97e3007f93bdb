use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::NtdGapMatrix;
use crate::potentials::BoundaryDensity;

/// How α is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum AlphaRule {
    Fixed,
    /// Geometric grid from `max` down to `min`; picks the α minimising
    /// ‖g(α_k) - g(α_{k+1})‖.
    QuasiOptimality { min: f64, max: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularizationConfig {
    pub alpha: f64,
    pub rule: AlphaRule,
    /// Relative noise level of the data, reported alongside the discrepancy.
    pub noise_level: f64,
}

impl RegularizationConfig {
    pub fn fixed(alpha: f64) -> Self {
        Self { alpha, rule: AlphaRule::Fixed, noise_level: 0.0 }
    }
}

/// Regularized solution of F g = rhs.
#[derive(Debug, Clone)]
pub struct GapSolution {
    pub g: BoundaryDensity,
    pub alpha: f64,
    /// ‖F g - rhs‖
    pub discrepancy: f64,
    /// ‖g‖
    pub norm: f64,
}

/// SVD of the (optionally weighted) gap matrix, reused for many right-hand
/// sides and many α.
///
/// With weights w the problem is min ‖Fg - b‖²_w + α‖g‖²_w, which becomes the
/// Euclidean problem for F̃ = W^{1/2} F W^{-1/2}.
pub struct GapSolver {
    n_s: usize,
    n_t: usize,
    u_t: DMatrix<f64>,
    sigma: DVector<f64>,
    v: DMatrix<f64>,
    sqrt_w: Option<Vec<f64>>,
}

/// Coefficients of one right-hand side in the left singular basis.
#[derive(Debug, Clone)]
pub struct Projected {
    pub coeffs: DVector<f64>,
    /// Squared norm of the part of rhs outside the range.
    pub orthogonal: f64,
}

impl GapSolver {
    pub fn new(gap: &NtdGapMatrix, weights: Option<&[f64]>) -> Result<Self> {
        let mut dense = gap.to_dense();
        let sqrt_w = match weights {
            Some(w) => {
                if w.len() != gap.dim() || w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::InputDomain("weights must be positive, one per unknown".into()));
                }
                let s: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
                for ((r, c), v) in dense.iter_mut().enumerate().map(|(idx, v)| ((idx % gap.dim(), idx / gap.dim()), v)) {
                    *v *= s[r] / s[c];
                }
                Some(s)
            }
            None => None,
        };
        crate::error::ensure_finite(dense.as_slice(), "gap matrix")?;
        let svd = dense.svd(true, true);
        let u_t = svd.u.expect("requested").transpose();
        let v = svd.v_t.expect("requested").transpose();
        Ok(Self { n_s: gap.n_s, n_t: gap.n_t(), u_t, sigma: svd.singular_values, v, sqrt_w })
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.sigma
    }

    pub fn largest_singular_value(&self) -> f64 {
        self.sigma.max()
    }

    fn rank_deficient(&self) -> bool {
        let max = self.sigma.max();
        max == 0.0 || self.sigma.min() <= max * self.sigma.len() as f64 * f64::EPSILON
    }

    pub fn project(&self, rhs: &BoundaryDensity) -> Result<Projected> {
        if rhs.n_s != self.n_s || rhs.n_t != self.n_t {
            return Err(Error::MeshMismatch("rhs does not match the gap matrix".into()));
        }
        let mut b = rhs.as_vector();
        if let Some(s) = &self.sqrt_w {
            b.iter_mut().zip(s).for_each(|(x, w)| *x *= w);
        }
        let coeffs = &self.u_t * &b;
        let orthogonal = (b.norm_squared() - coeffs.norm_squared()).max(0.0);
        Ok(Projected { coeffs, orthogonal })
    }

    fn filter(&self, alpha: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        // (σ/(σ²+α), α/(σ²+α))
        self.sigma.iter().map(move |&s| {
            let d = s * s + alpha;
            if d > 0.0 { (s / d, alpha / d) } else { (0.0, 1.0) }
        })
    }

    /// ‖g(α)‖ and ‖F g(α) - rhs‖ without forming g.
    pub fn norms(&self, p: &Projected, alpha: f64) -> (f64, f64) {
        let (mut g2, mut r2) = (0.0, p.orthogonal);
        for ((a, b), c) in self.filter(alpha).zip(p.coeffs.iter()) {
            g2 += (a * c).powi(2);
            r2 += (b * c).powi(2);
        }
        (g2.sqrt(), r2.sqrt())
    }

    pub fn solve_projected(&self, p: &Projected, alpha: f64) -> Result<GapSolution> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Regularization(format!("α = {alpha} must be finite and non-negative")));
        }
        if alpha == 0.0 && self.rank_deficient() {
            return Err(Error::Regularization("α = 0 with a rank-deficient gap matrix".into()));
        }
        let scaled = DVector::from_iterator(self.sigma.len(), self.filter(alpha).zip(p.coeffs.iter()).map(|((a, _), c)| a * c));
        let mut g = &self.v * scaled;
        if let Some(s) = &self.sqrt_w {
            g.iter_mut().zip(s).for_each(|(x, w)| *x /= w);
        }
        let (norm, discrepancy) = self.norms(p, alpha);
        Ok(GapSolution { g: BoundaryDensity::from_values(self.n_s, self.n_t, g.as_slice().to_vec())?, alpha, discrepancy, norm })
    }

    pub fn solve(&self, rhs: &BoundaryDensity, alpha: f64) -> Result<GapSolution> {
        self.solve_projected(&self.project(rhs)?, alpha)
    }

    /// Resolve the configured rule to one α for a set of right-hand sides.
    /// The quasi-optimality criterion is averaged in log scale over them.
    pub fn choose_alpha(&self, reg: &RegularizationConfig, samples: &[Projected]) -> Result<f64> {
        match reg.rule {
            AlphaRule::Fixed => Ok(reg.alpha),
            AlphaRule::QuasiOptimality { min, max, count } => {
                if !(min > 0.0 && max > min && count >= 3) || samples.is_empty() {
                    return Err(Error::Regularization("quasi-optimality needs 0 < min < max, ≥ 3 grid points and samples".into()));
                }
                let q = (min / max).powf(1.0 / (count - 1) as f64);
                let grid: Vec<f64> = (0..count).map(|k| max * q.powi(k as i32)).collect();
                let mut best = (f64::INFINITY, grid[0]);
                for pair in grid.windows(2) {
                    let mut score = 0.0;
                    for p in samples {
                        let step: f64 = self
                            .filter(pair[0])
                            .zip(self.filter(pair[1]))
                            .zip(p.coeffs.iter())
                            .map(|(((a, _), (b, _)), c)| ((a - b) * c).powi(2))
                            .sum();
                        score += step.sqrt().max(1e-300).ln();
                    }
                    if score < best.0 {
                        best = (score, pair[0]);
                    }
                }
                Ok(best.1)
            }
        }
    }
}

/// Tikhonov solution of F g = rhs in the coefficient (Euclidean) norm.
pub fn gap_solve(gap: &NtdGapMatrix, rhs: &BoundaryDensity, reg: &RegularizationConfig) -> Result<GapSolution> {
    let solver = GapSolver::new(gap, None)?;
    let p = solver.project(rhs)?;
    let alpha = solver.choose_alpha(reg, std::slice::from_ref(&p))?;
    solver.solve_projected(&p, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::NtdKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gap(n_s: usize, n_t: usize, seed: u64) -> NtdGapMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = (0..n_t).map(|_| DMatrix::from_fn(n_s, n_s, |_, _| rng.random_range(-1.0..1.0))).collect();
        NtdGapMatrix::new(NtdKind::GapF, 0.1, blocks).unwrap()
    }

    #[test]
    fn identity_with_unit_alpha_halves_rhs() {
        let id = NtdGapMatrix::new(NtdKind::GapF, 0.1, vec![DMatrix::identity(3, 3), DMatrix::zeros(3, 3)]).unwrap();
        let b = BoundaryDensity::from_fn(3, 2, |i, k| i as f64 - k as f64 + 0.5);
        let g = gap_solve(&id, &b, &RegularizationConfig::fixed(1.0)).unwrap();
        for (x, y) in g.g.values.iter().zip(&b.values) {
            assert!((x - y / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_dense_normal_equations() {
        let gap = random_gap(4, 5, 3);
        let rhs = BoundaryDensity::from_fn(4, 5, |i, k| ((i * 7 + k * 3) as f64).sin());
        let alpha = 0.03;
        let g = gap_solve(&gap, &rhs, &RegularizationConfig::fixed(alpha)).unwrap();
        let f = gap.to_dense();
        let lhs = f.transpose() * &f + DMatrix::identity(20, 20) * alpha;
        let oracle = lhs.lu().solve(&(f.transpose() * rhs.as_vector())).unwrap();
        let err = (g.g.as_vector() - &oracle).norm() / oracle.norm();
        assert!(err < 1e-10, "{err}");
        let disc = (&f * g.g.as_vector() - rhs.as_vector()).norm();
        assert!((disc - g.discrepancy).abs() < 1e-10 * (1.0 + disc));
    }

    #[test]
    fn weighted_solution_satisfies_weighted_normal_equations() {
        let gap = random_gap(3, 4, 9);
        let w: Vec<f64> = (0..12).map(|i| 0.5 + 0.1 * i as f64).collect();
        let rhs = BoundaryDensity::from_fn(3, 4, |i, k| (i + 2 * k) as f64 * 0.3 - 1.0);
        let solver = GapSolver::new(&gap, Some(&w)).unwrap();
        let g = solver.solve(&rhs, 0.1).unwrap();
        let f = gap.to_dense();
        let wm = DMatrix::from_diagonal(&DVector::from_vec(w));
        let lhs = f.transpose() * &wm * &f + &wm * 0.1;
        let oracle = lhs.lu().solve(&(f.transpose() * &wm * rhs.as_vector())).unwrap();
        assert!((g.g.as_vector() - &oracle).norm() < 1e-10 * oracle.norm());
    }

    #[test]
    fn over_regularized_limit_vanishes() {
        let gap = random_gap(4, 4, 5);
        let rhs = BoundaryDensity::from_fn(4, 4, |i, k| (i + k) as f64);
        let solver = GapSolver::new(&gap, None).unwrap();
        let fnorm = solver.largest_singular_value();
        let g = solver.solve(&rhs, 1e6 * fnorm * fnorm).unwrap();
        assert!(g.norm <= 1e-5 * rhs.as_vector().norm() / fnorm);
    }

    #[test]
    fn zero_alpha_on_singular_matrix_is_rejected() {
        let zero = NtdGapMatrix::new(NtdKind::GapF, 0.1, vec![DMatrix::zeros(2, 2); 2]).unwrap();
        let rhs = BoundaryDensity::from_fn(2, 2, |_, _| 1.0);
        assert!(matches!(gap_solve(&zero, &rhs, &RegularizationConfig::fixed(0.0)), Err(Error::Regularization(_))));
        assert!(gap_solve(&zero, &rhs, &RegularizationConfig::fixed(1e-3)).is_ok());
    }

    #[test]
    fn quasi_optimality_picks_a_grid_value() {
        let gap = random_gap(4, 4, 11);
        let rhs = BoundaryDensity::from_fn(4, 4, |i, k| (i as f64 - k as f64).cos());
        let reg = RegularizationConfig { alpha: 0.0, rule: AlphaRule::QuasiOptimality { min: 1e-8, max: 1.0, count: 9 }, noise_level: 0.0 };
        let g = gap_solve(&gap, &rhs, &reg).unwrap();
        let k = -g.alpha.log10();
        assert!((k - k.round()).abs() < 1e-9 && (0.0..8.0).contains(&k.round()), "{}", g.alpha);
    }
}
