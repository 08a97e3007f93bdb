//! Reflected solution W⁺ of the 3-D heat kernel for the half-space ξ₃ < 0
//! with the impedance condition (∂_{ξ₃} - λ₀)(Γ + W⁺) = 0 on ξ₃ = 0.
//!
//! W⁺ reduces to one oscillatory integral
//!
//! L = Re ∫₀^∞ e^{-(t-s)r} (-r + 2iλ₀√r + λ₀²) / (√r (r + λ₀²)) e^{i√r(ξ₃+η₃)} dr,
//!
//! evaluated here by tanh-sinh quadrature after p = √r. Two independent
//! evaluations are provided for checking: the contour shifted through the
//! Gaussian saddle (picking up the pole residue when it is crossed) and the
//! erfc closed form.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::map_slice;
use crate::heat_kernel::gaussian;
use crate::quadrature::tanh_sinh;
use crate::special::erfc;

/// Absolute tolerance of the L quadratures.
pub const L_TOLERANCE: f64 = 1e-10;

/// Gaussian tails beyond the truncation point are below this.
const TAIL: f64 = 1e-14;

/// Source at (η′, η₃, s), target at (ξ′, ξ₃, t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfspaceConfig {
    pub lambda0: f64,
    pub xi3: f64,
    pub eta3: f64,
    pub xi_perp: [f64; 2],
    pub eta_perp: [f64; 2],
    pub t: f64,
    pub s: f64,
}

impl HalfspaceConfig {
    /// Coincident configuration ξ = η, ξ₃ = η₃ = -ε/2, t - s = ε².
    pub fn coincident(lambda0: f64, epsilon: f64) -> Self {
        Self { lambda0, xi3: -0.5 * epsilon, eta3: -0.5 * epsilon, xi_perp: [0.0; 2], eta_perp: [0.0; 2], t: epsilon * epsilon, s: 0.0 }
    }

    /// The target may sit on the boundary (ξ₃ = 0); the source must be strictly inside.
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda0, self.xi3, self.eta3, self.t, self.s, self.xi_perp[0], self.xi_perp[1], self.eta_perp[0], self.eta_perp[1]];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InputDomain("half-space configuration must be finite".into()));
        }
        if self.lambda0 < 0.0 {
            return Err(Error::InputDomain(format!("λ₀ = {} must be non-negative", self.lambda0)));
        }
        if self.xi3 > 0.0 || self.eta3 >= 0.0 {
            return Err(Error::InputDomain(format!("depths must satisfy ξ₃ ≤ 0 and η₃ < 0 (got {}, {})", self.xi3, self.eta3)));
        }
        Ok(())
    }

    fn lag(&self) -> f64 {
        self.t - self.s
    }

    fn depth_sum(&self) -> f64 {
        self.xi3 + self.eta3
    }

    fn lateral2(&self) -> f64 {
        (self.xi_perp[0] - self.eta_perp[0]).powi(2) + (self.xi_perp[1] - self.eta_perp[1]).powi(2)
    }

    /// Source mirrored across ξ₃ = 0.
    pub fn image_distance2(&self) -> f64 {
        self.lateral2() + self.depth_sum().powi(2)
    }

    pub fn distance2(&self) -> f64 {
        self.lateral2() + (self.xi3 - self.eta3).powi(2)
    }

    fn check_lag(&self) -> Result<(f64, f64, f64)> {
        self.validate()?;
        let tau = self.lag();
        if tau <= 0.0 {
            return Err(Error::InputDomain(format!("L needs t > s (t - s = {tau})")));
        }
        Ok((tau, self.depth_sum(), self.lambda0))
    }
}

/// Smallest P with bound·√(π/τ)·erfc(P√τ) below TAIL·max(1, scale).
fn gaussian_cutoff(tau: f64, bound: f64, scale: f64) -> f64 {
    let target = TAIL * scale.max(1.0);
    let mut x: f64 = 1.0;
    while bound * (PI / tau).sqrt() * erfc(x) > target && x < 40.0 {
        x += 0.25;
    }
    x / tau.sqrt()
}

/// Integrate on [0, P] with breakpoints, each piece by tanh-sinh.
fn integrate_pieces(f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let pieces = breaks.len() - 1;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += tanh_sinh(f, w[0], w[1], tol / pieces as f64)?;
        }
    }
    Ok(total)
}

fn sorted_breaks(upper: f64, interior: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend(interior.iter().copied().filter(|&x| x > 0.0 && x < upper));
    b.push(upper);
    b.sort_by(f64::total_cmp);
    b
}

/// L by quadrature in p = √r:
/// L = -2 ∫₀^∞ e^{-τp²} [(p² - λ₀²) cos(pa) + 2λ₀p sin(pa)] / (p² + λ₀²) dp, a = ξ₃ + η₃.
pub fn integral_l(cfg: &HalfspaceConfig) -> Result<f64> {
    let (tau, a, lam) = cfg.check_lag()?;
    let f = |p: f64| {
        let (s, c) = (p * a).sin_cos();
        let d = p * p + lam * lam;
        let frac = if d > 0.0 { ((p * p - lam * lam) * c + 2.0 * lam * p * s) / d } else { c };
        -2.0 * (-tau * p * p).exp() * frac
    };
    // |integrand| ≤ 2 e^{-τp²}
    let upper = gaussian_cutoff(tau, 2.0, (PI / tau).sqrt());
    let breaks = sorted_breaks(upper, &[4.0 * lam, 1.0 / tau.sqrt()]);
    integrate_pieces(&f, &breaks, L_TOLERANCE)
}

/// L through the contour p = q - ic shifted to the saddle c = -a/(2τ).
/// The pole at p = -iλ₀ is crossed when c > λ₀ and contributes 4πλ₀e^{λ₀²τ+λ₀a}.
/// Fails when the shifted contour passes within 1e-6 of the pole.
pub fn integral_l_residue(cfg: &HalfspaceConfig) -> Result<f64> {
    let (tau, a, lam) = cfg.check_lag()?;
    let c = -a / (2.0 * tau);
    let (beta, gamma) = (c + lam, lam - c);
    if gamma.abs() < 1e-6 * (c + lam).max(1e-300) {
        return Err(Error::Quadrature { achieved: f64::INFINITY, requested: L_TOLERANCE });
    }
    // Re of e^{-τq²}(q - iβ)/(q + iγ) = e^{-τq²}(q² - βγ)/(q² + γ²)
    let f = |q: f64| (-tau * q * q).exp() * (q * q - beta * gamma) / (q * q + gamma * gamma);
    let bound = 1.0f64.max((beta / gamma).abs());
    let upper = gaussian_cutoff(tau, 2.0 * bound, (PI / tau).sqrt());
    let gauss = (-a * a / (4.0 * tau)).exp();
    // the Gaussian factor multiplies the quadrature error
    let tol = L_TOLERANCE / gauss.clamp(1e-300, 1.0) / 2.0;
    let shifted = gauss * 2.0 * integrate_pieces(&f, &sorted_breaks(upper, &[4.0 * gamma.abs(), 1.0 / tau.sqrt()]), tol)?;
    let residue = if c > lam { 4.0 * PI * lam * (lam * lam * tau + lam * a).exp() } else { 0.0 };
    Ok(-(shifted - residue))
}

/// e^{x²} erfc(x), stable for large positive x.
fn erfcx(x: f64) -> f64 {
    if x < 25.0 {
        (x * x).exp() * erfc(x)
    } else {
        let x2 = x * x;
        let series = 1.0 - 0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2) + 6.5625 / (x2 * x2 * x2 * x2);
        series / (x * PI.sqrt())
    }
}

/// Closed form L = -√(π/τ)e^{-a²/4τ} + 2πλ₀ e^{λ₀a+λ₀²τ} erfc((a + 2λ₀τ)/(2√τ)).
pub fn integral_l_closed_form(cfg: &HalfspaceConfig) -> Result<f64> {
    let (tau, a, lam) = cfg.check_lag()?;
    let gauss = (-a * a / (4.0 * tau)).exp();
    let x = (a + 2.0 * lam * tau) / (2.0 * tau.sqrt());
    // e^{λa+λ²τ} erfc(x) = e^{-a²/4τ} erfcx(x)
    let pole = if x > 0.0 { gauss * erfcx(x) } else { (lam * a + lam * lam * tau).exp() * erfc(x) };
    Ok(-(PI / tau).sqrt() * gauss + 2.0 * PI * lam * pole)
}

fn assemble_w(cfg: &HalfspaceConfig, l: f64) -> f64 {
    let tau = cfg.lag();
    let lam = cfg.lambda0;
    let front = lam / (2.0 * PI * tau) * (lam * lam * tau + lam * cfg.depth_sum()).exp();
    (front - l / (8.0 * PI * PI * tau)) * (-cfg.lateral2() / (4.0 * tau)).exp()
}

/// W⁺(ξ, t; η, s) = (λ₀/(2π(t-s)) e^{λ₀²(t-s)+λ₀(ξ₃+η₃)} - L/(8π²(t-s))) e^{-|ξ′-η′|²/(4(t-s))},
/// zero for t ≤ s.
pub fn w_plus(cfg: &HalfspaceConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.lag() <= 0.0 {
        return Ok(0.0);
    }
    Ok(assemble_w(cfg, integral_l(cfg)?))
}

/// W⁺ with L from the closed form.
pub fn w_plus_closed_form(cfg: &HalfspaceConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.lag() <= 0.0 {
        return Ok(0.0);
    }
    Ok(assemble_w(cfg, integral_l_closed_form(cfg)?))
}

/// Free-space Γ(ξ, t; η, s) in 3-D.
pub fn fundamental_3d(cfg: &HalfspaceConfig) -> f64 {
    gaussian(cfg.distance2(), cfg.lag(), 3)
}

/// Γ(ξ, t; (η′, -η₃), s): the Neumann image.
pub fn image_solution(cfg: &HalfspaceConfig) -> f64 {
    gaussian(cfg.image_distance2(), cfg.lag(), 3)
}

/// 1/(8 e^{1/4} π^{3/2}), the limit of ε³W⁺ in the coincident configuration.
pub fn asymptotic_constant() -> f64 {
    1.0 / (8.0 * 0.25f64.exp() * PI.powf(1.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub epsilon: f64,
    pub w_plus: f64,
    /// ε³W⁺
    pub scaled: f64,
    /// (ε³W⁺ - C)/C
    pub deviation: f64,
    /// ε·L
    pub scaled_l: f64,
}

/// ε³W⁺(η, s+ε²; η, s) with ξ = η, ξ₃ = η₃ = -ε/2.
pub fn coincident_asymptotics(lambda0: f64, epsilons: &[f64]) -> Result<Vec<AsymptoticRow>> {
    if epsilons.is_empty() {
        return Err(Error::InputDomain("empty ε list".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InputDomain(format!("ε = {e} must be positive")));
    }
    let c = asymptotic_constant();
    map_slice(epsilons, |&eps| {
        let cfg = HalfspaceConfig::coincident(lambda0, eps);
        let l = integral_l(&cfg)?;
        let w = assemble_w(&cfg, l);
        let scaled = eps.powi(3) * w;
        Ok(AsymptoticRow { epsilon: eps, w_plus: w, scaled, deviation: (scaled - c) / c, scaled_l: eps * l })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_impedance_reduces_to_gaussian_cosine() {
        for eps in [1e-1, 1e-2, 1e-3] {
            let cfg = HalfspaceConfig::coincident(0.0, eps);
            let l = integral_l(&cfg).unwrap();
            let exact = -PI.sqrt() * (-0.25f64).exp() / eps;
            assert!((l - exact).abs() <= 1e-10 * exact.abs(), "{eps}: {l} vs {exact}");
        }
    }

    #[test]
    fn routes_agree() {
        for lam in [0.0, 0.5, 1.0, 3.0] {
            for (xi3, eta3, tau) in [(-0.3, -0.2, 0.05), (-0.05, -0.05, 0.01), (-1.0, -0.5, 0.4), (-0.01, -0.02, 2.0)] {
                let cfg = HalfspaceConfig { lambda0: lam, xi3, eta3, xi_perp: [0.1, 0.0], eta_perp: [0.0, 0.2], t: tau + 0.1, s: 0.1 };
                let q = integral_l(&cfg).unwrap();
                let c = integral_l_closed_form(&cfg).unwrap();
                assert!((q - c).abs() <= 1e-9 * c.abs().max(1.0), "λ {lam} {xi3} {eta3} {tau}: {q} vs {c}");
                if let Ok(r) = integral_l_residue(&cfg) {
                    assert!((q - r).abs() <= 1e-8 * q.abs().max(1.0), "residue λ {lam}: {q} vs {r}");
                }
            }
        }
    }

    #[test]
    fn causal_and_symmetric() {
        let mut cfg = HalfspaceConfig { lambda0: 1.0, xi3: -0.2, eta3: -0.3, xi_perp: [0.1, 0.2], eta_perp: [-0.1, 0.0], t: 0.5, s: 0.5 };
        assert_eq!(w_plus(&cfg).unwrap(), 0.0);
        cfg.t = 0.8;
        let w = w_plus(&cfg).unwrap();
        let swapped = HalfspaceConfig { xi3: cfg.eta3, eta3: cfg.xi3, xi_perp: cfg.eta_perp, eta_perp: cfg.xi_perp, ..cfg };
        assert!((w - w_plus(&swapped).unwrap()).abs() <= 1e-12 * w.abs());
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        let cfg = HalfspaceConfig::coincident(1.0, 0.1);
        assert!(w_plus(&HalfspaceConfig { eta3: 0.1, ..cfg }).is_err());
        assert!(w_plus(&HalfspaceConfig { lambda0: -1.0, ..cfg }).is_err());
        assert!(coincident_asymptotics(1.0, &[]).is_err());
        assert!(coincident_asymptotics(1.0, &[0.1, -0.1]).is_err());
    }

    #[test]
    fn constant_value() {
        assert!((asymptotic_constant() - 0.017_49).abs() < 1e-5);
    }
}
