//! The heat fundamental solution Γ(x,t;y,s) = (4π(t-s))^{-n/2} exp(-|x-y|²/(4(t-s)))
//! in two and three dimensions, its derivatives, and closed-form time
//! integrals of the 2-D kernels used by the boundary element assembly.

use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::special::{exp_diff, exp_int_e1, one_plus_exp_diff};

/// Exponent beyond which the Gaussian is flushed to exactly zero.
pub const EXPONENT_CUTOFF: f64 = 700.0;

/// A point in space-time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: &[f64], t: f64) -> Result<Self> {
        check_dim(x.len())?;
        ensure_finite(x, "space-time point")?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InputDomain(format!("time must be finite and non-negative, got {t}")));
        }
        Ok(Self { x: x.to_vec(), t })
    }
}

/// Kernel value with its gradient in one argument and, optionally, a normal derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub normal_derivative: Option<f64>,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::InputDomain(format!("dimension must be 2 or 3, got {n}")))
    }
}

fn check_args(x: &[f64], t: f64, y: &[f64], s: f64) -> Result<()> {
    check_dim(x.len())?;
    if x.len() != y.len() {
        return Err(Error::InputDomain("points have different dimensions".into()));
    }
    ensure_finite(x, "x")?;
    ensure_finite(y, "y")?;
    ensure_finite(&[t, s], "time arguments")
}

fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Γ for an already validated squared distance and time lag.
#[inline]
pub fn gaussian(r2: f64, lag: f64, dim: usize) -> f64 {
    if lag <= 0.0 {
        return 0.0;
    }
    let e = r2 / (4.0 * lag);
    if e > EXPONENT_CUTOFF {
        return 0.0;
    }
    let norm = match dim {
        2 => 4.0 * PI * lag,
        3 => (4.0 * PI * lag).powf(1.5),
        _ => (4.0 * PI * lag).powf(dim as f64 / 2.0),
    };
    (-e).exp() / norm
}

/// The heat fundamental solution; exactly zero for t ≤ s.
pub fn fundamental_solution(x: &[f64], t: f64, y: &[f64], s: f64) -> Result<f64> {
    check_args(x, t, y, s)?;
    Ok(gaussian(dist2(x, y), t - s, x.len()))
}

/// Derivatives of Γ: the first entry carries ∇ₓΓ and ν(x)·∇ₓΓ, the second
/// ∇ᵧΓ and ν(y)·∇ᵧΓ. Every field vanishes for t ≤ s.
pub fn kernel_derivatives(
    x: &[f64],
    t: f64,
    y: &[f64],
    s: f64,
    normal_at_x: &[f64],
    normal_at_y: &[f64],
) -> Result<(KernelEval, KernelEval)> {
    check_args(x, t, y, s)?;
    let n = x.len();
    if normal_at_x.len() != n || normal_at_y.len() != n {
        return Err(Error::InputDomain("normal has wrong dimension".into()));
    }
    ensure_finite(normal_at_x, "normal at x")?;
    ensure_finite(normal_at_y, "normal at y")?;
    for nu in [normal_at_x, normal_at_y] {
        let len: f64 = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (len - 1.0).abs() > 1e-8 {
            return Err(Error::InputDomain(format!("normal is not unit length (|ν| = {len})")));
        }
    }
    let lag = t - s;
    let value = gaussian(dist2(x, y), lag, n);
    let scale = if lag > 0.0 { value / (2.0 * lag) } else { 0.0 };
    let grad_x: Vec<f64> = x.iter().zip(y).map(|(a, b)| -(a - b) * scale).collect();
    let grad_y: Vec<f64> = grad_x.iter().map(|g| -g).collect();
    let dn_x = grad_x.iter().zip(normal_at_x).map(|(g, v)| g * v).sum();
    let dn_y = grad_y.iter().zip(normal_at_y).map(|(g, v)| g * v).sum();
    Ok((
        KernelEval { value, gradient: grad_x, normal_derivative: Some(dn_x) },
        KernelEval { value, gradient: grad_y, normal_derivative: Some(dn_y) },
    ))
}

/// The Robin kernel ∂_{ν(x)}Γ - λ(x)Γ.
pub fn robin_kernel(x: &[f64], t: f64, y: &[f64], s: f64, lambda_at_x: f64, normal_at_x: &[f64]) -> Result<f64> {
    if !(lambda_at_x >= 0.0 && lambda_at_x.is_finite()) {
        return Err(Error::InputDomain(format!("impedance must be non-negative, got {lambda_at_x}")));
    }
    let (at_x, _) = kernel_derivatives(x, t, y, s, normal_at_x, normal_at_x)?;
    Ok(at_x.normal_derivative.unwrap_or(0.0) - lambda_at_x * at_x.value)
}

/// ∫_{lo}^{hi} Γ₂(r, τ) dτ = (E₁(r²/4hi) - E₁(r²/4lo)) / 4π for 0 ≤ lo < hi.
#[inline]
pub fn single_time_integral(r2: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo || hi <= 0.0 {
        return 0.0;
    }
    if r2 == 0.0 {
        return if lo > 0.0 { (hi / lo).ln() / (4.0 * PI) } else { f64::INFINITY };
    }
    let a = r2 / (4.0 * hi);
    if a > EXPONENT_CUTOFF {
        return 0.0;
    }
    let upper = exp_int_e1(a);
    let lower = if lo > 0.0 { exp_int_e1(r2 / (4.0 * lo)) } else { 0.0 };
    (upper - lower) / (4.0 * PI)
}

/// ∫_{lo}^{hi} Γ₂(r, τ)/(2τ) dτ. Multiply by -(x-y) for the time-integrated ∇ₓΓ.
#[inline]
pub fn grad_time_integral(r2: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo || hi <= 0.0 {
        return 0.0;
    }
    if r2 == 0.0 {
        return if lo > 0.0 { (1.0 / lo - 1.0 / hi) / (8.0 * PI) } else { f64::INFINITY };
    }
    let a = r2 / (4.0 * hi);
    if a > EXPONENT_CUTOFF {
        return 0.0;
    }
    let b = if lo > 0.0 { r2 / (4.0 * lo) } else { f64::INFINITY };
    exp_diff(a, b) / (2.0 * PI * r2)
}

/// ∫_{lo}^{hi} Γ₂(r, τ)/(4τ²) dτ, the coefficient of (ν·d)(ν'·d) in ∂ν∂ν'Γ.
#[inline]
pub fn hessian_time_integral(r2: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo || hi <= 0.0 {
        return 0.0;
    }
    if r2 == 0.0 {
        return if lo > 0.0 { (1.0 / (lo * lo) - 1.0 / (hi * hi)) / (32.0 * PI) } else { f64::INFINITY };
    }
    let a = r2 / (4.0 * hi);
    if a > EXPONENT_CUTOFF {
        return 0.0;
    }
    let b = if lo > 0.0 { r2 / (4.0 * lo) } else { f64::INFINITY };
    let diff = if b > EXPONENT_CUTOFF { (1.0 + a) * (-a).exp() } else { one_plus_exp_diff(a, b) };
    diff / (PI * r2 * r2)
}

/// ∫_{lo}^{hi} τ·Γ₂(r, τ) dτ, the first time moment used by the linear
/// density correction on the current half step.
#[inline]
pub fn single_time_moment(r2: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo || hi <= 0.0 {
        return 0.0;
    }
    let a = 0.25 * r2;
    if a / hi > EXPONENT_CUTOFF {
        return 0.0;
    }
    // antiderivative τe^{-a/τ} - a·E₁(a/τ), zero at τ = 0
    let anti = |tau: f64| {
        if tau <= 0.0 || a / tau > EXPONENT_CUTOFF {
            0.0
        } else if a == 0.0 {
            tau
        } else {
            tau * (-a / tau).exp() - a * exp_int_e1(a / tau)
        }
    };
    (anti(hi) - anti(lo)) / (4.0 * PI)
}
