//! Quadrature rules: Gauss–Legendre, graded periodic product rules,
//! tanh-sinh and adaptive Gauss–Kronrod.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Push the Gauss–Legendre rule mapped onto [a, b] into `out`.
fn push_panel(out: &mut Vec<(f64, f64)>, gl: &(Vec<f64>, Vec<f64>), a: f64, b: f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (x, w) in gl.0.iter().zip(&gl.1) {
        out.push((mid + half * x, half * w));
    }
}

/// Composite rule over one period (-π, π] of offsets from a singular point at 0,
/// geometrically graded toward 0 and uniform elsewhere.
#[derive(Debug, Clone)]
pub struct GradedPeriodicRule {
    /// (offset, weight) pairs; offsets lie in (-π, π).
    pub points: Vec<(f64, f64)>,
}

impl GradedPeriodicRule {
    pub const PANELS: usize = 8;
    pub const RATIO: f64 = 0.15;

    /// `spacing` is the parameter spacing of the mesh nodes (2π/n).
    pub fn new(spacing: f64) -> Self {
        let graded = gauss_legendre(12);
        let uniform = gauss_legendre(10);
        let near = (2.0 * spacing).min(PI);
        let mut half = Vec::new();
        // graded panels on [0, near]
        let mut edges = vec![0.0];
        for k in (0..Self::PANELS).rev() {
            edges.push(near * Self::RATIO.powi(k as i32));
        }
        for w in edges.windows(2) {
            push_panel(&mut half, &graded, w[0], w[1]);
        }
        // uniform panels on [near, π]
        if near < PI {
            let count = ((PI - near) / spacing).ceil().max(1.0) as usize;
            let h = (PI - near) / count as f64;
            for k in 0..count {
                let a = near + k as f64 * h;
                push_panel(&mut half, &uniform, a, a + h);
            }
        }
        let mut points: Vec<(f64, f64)> = half.iter().map(|&(x, w)| (-x, w)).collect();
        points.reverse();
        points.extend(half);
        Self { points }
    }
}

/// Trigonometric cardinal function of an `n`-point equispaced periodic grid,
/// evaluated at parameter offset `delta` from its node.
pub fn trig_cardinal(n: usize, delta: f64) -> f64 {
    let half = 0.5 * delta;
    let s = half.sin();
    let nf = n as f64;
    if s.abs() < 1e-9 {
        // Δ ≡ 0 mod 2π
        return if n.is_multiple_of(2) && half.cos() < 0.0 { -1.0 } else { 1.0 };
    }
    if n.is_multiple_of(2) {
        (nf * half).sin() * half.cos() / (nf * s)
    } else {
        (nf * half).sin() / (nf * s)
    }
}

/// Tanh-sinh (double exponential) quadrature on [a, b] to absolute tolerance `tol`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let c = u.cosh();
        let w = 0.5 * PI * t.cosh() / (c * c);
        // distance to the nearer endpoint in [-1, 1] units, free of cancellation
        let comp = (-u.abs()).exp() / c;
        if w < 1e-300 || comp < 1e-300 {
            return 0.0;
        }
        let x = if t >= 0.0 { b - half * comp } else { a + half * comp };
        f(x) * w * half
    };
    let t_max = 3.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        let err = (next - estimate).abs();
        estimate = next;
        if err < tol {
            return Ok(estimate);
        }
    }
    Err(Error::Quadrature { achieved: f64::NAN, requested: tol })
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * GK15_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        kron += GK15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    let mut intervals = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..20_000 {
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        let err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("non-empty");
        let (lo, hi, _) = intervals.swap_remove(idx);
        let m = 0.5 * (lo + hi);
        intervals.push((lo, m, gk15(&f, lo, m)));
        intervals.push((m, hi, gk15(&f, m, hi)));
    }
    let err: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
    Err(Error::Quadrature { achieved: err, requested: abs_tol })
}
