//! Special functions used by the heat kernels.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral E₁(x) = ∫ₓ^∞ e^{-t}/t dt for x > 0.
///
/// Power series below 1, modified Lentz continued fraction above.
/// Returns +∞ at 0 and 0 beyond the underflow cutoff.
pub fn exp_int_e1(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x > 700.0 {
        return 0.0;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

/// (1+a)e^{-a} - (1+b)e^{-b}, accurate when both arguments are small.
pub(crate) fn one_plus_exp_diff(a: f64, b: f64) -> f64 {
    if b < 0.5 && a < 0.5 {
        // (1+a)e^{-a} = 1 + Σ_{k≥2} (-1)^k (1-k) a^k / k!
        let mut sum = 0.0;
        let mut pa = a;
        let mut pb = b;
        let mut fact = 1.0;
        for k in 2..40 {
            pa *= a;
            pb *= b;
            fact *= k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * (1.0 - k as f64) * (pa - pb) / fact;
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 4 {
                break;
            }
        }
        sum
    } else {
        (1.0 + a) * (-a).exp() - (1.0 + b) * (-b).exp()
    }
}

/// e^{-a} - e^{-b} without cancellation for nearby arguments.
pub(crate) fn exp_diff(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        return (-a).exp();
    }
    -(-a).exp() * (-(b - a)).exp_m1()
}
