use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::forward::NtdGapMatrix;

fn normal() -> Normal<f64> {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Componentwise Gaussian noise with standard deviation level·‖data‖/√count.
pub fn add_noise(data: &[f64], level: f64, seed: u64) -> Vec<f64> {
    if level == 0.0 || data.is_empty() {
        return data.to_vec();
    }
    let norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sd = level.abs() * norm / (data.len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = normal();
    data.iter().map(|x| x + sd * dist.sample(&mut rng)).collect()
}

/// Noise on the block sequence of an NtD map, so the perturbed map stays
/// causal and Toeplitz. The standard deviation is set so that the expected
/// relative perturbation of the full space-time matrix equals `level`.
pub fn add_noise_to_map(map: &NtdGapMatrix, level: f64, seed: u64) -> NtdGapMatrix {
    if level == 0.0 {
        return map.clone();
    }
    let n_t = map.n_t();
    let entries = (map.n_s * map.n_s * n_t * (n_t + 1) / 2) as f64;
    let sd = level.abs() * map.frobenius() / entries.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = normal();
    let blocks = map
        .blocks
        .iter()
        .map(|b| {
            // column-major fill, fixed order
            let noise = DMatrix::from_fn(b.nrows(), b.ncols(), |_, _| sd * dist.sample(&mut rng));
            b + noise
        })
        .collect();
    NtdGapMatrix { blocks, ..map.clone() }
}
