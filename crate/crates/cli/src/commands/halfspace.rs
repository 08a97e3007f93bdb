use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thermocav::error::Error;
use thermocav::halfspace::{asymptotic_constant, coincident_asymptotics, image_solution, w_plus, HalfspaceConfig};

use super::prepare_out;
use crate::args::HalfspaceArgs;
use crate::manifest::{sha256_hex, RunManifest};

pub const ASYMPTOTICS_FILE: &str = "asymptotics.csv";
/// Relative deviation of ε³W⁺ from the constant accepted at the smallest ε.
pub const CONSTANT_TOLERANCE: f64 = 5e-2;
pub const IMAGE_TOLERANCE: f64 = 1e-8;

/// Worst relative gap between W⁺ at λ₀ = 0 and the reflected fundamental
/// solution over `count` seeded random configurations.
pub fn image_check(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let s = rng.random_range(0.0..1.0);
        let c = HalfspaceConfig {
            lambda0: 0.0,
            xi3: -rng.random_range(0.0..1.0),
            eta3: -rng.random_range(0.01..1.0),
            xi_perp: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            eta_perp: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            t: s + rng.random_range(0.01..1.0),
            s,
        };
        let exact = image_solution(&c);
        worst = worst.max((w_plus(&c)? - exact).abs() / exact.abs().max(1e-300));
    }
    Ok(worst)
}

fn parse_eps(spec: &str) -> Result<Vec<f64>> {
    let eps: Vec<f64> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("--eps: `{s}` is not a number")))
        .collect::<Result<_>>()?;
    if eps.is_empty() {
        return Err(Error::Validation { path: "eps".into(), reason: "the ε list is empty".into() }.into());
    }
    Ok(eps)
}

pub fn halfspace(args: &HalfspaceArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let eps = parse_eps(&args.eps)?;
    let rows = coincident_asymptotics(args.lambda0, &eps)?;
    prepare_out(&args.out)?;
    let hash = sha256_hex(format!("lambda0={:e};eps={:?}", args.lambda0, eps).as_bytes());
    let mut manifest = RunManifest::new("halfspace", hash);
    manifest.param("lambda0", args.lambda0).param("eps", &eps);

    // ε·|L - 4πλ₀ + e^{-1/4}√π/ε|, the remainder after the two leading terms
    let remainder = |eps: f64, scaled_l: f64| (scaled_l - 4.0 * PI * args.lambda0 * eps + (-0.25f64).exp() * PI.sqrt()).abs();
    let mut w = csv::Writer::from_path(args.out.join(ASYMPTOTICS_FILE))?;
    w.write_record(["epsilon", "w_plus", "scaled", "deviation", "scaled_l", "l_remainder"])?;
    for r in &rows {
        w.write_record(
            [r.epsilon, r.w_plus, r.scaled, r.deviation, r.scaled_l, remainder(r.epsilon, r.scaled_l)].map(|v| format!("{v:.17e}")),
        )?;
    }
    w.flush()?;
    manifest.outputs.push(ASYMPTOTICS_FILE.into());

    let finest = rows.iter().min_by(|a, b| a.epsilon.total_cmp(&b.epsilon)).expect("non-empty");
    let image = image_check(100, 2024)?;
    manifest.summary = json!({
        "constant": asymptotic_constant(),
        "finest_epsilon": finest.epsilon,
        "finest_deviation": finest.deviation,
        "tolerance": CONSTANT_TOLERANCE,
        "constant_check": if finest.deviation.abs() <= CONSTANT_TOLERANCE { "pass" } else { "fail" },
        "image_max_relative_error": image,
        "image_check": if image <= IMAGE_TOLERANCE { "pass" } else { "fail" },
    });
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;
    Ok(manifest)
}
