use std::time::Instant;

use anyhow::{ensure, Result};
use serde_json::json;
use thermocav::forward::{ntd_matrix, NtdKind};
use thermocav::sampling::add_noise_to_map;

use super::{load_scenario, prepare_out};
use crate::args::SynthesizeArgs;
use crate::manifest::RunManifest;

pub const LAMBDA_D_FILE: &str = "lambda_D.bin";
pub const LAMBDA_EMPTY_FILE: &str = "lambda_empty.bin";
pub const GAP_FILE: &str = "F.bin";
/// The outer-boundary-only scenario handed to `reconstruct`.
pub const BLIND_FILE: &str = "blind.json";

pub fn synthesize(args: &SynthesizeArgs) -> Result<RunManifest> {
    let start = Instant::now();
    ensure!(args.noise >= 0.0 && args.noise.is_finite(), "--noise must be a finite non-negative level");
    let (scenario, hash) = load_scenario(&args.scenario)?;
    prepare_out(&args.out)?;
    let mut manifest = RunManifest::new("synthesize", hash);
    manifest.param("noise", args.noise).param("seed", args.seed);

    let empty = ntd_matrix(&scenario, false)?;
    let clean = if scenario.cavity.is_some() {
        ntd_matrix(&scenario, true)?
    } else {
        // without a cavity both maps are the same operator
        let mut m = empty.clone();
        m.kind = NtdKind::LambdaD;
        m
    };
    let measured = add_noise_to_map(&clean, args.noise, args.seed);
    let gap = measured.gap(&empty)?;
    let clean_gap = clean.gap(&empty)?;
    let perturbation = measured.gap(&clean)?.frobenius() / clean.frobenius();

    for (name, map) in [(LAMBDA_D_FILE, &measured), (LAMBDA_EMPTY_FILE, &empty), (GAP_FILE, &gap)] {
        map.dump(&args.out.join(name))?;
        manifest.outputs.push(name.to_string());
        manifest.outputs.push(format!("{name}.json"));
    }
    std::fs::write(args.out.join(BLIND_FILE), serde_json::to_string_pretty(&scenario.blind().to_json())? + "\n")?;
    manifest.outputs.push(BLIND_FILE.to_string());

    manifest.summary = json!({
        "has_cavity": scenario.cavity.is_some(),
        "lambda_D_norm": measured.frobenius(),
        "lambda_empty_norm": empty.frobenius(),
        "gap_norm": gap.frobenius(),
        "clean_gap_norm": clean_gap.frobenius(),
        "relative_perturbation": perturbation,
    });
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;
    Ok(manifest)
}
