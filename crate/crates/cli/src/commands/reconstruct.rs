use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde_json::json;
use thermocav::forward::{NtdGapMatrix, NtdKind};
use thermocav::geometry::BlindScenario;
use thermocav::sampling::{
    extract_boundary_with, indicator_sweep, AlphaRule, RegularizationConfig, SamplingGrid, SweepConfig, ThresholdScale,
};

use super::prepare_out;
use crate::args::{ReconstructArgs, Threshold};
use crate::manifest::{sha256_hex, RunManifest};
use crate::plot::{PLOT_FILE, PLOT_SCRIPT};

pub const INDICATOR_FILE: &str = "indicator.csv";
pub const CONTOUR_FILE: &str = "contour.csv";

/// `N` (lattice covering the outer curve) or `xmin,xmax,ymin,N`.
pub fn parse_grid(spec: &str, blind: &BlindScenario) -> Result<SamplingGrid> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let count = |s: &str| s.parse::<usize>().with_context(|| format!("--grid: `{s}` is not a point count"));
    let num = |s: &str| s.parse::<f64>().with_context(|| format!("--grid: `{s}` is not a number"));
    Ok(match parts.as_slice() {
        [n] => SamplingGrid::covering(blind, count(n)?)?,
        [x0, x1, y0, n] => SamplingGrid::square(num(x0)?, num(x1)?, num(y0)?, count(n)?)?,
        _ => bail!("--grid expects `N` or `xmin,xmax,ymin,N`, got `{spec}`"),
    })
}

fn parse_alpha_grid(spec: &str) -> Result<AlphaRule> {
    let v: Vec<&str> = spec.split(',').map(str::trim).collect();
    if let [min, max, count] = v.as_slice() {
        let min: f64 = min.parse().context("--alpha-grid min")?;
        let max: f64 = max.parse().context("--alpha-grid max")?;
        let count: usize = count.parse().context("--alpha-grid count")?;
        return Ok(AlphaRule::QuasiOptimality { min, max, count });
    }
    bail!("--alpha-grid expects `min,max,count`, got `{spec}`")
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<RunManifest> {
    let start = Instant::now();
    // the blind schema has no cavity field, so the true cavity cannot leak in
    let blind = BlindScenario::load(&args.scenario).with_context(|| format!("loading {}", args.scenario.display()))?;
    let data = std::fs::read(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let gap = NtdGapMatrix::read(&args.data)?;
    ensure!(gap.kind == NtdKind::GapF, "{} holds {}, expected a gap matrix", args.data.display(), gap.kind.as_str());
    let grid = parse_grid(&args.grid, &blind)?;

    let reg = match args.alpha {
        Some(alpha) => {
            ensure!(alpha >= 0.0 && alpha.is_finite(), "--alpha must be finite and non-negative");
            RegularizationConfig { alpha, rule: AlphaRule::Fixed, noise_level: args.noise }
        }
        None => RegularizationConfig { alpha: 0.0, rule: parse_alpha_grid(&args.alpha_grid)?, noise_level: args.noise },
    };
    let mut cfg = SweepConfig::defaults(blind.horizon, &grid, reg);
    if let Some(s) = args.s {
        cfg.s = s;
    }
    if let Some(tau) = args.tau {
        cfg.tau = tau;
    }
    let scale = match args.threshold {
        Threshold::Log => ThresholdScale::Log,
        Threshold::Linear => ThresholdScale::Linear,
    };

    let hash = sha256_hex(format!("{}\n{}", blind.to_json(), sha256_hex(&data)).as_bytes());
    let mut manifest = RunManifest::new("reconstruct", hash);
    manifest
        .param("s", cfg.s)
        .param("tau", cfg.tau)
        .param("regularization", reg)
        .param("noise", args.noise)
        .param("seed", args.seed)
        .param("grid", grid)
        .param("threshold", scale)
        .param("norm", "discrete L2 on the outer boundary (quadrature weight × dt)");

    let field = indicator_sweep(&blind, &gap, &grid, &cfg)?;
    prepare_out(&args.out)?;
    field.write_csv(&args.out.join(INDICATOR_FILE))?;
    manifest.outputs.push(INDICATOR_FILE.into());
    std::fs::write(args.out.join(PLOT_FILE), PLOT_SCRIPT)?;
    manifest.outputs.push(PLOT_FILE.into());

    let near = field.points.iter().filter(|p| p.near_boundary).count();
    let failed: Vec<String> = field.points.iter().filter_map(|p| p.failure.clone()).collect();
    let boundary = match extract_boundary_with(&field, scale) {
        Ok(b) => {
            let mut w = csv::Writer::from_path(args.out.join(CONTOUR_FILE))?;
            w.write_record(["x", "y"])?;
            for p in &b.polyline {
                w.write_record([format!("{:.17e}", p[0]), format!("{:.17e}", p[1])])?;
            }
            w.flush()?;
            manifest.outputs.push(CONTOUR_FILE.into());
            let c = b.centroid();
            json!({
                "found": true,
                "level": b.level,
                "separation": b.separation,
                "loops": b.loops,
                "vertices": b.polyline.len(),
                "centroid": c,
                "mean_radius": b.mean_radius(c),
                "area": b.area(),
            })
        }
        Err(e) => json!({"found": false, "diagnostic": e.to_string()}),
    };
    manifest.summary = json!({
        "alpha": field.alpha,
        "points": field.points.len(),
        "near_boundary_points": near,
        "failed_points": failed.len(),
        "failures": failed.iter().take(10).collect::<Vec<_>>(),
        "boundary": boundary,
    });
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;
    Ok(manifest)
}
