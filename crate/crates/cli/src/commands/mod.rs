//! One module per subcommand. Each writes its files into the output
//! directory, then a manifest listing them, and returns the manifest.

mod forward;
mod halfspace;
mod reconstruct;
mod synthesize;
mod validate;

pub use forward::forward;
pub use halfspace::{halfspace, image_check, ASYMPTOTICS_FILE, CONSTANT_TOLERANCE, IMAGE_TOLERANCE};
pub use reconstruct::{parse_grid, reconstruct, CONTOUR_FILE, INDICATOR_FILE};
pub use synthesize::{synthesize, BLIND_FILE, GAP_FILE, LAMBDA_D_FILE, LAMBDA_EMPTY_FILE};
pub use validate::{validate, validate_scenario_text, Check, CheckStatus, ValidationReport, REPORT_FILE};

use std::path::Path;

use anyhow::{Context, Result};
use thermocav::geometry::Scenario;
use thermocav::potentials::BoundaryDensity;

use crate::manifest::sha256_hex;

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn load_scenario(path: &Path) -> Result<(Scenario, String)> {
    let s = Scenario::load(path).with_context(|| format!("loading scenario {}", path.display()))?;
    let hash = sha256_hex(s.canonical_json().as_bytes());
    Ok((s, hash))
}

/// ‖a - b‖ / ‖b‖ over all entries.
pub fn relative_gap(a: &BoundaryDensity, b: &BoundaryDensity) -> f64 {
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.values.iter().map(|y| y * y).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}
