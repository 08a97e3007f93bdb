use std::time::Instant;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thermocav::fdm::{fdm_ntd_trace, AnnulusGrid};
use thermocav::forward::{ntd_matrix, solve_indirect, CavityModel, NtdGapMatrix, ROBIN_TOLERANCE};
use thermocav::geometry::{CurveShape, Impedance, Scenario, SpaceTimeMesh};
use thermocav::potentials::{evaluate_potential, BoundaryDensity, LayerKind};
use thermocav::sampling::factorization_residual;

use super::{prepare_out, relative_gap};
use crate::args::ValidateArgs;
use crate::manifest::{sha256_hex, RunManifest};

pub const REPORT_FILE: &str = "validation.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub note: String,
}

impl Check {
    fn measured(name: &str, value: f64, threshold: f64, note: impl Into<String>) -> Self {
        let status = if value <= threshold { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { name: name.into(), status, value: Some(value), threshold: Some(threshold), note: note.into() }
    }

    fn plain(name: &str, status: CheckStatus, note: impl Into<String>) -> Self {
        Self { name: name.into(), status, value: None, threshold: None, note: note.into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub scenario_hash: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const SUITE: [&str; 8] = [
    "causality",
    "jump_relation",
    "robin_residual",
    "direct_vs_indirect",
    "reciprocity",
    "factorization",
    "fdm_oracle",
    "steady_inputs",
];

fn smooth_flux(mesh: &SpaceTimeMesh, variant: usize) -> BoundaryDensity {
    let v = variant as f64;
    BoundaryDensity::from_fn(mesh.n_s(), mesh.n_t(), |i, k| {
        let (th, t) = (mesh.params[i], mesh.time.midpoint(k) / mesh.time.horizon);
        (1.0 + 0.4 * v) * (0.7 * v + 1.3 * th).cos() + t * (v * th).sin() + 0.5 * (v + 2.0 * t).sin()
    })
}

/// Relative error of the single-layer normal-derivative jump at two offsets.
fn jump_errors(mesh: &SpaceTimeMesh) -> Result<(f64, f64)> {
    let psi = smooth_flux(mesh, 1);
    let (i, k) = (mesh.n_s() / 3, mesh.n_t() - 1);
    let t = mesh.time.midpoint(k);
    let (x, nu) = (mesh.points[i], mesh.normals[i]);
    let scale = mesh.curve.bounding_radius();
    let mut out = [0.0; 2];
    for (slot, h) in [0.02 * scale, 0.01 * scale].into_iter().enumerate() {
        let pts = [([x[0] - h * nu[0], x[1] - h * nu[1]], t), ([x[0] + h * nu[0], x[1] + h * nu[1]], t)];
        let dn = evaluate_potential(LayerKind::AdjointDouble, mesh, &psi, &pts, Some(&[nu, nu]))?;
        out[slot] = ((dn[0] - dn[1]) - psi.get(i, k)).abs() / psi.get(i, k).abs().max(1e-300);
    }
    Ok((out[0], out[1]))
}

fn reciprocity(map: &NtdGapMatrix, mesh: &SpaceTimeMesh) -> f64 {
    let dot = |a: &BoundaryDensity, b: &BoundaryDensity| -> f64 {
        a.values.iter().zip(&b.values).enumerate().map(|(idx, (x, y))| mesh.weights[idx % mesh.n_s()] * x * y).sum()
    };
    let mut worst: f64 = 0.0;
    for pair in 0..5 {
        let (f, g) = (smooth_flux(mesh, 2 * pair), smooth_flux(mesh, 2 * pair + 1));
        let (lf, lg) = match (map.apply(&f), map.apply(&g)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return f64::INFINITY,
        };
        let defect = dot(&lf, &g.time_reversed()) - dot(&lg, &f.time_reversed());
        worst = worst.max(defect.abs() / (dot(&lf, &lf).sqrt() * dot(&g, &g).sqrt()));
    }
    worst
}

/// Concentric circles with a constant impedance: the annulus oracle applies.
fn annulus(s: &Scenario) -> Option<(f64, f64, f64)> {
    let c = s.cavity.as_ref()?;
    match (&s.outer.shape, &c.curve.shape, &c.lambda) {
        (CurveShape::Circle { radius: ro }, CurveShape::Circle { radius: ri }, Impedance::Constant(l)) if s.outer.center == c.curve.center => {
            Some((*ri, *ro, *l))
        }
        _ => None,
    }
}

fn run_suite(s: &Scenario) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let outer = s.outer_mesh()?;
    let has_cavity = s.cavity.is_some();
    let map = ntd_matrix(s, has_cavity)?;
    checks.push(Check::measured("causality", map.max_acausal(), 1e-12, "largest entry above the block diagonal"));

    let (coarse, fine) = jump_errors(&outer)?;
    let mut jump = Check::measured("jump_relation", fine, 5e-2, format!("single-layer flux jump, offsets 2% → 1%: {coarse:.2e} → {fine:.2e}"));
    if fine >= coarse {
        jump.status = CheckStatus::Fail;
    }
    checks.push(jump);

    let flux = smooth_flux(&outer, 0);
    if has_cavity {
        let sol = solve_indirect(s, &flux)?;
        checks.push(Check::measured("robin_residual", sol.robin_residual, ROBIN_TOLERANCE, "‖u₁ - λu₂‖ relative"));
        let model = CavityModel::from_scenario(s)?;
        let direct = model.solve_direct(&model.direct_operators()?, &flux)?;
        checks.push(Check::measured("direct_vs_indirect", relative_gap(&direct.u3, &sol.u3), 1e-2, "relative L² gap of u₃"));
    } else {
        checks.push(Check::plain("robin_residual", CheckStatus::Skipped, "no cavity"));
        checks.push(Check::plain("direct_vs_indirect", CheckStatus::Skipped, "no cavity"));
    }
    checks.push(Check::measured("reciprocity", reciprocity(&map, &outer), 5e-2, "time-reversal reciprocity, 5 flux pairs"));

    if has_cavity {
        checks.push(Check::measured("factorization", factorization_residual(s)?, 5e-2, "‖F + AH‖ / ‖F‖"));
    } else {
        checks.push(Check {
            name: "factorization".into(),
            status: CheckStatus::Pass,
            value: Some(0.0),
            threshold: Some(5e-2),
            note: "no cavity: Λ_D = Λ_∅, F = 0 and the residual is 0 by convention".into(),
        });
    }

    match annulus(s) {
        Some((ri, ro, lambda)) => {
            let grid = AnnulusGrid::new(ri, ro, 121, 2 * outer.n_s(), 16 * outer.n_t(), s.horizon)?;
            let bem = CavityModel::from_scenario(s)?.ntd_indirect()?.apply(&flux)?;
            let fdm = fdm_ntd_trace(&grid, lambda, &flux, &outer)?;
            checks.push(Check::measured("fdm_oracle", relative_gap(&bem, &fdm), 5e-2, "outer trace against the polar finite-difference solver"));
        }
        None => checks.push(Check::plain("fdm_oracle", CheckStatus::Skipped, "only concentric circles with constant impedance")),
    }
    checks.push(Check::plain("steady_inputs", CheckStatus::Pass, "all meshes built and every solve returned finite values"));
    Ok(checks)
}

pub fn validate_scenario_text(text: &str) -> ValidationReport {
    let mut checks = Vec::new();
    let skip_rest = |checks: &mut Vec<Check>, why: &str| {
        for name in SUITE {
            checks.push(Check::plain(name, CheckStatus::Skipped, why));
        }
    };
    let parsed = match Scenario::parse(text) {
        Ok(s) => {
            checks.push(Check::plain("schema", CheckStatus::Pass, ""));
            Some(s)
        }
        Err(e) => {
            checks.push(Check::plain("schema", CheckStatus::Fail, e.to_string()));
            None
        }
    };
    let hash = parsed.as_ref().map(|s| sha256_hex(s.canonical_json().as_bytes())).unwrap_or_else(|| sha256_hex(text.as_bytes()));
    match parsed {
        None => {
            checks.push(Check::plain("orientation", CheckStatus::Skipped, "schema invalid"));
            checks.push(Check::plain("geometry", CheckStatus::Skipped, "schema invalid"));
            skip_rest(&mut checks, "schema invalid");
        }
        Some(s) => {
            let mut bad = Vec::new();
            if let Err(e) = s.outer.check_orientation() {
                bad.push(format!("outer: {e}"));
            }
            if let Some(c) = &s.cavity {
                if let Err(e) = c.curve.check_orientation() {
                    bad.push(format!("cavity: {e}"));
                }
            }
            if !bad.is_empty() {
                checks.push(Check::plain("orientation", CheckStatus::Fail, bad.join("; ")));
                checks.push(Check::plain("geometry", CheckStatus::Skipped, "orientation check failed"));
                skip_rest(&mut checks, "orientation check failed");
            } else {
                checks.push(Check::plain("orientation", CheckStatus::Pass, "counter-clockwise"));
                match s.check_geometry() {
                    Err(e) => {
                        checks.push(Check::plain("geometry", CheckStatus::Fail, e.to_string()));
                        skip_rest(&mut checks, "geometry check failed");
                    }
                    Ok(()) => {
                        checks.push(Check::plain("geometry", CheckStatus::Pass, "regular, nested, separated"));
                        match run_suite(&s) {
                            Ok(mut c) => checks.append(&mut c),
                            Err(e) => checks.push(Check::plain("steady_inputs", CheckStatus::Fail, e.to_string())),
                        }
                    }
                }
            }
        }
    }
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    ValidationReport { scenario_hash: hash, passed, checks }
}

pub fn validate(args: &ValidateArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&args.scenario)?;
    let report = validate_scenario_text(&text);
    prepare_out(&args.out)?;
    std::fs::write(args.out.join(REPORT_FILE), serde_json::to_string_pretty(&report)? + "\n")?;
    let mut manifest = RunManifest::new("validate", report.scenario_hash.clone());
    manifest.outputs.push(REPORT_FILE.into());
    let count = |st: CheckStatus| report.checks.iter().filter(|c| c.status == st).count();
    manifest.summary = json!({
        "passed": report.passed,
        "pass": count(CheckStatus::Pass),
        "fail": count(CheckStatus::Fail),
        "skipped": count(CheckStatus::Skipped),
    });
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;
    Ok(manifest)
}
