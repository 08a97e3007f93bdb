use std::time::Instant;

use anyhow::Result;
use serde_json::json;
use thermocav::error::Error;
use thermocav::forward::{solve_indirect, write_trace_csv, CavityModel, ForwardSolution};
use thermocav::geometry::Scenario;

use super::{load_scenario, prepare_out, relative_gap};
use crate::args::ForwardArgs;
use crate::flux::FluxSpec;
use crate::manifest::RunManifest;

/// Largest direct/indirect gap on u₃ reported as agreement.
pub const AGREEMENT_TOLERANCE: f64 = 1e-2;

fn write_traces(dir: &std::path::Path, prefix: &str, s: &Scenario, sol: &ForwardSolution, out: &mut Vec<String>) -> Result<()> {
    let outer = s.outer_mesh()?;
    let mut files = vec![(format!("{prefix}u3.csv"), outer, &sol.u3)];
    if let Some(inner) = s.cavity_mesh()? {
        files.push((format!("{prefix}u1.csv"), inner.clone(), &sol.u1));
        files.push((format!("{prefix}u2.csv"), inner, &sol.u2));
    }
    for (name, mesh, trace) in files {
        write_trace_csv(&dir.join(&name), &mesh, trace)?;
        out.push(name);
    }
    Ok(())
}

pub fn forward(args: &ForwardArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let (scenario, hash) = load_scenario(&args.scenario)?;
    let flux = FluxSpec::parse(&args.flux)?;
    if args.paper_system && scenario.cavity.is_none() {
        return Err(Error::Validation { path: "cavity".into(), reason: "--paper-system needs a cavity".into() }.into());
    }
    prepare_out(&args.out)?;
    let f = flux.on_mesh(&scenario.outer_mesh()?);
    let mut manifest = RunManifest::new("forward", hash);
    manifest.param("flux", &args.flux).param("paper_system", args.paper_system);

    let sol = solve_indirect(&scenario, &f)?;
    write_traces(&args.out, "", &scenario, &sol, &mut manifest.outputs)?;
    let mut summary = json!({
        "path": sol.path,
        "rcond": sol.rcond,
        "robin_residual": sol.robin_residual,
        "flagged": sol.flagged,
    });
    if args.paper_system {
        let model = CavityModel::from_scenario(&scenario)?;
        let direct = model.solve_direct(&model.direct_operators()?, &f)?;
        write_traces(&args.out, "direct_", &scenario, &direct, &mut manifest.outputs)?;
        let gap = relative_gap(&direct.u3, &sol.u3);
        summary["direct"] = json!({
            "rcond": direct.rcond,
            "robin_residual": direct.robin_residual,
            "flagged": direct.flagged,
            "u3_relative_gap": gap,
            "tolerance": AGREEMENT_TOLERANCE,
            "agrees": gap <= AGREEMENT_TOLERANCE,
        });
    }
    manifest.summary = summary;
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;
    Ok(manifest)
}
