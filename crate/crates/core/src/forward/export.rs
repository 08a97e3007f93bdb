use std::path::Path;

use crate::error::Result;
use crate::geometry::SpaceTimeMesh;
use crate::potentials::BoundaryDensity;

/// CSV with columns node, theta, time, value; time is the step midpoint.
pub fn write_trace_csv(path: &Path, mesh: &SpaceTimeMesh, density: &BoundaryDensity) -> Result<()> {
    density.check_on(mesh, "trace")?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["node", "theta", "time", "value"])?;
    for k in 0..mesh.n_t() {
        let t = mesh.time.midpoint(k);
        for i in 0..mesh.n_s() {
            w.write_record(&[i.to_string(), format!("{:.17e}", mesh.params[i]), format!("{t:.17e}"), format!("{:.17e}", density.get(i, k))])?;
        }
    }
    w.flush()?;
    Ok(())
}
