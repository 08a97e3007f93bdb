//! Boundary curves, space-time meshes, scenarios and point location.

mod curve;
mod mesh;
mod scenario;

pub use curve::{CurvePoint, CurveShape, Orientation, ParametricCurve};
pub use mesh::{build_mesh, SpaceTimeMesh, TimeGrid};
pub use scenario::{
    curve_to_json, point_location, BlindScenario, CavitySpec, Impedance, Location, Region, Scenario, BOUNDARY_TOLERANCE,
    DEFAULT_MIN_GAP,
};
