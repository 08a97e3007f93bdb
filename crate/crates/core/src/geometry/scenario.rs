//! Scenario files and point location.
//!
//! A scenario is a JSON object:
//!
//! ```json
//! {
//!   "outer":  {"kind": "circle", "center": [0, 0], "radius": 1.0},
//!   "cavity": {"kind": "circle", "center": [0, 0], "radius": 0.4},
//!   "lambda": 1.0,
//!   "T": 1.0, "N_s_outer": 48, "N_s_inner": 32, "N_t": 32
//! }
//! ```
//!
//! Curve kinds and their fields: `circle` (radius), `ellipse` (a, b, optional
//! rotation), `kite` (scale), `star` (radius, amplitude, arms). Every curve has
//! `center` and an optional `orientation` ("ccw" default, or "cw").
//! `lambda` is a number or an array with one value per inner node.
//! `cavity`, `lambda` and `N_s_inner` go together; `min_gap` (default 0.01) is
//! the smallest allowed distance between the curves.
//!
//! A blind scenario carries only `outer`, `T`, `N_s_outer` and `N_t`.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::curve::{CurveShape, Orientation, ParametricCurve};
use super::mesh::{build_mesh, SpaceTimeMesh};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_GAP: f64 = 0.01;
/// Distance below which a point is reported as lying on a curve.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Impedance {
    Constant(f64),
    Nodal(Vec<f64>),
}

impl Impedance {
    /// Values at the `n` inner nodes.
    pub fn at_nodes(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Impedance::Constant(v) => Ok(vec![*v; n]),
            Impedance::Nodal(v) if v.len() == n => Ok(v.clone()),
            Impedance::Nodal(v) => Err(Error::MeshMismatch(format!("lambda has {} samples, mesh has {n} nodes", v.len()))),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Impedance::Constant(v) => (*v, *v),
            Impedance::Nodal(v) => v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavitySpec {
    pub curve: ParametricCurve,
    pub lambda: Impedance,
    pub n_s: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub outer: ParametricCurve,
    pub cavity: Option<CavitySpec>,
    pub horizon: f64,
    pub n_s_outer: usize,
    pub n_t: usize,
    pub min_gap: f64,
}

/// What the reconstruction side is allowed to know.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindScenario {
    pub outer: ParametricCurve,
    pub horizon: f64,
    pub n_s_outer: usize,
    pub n_t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    InsideCavity,
    InConductor,
    Outside,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::InsideCavity => "inside_cavity",
            Region::InConductor => "in_conductor",
            Region::Outside => "outside",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub region: Region,
    /// Within [`BOUNDARY_TOLERANCE`] of either curve.
    pub on_boundary: bool,
    /// Distance to the nearest curve.
    pub distance: f64,
}

fn invalid(path: &str, reason: impl Into<String>) -> Error {
    Error::Validation { path: path.to_string(), reason: reason.into() }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| invalid(path, "expected an object"))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(invalid(&join(path, k), "unknown field"));
        }
    }
    Ok(())
}

fn get_number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => {
            let x = v.as_f64().ok_or_else(|| invalid(&join(path, key), "expected a number"))?;
            if x.is_finite() {
                Ok(Some(x))
            } else {
                Err(invalid(&join(path, key), "must be finite"))
            }
        }
    }
}

fn need_number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64> {
    get_number(obj, key, path)?.ok_or_else(|| invalid(&join(path, key), "missing required field"))
}

fn need_count(obj: &Map<String, Value>, key: &str, path: &str, min: u64) -> Result<usize> {
    let p = join(path, key);
    let v = obj.get(key).ok_or_else(|| invalid(&p, "missing required field"))?;
    let n = v.as_u64().ok_or_else(|| invalid(&p, "expected a non-negative integer"))?;
    if n < min {
        return Err(invalid(&p, format!("must be at least {min}, got {n}")));
    }
    Ok(n as usize)
}

fn parse_curve(v: &Value, path: &str) -> Result<ParametricCurve> {
    let obj = as_object(v, path)?;
    let kind = obj
        .get("kind")
        .ok_or_else(|| invalid(&join(path, "kind"), "missing required field"))?
        .as_str()
        .ok_or_else(|| invalid(&join(path, "kind"), "expected a string"))?;
    let center = match obj.get("center") {
        None => return Err(invalid(&join(path, "center"), "missing required field")),
        Some(c) => {
            let arr = c.as_array().filter(|a| a.len() == 2).ok_or_else(|| invalid(&join(path, "center"), "expected [x, y]"))?;
            let mut out = [0.0; 2];
            for (i, e) in arr.iter().enumerate() {
                out[i] = e
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| invalid(&format!("{}[{i}]", join(path, "center")), "expected a finite number"))?;
            }
            out
        }
    };
    let orientation = match obj.get("orientation") {
        None => Orientation::Ccw,
        Some(o) => match o.as_str() {
            Some("ccw") => Orientation::Ccw,
            Some("cw") => Orientation::Cw,
            _ => return Err(invalid(&join(path, "orientation"), "expected \"ccw\" or \"cw\"")),
        },
    };
    let common = ["kind", "center", "orientation"];
    let with = |extra: &[&'static str]| -> Vec<&'static str> { common.iter().chain(extra).copied().collect() };
    let shape = match kind {
        "circle" => {
            check_keys(obj, &with(&["radius"]), path)?;
            CurveShape::Circle { radius: need_number(obj, "radius", path)? }
        }
        "ellipse" => {
            check_keys(obj, &with(&["a", "b", "rotation"]), path)?;
            CurveShape::Ellipse {
                a: need_number(obj, "a", path)?,
                b: need_number(obj, "b", path)?,
                rotation: get_number(obj, "rotation", path)?.unwrap_or(0.0),
            }
        }
        "kite" => {
            check_keys(obj, &with(&["scale"]), path)?;
            CurveShape::Kite { scale: need_number(obj, "scale", path)? }
        }
        "star" => {
            check_keys(obj, &with(&["radius", "amplitude", "arms"]), path)?;
            CurveShape::Star {
                radius: need_number(obj, "radius", path)?,
                amplitude: need_number(obj, "amplitude", path)?,
                arms: need_count(obj, "arms", path, 1)? as u32,
            }
        }
        other => return Err(invalid(&join(path, "kind"), format!("unknown curve kind `{other}`"))),
    };
    ParametricCurve::new(center, shape, orientation).map_err(|e| match e {
        Error::Geometry(reason) => invalid(path, reason),
        e => e,
    })
}

pub fn curve_to_json(c: &ParametricCurve) -> Value {
    let mut v = match c.shape {
        CurveShape::Circle { radius } => json!({"kind": "circle", "radius": radius}),
        CurveShape::Ellipse { a, b, rotation } => json!({"kind": "ellipse", "a": a, "b": b, "rotation": rotation}),
        CurveShape::Kite { scale } => json!({"kind": "kite", "scale": scale}),
        CurveShape::Star { radius, amplitude, arms } => {
            json!({"kind": "star", "radius": radius, "amplitude": amplitude, "arms": arms})
        }
    };
    v["center"] = json!(c.center);
    if c.orientation == Orientation::Cw {
        v["orientation"] = json!("cw");
    }
    v
}

fn parse_impedance(v: &Value, path: &str) -> Result<Impedance> {
    let check = |x: f64, p: &str| -> Result<f64> {
        if x.is_finite() && x >= 0.0 {
            Ok(x)
        } else {
            Err(invalid(p, format!("impedance must be finite and non-negative, got {x}")))
        }
    };
    if let Some(x) = v.as_f64() {
        return Ok(Impedance::Constant(check(x, path)?));
    }
    let arr = v.as_array().ok_or_else(|| invalid(path, "expected a number or an array of numbers"))?;
    let mut out = Vec::with_capacity(arr.len());
    for (i, e) in arr.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let x = e.as_f64().ok_or_else(|| invalid(&p, "expected a number"))?;
        out.push(check(x, &p)?);
    }
    Ok(Impedance::Nodal(out))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| invalid("", format!("malformed JSON: {e}")))
}

impl Scenario {
    /// Parse and check the schema. Geometry (orientation, nesting) is checked
    /// separately by [`Scenario::check_geometry`].
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_value(&parse_json(text)?)
    }

    /// Parse, then check geometry.
    pub fn from_json(text: &str) -> Result<Self> {
        let s = Self::parse(text)?;
        s.check_geometry()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = as_object(v, "")?;
        check_keys(obj, &["outer", "cavity", "lambda", "T", "N_s_outer", "N_s_inner", "N_t", "min_gap"], "")?;
        let outer = parse_curve(obj.get("outer").ok_or_else(|| invalid("outer", "missing required field"))?, "outer")?;
        let horizon = need_number(obj, "T", "")?;
        if horizon <= 0.0 {
            return Err(invalid("T", "must be positive"));
        }
        let n_s_outer = need_count(obj, "N_s_outer", "", 8)?;
        let n_t = need_count(obj, "N_t", "", 4)?;
        let min_gap = get_number(obj, "min_gap", "")?.unwrap_or(DEFAULT_MIN_GAP);
        if min_gap <= 0.0 {
            return Err(invalid("min_gap", "must be positive"));
        }
        let cavity = match obj.get("cavity") {
            None => {
                for key in ["lambda", "N_s_inner"] {
                    if obj.contains_key(key) {
                        return Err(invalid(key, "given without a cavity"));
                    }
                }
                None
            }
            Some(c) => {
                let curve = parse_curve(c, "cavity")?;
                let lambda = parse_impedance(
                    obj.get("lambda").ok_or_else(|| invalid("lambda", "required when a cavity is present"))?,
                    "lambda",
                )?;
                let n_s = need_count(obj, "N_s_inner", "", 8)?;
                if let Impedance::Nodal(v) = &lambda {
                    if v.len() != n_s {
                        return Err(invalid("lambda", format!("has {} samples but N_s_inner is {n_s}", v.len())));
                    }
                }
                Some(CavitySpec { curve, lambda, n_s })
            }
        };
        Ok(Self { outer, cavity, horizon, n_s_outer, n_t, min_gap })
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "outer": curve_to_json(&self.outer),
            "T": self.horizon,
            "N_s_outer": self.n_s_outer,
            "N_t": self.n_t,
            "min_gap": self.min_gap,
        });
        if let Some(c) = &self.cavity {
            v["cavity"] = curve_to_json(&c.curve);
            v["N_s_inner"] = json!(c.n_s);
            v["lambda"] = match &c.lambda {
                Impedance::Constant(x) => json!(x),
                Impedance::Nodal(xs) => json!(xs),
            };
        }
        v
    }

    /// Canonical serialization (sorted keys, compact); stable input for hashing.
    pub fn canonical_json(&self) -> String {
        self.to_json().to_string()
    }

    /// Orientation, regularity and nesting checks.
    pub fn check_geometry(&self) -> Result<()> {
        let tagged = |path: &str, e: Error| match e {
            Error::Geometry(reason) => invalid(path, reason),
            e => e,
        };
        self.outer.check_regular().map_err(|e| tagged("outer", e))?;
        self.outer.check_orientation().map_err(|e| tagged("outer.orientation", e))?;
        if let Some(c) = &self.cavity {
            c.curve.check_regular().map_err(|e| tagged("cavity", e))?;
            c.curve.check_orientation().map_err(|e| tagged("cavity.orientation", e))?;
            let (lo, _) = c.lambda.bounds();
            if lo < 0.0 {
                return Err(invalid("lambda", "must be non-negative"));
            }
            let mut gap = f64::INFINITY;
            for p in c.curve.polygon(256) {
                let d = self.outer.signed_distance(p);
                if d >= 0.0 {
                    return Err(invalid("cavity", "cavity is not inside the outer curve"));
                }
                gap = gap.min(-d);
            }
            for p in self.outer.polygon(256) {
                if c.curve.signed_distance(p) <= 0.0 {
                    return Err(invalid("cavity", "outer curve passes through the cavity"));
                }
            }
            if gap < self.min_gap {
                return Err(invalid("cavity", format!("gap to outer curve {gap:.3e} is below min_gap {}", self.min_gap)));
            }
        }
        Ok(())
    }

    pub fn outer_mesh(&self) -> Result<SpaceTimeMesh> {
        build_mesh(&self.outer, self.n_s_outer, self.n_t, self.horizon)
    }

    pub fn cavity_mesh(&self) -> Result<Option<SpaceTimeMesh>> {
        self.cavity.as_ref().map(|c| build_mesh(&c.curve, c.n_s, self.n_t, self.horizon)).transpose()
    }

    /// Impedance at the inner nodes (empty without a cavity).
    pub fn lambda_nodes(&self) -> Result<Vec<f64>> {
        match &self.cavity {
            Some(c) => c.lambda.at_nodes(c.n_s),
            None => Ok(Vec::new()),
        }
    }

    pub fn without_cavity(&self) -> Self {
        Self { cavity: None, ..self.clone() }
    }

    pub fn blind(&self) -> BlindScenario {
        BlindScenario { outer: self.outer.clone(), horizon: self.horizon, n_s_outer: self.n_s_outer, n_t: self.n_t }
    }
}

impl BlindScenario {
    pub fn parse(text: &str) -> Result<Self> {
        let v = parse_json(text)?;
        let obj = as_object(&v, "")?;
        check_keys(obj, &["outer", "T", "N_s_outer", "N_t"], "")?;
        let outer = parse_curve(obj.get("outer").ok_or_else(|| invalid("outer", "missing required field"))?, "outer")?;
        let horizon = need_number(obj, "T", "")?;
        if horizon <= 0.0 {
            return Err(invalid("T", "must be positive"));
        }
        let s = Self { outer, horizon, n_s_outer: need_count(obj, "N_s_outer", "", 8)?, n_t: need_count(obj, "N_t", "", 4)? };
        s.outer.check_regular().map_err(|e| invalid("outer", e.to_string()))?;
        s.outer.check_orientation().map_err(|e| invalid("outer.orientation", e.to_string()))?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Value {
        json!({"outer": curve_to_json(&self.outer), "T": self.horizon, "N_s_outer": self.n_s_outer, "N_t": self.n_t})
    }

    /// Cavity-free scenario on the same outer boundary.
    pub fn as_scenario(&self) -> Scenario {
        Scenario {
            outer: self.outer.clone(),
            cavity: None,
            horizon: self.horizon,
            n_s_outer: self.n_s_outer,
            n_t: self.n_t,
            min_gap: DEFAULT_MIN_GAP,
        }
    }
}

/// Classify `y` against the outer curve and the cavity.
pub fn point_location(scenario: &Scenario, y: [f64; 2]) -> Location {
    let d_out = scenario.outer.signed_distance(y);
    let d_cav = scenario.cavity.as_ref().map(|c| c.curve.signed_distance(y));
    let distance = d_out.abs().min(d_cav.map_or(f64::INFINITY, f64::abs));
    let region = if d_out > 0.0 {
        Region::Outside
    } else if d_cav.is_some_and(|d| d < 0.0) {
        Region::InsideCavity
    } else {
        Region::InConductor
    };
    Location { region, on_boundary: distance <= BOUNDARY_TOLERANCE, distance }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCH: &str = r#"{"outer": {"kind": "circle", "center": [0, 0], "radius": 1.0},
        "cavity": {"kind": "circle", "center": [0, 0], "radius": 0.4},
        "lambda": 1.0, "T": 1.0, "N_s_outer": 32, "N_s_inner": 16, "N_t": 8}"#;

    #[test]
    fn parses_benchmark_and_roundtrips() {
        let s = Scenario::from_json(BENCH).unwrap();
        assert_eq!(s.n_s_outer, 32);
        assert_eq!(s.lambda_nodes().unwrap(), vec![1.0; 16]);
        let again = Scenario::from_value(&s.to_json()).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.canonical_json(), s.canonical_json());
    }

    #[test]
    fn validation_errors_carry_paths() {
        let path_of = |text: &str| match Scenario::from_json(text) {
            Err(Error::Validation { path, .. }) => path,
            other => panic!("expected validation error, got {other:?}"),
        };
        assert_eq!(path_of(&BENCH.replace("\"radius\": 1.0", "\"radius\": \"x\"")), "outer.radius");
        assert_eq!(path_of(&BENCH.replace("\"N_t\": 8", "\"N_t\": 8, \"bogus\": 1")), "bogus");
        assert_eq!(path_of(&BENCH.replace("\"lambda\": 1.0", "\"lambda\": -1.0")), "lambda");
        assert_eq!(path_of(&BENCH.replace("0.4}", "0.4, \"orientation\": \"cw\"}")), "cavity.orientation");
        assert_eq!(path_of(&BENCH.replace("0.4}", "1.5}")), "cavity");
        let no_cavity = r#"{"outer": {"kind": "circle", "center": [0, 0], "radius": 1.0},
            "lambda": 1.0, "T": 1.0, "N_s_outer": 32, "N_t": 8}"#;
        assert_eq!(path_of(no_cavity), "lambda");
    }

    #[test]
    fn blind_scenario_rejects_cavity() {
        assert!(BlindScenario::parse(BENCH).is_err());
        let s = Scenario::from_json(BENCH).unwrap();
        let b = BlindScenario::parse(&s.blind().to_json().to_string()).unwrap();
        assert_eq!(b.outer, s.outer);
    }

    #[test]
    fn locates_points() {
        let s = Scenario::from_json(BENCH).unwrap();
        assert_eq!(point_location(&s, [0.0, 0.0]).region, Region::InsideCavity);
        assert_eq!(point_location(&s, [2.0, 0.0]).region, Region::Outside);
        assert_eq!(point_location(&s, [0.7, 0.0]).region, Region::InConductor);
        assert!(point_location(&s, [0.4, 0.0]).on_boundary);
        assert!(point_location(&s, [0.0, -1.0]).on_boundary);
    }
}
