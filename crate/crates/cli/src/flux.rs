//! Flux descriptions given on the command line.

use anyhow::{bail, Context, Result};
use thermocav::geometry::SpaceTimeMesh;
use thermocav::potentials::BoundaryDensity;

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Constant(f64),
    Cosine { amplitude: f64, mode: f64 },
    Pulse { amplitude: f64, start: f64, end: f64 },
}

impl Term {
    fn eval(&self, theta: f64, t: f64) -> f64 {
        match *self {
            Term::Constant(c) => c,
            Term::Cosine { amplitude, mode } => amplitude * (mode * theta).cos(),
            Term::Pulse { amplitude, start, end } => {
                if t > start && t < end {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }
}

/// A sum of flux terms in (θ, t).
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSpec {
    terms: Vec<Term>,
}

fn numbers(args: &str, n: usize, term: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = args
        .split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("flux term `{term}`: `{x}` is not a number")))
        .collect::<Result<_>>()?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        bail!("flux term `{term}` needs {n} finite numbers");
    }
    Ok(v)
}

impl FluxSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in text.split('+') {
            let term = raw.trim();
            let (name, args) = term.split_once(':').unwrap_or((term, ""));
            match name {
                "zero" if args.is_empty() => {}
                "constant" => terms.push(Term::Constant(numbers(args, 1, term)?[0])),
                "cosine" => {
                    let v = numbers(args, 2, term)?;
                    terms.push(Term::Cosine { amplitude: v[0], mode: v[1] });
                }
                "pulse" => {
                    let v = numbers(args, 3, term)?;
                    terms.push(Term::Pulse { amplitude: v[0], start: v[1], end: v[2] });
                }
                _ => bail!("unknown flux term `{term}` (expected zero, constant:C, cosine:C,M or pulse:C,T0,T1)"),
            }
        }
        Ok(Self { terms })
    }

    /// Values at the mesh nodes and step midpoints.
    pub fn on_mesh(&self, mesh: &SpaceTimeMesh) -> BoundaryDensity {
        BoundaryDensity::from_fn(mesh.n_s(), mesh.n_t(), |i, k| {
            let (theta, t) = (mesh.params[i], mesh.time.midpoint(k));
            self.terms.iter().map(|term| term.eval(theta, t)).sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sums_and_rejects_garbage() {
        let f = FluxSpec::parse("constant:1 + cosine:0.5,2 + pulse:2,0.1,0.3").unwrap();
        assert_eq!(f.terms.len(), 3);
        let v: f64 = f.terms.iter().map(|t| t.eval(0.0, 0.2)).sum();
        assert!((v - 3.5).abs() < 1e-15);
        assert_eq!(FluxSpec::parse("zero").unwrap().terms, vec![]);
        for bad in ["sine:1", "constant", "cosine:1", "constant:x", "pulse:1,2"] {
            assert!(FluxSpec::parse(bad).is_err(), "{bad}");
        }
    }
}
