//! Text records describing bodies and measures, as read by the command line.
//!
//! Bodies are either shorthand (`simplex:3`, `cube:2:0.5`, `cross:3`, `polygon:6`,
//! `ball:3:2`), an inline JSON object, or a path to a JSON file:
//!
//! ```json
//! {"type": "polytope", "vertices": [[0,0],[1,0],[0,1]], "map": [[2,0],[0,1]], "translate": [0.1, 0]}
//! ```
//!
//! Measures are `lebesgue`, `gaussian`, `radial_power:<alpha>`, `exp_norm:<body>`,
//! or the JSON forms `{"type": "gaussian"}`, `{"type": "exp_norm", "body": {...}}`, ...

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bodies::{Ball, Body, Polytope};
use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::measures::{ConcavityFamily, Density};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Polytope,
    Simplex,
    Cube,
    Cross,
    Ball,
    RegularPolygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    #[serde(rename = "type")]
    pub kind: BodyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_count: Option<usize>,
    /// Row-major linear map applied before the translation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translate: Option<Vec<f64>>,
}

fn need<T>(v: Option<T>, field: &str, kind: BodyKind) -> Result<T> {
    v.ok_or_else(|| Error::config(format!("body of type {kind:?} needs field '{field}'")))
}

impl BodySpec {
    fn bare(kind: BodyKind) -> Self {
        Self { kind, vertices: None, dimension: None, half_width: None, radius: None, vertex_count: None, map: None, translate: None }
    }

    /// Parse shorthand, inline JSON or a file path.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| Error::config(format!("body spec: {e}")));
        }
        if let Some(spec) = Self::shorthand(t)? {
            return Ok(spec);
        }
        let path = Path::new(t);
        if path.exists() {
            let raw = std::fs::read_to_string(path).map_err(|e| Error::config(format!("body file {t}: {e}")))?;
            return serde_json::from_str(&raw).map_err(|e| Error::config(format!("body file {t}: {e}")));
        }
        Err(Error::config(format!("body: '{t}' is neither shorthand, JSON nor an existing file")))
    }

    fn shorthand(t: &str) -> Result<Option<Self>> {
        let mut parts = t.split(':');
        let head = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let kind = match head {
            "simplex" => BodyKind::Simplex,
            "cube" => BodyKind::Cube,
            "cross" => BodyKind::Cross,
            "ball" => BodyKind::Ball,
            "polygon" | "regular_polygon" => BodyKind::RegularPolygon,
            _ => return Ok(None),
        };
        let num = |i: usize, field: &str| -> Result<Option<f64>> {
            args.get(i)
                .map(|s| s.parse::<f64>().map_err(|_| Error::config(format!("body {head}: field '{field}' is not a number: '{s}'"))))
                .transpose()
        };
        let int = |i: usize, field: &str| -> Result<usize> {
            let s = args.get(i).ok_or_else(|| Error::config(format!("body {head}: missing '{field}' (e.g. {head}:2)")))?;
            s.parse::<usize>().map_err(|_| Error::config(format!("body {head}: field '{field}' is not an integer: '{s}'")))
        };
        if args.len() > 2 {
            return Err(Error::config(format!("body {head}: too many ':' fields")));
        }
        let mut spec = Self::bare(kind);
        match kind {
            BodyKind::RegularPolygon => {
                spec.vertex_count = Some(int(0, "vertex_count")?);
                spec.radius = num(1, "radius")?;
            }
            _ => {
                spec.dimension = Some(int(0, "dimension")?);
                match kind {
                    BodyKind::Cube => spec.half_width = num(1, "half_width")?,
                    BodyKind::Cross | BodyKind::Ball => spec.radius = num(1, "radius")?,
                    _ if args.len() > 1 => return Err(Error::config("body simplex takes only a dimension")),
                    _ => {}
                }
            }
        }
        Ok(Some(spec))
    }

    pub fn build(&self) -> Result<Body> {
        let k = self.kind;
        let body = match k {
            BodyKind::Polytope => Body::Polytope(Polytope::from_points(need(self.vertices.as_ref(), "vertices", k)?)?),
            BodyKind::Simplex => Body::Polytope(Polytope::simplex(need(self.dimension, "dimension", k)?)?),
            BodyKind::Cube => Body::Polytope(Polytope::cube(need(self.dimension, "dimension", k)?, self.half_width.unwrap_or(1.0))?),
            BodyKind::Cross => Body::Polytope(Polytope::cross_polytope(need(self.dimension, "dimension", k)?, self.radius.unwrap_or(1.0))?),
            BodyKind::RegularPolygon => {
                Body::Polytope(Polytope::regular_polygon(need(self.vertex_count, "vertex_count", k)?, self.radius.unwrap_or(1.0))?)
            }
            BodyKind::Ball => Body::Ball(Ball::new(need(self.dimension, "dimension", k)?, self.radius.unwrap_or(1.0))?),
        };
        let body = match (&self.map, body) {
            (None, b) => b,
            (Some(m), Body::Polytope(p)) => Body::Polytope(p.apply_linear(&LinearMap::new(m.clone())?)?),
            (Some(_), Body::Ball(_)) => return Err(Error::config("field 'map' is not supported for balls")),
        };
        match (&self.translate, body) {
            (None, b) => Ok(b),
            (Some(x), b) if x.len() != b.dim() => Err(Error::config(format!("field 'translate' has length {}, expected {}", x.len(), b.dim()))),
            (Some(x), Body::Polytope(p)) => Ok(Body::Polytope(p.translated(x))),
            (Some(x), Body::Ball(b)) => Ok(Body::Ball(Ball::with_center(b.radius(), x.clone())?)),
        }
    }
}

/// Parse and build a body in one step.
pub fn parse_body(text: &str) -> Result<Body> {
    BodySpec::parse(text)?.build()
}

/// Parse a polytope, rejecting balls.
pub fn parse_polytope(text: &str) -> Result<Polytope> {
    parse_body(text)?.as_polytope().cloned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Lebesgue,
    Gaussian,
    RadialPower { alpha: f64 },
    ExpNorm { body: BodySpec },
}

impl MeasureSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| Error::config(format!("measure spec: {e}")));
        }
        match t.split_once(':') {
            None if t == "lebesgue" => Ok(MeasureSpec::Lebesgue),
            None if t == "gaussian" => Ok(MeasureSpec::Gaussian),
            Some(("radial_power", a)) => {
                let alpha = a.parse().map_err(|_| Error::config(format!("measure radial_power: field 'alpha' is not a number: '{a}'")))?;
                Ok(MeasureSpec::RadialPower { alpha })
            }
            Some(("exp_norm", b)) => Ok(MeasureSpec::ExpNorm { body: BodySpec::parse(b)? }),
            _ => {
                let path = Path::new(t);
                if path.exists() {
                    let raw = std::fs::read_to_string(path).map_err(|e| Error::config(format!("measure file {t}: {e}")))?;
                    return serde_json::from_str(&raw).map_err(|e| Error::config(format!("measure file {t}: {e}")));
                }
                Err(Error::config(format!("measure: unknown spec '{t}'")))
            }
        }
    }

    /// Density in dimension `n`.
    pub fn build(&self, n: usize) -> Result<Density> {
        let d = match self {
            MeasureSpec::Lebesgue => Density::lebesgue(n),
            MeasureSpec::Gaussian => Density::gaussian(n),
            MeasureSpec::RadialPower { alpha } => Density::radial_power(n, *alpha)?,
            MeasureSpec::ExpNorm { body } => {
                let l = body.build()?;
                Density::exp_norm(l.as_polytope()?)?
            }
        };
        if d.dim() != n {
            return Err(Error::config(format!("measure has dimension {}, body has dimension {n}", d.dim())));
        }
        Ok(d)
    }
}

/// Parse and build a density for dimension `n`.
pub fn parse_measure(text: &str, n: usize) -> Result<Density> {
    MeasureSpec::parse(text)?.build(n)
}

/// `log`, `power:<s>` or `gaussian_phi_inverse`.
pub fn parse_family(text: &str) -> Result<ConcavityFamily> {
    match text.trim().split_once(':') {
        None if text.trim() == "log" => Ok(ConcavityFamily::Log),
        None if matches!(text.trim(), "gaussian_phi_inverse" | "phi_inverse") => Ok(ConcavityFamily::GaussianPhiInverse),
        Some(("power", s)) => {
            let s: f64 = s.parse().map_err(|_| Error::config(format!("family power: exponent is not a number: '{s}'")))?;
            if !(s > 0.0) {
                return Err(Error::config(format!("family power: exponent must be positive, got {s}")));
            }
            Ok(ConcavityFamily::Power(s))
        }
        _ => Err(Error::config(format!("family: unknown '{text}' (expected log, power:<s> or gaussian_phi_inverse)"))),
    }
}

/// Comma-separated reals, e.g. `0.5,1,2`.
pub fn parse_reals(text: &str, field: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let s = s.trim();
            match s {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => s.parse::<f64>().map_err(|_| Error::config(format!("field '{field}': '{s}' is not a number"))),
            }
        })
        .collect()
}

/// Row-major matrix written `a,b;c,d`.
pub fn parse_matrix(text: &str, field: &str) -> Result<LinearMap> {
    let rows = text.split(';').map(|r| parse_reals(r, field)).collect::<Result<Vec<_>>>()?;
    LinearMap::new(rows).map_err(|e| Error::config(format!("field '{field}': {e}")))
}
