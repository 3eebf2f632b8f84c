//! Verdicts of numerical inequality checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numerics::QuadratureResult;

/// A named intermediate value and its error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: f64,
    pub error: f64,
}

impl From<QuadratureResult> for Witness {
    fn from(q: QuadratureResult) -> Self {
        Self { value: q.value, error: q.error_estimate }
    }
}

impl From<f64> for Witness {
    fn from(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

/// Outcome of checking lhs ≤ rhs (or lhs = rhs) numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs for inequalities, −|rhs − lhs| for identities; negative values are violations.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witnesses: BTreeMap<String, Witness>,
    pub config: BTreeMap<String, serde_json::Value>,
}

/// Three times the root sum of squares.
pub fn combined_tolerance(errors: &[f64]) -> f64 {
    3.0 * errors.iter().map(|e| e * e).sum::<f64>().sqrt()
}

impl Report {
    /// A check with an explicit margin and tolerance.
    pub fn new(id: &str, lhs: f64, rhs: f64, margin: f64, tolerance: f64) -> Self {
        Self { id: id.into(), lhs, rhs, margin, tolerance, pass: margin >= -tolerance, witnesses: BTreeMap::new(), config: BTreeMap::new() }
    }

    /// lhs ≤ rhs.
    pub fn inequality(id: &str, lhs: Witness, rhs: Witness) -> Self {
        Self::new(id, lhs.value, rhs.value, rhs.value - lhs.value, combined_tolerance(&[lhs.error, rhs.error]))
    }

    /// lhs = rhs.
    pub fn identity(id: &str, lhs: Witness, rhs: Witness) -> Self {
        Self::new(id, lhs.value, rhs.value, -(rhs.value - lhs.value).abs(), combined_tolerance(&[lhs.error, rhs.error]))
    }

    /// Fold several sub-checks: the worst margin relative to its own tolerance decides.
    pub fn all(id: &str, parts: &[Report]) -> Self {
        let worst = parts.iter().min_by(|a, b| (a.margin + a.tolerance).total_cmp(&(b.margin + b.tolerance))).expect("at least one sub-check");
        let mut r = Self::new(id, worst.lhs, worst.rhs, worst.margin, worst.tolerance);
        r.pass = parts.iter().all(|p| p.pass);
        for p in parts {
            for (k, w) in &p.witnesses {
                r.witnesses.insert(k.clone(), *w);
            }
        }
        r
    }

    pub fn witness(mut self, name: &str, w: impl Into<Witness>) -> Self {
        self.witnesses.insert(name.into(), w.into());
        self
    }

    pub fn config(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.config.insert(key.into(), value.into());
        self
    }

    /// Apply an absolute floor to the tolerance, for checks whose error is rounding only.
    pub fn with_tolerance_floor(mut self, floor: f64) -> Self {
        self.tolerance = self.tolerance.max(floor);
        self.pass = self.margin >= -self.tolerance;
        self
    }
}

/// Direction-wise a(θ) ≤ b(θ) for sampled radial functions with per-direction errors;
/// the direction with the least slack decides. `rel_floor` scales with |b(θ)|.
pub fn radial_inclusion(id: &str, a: (&[f64], &[f64]), b: (&[f64], &[f64]), rel_floor: f64) -> Report {
    let mut worst = (f64::INFINITY, 0.0, 0.0, 0.0, 0usize);
    for i in 0..a.0.len() {
        let tol = combined_tolerance(&[a.1[i], b.1[i]]) + rel_floor * b.0[i].abs();
        let m = b.0[i] - a.0[i];
        if m + tol < worst.0 + worst.3 {
            worst = (m, a.0[i], b.0[i], tol, i);
        }
    }
    let (m, l, r, tol, i) = worst;
    Report::new(id, l, r, m, tol).witness(&format!("{id}.direction_index"), i as f64)
}
