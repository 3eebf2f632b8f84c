//! Covariograms (classical, measure-weighted, functional, polarized), their radial
//! derivatives at the origin, and translated averages.

use serde::{Deserialize, Serialize};

use crate::bodies::{Ball, Body, Polytope};
use crate::error::{Error, Result};
use crate::linalg::{norm, scale};
use crate::measures::{measure_body, smooth_pieces, Density, Integrator};
use crate::numerics::{integrate_1d, monte_carlo, BoxSampler, QuadratureResult, RandomStream, Simplex, SimplexCubature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariogramMode {
    /// g_{μ,K}(x) = μ(K ∩ (K + x))
    Plain,
    /// g_{μ,f}(K, x) = ∫_{K∩(K+x)} f(y − x) φ(y) dy
    Functional,
    /// r_{μ,K}(x) = μ((K − x/2) ∩ (K + x/2))
    Polarized,
}

/// A covariogram of K with respect to μ, optionally weighted by f.
#[derive(Debug, Clone)]
pub struct CovariogramQuery<'a> {
    pub body: &'a Polytope,
    pub measure: &'a Density,
    pub weight: Option<&'a Density>,
    pub mode: CovariogramMode,
    pub integrator: Integrator,
}

impl<'a> CovariogramQuery<'a> {
    pub fn plain(body: &'a Polytope, measure: &'a Density) -> Self {
        Self { body, measure, weight: None, mode: CovariogramMode::Plain, integrator: Integrator::Cubature { tol: 1e-11 } }
    }

    pub fn polarized(body: &'a Polytope, measure: &'a Density) -> Self {
        Self { mode: CovariogramMode::Polarized, ..Self::plain(body, measure) }
    }

    pub fn functional(body: &'a Polytope, measure: &'a Density, f: &'a Density) -> Self {
        Self { weight: Some(f), mode: CovariogramMode::Functional, ..Self::plain(body, measure) }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.body.dim();
        if self.measure.dim() != n || self.weight.is_some_and(|f| f.dim() != n) {
            return Err(Error::config("covariogram query dimensions disagree"));
        }
        match (self.mode, self.weight) {
            (CovariogramMode::Functional, None) => Err(Error::config("functional covariogram needs a weight function f")),
            (CovariogramMode::Plain | CovariogramMode::Polarized, Some(_)) => {
                Err(Error::config("weight function f is only used by the functional covariogram"))
            }
            _ => Ok(()),
        }
    }

    /// Shifts (a, b) such that the integration region is (K + a·x) ∩ (K + b·x).
    fn shifts(&self) -> (f64, f64) {
        match self.mode {
            CovariogramMode::Polarized => (-0.5, 0.5),
            _ => (1.0, 0.0),
        }
    }

    fn integrand(&self, y: &[f64], x: &[f64]) -> f64 {
        let p = self.measure.eval(y);
        match self.weight {
            Some(f) => {
                let z: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
                p * f.eval(&z)
            }
            None => p,
        }
    }

    fn is_exact(&self) -> bool {
        self.measure.is_lebesgue() && self.mode != CovariogramMode::Functional
    }
}

/// g_K(x) = Vol(K ∩ (K + x)), exact.
pub fn covariogram_exact(k: &Polytope, x: &[f64]) -> f64 {
    k.covariogram(x)
}

/// Cells of the integration region on which the integrand is smooth.
fn kink_free_cells(q: &CovariogramQuery, x: &[f64]) -> Result<Vec<Simplex>> {
    let (a, b) = q.shifts();
    let pts = q.body.translate_pair_vertices(x, a, b);
    if pts.len() <= q.body.dim() {
        return Ok(Vec::new());
    }
    let region = match Polytope::from_points(&pts) {
        Ok(p) => p,
        Err(Error::Degenerate(_)) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut pieces = smooth_pieces(&region, &[q.measure])?;
    if let Some(f) = q.weight.filter(|f| f.has_kinks()) {
        // f is read at y − x, so its creases are cones from x
        let back = scale(x, -1.0);
        let mut split = Vec::new();
        for p in &pieces {
            split.extend(smooth_pieces(&p.translated(&back), &[f])?.iter().map(|r| r.translated(x)));
        }
        pieces = split;
    }
    Ok(pieces.iter().flat_map(|p| p.simplices()).collect())
}

/// Value of the requested covariogram at x.
pub fn mu_covariogram(q: &CovariogramQuery, x: &[f64]) -> Result<QuadratureResult> {
    q.validate()?;
    let k = q.body;
    let (a, b) = q.shifts();
    if q.is_exact() {
        return Ok(QuadratureResult::exact(k.translate_pair_volume(x, a, b)));
    }
    match q.integrator {
        Integrator::Cubature { tol } => {
            let cells = if q.measure.has_kinks() || q.weight.is_some_and(|f| f.has_kinks()) {
                kink_free_cells(q, x)?
            } else {
                k.translate_pair_simplices(x, a, b)
            };
            SimplexCubature::new(k.dim()).integrate(&cells, |y| q.integrand(y, x), tol)
        }
        Integrator::MonteCarlo { stream, samples } => {
            let (lo, hi) = k.bounding_box();
            let tol = k.tolerance();
            let ax = scale(x, a);
            let bx = scale(x, b);
            monte_carlo(
                &BoxSampler::new(lo, hi),
                |y| {
                    if in_translate(k, y, &ax, tol) && in_translate(k, y, &bx, tol) {
                        q.integrand(y, x)
                    } else {
                        0.0
                    }
                },
                samples,
                stream,
            )
        }
    }
}

fn in_translate(k: &Polytope, y: &[f64], shift: &[f64], tol: f64) -> bool {
    k.facets().iter().all(|f| f.normal.iter().zip(y).zip(shift).map(|((u, a), s)| u * (a - s)).sum::<f64>() <= f.offset + tol)
}

/// Weights c_j with Σ c_j D(h/2^j) the Richardson extrapolation to h → 0 of a
/// difference quotient whose error is a power series in h.
pub fn richardson_weights(levels: usize) -> Vec<f64> {
    (0..levels)
        .map(|j| {
            let mut t: Vec<Vec<f64>> = (0..levels).map(|i| if i == j { vec![1.0] } else { vec![0.0] }).collect();
            for k in 1..levels {
                let f = (1u64 << k) as f64 - 1.0;
                for i in (k..levels).rev() {
                    let v = t[i][k - 1] + (t[i][k - 1] - t[i - 1][k - 1]) / f;
                    t[i].push(v);
                }
            }
            t[levels - 1][levels - 1]
        })
        .collect()
}

/// Default first step 1e-3·diam(K).
pub fn default_step(k: &Polytope) -> f64 {
    1e-3 * k.diameter()
}

/// One-sided radial derivative of the covariogram at 0 in direction θ, by Richardson
/// extrapolated difference quotients starting at step h.
///
/// Exact and cubature paths use the steps h, h/2, …, h/2^{n−1}; the error estimate
/// compares against the same table shifted by one level. The Monte Carlo path uses
/// common random numbers with the steps {h, h/2}. A budget above `max_error` is a
/// precision error.
pub fn brightness_derivative(q: &CovariogramQuery, theta: &[f64], h: f64, max_error: f64) -> Result<QuadratureResult> {
    q.validate()?;
    let k = q.body;
    let n = k.dim();
    let len = norm(theta);
    if (len - 1.0).abs() > 1e-9 || theta.len() != n {
        return Err(Error::config("brightness direction must be a unit vector of the body's dimension"));
    }
    let reach = k.max_chord(theta);
    if !(h > 0.0 && h <= reach / 4.0 * (1.0 + 1e-12)) {
        return Err(Error::config(format!("step {h} must lie in (0, ρ_DK(θ)/4 = {}]", reach / 4.0)));
    }
    let result = match q.integrator {
        Integrator::MonteCarlo { stream, samples } if !q.is_exact() => crn_derivative(q, theta, h, stream, samples)?,
        _ => {
            let levels = n;
            let zero = mu_covariogram(q, &vec![0.0; n])?;
            let mut quot = Vec::with_capacity(levels + 1);
            let mut errs = Vec::with_capacity(levels + 1);
            for j in 0..=levels {
                let s = h / (1u64 << j) as f64;
                let g = mu_covariogram(q, &scale(theta, s))?;
                quot.push((g.value - zero.value) / s);
                errs.push((g.error_estimate + zero.error_estimate) / s);
            }
            let w = richardson_weights(levels);
            let coarse: f64 = w.iter().zip(&quot[..levels]).map(|(c, d)| c * d).sum();
            let fine: f64 = w.iter().zip(&quot[1..]).map(|(c, d)| c * d).sum();
            let noise: f64 = w.iter().zip(&errs[1..]).map(|(c, e)| c.abs() * e).sum();
            let rounding = 64.0 * f64::EPSILON * zero.value.abs() / (h / (1u64 << levels) as f64);
            QuadratureResult { value: fine, error_estimate: (fine - coarse).abs() + noise + rounding, evaluations: zero.evaluations }
        }
    };
    if result.error_estimate > max_error {
        return Err(Error::Precision(format!(
            "derivative budget {:.3e} exceeds the requested {max_error:.3e}; increase the sample count",
            result.error_estimate
        )));
    }
    Ok(result)
}

fn crn_derivative(q: &CovariogramQuery, theta: &[f64], h: f64, stream: RandomStream, samples: usize) -> Result<QuadratureResult> {
    let k = q.body;
    let (a, b) = q.shifts();
    let (lo, hi) = k.bounding_box();
    let tol = k.tolerance();
    let steps = [h, h / 2.0];
    let w = richardson_weights(2);
    let zero = vec![0.0; k.dim()];
    monte_carlo(
        &BoxSampler::new(lo, hi),
        |y| {
            let mut acc = 0.0;
            let base = if in_translate(k, y, &zero, tol) { q.integrand(y, &zero) } else { 0.0 };
            for (s, c) in steps.iter().zip(&w) {
                let x = scale(theta, *s);
                let inside = in_translate(k, y, &scale(&x, a), tol) && in_translate(k, y, &scale(&x, b), tol);
                let g = if inside { q.integrand(y, &x) } else { 0.0 };
                acc += c * (g - base) / s;
            }
            acc
        },
        samples,
        stream,
    )
}

/// Which translated average to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageKind {
    /// μ_λ(K) = (1/Vol K) ∫_{DK} g_K dμ
    MuLambda,
    /// ν_μ(K) = (1/μ(K)) ∫_{DK} g_{μ,K} dν
    NuMuBody,
    /// (1/‖f‖_{L¹(μ,K)}) ∫_{DK} g_{μ,f}(K,·) dν
    NuMuFunctional,
}

/// Translated averages. `mu` is the outer measure for `MuLambda`; for the ν_μ kinds
/// `mu` weights the covariogram and `nu` integrates it.
pub fn translated_average(
    kind: AverageKind,
    body: &Body,
    mu: &Density,
    nu: Option<&Density>,
    f: Option<&Density>,
    stream: RandomStream,
    samples: usize,
) -> Result<QuadratureResult> {
    match (kind, body) {
        (AverageKind::MuLambda, Body::Ball(b)) if mu.is_rotation_invariant() && norm(b.center()) == 0.0 => ball_mu_lambda(b, mu),
        (AverageKind::MuLambda, Body::Polytope(k)) => mu_lambda(k, mu, stream, samples),
        (AverageKind::MuLambda, Body::Ball(_)) => Err(Error::config("ball averages need a centered ball and a rotation-invariant measure")),
        (AverageKind::NuMuBody, _) | (AverageKind::NuMuFunctional, _) => {
            let k = body.as_polytope()?;
            let nu = nu.ok_or_else(|| Error::config("ν_μ averages need a second measure ν"))?;
            let f = if kind == AverageKind::NuMuFunctional {
                Some(f.ok_or_else(|| Error::config("functional average needs a weight function f"))?)
            } else {
                None
            };
            nu_mu(k, mu, nu, f, stream, samples)
        }
    }
}

fn ball_mu_lambda(b: &Ball, mu: &Density) -> Result<QuadratureResult> {
    // (1/Vol B) ∫₀^{2R} g_B(r) ∫_{S^{n−1}} φ(rθ) dθ r^{n−1} dr
    let n = b.dim();
    let area = crate::numerics::sphere_area(n);
    let e1 = crate::linalg::unit(n, 0);
    let mut failure = None;
    let r = integrate_1d(
        |r| {
            let g = b.covariogram_at(r).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            });
            g * mu.eval(&scale(&e1, r)) * r.powi(n as i32 - 1)
        },
        0.0,
        2.0 * b.radius(),
        1e-12,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let c = area / b.volume();
    Ok(QuadratureResult { value: c * r.value, error_estimate: c * r.error_estimate, evaluations: r.evaluations })
}

fn mu_lambda(k: &Polytope, mu: &Density, stream: RandomStream, samples: usize) -> Result<QuadratureResult> {
    let vol = k.volume();
    if !(vol > 0.0) {
        return Err(Error::domain("volume normalizer is zero"));
    }
    if mu.is_lebesgue() {
        return Ok(QuadratureResult::exact(vol));
    }
    let d = k.difference_body()?;
    let (lo, hi) = d.bounding_box();
    let tol = d.tolerance();
    let r = monte_carlo(&BoxSampler::new(lo, hi), |x| if d.contains_with(x, tol) { k.covariogram(x) * mu.eval(x) } else { 0.0 }, samples, stream)?;
    Ok(QuadratureResult { value: r.value / vol, error_estimate: r.error_estimate / vol, evaluations: r.evaluations })
}

/// ∫_{DK} g_{μ,f}(K,x) dν(x) = ∫_K∫_K f(z) φ_μ(y) φ_ν(y − z) dz dy, sampled in pairs.
fn nu_mu(k: &Polytope, mu: &Density, nu: &Density, f: Option<&Density>, stream: RandomStream, samples: usize) -> Result<QuadratureResult> {
    let n = k.dim();
    if mu.dim() != n || nu.dim() != n || f.is_some_and(|f| f.dim() != n) {
        return Err(Error::config("translated average dimensions disagree"));
    }
    let norm_q = match f {
        None => measure_body(mu, k, Integrator::Cubature { tol: 1e-11 })?,
        Some(f) => SimplexCubature::new(n).integrate(&k.simplices(), |y| f.eval(y) * mu.eval(y), 1e-11)?,
    };
    if !(norm_q.value > 0.0) {
        return Err(Error::domain("normalizer of the translated average is zero"));
    }
    let (lo, hi) = k.bounding_box();
    let tol = k.tolerance();
    let pair_lo = [lo.clone(), lo].concat();
    let pair_hi = [hi.clone(), hi].concat();
    let r = monte_carlo(
        &BoxSampler::new(pair_lo, pair_hi),
        |p| {
            let (y, z) = p.split_at(n);
            if !(k.contains_with(y, tol) && k.contains_with(z, tol)) {
                return 0.0;
            }
            let d: Vec<f64> = y.iter().zip(z).map(|(a, b)| a - b).collect();
            let w = f.map_or(1.0, |f| f.eval(z));
            w * mu.eval(y) * nu.eval(&d)
        },
        samples,
        stream,
    )?;
    let value = r.value / norm_q.value;
    let error = r.error_estimate / norm_q.value + value.abs() * norm_q.error_estimate / norm_q.value;
    Ok(QuadratureResult { value, error_estimate: error, evaluations: r.evaluations + norm_q.evaluations })
}
