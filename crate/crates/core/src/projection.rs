//! Projection bodies as weighted zonoids, offset vectors η and τ, brightness
//! residuals, the linear transform law and polar volumes.

use serde::{Deserialize, Serialize};

use crate::bodies::Polytope;
use crate::covariogram::{brightness_derivative, CovariogramQuery};
use crate::error::{Error, Result};
use crate::linalg::{add, dot, norm, scale, sub, LinearMap};
use crate::measures::{facet_weights, integrate_vector_over_body, smooth_pieces, Density, Integrator};
use crate::numerics::{QuadratureResult, SphereGrid};

/// Segment generator ±(w/2)u of a zonoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub direction: Vec<f64>,
    pub weight: f64,
    pub error: f64,
}

/// Zonoid with support h(θ) = ½ Σ wᵢ|⟨θ,uᵢ⟩| − ⟨c,θ⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zonoid {
    dim: usize,
    generators: Vec<Generator>,
    offset: Vec<f64>,
    offset_error: f64,
}

impl Zonoid {
    pub fn new(dim: usize, generators: Vec<Generator>) -> Result<Self> {
        if generators.iter().any(|g| g.direction.len() != dim || !(g.weight >= 0.0)) {
            return Err(Error::config("zonoid generators need matching dimension and nonnegative weights"));
        }
        Ok(Self { dim, generators, offset: vec![0.0; dim], offset_error: 0.0 })
    }

    /// The same zonoid translated by −c.
    pub fn with_offset(mut self, c: &OffsetVector) -> Self {
        self.offset = c.value.clone();
        self.offset_error = c.error_estimate;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn total_weight(&self) -> f64 {
        self.generators.iter().map(|g| g.weight).sum()
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        0.5 * self.generators.iter().map(|g| g.weight * dot(&g.direction, theta).abs()).sum::<f64>() - dot(&self.offset, theta)
    }

    /// Propagated error bound of `support` at θ.
    pub fn support_error(&self, theta: &[f64]) -> f64 {
        0.5 * self.generators.iter().map(|g| g.error * dot(&g.direction, theta).abs()).sum::<f64>() + self.offset_error * norm(theta)
    }

    /// The zonotope Σ [−wᵢuᵢ/2, wᵢuᵢ/2] − c as a polytope.
    pub fn to_polytope(&self) -> Result<Polytope> {
        let mut pts: Vec<Vec<f64>> = vec![scale(&self.offset, -1.0)];
        for g in self.generators.iter().filter(|g| g.weight > 0.0) {
            let half = scale(&g.direction, 0.5 * g.weight);
            pts = pts.iter().flat_map(|p| [add(p, &half), sub(p, &half)]).collect();
            // prune to hull vertices once the partial sum is full-dimensional
            if pts.len() > 4 * (self.dim + 1) {
                if let Ok(hull) = Polytope::from_points(&pts) {
                    pts = hull.vertices().to_vec();
                }
            }
        }
        Polytope::from_points(&pts)
    }

    /// Support of the zonoid reflected through the origin (offset negated as well).
    pub fn reflected(&self) -> Self {
        Self {
            dim: self.dim,
            generators: self.generators.iter().map(|g| Generator { direction: g.direction.iter().map(|t| -t).collect(), ..g.clone() }).collect(),
            offset: self.offset.iter().map(|t| -t).collect(),
            offset_error: self.offset_error,
        }
    }
}

/// Facet weighting that defines a projection body.
#[derive(Debug, Clone, Copy)]
pub enum Weighting<'a> {
    Lebesgue,
    Measure(&'a Density),
    /// (μ, f): weights ∫_F f φ
    Functional(&'a Density, &'a Density),
}

/// Π K, Π_μ K or Π_{μ,K} f: one generator per facet.
pub fn projection_zonoid(k: &Polytope, weighting: Weighting, tol: f64) -> Result<Zonoid> {
    let weights = match weighting {
        Weighting::Lebesgue => facet_weights(&Density::lebesgue(k.dim()), k, None, tol)?,
        Weighting::Measure(mu) => facet_weights(mu, k, None, tol)?,
        Weighting::Functional(mu, f) => facet_weights(mu, k, Some(f), tol)?,
    };
    let gens =
        k.facets().iter().zip(&weights).map(|(f, w)| Generator { direction: f.normal.clone(), weight: w.value, error: w.error_estimate }).collect();
    Zonoid::new(k.dim(), gens)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetKind {
    Eta,
    Tau,
}

/// η_{μ,K} = ½∫_K ∇φ or τ_{μ,f,K} = ½∫_K (f∇φ − φ∇f), each computed two ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetVector {
    pub kind: OffsetKind,
    pub value: Vec<f64>,
    /// Euclidean error bound of `value`.
    pub error_estimate: f64,
    /// The independent second computation (interior form for η, boundary form for τ).
    pub cross_check: Vec<f64>,
    pub cross_check_error: f64,
    /// Scale used for the zero test, Σ wᵢ over the facets.
    pub scale: f64,
}

impl OffsetVector {
    pub fn is_projective(&self) -> bool {
        norm(&self.value) <= 3.0 * self.error_estimate + 1e-12 * self.scale
    }

    /// The two computations agree within their combined budget.
    pub fn is_consistent(&self) -> bool {
        let d: Vec<f64> = self.value.iter().zip(&self.cross_check).map(|(a, b)| a - b).collect();
        norm(&d) <= 3.0 * (self.error_estimate + self.cross_check_error) + 1e-12 * self.scale
    }
}

/// Interior vector integral, split where the densities have kinks when using cubature.
fn interior_integral<F>(k: &Polytope, densities: &[&Density], method: Integrator, components: usize, f: F) -> Result<Vec<QuadratureResult>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if let Integrator::MonteCarlo { .. } = method {
        return integrate_vector_over_body(k, method, components, f);
    }
    let pieces = smooth_pieces(k, densities)?;
    let mut acc = vec![QuadratureResult::exact(0.0); components];
    for p in &pieces {
        for (a, r) in acc.iter_mut().zip(integrate_vector_over_body(p, method, components, &f)?) {
            a.value += r.value;
            a.error_estimate += r.error_estimate;
            a.evaluations += r.evaluations;
        }
    }
    Ok(acc)
}

fn euclid(rs: &[QuadratureResult]) -> f64 {
    rs.iter().map(|r| r.error_estimate * r.error_estimate).sum::<f64>().sqrt()
}

/// η (f = None) or τ (f given). The facet form is authoritative for η; the interior form for τ.
pub fn offset_vector(k: &Polytope, mu: &Density, f: Option<&Density>, method: Integrator, tol: f64) -> Result<OffsetVector> {
    let n = k.dim();
    let boundary = |w: &[QuadratureResult]| -> (Vec<f64>, f64, f64) {
        let mut v = vec![0.0; n];
        let mut e = 0.0;
        let mut s = 0.0;
        for (fa, q) in k.facets().iter().zip(w) {
            v.iter_mut().zip(&fa.normal).for_each(|(a, u)| *a += 0.5 * q.value * u);
            e += 0.5 * q.error_estimate;
            s += q.value;
        }
        (v, e, s)
    };
    match f {
        None => {
            let w = facet_weights(mu, k, None, tol)?;
            let (value, error, scale) = boundary(&w);
            let inner = if mu.is_lebesgue() {
                vec![QuadratureResult::exact(0.0); n]
            } else {
                interior_integral(k, &[mu], method, n, |x, out| out.iter_mut().zip(mu.grad(x)).for_each(|(o, g)| *o = 0.5 * g))?
            };
            Ok(OffsetVector {
                kind: OffsetKind::Eta,
                value,
                error_estimate: error,
                cross_check: inner.iter().map(|r| r.value).collect(),
                cross_check_error: euclid(&inner),
                scale,
            })
        }
        Some(f) => {
            // τ = ½∫(f∇φ − φ∇f);  cross-check ½∫_{∂K} n fφ − ∫_K φ∇f
            let parts = interior_integral(k, &[mu, f], method, 2 * n, |x, out| {
                let (p, q) = (mu.eval(x), f.eval(x));
                let (gp, gq) = (mu.grad(x), f.grad(x));
                for i in 0..n {
                    out[i] = 0.5 * (q * gp[i] - p * gq[i]);
                    out[n + i] = p * gq[i];
                }
            })?;
            let w = facet_weights(mu, k, Some(f), tol)?;
            let (bv, be, scale) = boundary(&w);
            let check: Vec<f64> = (0..n).map(|i| bv[i] - parts[n + i].value).collect();
            Ok(OffsetVector {
                kind: OffsetKind::Tau,
                value: parts[..n].iter().map(|r| r.value).collect(),
                error_estimate: euclid(&parts[..n]),
                cross_check: check,
                cross_check_error: be + euclid(&parts[n..]),
                scale,
            })
        }
    }
}

/// Which covariogram the brightness identity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrightnessMode {
    Plain,
    Polarized,
    Functional,
}

/// Numerical settings for brightness checks.
#[derive(Debug, Clone, Copy)]
pub struct BrightnessOptions {
    /// Integrator for covariogram values and interior offset integrals.
    pub integrator: Integrator,
    /// First difference step; `None` picks 1e-3·diam(K).
    pub step: Option<f64>,
    /// Facet cubature tolerance.
    pub tol: f64,
}

impl Default for BrightnessOptions {
    fn default() -> Self {
        Self { integrator: Integrator::Cubature { tol: 1e-11 }, step: None, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrightnessResidual {
    pub derivative: QuadratureResult,
    pub support: f64,
    pub support_error: f64,
    /// |derivative + support|
    pub residual: f64,
    /// Combined error budget, derivative error plus support error.
    pub budget: f64,
}

impl BrightnessResidual {
    pub fn within(&self, factor: f64) -> bool {
        self.residual <= factor * self.budget
    }
}

/// Compare the finite-difference brightness against the support of the offset projection body.
pub fn brightness_residual(
    k: &Polytope,
    mu: &Density,
    f: Option<&Density>,
    theta: &[f64],
    mode: BrightnessMode,
    opts: BrightnessOptions,
) -> Result<BrightnessResidual> {
    let (query, zonoid) = match (mode, f) {
        (BrightnessMode::Plain, None) => {
            let eta = offset_vector(k, mu, None, opts.integrator, opts.tol)?;
            (CovariogramQuery::plain(k, mu), projection_zonoid(k, Weighting::Measure(mu), opts.tol)?.with_offset(&eta))
        }
        (BrightnessMode::Polarized, None) => {
            if !k.is_symmetric() || !mu.flags().even {
                return Err(Error::hypothesis("polarized brightness needs a symmetric body and an even measure"));
            }
            (CovariogramQuery::polarized(k, mu), projection_zonoid(k, Weighting::Measure(mu), opts.tol)?)
        }
        (BrightnessMode::Functional, Some(f)) => {
            let tau = offset_vector(k, mu, Some(f), opts.integrator, opts.tol)?;
            (CovariogramQuery::functional(k, mu, f), projection_zonoid(k, Weighting::Functional(mu, f), opts.tol)?.with_offset(&tau))
        }
        (BrightnessMode::Functional, None) => return Err(Error::config("functional brightness needs f")),
        (_, Some(_)) => return Err(Error::config("f is only used in functional mode")),
    };
    let query = query.with_integrator(opts.integrator);
    let h = opts.step.unwrap_or_else(|| crate::covariogram::default_step(k));
    let d = brightness_derivative(&query, theta, h, f64::INFINITY)?;
    let support = zonoid.support(theta);
    let support_error = zonoid.support_error(theta);
    Ok(BrightnessResidual { residual: (d.value + support).abs(), budget: d.error_estimate + support_error, derivative: d, support, support_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformResidual {
    /// max_θ |h_{Π_μ(TK)}(θ) − |det T| h_{Π_{μ^T}K}(T⁻¹θ)| / max_θ h_{Π_μ(TK)}(θ)
    pub residual: f64,
    pub budget: f64,
}

/// Π_μ(TK) = |det T| T^{−t} Π_{μ^T} K, checked on the grid.
pub fn transform_law_residual(k: &Polytope, mu: &Density, t: &LinearMap, grid: &SphereGrid, tol: f64) -> Result<TransformResidual> {
    if !t.is_invertible() {
        return Err(Error::config("transform law needs an invertible map"));
    }
    let tk = k.apply_linear(t)?;
    let lhs = projection_zonoid(&tk, Weighting::Measure(mu), tol)?;
    let pulled = mu.pullback(t)?;
    let rhs = projection_zonoid(k, Weighting::Measure(&pulled), tol)?;
    let tinv = t.inverse()?;
    let det = t.det().abs();
    let mut worst = 0.0f64;
    let mut budget = 0.0f64;
    let mut scale = 0.0f64;
    for theta in grid.directions() {
        let a = lhs.support(theta);
        let y = tinv.apply(theta);
        let b = det * rhs.support(&y);
        scale = scale.max(a.abs());
        worst = worst.max((a - b).abs());
        budget = budget.max(lhs.support_error(theta) + det * rhs.support_error(&y));
    }
    let scale = scale.max(f64::MIN_POSITIVE);
    Ok(TransformResidual { residual: worst / scale, budget: budget / scale })
}

/// Vol(L°) = (1/n)∫ h_L^{−n} for a support function with its own error bound. The
/// error includes the change against the half-size grid.
pub fn polar_volume<H>(h: H, grid: &SphereGrid) -> Result<QuadratureResult>
where
    H: Fn(&[f64]) -> (f64, f64),
{
    let n = grid.dim() as i32;
    let on = |g: &SphereGrid| -> Result<(f64, f64)> {
        let mut acc = 0.0;
        let mut err = 0.0;
        for (theta, w) in g.iter() {
            let (v, e) = h(theta);
            if !(v > 0.0) {
                return Err(Error::PolarDomain(format!("support value {v} is not positive at direction {theta:?}")));
            }
            acc += w * v.powi(-n);
            err += w * v.powi(-n - 1) * e;
        }
        Ok((acc / n as f64, err))
    };
    let (fine, prop) = on(grid)?;
    let (coarse, _) = on(&grid.coarsened()?)?;
    Ok(QuadratureResult { value: fine, error_estimate: (fine - coarse).abs() + prop, evaluations: grid.len() * 3 / 2 })
}

/// Vol((Z − c)°) through the polar polytope. The error is the first-order effect of
/// the generator and offset errors.
pub fn zonoid_polar_volume_exact(z: &Zonoid) -> Result<QuadratureResult> {
    let p = z.to_polytope()?;
    if !p.contains_origin_interior() {
        return Err(Error::PolarDomain("the zonoid does not contain the origin in its interior".into()));
    }
    let v = p.polar()?.volume();
    let inradius = p.facets().iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
    let rel = z.generators.iter().filter(|g| g.weight > 0.0).map(|g| g.error / g.weight).fold(0.0, f64::max) + z.offset_error / inradius;
    Ok(QuadratureResult { value: v, error_estimate: z.dim as f64 * rel * v + 1e-13 * v, evaluations: 0 })
}

/// Vol((Z − c)°) on the grid.
pub fn zonoid_polar_volume(z: &Zonoid, grid: &SphereGrid) -> Result<QuadratureResult> {
    if z.dim() != grid.dim() {
        return Err(Error::config("grid dimension does not match the zonoid"));
    }
    polar_volume(|t| (z.support(t), z.support_error(t)), grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceIdentity {
    /// Σ over facets with ⟨uᵢ,θ⟩ ≥ 0 of ⟨uᵢ,θ⟩ wᵢ
    pub lhs: f64,
    /// ⟨θ, η⟩ + h_{Π_μK}(θ)
    pub rhs: f64,
    pub residual: f64,
    pub budget: f64,
}

/// ∫_{∂K ∩ {⟨n,θ⟩ ≥ 0}} ⟨n,θ⟩ dμ = ⟨θ, η_{μ,K}⟩ + h_{Π_μK}(θ).
pub fn halfspace_integral_identity(k: &Polytope, mu: &Density, theta: &[f64], tol: f64) -> Result<HalfspaceIdentity> {
    let w = facet_weights(mu, k, None, tol)?;
    let (mut lhs, mut lerr) = (0.0, 0.0);
    for (f, q) in k.facets().iter().zip(&w) {
        let c = dot(&f.normal, theta);
        if c >= 0.0 {
            lhs += c * q.value;
            lerr += c * q.error_estimate;
        }
    }
    let eta = offset_vector(k, mu, None, Integrator::Cubature { tol: 1e-9 }, tol)?;
    let z = projection_zonoid(k, Weighting::Measure(mu), tol)?;
    let rhs = dot(&eta.value, theta) + z.support(theta);
    let budget = lerr + eta.error_estimate * norm(theta) + z.support_error(theta);
    Ok(HalfspaceIdentity { lhs, rhs, residual: (lhs - rhs).abs(), budget })
}
