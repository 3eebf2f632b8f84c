//! Densities, measures of bodies and boundaries, and concavity families.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bodies::{hpolytope_vertices, Ball, Polytope};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, scale, sub, LinearMap};
use crate::numerics::{
    self, gaussian_cdf, gaussian_pdf, gaussian_quantile, integrate_1d, monte_carlo, monte_carlo_multi, sphere_area, BoxSampler, QuadratureResult,
    RandomStream, SimplexCubature, SphereGrid, DEFAULT_SAMPLES,
};

/// Concavity class a measure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConcavityClass {
    LogConcave,
    SConcave(f64),
    EhrhardGaussian,
    /// s-concave on symmetric convex sets only.
    SConcaveSymmetric(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityFlags {
    pub even: bool,
    pub radially_nondecreasing: bool,
    pub radially_decreasing: bool,
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Lebesgue,
    Gaussian,
    ExpNorm(Arc<Polytope>),
    RadialPower(f64),
    Pullback(Arc<Density>, LinearMap),
    Custom(ScalarFn, VectorFn),
}

/// Density φ of a measure on R^n, with gradient, certified flags and concavity classes.
#[derive(Clone)]
pub struct Density {
    dim: usize,
    kind: Kind,
    flags: DensityFlags,
    classes: Vec<ConcavityClass>,
    label: String,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("flags", &self.flags)
            .field("classes", &self.classes)
            .finish()
    }
}

const PROBES: usize = 1000;

impl Density {
    pub fn lebesgue(n: usize) -> Self {
        Self {
            dim: n,
            kind: Kind::Lebesgue,
            flags: DensityFlags { even: true, radially_nondecreasing: true, radially_decreasing: true },
            classes: vec![ConcavityClass::SConcave(1.0 / n as f64), ConcavityClass::LogConcave],
            label: "lebesgue".into(),
        }
    }

    pub fn gaussian(n: usize) -> Self {
        let d = Self {
            dim: n,
            kind: Kind::Gaussian,
            flags: DensityFlags { even: true, radially_nondecreasing: false, radially_decreasing: true },
            classes: vec![ConcavityClass::LogConcave, ConcavityClass::EhrhardGaussian, ConcavityClass::SConcaveSymmetric(1.0 / n as f64)],
            label: "gaussian".into(),
        };
        d.certify().expect("gaussian flags");
        d
    }

    /// φ(x) = exp(−‖x‖_L) for a symmetric polytope L with 0 in its interior.
    pub fn exp_norm(l: &Polytope) -> Result<Self> {
        if !l.is_symmetric() || !l.contains_origin_interior() {
            return Err(Error::config("exp_norm needs a symmetric body with the origin in its interior"));
        }
        let d = Self {
            dim: l.dim(),
            kind: Kind::ExpNorm(Arc::new(l.clone())),
            flags: DensityFlags { even: true, radially_nondecreasing: false, radially_decreasing: true },
            classes: vec![ConcavityClass::LogConcave],
            label: "exp_norm".into(),
        };
        d.certify()?;
        Ok(d)
    }

    /// φ(x) = |x|^α, α ≥ 0.
    pub fn radial_power(n: usize, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::config("radial_power exponent must be a finite nonnegative number"));
        }
        let d = Self {
            dim: n,
            kind: Kind::RadialPower(alpha),
            flags: DensityFlags { even: true, radially_nondecreasing: true, radially_decreasing: alpha == 0.0 },
            classes: if alpha == 0.0 { vec![ConcavityClass::SConcave(1.0 / n as f64), ConcavityClass::LogConcave] } else { vec![] },
            label: format!("radial_power({alpha})"),
        };
        d.certify()?;
        Ok(d)
    }

    /// User-supplied density; declared flags are probed and rejected when violated.
    pub fn custom<E, G>(n: usize, eval: E, grad: G, flags: DensityFlags, classes: Vec<ConcavityClass>, label: &str) -> Result<Self>
    where
        E: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let d = Self { dim: n, kind: Kind::Custom(Arc::new(eval), Arc::new(grad)), flags, classes, label: label.into() };
        d.certify()?;
        Ok(d)
    }

    /// Density of μ^T, x ↦ φ(Tx).
    pub fn pullback(&self, t: &LinearMap) -> Result<Self> {
        if t.dim() != self.dim {
            return Err(Error::config("pullback map dimension mismatch"));
        }
        let classes = self.classes.iter().copied().filter(|c| !matches!(c, ConcavityClass::EhrhardGaussian)).collect();
        Ok(Self {
            dim: self.dim,
            kind: Kind::Pullback(Arc::new(self.clone()), t.clone()),
            flags: self.flags,
            classes,
            label: format!("{}∘T", self.label),
        })
    }

    fn certify(&self) -> Result<()> {
        let mut rng = RandomStream::new(0xCE27_1F1E, self.dim as u64).rng();
        for _ in 0..PROBES {
            let scale: f64 = 0.1 + 3.0 * rng.random::<f64>();
            let x: Vec<f64> = (0..self.dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
            let v = self.eval(&x);
            if !(v >= 0.0) {
                return Err(Error::config(format!("density {} is negative or undefined at {x:?}", self.label)));
            }
            let tol = 1e-12 * v.abs().max(1.0);
            if self.flags.even {
                let m: Vec<f64> = x.iter().map(|t| -t).collect();
                if (self.eval(&m) - v).abs() > tol {
                    return Err(Error::config(format!("density {} declared even but is not", self.label)));
                }
            }
            let t: f64 = rng.random();
            let tx: Vec<f64> = x.iter().map(|c| t * c).collect();
            if t > 0.0 {
                let vt = self.eval(&tx);
                if self.flags.radially_nondecreasing && vt > v + tol {
                    return Err(Error::config(format!("density {} declared radially non-decreasing but is not", self.label)));
                }
                if self.flags.radially_decreasing && vt < v - tol {
                    return Err(Error::config(format!("density {} declared radially decreasing but is not", self.label)));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flags(&self) -> DensityFlags {
        self.flags
    }

    pub fn classes(&self) -> &[ConcavityClass] {
        &self.classes
    }

    pub fn is_lebesgue(&self) -> bool {
        matches!(self.kind, Kind::Lebesgue) || matches!(self.kind, Kind::RadialPower(a) if a == 0.0)
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, Kind::Gaussian)
    }

    pub fn radial_power_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::RadialPower(a) => Some(a),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Lebesgue => 1.0,
            Kind::Gaussian => (-0.5 * dot(x, x)).exp() / (2.0 * PI).powf(self.dim as f64 / 2.0),
            Kind::ExpNorm(l) => (-l.gauge(x)).exp(),
            Kind::RadialPower(a) => {
                if *a == 0.0 {
                    1.0
                } else {
                    norm(x).powf(*a)
                }
            }
            Kind::Pullback(base, t) => base.eval(&t.apply(x)),
            Kind::Custom(e, _) => e(x),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Lebesgue => vec![0.0; self.dim],
            Kind::Gaussian => {
                let p = self.eval(x);
                x.iter().map(|c| -c * p).collect()
            }
            Kind::ExpNorm(l) => {
                let (g, i) = l.gauge_facet(x);
                let f = &l.facets()[i];
                let p = (-g).exp();
                f.normal.iter().map(|u| -p * u / f.offset).collect()
            }
            Kind::RadialPower(a) => {
                let r = norm(x);
                if *a == 0.0 || r == 0.0 {
                    return vec![0.0; self.dim];
                }
                let c = a * r.powf(a - 2.0);
                x.iter().map(|t| c * t).collect()
            }
            Kind::Pullback(base, t) => t.apply_transpose(&base.grad(&t.apply(x))),
            Kind::Custom(_, g) => g(x),
        }
    }

    /// Linear forms cᵢ with −log φ = maxᵢ⟨cᵢ, x⟩ for densities that are only piecewise smooth.
    fn kink_forms(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            Kind::ExpNorm(l) => Some(l.facets().iter().map(|f| f.normal.iter().map(|u| u / f.offset).collect()).collect()),
            Kind::Pullback(base, t) => base.kink_forms().map(|cs| cs.iter().map(|c| t.apply_transpose(c)).collect()),
            _ => None,
        }
    }

    /// True when φ has creases along cones from the origin.
    pub(crate) fn has_kinks(&self) -> bool {
        self.kink_forms().is_some()
    }

    /// True when φ depends on |x| only.
    pub fn is_rotation_invariant(&self) -> bool {
        matches!(self.kind, Kind::Lebesgue | Kind::Gaussian | Kind::RadialPower(_))
    }

    /// ∫₀^ρ φ(rθ) r^{n−1} dr.
    pub fn radial_integral(&self, theta: &[f64], rho: f64, tol: f64) -> Result<QuadratureResult> {
        let n = self.dim as f64;
        match self.kind {
            Kind::Lebesgue => Ok(QuadratureResult::exact(rho.powf(n) / n)),
            Kind::RadialPower(a) => Ok(QuadratureResult::exact(rho.powf(n + a) / (n + a))),
            Kind::Gaussian => Ok(QuadratureResult::exact(numerics::chi_cdf(self.dim, rho) / sphere_area(self.dim))),
            _ => {
                let mut y = vec![0.0; self.dim];
                integrate_1d(
                    |r| {
                        y.iter_mut().zip(theta).for_each(|(a, b)| *a = r * b);
                        self.eval(&y) * r.powf(n - 1.0)
                    },
                    0.0,
                    rho,
                    tol,
                )
            }
        }
    }
}

/// How to evaluate integrals over a body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Integrator {
    MonteCarlo { stream: RandomStream, samples: usize },
    Cubature { tol: f64 },
}

impl Integrator {
    pub fn monte_carlo(seed: u64) -> Self {
        Integrator::MonteCarlo { stream: RandomStream::new(seed, 0), samples: DEFAULT_SAMPLES }
    }
}

/// μ(K): exact for lebesgue, otherwise by the chosen integrator.
pub fn measure_body(mu: &Density, k: &Polytope, method: Integrator) -> Result<QuadratureResult> {
    check_dim(mu, k.dim())?;
    if mu.is_lebesgue() {
        return Ok(QuadratureResult::exact(k.volume()));
    }
    integrate_over_body(k, method, |x| mu.eval(x))
}

/// ∫_K f for a scalar integrand.
pub fn integrate_over_body<F>(k: &Polytope, method: Integrator, f: F) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match method {
        Integrator::MonteCarlo { stream, samples } => {
            let (lo, hi) = k.bounding_box();
            let tol = k.tolerance();
            let sampler = BoxSampler::new(lo, hi);
            monte_carlo(&sampler, |x| if k.contains_with(x, tol) { f(x) } else { 0.0 }, samples, stream)
        }
        Integrator::Cubature { tol } => SimplexCubature::new(k.dim()).integrate(&k.simplices(), f, tol),
    }
}

/// ∫_K f for a vector-valued integrand with `components` entries.
pub fn integrate_vector_over_body<F>(k: &Polytope, method: Integrator, components: usize, f: F) -> Result<Vec<QuadratureResult>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    match method {
        Integrator::MonteCarlo { stream, samples } => {
            let (lo, hi) = k.bounding_box();
            let tol = k.tolerance();
            monte_carlo_multi(
                &BoxSampler::new(lo, hi),
                components,
                |x, out| {
                    if k.contains_with(x, tol) {
                        f(x, out)
                    }
                },
                samples,
                stream,
            )
        }
        Integrator::Cubature { tol } => {
            let cub = SimplexCubature::new(k.dim());
            let simplices = k.simplices();
            let mut buf = vec![0.0; components];
            (0..components)
                .map(|c| {
                    cub.integrate(
                        &simplices,
                        |x| {
                            buf.iter_mut().for_each(|t| *t = 0.0);
                            f(x, &mut buf);
                            buf[c]
                        },
                        tol,
                    )
                })
                .collect()
        }
    }
}

/// Split K into convex pieces on which each listed density is smooth.
pub fn smooth_pieces(k: &Polytope, densities: &[&Density]) -> Result<Vec<Polytope>> {
    let n = k.dim();
    let mut pieces = vec![k.clone()];
    for d in densities {
        check_dim(d, n)?;
        let Some(forms) = d.kink_forms() else { continue };
        let mut next = Vec::new();
        for p in &pieces {
            for (i, ci) in forms.iter().enumerate() {
                let mut hs = p.halfspaces();
                for (j, cj) in forms.iter().enumerate() {
                    let a = sub(cj, ci);
                    let l = norm(&a);
                    if j != i && l > 0.0 {
                        hs.push((scale(&a, 1.0 / l), 0.0));
                    }
                }
                let verts = hpolytope_vertices(&hs, n, p.tolerance());
                if verts.len() <= n {
                    continue;
                }
                if let Ok(q) = Polytope::from_points(&verts) {
                    if q.volume() > 1e-13 * k.volume() {
                        next.push(q);
                    }
                }
            }
        }
        pieces = next;
    }
    Ok(pieces)
}

/// μ of a Euclidean ball.
pub fn measure_ball(mu: &Density, b: &Ball, method: Integrator) -> Result<QuadratureResult> {
    check_dim(mu, b.dim())?;
    if mu.is_lebesgue() {
        return Ok(QuadratureResult::exact(b.volume()));
    }
    if mu.is_rotation_invariant() && norm(b.center()) == 0.0 {
        let e1 = crate::linalg::unit(b.dim(), 0);
        let r = mu.radial_integral(&e1, b.radius(), 1e-12)?;
        let area = sphere_area(b.dim());
        return Ok(QuadratureResult { value: area * r.value, error_estimate: area * r.error_estimate, evaluations: r.evaluations });
    }
    match method {
        Integrator::MonteCarlo { stream, samples } => {
            let lo: Vec<f64> = b.center().iter().map(|c| c - b.radius()).collect();
            let hi: Vec<f64> = b.center().iter().map(|c| c + b.radius()).collect();
            let r2 = b.radius() * b.radius();
            let sampler = BoxSampler::new(lo, hi);
            monte_carlo(
                &sampler,
                |x| {
                    let d: f64 = x.iter().zip(b.center()).map(|(a, c)| (a - c) * (a - c)).sum();
                    if d <= r2 {
                        mu.eval(x)
                    } else {
                        0.0
                    }
                },
                samples,
                stream,
            )
        }
        Integrator::Cubature { .. } => Err(Error::config("cubature over balls is not available; use Monte Carlo")),
    }
}

/// μ(tK) = Σ_F b_F ∫_F ∫₀^t φ(ry) r^{n−1} dr dA(y) for K with 0 interior; t may be +∞ (all of R^n).
pub fn measure_cones(mu: &Density, k: &Polytope, t: f64, tol: f64) -> Result<QuadratureResult> {
    check_dim(mu, k.dim())?;
    if !k.contains_origin_interior() {
        return Err(Error::domain("cone decomposition needs the origin in the interior"));
    }
    if mu.is_lebesgue() {
        if t.is_infinite() {
            return Err(Error::domain("lebesgue measure of the whole space is infinite"));
        }
        return Ok(QuadratureResult::exact(k.volume() * t.powi(k.dim() as i32)));
    }
    let n = k.dim() as f64;
    let cub = SimplexCubature::new(k.dim() - 1);
    let mut out = QuadratureResult::exact(0.0);
    let mut failure: Option<Error> = None;
    for f in k.facets() {
        let inner_tol = tol * 1e-2 / (k.facets().len() as f64 * f.area.max(1e-300) * f.offset);
        let mut inner_err = 0.0f64;
        let r = cub.integrate(
            &f.simplices,
            |y| {
                let mut z = vec![0.0; y.len()];
                match integrate_1d(
                    |r| {
                        z.iter_mut().zip(y).for_each(|(a, b)| *a = r * b);
                        mu.eval(&z) * r.powf(n - 1.0)
                    },
                    0.0,
                    t,
                    inner_tol,
                ) {
                    Ok(q) => {
                        inner_err = inner_err.max(q.error_estimate);
                        q.value
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            tol / k.facets().len() as f64 / f.offset,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let r = r?;
        out.value += f.offset * r.value;
        out.error_estimate += f.offset * (r.error_estimate + inner_err * f.area);
        out.evaluations += r.evaluations;
    }
    Ok(out)
}

/// Per-facet integrals ∫_{F_i} φ·f (f ≡ 1 when absent).
pub fn facet_weights(mu: &Density, k: &Polytope, f: Option<&Density>, tol: f64) -> Result<Vec<QuadratureResult>> {
    check_dim(mu, k.dim())?;
    if mu.radial_power_exponent().is_some_and(|a| a > 0.0) && k.depth(&vec![0.0; k.dim()]).abs() <= k.tolerance() {
        return Err(Error::domain("radial_power density is undefined at the origin, which lies on the boundary"));
    }
    if mu.is_lebesgue() && f.is_none() {
        return Ok(k.facets().iter().map(|fa| QuadratureResult::exact(fa.area)).collect());
    }
    let cub = SimplexCubature::new(k.dim() - 1);
    k.facets()
        .iter()
        .map(|fa| {
            cub.integrate(
                &fa.simplices,
                |x| {
                    let p = mu.eval(x);
                    match f {
                        Some(g) => p * g.eval(x),
                        None => p,
                    }
                },
                tol,
            )
        })
        .collect()
}

/// μ(∂K) in facet form.
pub fn boundary_measure(mu: &Density, k: &Polytope, tol: f64) -> Result<QuadratureResult> {
    Ok(sum_results(&facet_weights(mu, k, None, tol)?))
}

pub fn sum_results(rs: &[QuadratureResult]) -> QuadratureResult {
    rs.iter().fold(QuadratureResult::exact(0.0), |a, r| QuadratureResult {
        value: a.value + r.value,
        error_estimate: a.error_estimate + r.error_estimate,
        evaluations: a.evaluations + r.evaluations,
    })
}

/// ν(L) for the star body with radial function `rho` sampled on `grid`; the error
/// includes the change against the half-size grid.
pub fn measure_star<R>(nu: &Density, grid: &SphereGrid, rho: R, tol: f64) -> Result<QuadratureResult>
where
    R: Fn(&[f64]) -> Result<f64>,
{
    let on = |g: &SphereGrid| -> Result<QuadratureResult> {
        let mut out = QuadratureResult::exact(0.0);
        for (theta, w) in g.iter() {
            let r = rho(theta)?;
            if !(r >= 0.0) {
                return Err(Error::PolarDomain(format!("radial value {r} is not admissible at {theta:?}")));
            }
            let q = nu.radial_integral(theta, r, tol)?;
            out.value += w * q.value;
            out.error_estimate += w * q.error_estimate;
            out.evaluations += q.evaluations + 1;
        }
        Ok(out)
    };
    let fine = on(grid)?;
    let coarse = on(&grid.coarsened()?)?;
    Ok(QuadratureResult {
        value: fine.value,
        error_estimate: fine.error_estimate + (fine.value - coarse.value).abs(),
        evaluations: fine.evaluations + coarse.evaluations,
    })
}

fn check_dim(mu: &Density, n: usize) -> Result<()> {
    if mu.dim() != n {
        return Err(Error::config(format!("density dimension {} does not match body dimension {n}", mu.dim())));
    }
    Ok(())
}

/// Increasing function F with inverse and derivative, used for F-concavity.
#[derive(Clone)]
pub enum ConcavityFamily {
    Power(f64),
    Log,
    GaussianPhiInverse,
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        finv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        fprime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ConcavityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Which member of the (F, F⁻¹, F′) triple to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyPart {
    F,
    Finv,
    Fprime,
}

impl ConcavityFamily {
    pub fn label(&self) -> String {
        match self {
            ConcavityFamily::Power(s) => format!("power({s})"),
            ConcavityFamily::Log => "log".into(),
            ConcavityFamily::GaussianPhiInverse => "gaussian_phi_inverse".into(),
            ConcavityFamily::Custom { label, .. } => label.clone(),
        }
    }

    pub fn eval(&self, part: FamilyPart, x: f64) -> Result<f64> {
        match part {
            FamilyPart::F => self.f(x),
            FamilyPart::Finv => self.finv(x),
            FamilyPart::Fprime => self.fprime(x),
        }
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        match self {
            ConcavityFamily::Power(s) => {
                if x < 0.0 {
                    return Err(Error::domain(format!("power family needs x ≥ 0, got {x}")));
                }
                Ok(x.powf(*s))
            }
            ConcavityFamily::Log => {
                if x <= 0.0 {
                    return Err(Error::domain(format!("log family needs x > 0, got {x}")));
                }
                Ok(x.ln())
            }
            ConcavityFamily::GaussianPhiInverse => gaussian_quantile(x),
            ConcavityFamily::Custom { f, .. } => Ok(f(x)),
        }
    }

    pub fn finv(&self, y: f64) -> Result<f64> {
        match self {
            ConcavityFamily::Power(s) => {
                if y < 0.0 {
                    return Err(Error::domain(format!("power family inverse needs y ≥ 0, got {y}")));
                }
                Ok(y.powf(1.0 / s))
            }
            ConcavityFamily::Log => Ok(y.exp()),
            ConcavityFamily::GaussianPhiInverse => Ok(gaussian_cdf(y)),
            ConcavityFamily::Custom { finv, .. } => Ok(finv(y)),
        }
    }

    pub fn fprime(&self, x: f64) -> Result<f64> {
        match self {
            ConcavityFamily::Power(s) => {
                if x <= 0.0 {
                    return Err(Error::domain(format!("power family derivative needs x > 0, got {x}")));
                }
                Ok(s * x.powf(s - 1.0))
            }
            ConcavityFamily::Log => {
                if x <= 0.0 {
                    return Err(Error::domain(format!("log family needs x > 0, got {x}")));
                }
                Ok(1.0 / x)
            }
            ConcavityFamily::GaussianPhiInverse => Ok(1.0 / gaussian_pdf(gaussian_quantile(x)?)),
            ConcavityFamily::Custom { fprime, .. } => Ok(fprime(x)),
        }
    }

    /// Whether a measure with density `mu` is F-concave on the relevant class of sets.
    pub fn admits(&self, mu: &Density, symmetric_sets: bool) -> bool {
        let classes = mu.classes();
        let s_ok = |s: f64| {
            classes.iter().any(|c| match *c {
                ConcavityClass::SConcave(t) => t >= s - 1e-15,
                ConcavityClass::SConcaveSymmetric(t) => symmetric_sets && t >= s - 1e-15,
                _ => false,
            })
        };
        match self {
            ConcavityFamily::Power(s) => *s > 0.0 && s_ok(*s),
            ConcavityFamily::Log => s_ok(0.0) || classes.iter().any(|c| matches!(c, ConcavityClass::LogConcave | ConcavityClass::EhrhardGaussian)),
            ConcavityFamily::GaussianPhiInverse => classes.contains(&ConcavityClass::EhrhardGaussian),
            ConcavityFamily::Custom { .. } => false,
        }
    }
}

/// Central-difference gradient of a density, for consistency checks.
pub fn numerical_gradient(mu: &Density, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[k] += h;
            b[k] -= h;
            (mu.eval(&a) - mu.eval(&b)) / (2.0 * h)
        })
        .collect()
}
