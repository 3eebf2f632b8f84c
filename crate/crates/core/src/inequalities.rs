//! Named inequalities evaluated as lhs ≤ rhs with error budgets, and sweep drivers
//! for the asymptotic statements.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bodies::{Ball, Body, Polytope};
use crate::covariogram::{mu_covariogram, translated_average, AverageKind, CovariogramQuery};
use crate::error::{Error, Result};
use crate::linalg::{norm, scale};
use crate::measures::{
    boundary_measure, facet_weights, integrate_over_body, measure_body, measure_cones, measure_star, smooth_pieces, sum_results, ConcavityClass,
    ConcavityFamily, Density, Integrator,
};
use crate::numerics::{
    beta, binomial, chi_cdf, factorial, gaussian_cdf, gaussian_quantile, integrate_1d, kappa, random_direction, QuadratureResult, RandomStream,
    SphereGrid, DEFAULT_SAMPLES,
};
use crate::projection::{offset_vector, projection_zonoid, zonoid_polar_volume, zonoid_polar_volume_exact, Weighting, Zonoid};
use crate::report::{combined_tolerance, radial_inclusion, Report, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    ZhangPetty,
    RogersShephard,
    RstRadiallyDecreasing,
    WeakZhang,
    ZhangRadialNondecreasing,
    SurfaceLowerBound,
    ExpNormGradientIdentity,
    SetInclusionBig,
    QConcaveZhang,
    LogConcaveZhang,
    EhrhardGaussian,
    TwoMeasureZhang,
    SConcaveZhang,
    PolarizedZhang,
}

impl InequalityId {
    pub const ALL: [InequalityId; 14] = [
        InequalityId::ZhangPetty,
        InequalityId::RogersShephard,
        InequalityId::RstRadiallyDecreasing,
        InequalityId::WeakZhang,
        InequalityId::ZhangRadialNondecreasing,
        InequalityId::SurfaceLowerBound,
        InequalityId::ExpNormGradientIdentity,
        InequalityId::SetInclusionBig,
        InequalityId::QConcaveZhang,
        InequalityId::LogConcaveZhang,
        InequalityId::EhrhardGaussian,
        InequalityId::TwoMeasureZhang,
        InequalityId::SConcaveZhang,
        InequalityId::PolarizedZhang,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::ZhangPetty => "zhang_petty",
            InequalityId::RogersShephard => "rogers_shephard",
            InequalityId::RstRadiallyDecreasing => "rst_radially_decreasing",
            InequalityId::WeakZhang => "weak_zhang",
            InequalityId::ZhangRadialNondecreasing => "zhang_radial_nondecreasing",
            InequalityId::SurfaceLowerBound => "surface_lower_bound",
            InequalityId::ExpNormGradientIdentity => "exp_norm_gradient_identity",
            InequalityId::SetInclusionBig => "set_inclusion_big",
            InequalityId::QConcaveZhang => "q_concave_zhang",
            InequalityId::LogConcaveZhang => "log_concave_zhang",
            InequalityId::EhrhardGaussian => "ehrhard_gaussian",
            InequalityId::TwoMeasureZhang => "two_measure_zhang",
            InequalityId::SConcaveZhang => "s_concave_zhang",
            InequalityId::PolarizedZhang => "polarized_zhang",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|id| id.name() == s).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|id| id.name()).collect();
            Error::config(format!("unknown inequality id '{s}' (known: {})", known.join(", ")))
        })
    }
}

/// Numerical budget shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    /// Sphere-grid size for polar volumes and radial chains.
    pub grid: usize,
    /// Cubature tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Monte Carlo sample count.
    pub samples: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Self { grid: 4096, tol: 1e-10, seed: 0, samples: DEFAULT_SAMPLES }
    }
}

impl Precision {
    fn stream(&self, k: u64) -> RandomStream {
        RandomStream::new(self.seed, 0).split(k)
    }
}

/// Inputs of `verify`; which fields are needed depends on the id.
#[derive(Debug, Clone)]
pub struct VerifyArgs<'a> {
    pub body: &'a Polytope,
    pub mu: &'a Density,
    pub nu: Option<&'a Density>,
    pub f: Option<&'a Density>,
    pub family: Option<ConcavityFamily>,
    pub s: Option<f64>,
    pub precision: Precision,
}

impl<'a> VerifyArgs<'a> {
    pub fn new(body: &'a Polytope, mu: &'a Density) -> Self {
        Self { body, mu, nu: None, f: None, family: None, s: None, precision: Precision::default() }
    }

    pub fn nu(mut self, nu: &'a Density) -> Self {
        self.nu = Some(nu);
        self
    }

    pub fn f(mut self, f: &'a Density) -> Self {
        self.f = Some(f);
        self
    }

    pub fn family(mut self, family: ConcavityFamily) -> Self {
        self.family = Some(family);
        self
    }

    pub fn s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    fn grid(&self) -> Result<SphereGrid> {
        SphereGrid::standard(self.body.dim(), self.precision.grid)
    }
}

/// Evaluate inequality `id` on the given inputs.
pub fn verify(id: InequalityId, args: &VerifyArgs) -> Result<Report> {
    let n = args.body.dim();
    if args.mu.dim() != n || args.nu.is_some_and(|d| d.dim() != n) || args.f.is_some_and(|d| d.dim() != n) {
        return Err(Error::config("measure dimensions do not match the body"));
    }
    let report = match id {
        InequalityId::ZhangPetty => zhang_petty(args),
        InequalityId::RogersShephard => rogers_shephard(args),
        InequalityId::RstRadiallyDecreasing => rst_radially_decreasing(args),
        InequalityId::WeakZhang => weak_zhang(args),
        InequalityId::ZhangRadialNondecreasing => zhang_radial_nondecreasing(args),
        InequalityId::SurfaceLowerBound => surface_lower_bound(args),
        InequalityId::ExpNormGradientIdentity => exp_norm_gradient_identity(args),
        InequalityId::SetInclusionBig => set_inclusion_big(args),
        InequalityId::QConcaveZhang => q_concave_zhang(args),
        InequalityId::LogConcaveZhang => log_concave_zhang(args),
        InequalityId::EhrhardGaussian => ehrhard_gaussian(args),
        InequalityId::TwoMeasureZhang => two_measure_zhang(args),
        InequalityId::SConcaveZhang => s_concave_zhang(args),
        InequalityId::PolarizedZhang => polarized_zhang(args),
    }?;
    let p = args.precision;
    let mut r = report
        .config("seed", p.seed)
        .config("samples", p.samples)
        .config("grid", p.grid)
        .config("tol", p.tol)
        .config("dimension", n)
        .config("mu", args.mu.label());
    if let Some(nu) = args.nu {
        r = r.config("nu", nu.label());
    }
    if let Some(fam) = &args.family {
        r = r.config("family", fam.label());
    }
    if let Some(s) = args.s {
        r = r.config("s", s);
    }
    r.id = id.name().into();
    Ok(r)
}

// ---------------------------------------------------------------------------------
// shared pieces

/// Relative rounding floor applied to checks whose inputs are exact.
const EXACT_FLOOR: f64 = 1e-9;

fn cubature(p: &Precision) -> Integrator {
    Integrator::Cubature { tol: p.tol }
}

fn monte_carlo(p: &Precision, k: u64) -> Integrator {
    Integrator::MonteCarlo { stream: p.stream(k), samples: p.samples }
}

/// μ(K) by cubature, split where the density has kinks.
pub(crate) fn body_measure(mu: &Density, k: &Polytope, tol: f64) -> Result<QuadratureResult> {
    if mu.is_lebesgue() {
        return Ok(QuadratureResult::exact(k.volume()));
    }
    let parts = smooth_pieces(k, &[mu])?.iter().map(|p| measure_body(mu, p, Integrator::Cubature { tol })).collect::<Result<Vec<_>>>()?;
    Ok(sum_results(&parts))
}

/// ∫_K g for a product of densities, split at kinks.
fn body_integral(k: &Polytope, densities: &[&Density], tol: f64) -> Result<QuadratureResult> {
    let parts = smooth_pieces(k, densities)?
        .iter()
        .map(|p| integrate_over_body(p, Integrator::Cubature { tol }, |x| densities.iter().map(|d| d.eval(x)).product()))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_results(&parts))
}

/// Vol(Z°), through the polar polytope when that is cheap and on the grid otherwise.
pub fn polar_volume_of(z: &Zonoid, grid: &SphereGrid) -> Result<QuadratureResult> {
    let limit = match z.dim() {
        2 => 1024,
        3 => 48,
        _ => 0,
    };
    if z.generators().len() <= limit {
        zonoid_polar_volume_exact(z)
    } else {
        zonoid_polar_volume(z, grid)
    }
}

fn relative_generator_error(z: &Zonoid) -> f64 {
    z.generators().iter().filter(|g| g.weight > 0.0).map(|g| g.error / g.weight).fold(0.0, f64::max)
}

/// ν(c·Z°).
fn scaled_polar_measure(nu: &Density, z: &Zonoid, c: f64, grid: &SphereGrid, tol: f64) -> Result<QuadratureResult> {
    if !(c > 0.0) {
        return Err(Error::domain(format!("scaling factor {c} of the polar body is not positive")));
    }
    if nu.is_lebesgue() {
        let v = polar_volume_of(z, grid)?;
        let f = c.powi(z.dim() as i32);
        return Ok(QuadratureResult { value: f * v.value, error_estimate: f * v.error_estimate, evaluations: v.evaluations });
    }
    let mut q = measure_star(
        nu,
        grid,
        |t| {
            let h = z.support(t);
            if h > 0.0 {
                Ok(c / h)
            } else {
                Err(Error::PolarDomain(format!("support value {h} is not positive at {t:?}")))
            }
        },
        tol,
    )?;
    q.error_estimate += z.dim() as f64 * relative_generator_error(z) * q.value.abs();
    Ok(q)
}

/// Π_μK − η_{μ,K}, with |η| as a witness.
fn centered_projection_body(k: &Polytope, mu: &Density, p: &Precision) -> Result<(Zonoid, Witness)> {
    let z = projection_zonoid(k, Weighting::Measure(mu), p.tol)?;
    if mu.is_lebesgue() {
        return Ok((z, Witness::from(0.0)));
    }
    let eta = offset_vector(k, mu, None, cubature(p), p.tol)?;
    let w = Witness { value: norm(&eta.value), error: eta.error_estimate };
    Ok((z.with_offset(&eta), w))
}

/// Π_{μ,K}f − τ_{μ,f,K}.
fn centered_functional_body(k: &Polytope, mu: &Density, f: &Density, p: &Precision) -> Result<(Zonoid, Witness)> {
    let z = projection_zonoid(k, Weighting::Functional(mu, f), p.tol)?;
    let tau = offset_vector(k, mu, Some(f), cubature(p), p.tol)?;
    let w = Witness { value: norm(&tau.value), error: tau.error_estimate };
    Ok((z.with_offset(&tau), w))
}

fn pow_witness(w: QuadratureResult, k: usize) -> Witness {
    let v = w.value.powi(k as i32);
    Witness { value: v, error: k as f64 * w.value.abs().powi(k as i32 - 1) * w.error_estimate }
}

fn product(ws: &[Witness]) -> Witness {
    let value: f64 = ws.iter().map(|w| w.value).product();
    let rel = ws.iter().map(|w| if w.value != 0.0 { w.error / w.value.abs() } else { 0.0 }).sum::<f64>();
    Witness { value, error: value.abs() * rel }
}

fn quotient(a: Witness, b: Witness) -> Witness {
    let value = a.value / b.value;
    Witness { value, error: value.abs() * (a.error / a.value.abs().max(f64::MIN_POSITIVE) + b.error / b.value.abs()) }
}

fn scaled(w: Witness, c: f64) -> Witness {
    Witness { value: c * w.value, error: c.abs() * w.error }
}

fn require_flag(d: &Density, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::hypothesis(format!("density {} is not {what}", d.label())))
    }
}

fn require_symmetric(k: &Polytope, mu: &Density) -> Result<()> {
    if !k.is_symmetric() {
        return Err(Error::hypothesis("the body is not origin-symmetric"));
    }
    require_flag(mu, mu.flags().even, "even")
}

fn largest_s(mu: &Density, symmetric_sets: bool) -> Option<f64> {
    mu.classes()
        .iter()
        .filter_map(|c| match *c {
            ConcavityClass::SConcave(s) => Some(s),
            ConcavityClass::SConcaveSymmetric(s) if symmetric_sets => Some(s),
            _ => None,
        })
        .fold(None, |a: Option<f64>, s| Some(a.map_or(s, |a| a.max(s))))
}

/// Which covariogram carries the concavity used by a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Carrier {
    Plain,
    Polarized,
}

impl Carrier {
    fn label(self) -> &'static str {
        match self {
            Carrier::Plain => "plain",
            Carrier::Polarized => "polarized",
        }
    }
}

/// Resolve a non-negative increasing family for which F∘g (or F∘r on symmetric input) is concave.
fn nonnegative_family(args: &VerifyArgs) -> Result<(ConcavityFamily, Carrier)> {
    let (k, mu) = (args.body, args.mu);
    let symmetric = k.is_symmetric() && mu.flags().even;
    match &args.family {
        Some(ConcavityFamily::Log) | Some(ConcavityFamily::GaussianPhiInverse) => {
            Err(Error::hypothesis("this inequality needs a non-negative family F; log and Φ⁻¹ take negative values"))
        }
        Some(fam @ ConcavityFamily::Custom { .. }) => Ok((fam.clone(), Carrier::Plain)),
        Some(fam) => {
            if fam.admits(mu, false) {
                Ok((fam.clone(), Carrier::Plain))
            } else if symmetric && fam.admits(mu, true) {
                Ok((fam.clone(), Carrier::Polarized))
            } else {
                Err(Error::hypothesis(format!("{} is not {}-concave on the required class of sets", mu.label(), fam.label())))
            }
        }
        None => {
            if let Some(s) = largest_s(mu, false) {
                Ok((ConcavityFamily::Power(s), Carrier::Plain))
            } else if let (true, Some(s)) = (symmetric, largest_s(mu, true)) {
                Ok((ConcavityFamily::Power(s), Carrier::Polarized))
            } else {
                Err(Error::hypothesis(format!("{} has no certified s-concavity on this body", mu.label())))
            }
        }
    }
}

/// Midpoint concavity test of F∘g along 50 random ray triples inside 0.95·DK.
pub(crate) fn ray_concavity_test(
    k: &Polytope,
    mu: &Density,
    f: Option<&Density>,
    fam: &ConcavityFamily,
    carrier: Carrier,
    p: &Precision,
) -> Result<Witness> {
    let n = k.dim();
    let dk = k.difference_body()?;
    let query = match (f, carrier) {
        (Some(f), _) => CovariogramQuery::functional(k, mu, f),
        (None, Carrier::Plain) => CovariogramQuery::plain(k, mu),
        (None, Carrier::Polarized) => CovariogramQuery::polarized(k, mu),
    }
    .with_integrator(Integrator::Cubature { tol: p.tol.max(1e-10) });
    let mut rng = p.stream(0xC0C4).rng();
    let mut worst = f64::INFINITY;
    let mut worst_tol = 0.0;
    for _ in 0..50 {
        let theta = random_direction(&mut rng, n);
        let rho = dk.radial(&theta)?;
        let (a, b) = (0.95 * rho * rng.random::<f64>(), 0.95 * rho * rng.random::<f64>());
        let eval = |r: f64| -> Result<(f64, f64)> {
            let g = mu_covariogram(&query, &scale(&theta, r))?;
            let fv = fam.f(g.value)?;
            let d = fam.fprime(g.value).unwrap_or(0.0).abs();
            Ok((fv, d * g.error_estimate + 1e-12 * fv.abs().max(1.0)))
        };
        let (fa, ea) = eval(a)?;
        let (fb, eb) = eval(b)?;
        let (fm, em) = eval(0.5 * (a + b))?;
        let deficit = fm - 0.5 * (fa + fb);
        let tol = 3.0 * (em + 0.5 * (ea + eb));
        if deficit + tol < worst + worst_tol {
            worst = deficit;
            worst_tol = tol;
        }
        if deficit < -tol {
            return Err(Error::hypothesis(format!(
                "{}∘{} covariogram is not concave along {theta:?}: midpoint deficit {deficit:e}",
                fam.label(),
                carrier.label()
            )));
        }
    }
    Ok(Witness { value: worst, error: worst_tol })
}

/// ∫₀^∞ Q⁻¹(Q(a) − t) t^{n−1} dt, with Q⁻¹ taken as 0 below the range of Q.
pub fn q_tail_integral(fam: &ConcavityFamily, a: f64, n: usize) -> Result<QuadratureResult> {
    let nf = n as f64;
    match fam {
        ConcavityFamily::Log => Ok(QuadratureResult::exact(a * factorial(n - 1))),
        ConcavityFamily::Power(s) => Ok(QuadratureResult::exact(a.powf(1.0 + nf * s) * beta(1.0 / s + 1.0, nf))),
        _ => {
            let qa = fam.f(a)?;
            // t = u/(1 − u)
            integrate_1d(
                |u| {
                    if u >= 1.0 {
                        return 0.0;
                    }
                    let t = u / (1.0 - u);
                    let v = fam.finv(qa - t).unwrap_or(0.0).max(0.0);
                    v * t.powf(nf - 1.0) / ((1.0 - u) * (1.0 - u))
                },
                0.0,
                1.0,
                1e-13 * a * factorial(n),
            )
        }
    }
}

/// ∫₀¹ F⁻¹(F(a)t)(1 − t)^{n−1} dt.
pub fn f_unit_integral(fam: &ConcavityFamily, a: f64, n: usize) -> Result<QuadratureResult> {
    let nf = n as f64;
    match fam {
        ConcavityFamily::Power(s) => Ok(QuadratureResult::exact(a * beta(1.0 / s + 1.0, nf))),
        _ => {
            let fa = fam.f(a)?;
            let mut failure = None;
            let r = integrate_1d(
                |t| {
                    fam.finv(fa * t).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        0.0
                    }) * (1.0 - t).powf(nf - 1.0)
                },
                0.0,
                1.0,
                1e-13 * a,
            )?;
            match failure {
                Some(e) => Err(e),
                None => Ok(r),
            }
        }
    }
}

// ---------------------------------------------------------------------------------
// the checks

fn zhang_petty(args: &VerifyArgs) -> Result<Report> {
    let k = args.body;
    let n = k.dim();
    let z = projection_zonoid(k, Weighting::Lebesgue, args.precision.tol)?;
    let pv = polar_volume_of(&z, &args.grid()?)?;
    let prod = Witness { value: k.volume().powi(n as i32 - 1) * pv.value, error: k.volume().powi(n as i32 - 1) * pv.error_estimate };
    let zhang = binomial(2.0 * n as f64, n) / (n as f64).powi(n as i32);
    let petty = (kappa(n) / kappa(n - 1)).powi(n as i32);
    let parts = [
        Report::inequality("zhang", Witness::from(zhang), prod).with_tolerance_floor(EXACT_FLOOR * zhang),
        Report::inequality("petty", prod, Witness::from(petty)).with_tolerance_floor(EXACT_FLOOR * petty),
    ];
    Ok(Report::all("zhang_petty", &parts).witness("product", prod).witness("zhang.margin", parts[0].margin).witness("petty.margin", parts[1].margin))
}

fn rogers_shephard(args: &VerifyArgs) -> Result<Report> {
    let k = args.body;
    let n = k.dim();
    let ratio = k.difference_body()?.volume() / k.volume();
    let c = binomial(2.0 * n as f64, n);
    Ok(Report::inequality("rogers_shephard", Witness::from(ratio), Witness::from(c)).with_tolerance_floor(EXACT_FLOOR * c))
}

fn nu_lambda(nu: &Density, k: &Polytope, p: &Precision, stream: u64) -> Result<Witness> {
    if nu.is_lebesgue() {
        return Ok(Witness::from(k.volume()));
    }
    Ok(translated_average(AverageKind::MuLambda, &Body::Polytope(k.clone()), nu, None, None, p.stream(stream), p.samples)?.into())
}

fn rst_radially_decreasing(args: &VerifyArgs) -> Result<Report> {
    let nu = args.nu.unwrap_or(args.mu);
    require_flag(nu, nu.flags().radially_decreasing, "radially decreasing")?;
    let k = args.body;
    let n = k.dim();
    let dk = k.difference_body()?;
    let lhs: Witness = body_measure(nu, &dk, args.precision.tol)?.into();
    let avg = nu_lambda(nu, k, &args.precision, 1)?;
    let rhs = scaled(avg, binomial(2.0 * n as f64, n));
    Ok(Report::inequality("rst_radially_decreasing", lhs, rhs)
        .with_tolerance_floor(EXACT_FLOOR * rhs.value)
        .witness("nu(DK)", lhs)
        .witness("nu_lambda(K)", avg))
}

/// ν(n·Vol(K)·Π°K).
fn zhang_body_measure(nu: &Density, k: &Polytope, p: &Precision, grid: &SphereGrid) -> Result<Witness> {
    let z = projection_zonoid(k, Weighting::Lebesgue, p.tol)?;
    Ok(scaled_polar_measure(nu, &z, k.dim() as f64 * k.volume(), grid, p.tol)?.into())
}

fn weak_zhang(args: &VerifyArgs) -> Result<Report> {
    let (k, mu) = (args.body, args.mu);
    let lhs = nu_lambda(mu, k, &args.precision, 1)?;
    let rhs = zhang_body_measure(mu, k, &args.precision, &args.grid()?)?;
    Ok(Report::inequality("weak_zhang", lhs, rhs)
        .with_tolerance_floor(EXACT_FLOOR * rhs.value)
        .witness("mu_lambda(K)", lhs)
        .witness("mu(n Vol(K) polar(PiK))", rhs))
}

fn zhang_radial_nondecreasing(args: &VerifyArgs) -> Result<Report> {
    let nu = args.nu.unwrap_or(args.mu);
    require_flag(nu, nu.flags().radially_nondecreasing, "radially non-decreasing")?;
    let k = args.body;
    let n = k.dim();
    let plus = nu_lambda(nu, k, &args.precision, 1)?;
    let minus = nu_lambda(nu, &k.reflected(), &args.precision, 2)?;
    let larger = if plus.value >= minus.value { plus } else { minus };
    let lhs = scaled(larger, binomial(2.0 * n as f64, n));
    let rhs = zhang_body_measure(nu, k, &args.precision, &args.grid()?)?;
    Ok(Report::inequality("zhang_radial_nondecreasing", lhs, rhs)
        .with_tolerance_floor(EXACT_FLOOR * rhs.value)
        .witness("nu_lambda(K)", plus)
        .witness("nu_lambda(-K)", minus)
        .witness("nu(n Vol(K) polar(PiK))", rhs))
}

fn surface_lower_bound(args: &VerifyArgs) -> Result<Report> {
    let (k, mu) = (args.body, args.mu);
    let n = k.dim();
    let s = boundary_measure(mu, k, args.precision.tol)?;
    let z = projection_zonoid(k, Weighting::Measure(mu), args.precision.tol)?;
    let pv = polar_volume_of(&z, &args.grid()?)?;
    let rhs = product(&[pow_witness(s, n), pv.into()]);
    let lhs = (n as f64 * kappa(n) / kappa(n - 1)).powi(n as i32) * kappa(n);
    Ok(Report::inequality("surface_lower_bound", Witness::from(lhs), rhs)
        .with_tolerance_floor(EXACT_FLOOR * rhs.value)
        .witness("mu(boundary)", s)
        .witness("polar_volume", pv))
}

fn exp_norm_gradient_identity(args: &VerifyArgs) -> Result<Report> {
    let (k, mu) = (args.body, args.mu);
    if !k.contains_origin_interior() {
        return Err(Error::hypothesis("the gauge of K needs the origin in the interior"));
    }
    let n = k.dim();
    let s = boundary_measure(mu, k, args.precision.tol)?;
    let lhs = scaled(s.into(), factorial(n - 1));
    // Sampling z ∝ e^{−‖z‖_K} reduces the integrand to n!·φ(y/‖y‖_K)/b_i for y uniform in K.
    let rhs = integrate_over_body(k, monte_carlo(&args.precision, 3), |y| {
        let (g, i) = k.gauge_facet(y);
        if g <= 0.0 {
            return 0.0;
        }
        mu.eval(&scale(y, 1.0 / g)) / k.facets()[i].offset
    })?;
    let rhs = scaled(rhs.into(), factorial(n));
    Ok(Report::identity("exp_norm_gradient_identity", lhs, rhs).witness("mu(boundary)", s))
}

/// inf of φ over ∂K from vertices, facet centroids and feet of the origin on facets.
fn boundary_infimum(mu: &Density, k: &Polytope) -> f64 {
    let tol = k.tolerance();
    let mut pts: Vec<Vec<f64>> = k.vertices().to_vec();
    for f in k.facets() {
        let foot = scale(&f.normal, f.offset);
        if k.contains_with(&foot, tol) {
            pts.push(foot);
        }
        pts.push(f.centroid.clone());
    }
    pts.iter().map(|x| mu.eval(x)).fold(f64::INFINITY, f64::min)
}

fn set_inclusion_big(args: &VerifyArgs) -> Result<Report> {
    let (k, mu, p) = (args.body, args.mu, &args.precision);
    let (fam, carrier) = nonnegative_family(args)?;
    let a = body_measure(mu, k, p.tol)?;
    let fa = fam.f(a.value)?;
    let c = fa / fam.fprime(a.value)?;
    if !(c > 0.0) {
        return Err(Error::hypothesis(format!("F(μ(K))/F′(μ(K)) = {c} is not positive")));
    }
    let grid = SphereGrid::standard(k.dim(), p.grid.min(512))?;
    let vol = k.volume();
    let phi_min = boundary_infimum(mu, k);
    let zmu = projection_zonoid(k, Weighting::Measure(mu), p.tol)?;
    let zl = projection_zonoid(k, Weighting::Lebesgue, p.tol)?;
    let zc = match carrier {
        Carrier::Plain => centered_projection_body(k, mu, p)?.0,
        Carrier::Polarized => zmu.clone(),
    };
    let dk = k.difference_body()?;
    let mut rows: [Vec<f64>; 4] = Default::default();
    let mut errs: [Vec<f64>; 4] = Default::default();
    for th in grid.directions() {
        let (hm, hl, hc) = (zmu.support(th), zl.support(th), zc.support(th));
        if !(hc > 0.0) {
            return Err(Error::PolarDomain(format!("Π_μK − η does not contain the origin (h = {hc} at {th:?})")));
        }
        let vals = [vol * phi_min / hm, vol / hl, dk.radial(th)?, c / hc];
        let es = [vals[0] * zmu.support_error(th) / hm, 0.0, 0.0, vals[3] * (zc.support_error(th) / hc + a.error_estimate / a.value)];
        for i in 0..4 {
            rows[i].push(vals[i]);
            errs[i].push(es[i]);
        }
    }
    let names = ["phi_min Vol(K) polar(Pi_mu K)", "Vol(K) polar(PiK)", "DK", "F/F' polar(Pi_mu K - eta)"];
    let parts: Vec<Report> = (0..3)
        .map(|i| radial_inclusion(&format!("{} <= {}", names[i], names[i + 1]), (&rows[i], &errs[i]), (&rows[i + 1], &errs[i + 1]), EXACT_FLOOR))
        .collect();
    let mut r = Report::all("set_inclusion_big", &parts)
        .witness("phi_min", phi_min)
        .witness("F/F'", Witness { value: c, error: c * a.error_estimate / a.value })
        .witness("mu(K)", a)
        .config("covariogram", carrier.label())
        .config("family_used", fam.label());
    for part in &parts {
        r = r.witness(&format!("{}.margin", part.id), part.margin);
    }
    Ok(r)
}

/// ‖f‖_{L¹(μ,K)}, ∫_K f and the centered body for f (or χ_K when absent).
fn weighted_norms(args: &VerifyArgs) -> Result<(QuadratureResult, QuadratureResult, Zonoid, Witness)> {
    let (k, mu, p) = (args.body, args.mu, &args.precision);
    match args.f {
        None => {
            let (z, off) = centered_projection_body(k, mu, p)?;
            Ok((body_measure(mu, k, p.tol)?, QuadratureResult::exact(k.volume()), z, off))
        }
        Some(f) => {
            let (z, off) = centered_functional_body(k, mu, f, p)?;
            Ok((body_integral(k, &[mu, f], p.tol)?, body_integral(k, &[f], p.tol)?, z, off))
        }
    }
}

fn q_concave_zhang(args: &VerifyArgs) -> Result<Report> {
    let (k, mu, p) = (args.body, args.mu, &args.precision);
    let n = k.dim();
    let fam = args.family.clone().unwrap_or(ConcavityFamily::Log);
    if !matches!(fam, ConcavityFamily::Custom { .. }) && !fam.admits(mu, false) {
        return Err(Error::hypothesis(format!("{} is not {}-concave", mu.label(), fam.label())));
    }
    let concavity = ray_concavity_test(k, mu, args.f, &fam, Carrier::Plain, p)?;
    let (a, lhs, z, off) = weighted_norms(args)?;
    let qp = fam.fprime(a.value)?;
    if !(qp > 0.0 && qp.is_finite()) {
        return Err(Error::hypothesis(format!("Q′(‖f‖) = {qp} must be positive and finite")));
    }
    let pv = polar_volume_of(&z, &args.grid()?)?;
    let tail = q_tail_integral(&fam, a.value, n)?;
    let mu_k = body_measure(mu, k, p.tol)?;
    let c = n as f64 / qp.powi(n as i32);
    let rhs = quotient(scaled(product(&[pv.into(), tail.into()]), c), mu_k.into());
    Ok(Report::inequality("q_concave_zhang", lhs.into(), rhs)
        .with_tolerance_floor(EXACT_FLOOR * rhs.value)
        .witness("norm_mu", a)
        .witness("mu(K)", mu_k)
        .witness("polar_volume", pv)
        .witness("tail_integral", tail)
        .witness("offset_norm", off)
        .witness("concavity_min_deficit", concavity)
        .config("family_used", fam.label()))
}

fn log_concave_zhang(args: &VerifyArgs) -> Result<Report> {
    let (k, mu, p) = (args.body, args.mu, &args.precision);
    if !ConcavityFamily::Log.admits(mu, false) {
        return Err(Error::hypothesis(format!("{} is not certified log-concave", mu.label())));
    }
    let n = k.dim();
    let mu_k = body_measure(mu, k, p.tol)?;
    let (z, off) = centered_projection_body(k, mu, p)?;
    let pv = polar_volume_of(&z, &args.grid()?)?;
    let rhs = scaled(product(&[pow_witness(mu_k, n), pv.into()]), 1.0 / k.volume());
    let lhs = 1.0 / factorial(n);
    let mut r = Report::inequality("log_concave_zhang", Witness::from(lhs), rhs)
        .with_tolerance_floor(EXACT_FLOOR * lhs)
        .witness("mu(K)", mu_k)
        .witness("polar_volume", pv)
        .witness("eta_norm", off)
        .witness("mu(boundary)", sum_results(&facet_weights(mu, k, None, p.tol)?));
    for (i, w) in facet_weights(mu, k, None, p.tol)?.into_iter().enumerate() {
        r = r.witness(&format!("facet_weight.{i}"), w);
    }
    Ok(r)
}

/// e^{−nx²/2}/(2πΦ(x)²)^{(n+1)/2}·∫₀^∞ zⁿ e^{−(z−x)²/2} dz.
pub fn ehrhard_bound_value(n: usize, x: f64) -> Result<QuadratureResult> {
    if n < 2 {
        return Err(Error::domain(format!("the Ehrhard bound needs n ≥ 2, got {n}")));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!("x = {x} is not finite")));
    }
    let nf = n as f64;
    let upper = x.max(0.0) + 12.0 + (2.0 * nf).sqrt() * 4.0;
    // the integrand peaks near (x + √(x² + 4n))/2
    let peak = 0.5 * (x + (x * x + 4.0 * nf).sqrt());
    let scale_ = peak.powf(nf) * (-(peak - x).powi(2) / 2.0).exp();
    let i = integrate_1d(|z| z.powf(nf) * (-(z - x) * (z - x) / 2.0).exp(), 0.0, upper, 1e-15 * scale_.max(1e-300))?;
    let c = (-nf * x * x / 2.0).exp() / (2.0 * std::f64::consts::PI * gaussian_cdf(x).powi(2)).powf((nf + 1.0) / 2.0);
    Ok(QuadratureResult { value: c * i.value, error_estimate: c * i.error_estimate, evaluations: i.evaluations })
}

fn ehrhard_gaussian(args: &VerifyArgs) -> Result<Report> {
    let (k, mu, p) = (args.body, args.mu, &args.precision);
    if !mu.classes().contains(&ConcavityClass::EhrhardGaussian) {
        return Err(Error::hypothesis(format!("{} does not satisfy the Ehrhard inequality", mu.label())));
    }
    let n = k.dim();
    let g = body_measure(mu, k, p.tol)?;
    let x = gaussian_quantile(g.value)?;
    let (z, off) = centered_projection_body(k, mu, p)?;
    let pv = polar_volume_of(&z, &args.grid()?)?;
    let denom = product(&[pow_witness(g, n), pv.into()]);
    let ratio = quotient(Witness::from(k.volume()), denom);
    let e = ehrhard_bound_value(n, x)?;
    let nfact = factorial(n);
    let parts = [
        Report::inequality("ehrhard", ratio, e.into()).with_tolerance_floor(EXACT_FLOOR * e.value),
        Report::inequality("comparison", e.into(), Witness::from(nfact)).with_tolerance_floor(EXACT_FLOOR * nfact),
    ];
    Ok(Report::all("ehrhard_gaussian", &parts)
        .witness("gamma(K)", g)
        .witness("x", Witness { value: x, error: g.error_estimate / crate::numerics::gaussian_pdf(x) })
        .witness("polar_volume", pv)
        .witness("eta_norm", off)
        .witness("ratio", ratio)
        .witness("bound", e)
        .witness("ehrhard.margin", parts[0].margin)
        .witness("comparison.margin", parts[1].margin))
}

/// ν_μ(f) = (1/‖f‖_{L¹(μ,K)})∫_{DK} g_{μ,f}(K,·) dν.
fn nu_mu_average(args: &VerifyArgs, nu: &Density, norm_mu: QuadratureResult, int_f: QuadratureResult) -> Result<Witness> {
    if nu.is_lebesgue() {
        // ∫ g_{μ,f}(K,x) dx = μ(K)·∫_K f
        let mu_k = body_measure(args.mu, args.body, args.precision.tol)?;
        return Ok(quotient(product(&[mu_k.into(), int_f.into()]), norm_mu.into()));
    }
    let kind = if args.f.is_some() { AverageKind::NuMuFunctional } else { AverageKind::NuMuBody };
    Ok(translated_average(kind, &Body::Polytope(args.body.clone()), args.mu, Some(nu), args.f, args.precision.stream(4), args.precision.samples)?
        .into())
}

fn two_measure_zhang(args: &VerifyArgs) -> Result<Report> {
    let (k, mu, p) = (args.body, args.mu, &args.precision);
    let n = k.dim();
    let nu = args.nu.ok_or_else(|| Error::config("two_measure_zhang needs a second measure ν"))?;
    require_flag(nu, nu.flags().radially_nondecreasing, "radially non-decreasing")?;
    let (fam, carrier) = nonnegative_family(args)?;
    if carrier == Carrier::Polarized && args.f.is_some() {
        return Err(Error::hypothesis("the functional form needs F∘g_{μ,f} concave; only the polarized covariogram is certified here"));
    }
    let concavity = ray_concavity_test(k, mu, args.f, &fam, carrier, p)?;
    let (a, int_f, z, off) = weighted_norms(args)?;
    let z = if carrier == Carrier::Polarized { projection_zonoid(k, Weighting::Measure(mu), p.tol)? } else { z };
    let fa = fam.f(a.value)?;
    let c = fa / fam.fprime(a.value)?;
    if !(c > 0.0) {
        return Err(Error::hypothesis(format!("F(‖f‖)/F′(‖f‖) = {c} is not positive")));
    }
    let lhs = nu_mu_average(args, nu, a, int_f)?;
    let m = scaled_polar_measure(nu, &z, c, &args.grid()?, p.tol)?;
    let j = f_unit_integral(&fam, a.value, n)?;
    let rhs = quotient(scaled(product(&[m.into(), j.into()]), n as f64), a.into());
    Ok(Report::inequality("two_measure_zhang", lhs, rhs)
        .with_tolerance_floor(EXACT_FLOOR * rhs.value)
        .witness("nu_mu", lhs)
        .witness("norm_mu", a)
        .witness("nu(c polar)", m)
        .witness("unit_integral", j)
        .witness("offset_norm", off)
        .witness("concavity_min_deficit", concavity)
        .config("covariogram", carrier.label())
        .config("family_used", fam.label()))
}

/// Shared body of the s-concave and polarized Zhang checks.
fn s_zhang(args: &VerifyArgs, id: &str, s: f64, z: Zonoid, off: Witness) -> Result<Report> {
    let (k, mu, p) = (args.body, args.mu, &args.precision);
    let n = k.dim();
    let lebesgue = Density::lebesgue(n);
    let nu = args.nu.unwrap_or(&lebesgue);
    require_flag(nu, nu.flags().radially_nondecreasing, "radially non-decreasing")?;
    let b = binomial(n as f64 + 1.0 / s, n);
    let mu_k = body_measure(mu, k, p.tol)?;
    let grid = args.grid()?;
    let (lhs, rhs) = if nu.is_lebesgue() {
        // sⁿ·binom(n+1/s, n)·Vol(K) ≤ μⁿ(K)·Vol(Z°)
        let pv = polar_volume_of(&z, &grid)?;
        let lhs = s.powi(n as i32) * b * k.volume();
        (Witness::from(lhs), product(&[pow_witness(mu_k, n), pv.into()]))
    } else {
        let avg = nu_mu_average(args, nu, mu_k, QuadratureResult::exact(k.volume()))?;
        let m = scaled_polar_measure(nu, &z, mu_k.value / s, &grid, p.tol)?;
        (scaled(avg, b), Witness { value: m.value, error: m.error_estimate + n as f64 * m.value * mu_k.error_estimate / mu_k.value })
    };
    Ok(Report::inequality(id, lhs, rhs)
        .with_tolerance_floor(EXACT_FLOOR * rhs.value)
        .witness("mu(K)", mu_k)
        .witness("binomial", b)
        .witness("offset_norm", off)
        .config("s_used", s)
        .config("nu_used", nu.label()))
}

fn s_concave_zhang(args: &VerifyArgs) -> Result<Report> {
    let mu = args.mu;
    let s = match args.s {
        Some(s) => s,
        None => largest_s(mu, false).ok_or_else(|| Error::hypothesis(format!("{} has no certified s-concavity", mu.label())))?,
    };
    if !(s > 0.0) || !ConcavityFamily::Power(s).admits(mu, false) {
        return Err(Error::hypothesis(format!("{} is not {s}-concave on all convex sets", mu.label())));
    }
    let (z, off) = centered_projection_body(args.body, mu, &args.precision)?;
    s_zhang(args, "s_concave_zhang", s, z, off)
}

fn polarized_zhang(args: &VerifyArgs) -> Result<Report> {
    let (k, mu) = (args.body, args.mu);
    require_symmetric(k, mu)?;
    let s = match args.s {
        Some(s) => s,
        None => largest_s(mu, true).ok_or_else(|| Error::hypothesis(format!("{} has no certified s-concavity on symmetric sets", mu.label())))?,
    };
    if !(s > 0.0) || !ConcavityFamily::Power(s).admits(mu, true) {
        return Err(Error::hypothesis(format!("{} is not {s}-concave on symmetric convex sets", mu.label())));
    }
    let z = projection_zonoid(k, Weighting::Measure(mu), args.precision.tol)?;
    s_zhang(args, "polarized_zhang", s, z, Witness::from(0.0))
}

// ---------------------------------------------------------------------------------
// one-dimensional comparison and sweeps

/// β∫₀^y φ r^{n−1} dr ≥ ∫₀^y q(ξ(1 − r/y)) φ(r) r^{n−1} dr at every y, with β = n∫₀¹ q(ξt)(1−t)^{n−1} dt.
pub fn berwald_1d_check<Q, P>(q: Q, phi: P, n: usize, xi: f64, y_grid: &[f64], tol: f64) -> Result<Report>
where
    Q: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    if n < 1 || !(xi > 0.0) || y_grid.is_empty() || y_grid.iter().any(|y| !(*y > 0.0)) {
        return Err(Error::config("berwald check needs n ≥ 1, ξ > 0 and positive y values"));
    }
    let nf = n as f64;
    let beta_ = integrate_1d(|t| nf * q(xi * t) * (1.0 - t).powf(nf - 1.0), 0.0, 1.0, tol)?;
    let mut parts = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let base = integrate_1d(|r| phi(r) * r.powf(nf - 1.0), 0.0, y, tol)?;
        let inner = integrate_1d(|r| q(xi * (1.0 - r / y)) * phi(r) * r.powf(nf - 1.0), 0.0, y, tol)?;
        let rhs = Witness { value: beta_.value * base.value, error: beta_.error_estimate * base.value + beta_.value * base.error_estimate };
        parts.push(Report::inequality(&format!("y={y}"), inner.into(), rhs).with_tolerance_floor(1e-12 * rhs.value.abs().max(1e-300)));
    }
    let mut r = Report::all("berwald_1d", &parts).witness("beta", beta_).config("n", n).config("xi", xi);
    for p in &parts {
        r = r.witness(&format!("{}.margin", p.id), p.margin);
    }
    Ok(r)
}

/// μⁿ(K)·Vol(Π_μ°K)/Vol(K).
pub fn pe(mu: &Density, k: &Polytope, grid: &SphereGrid, tol: f64) -> Result<QuadratureResult> {
    let m = body_measure(mu, k, tol)?;
    let z = projection_zonoid(k, Weighting::Measure(mu), tol)?;
    let pv = polar_volume_of(&z, grid)?;
    let w = scaled(product(&[pow_witness(m, k.dim()), pv.into()]), 1.0 / k.volume());
    Ok(QuadratureResult { value: w.value, error_estimate: w.error, evaluations: m.evaluations + pv.evaluations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeSample {
    pub t: f64,
    /// Pe(μ, tK) from its definition.
    pub direct: QuadratureResult,
    /// t^{−n²}e^{nt}Vol(Π°K)μⁿ(tK)/Vol(K).
    pub law: f64,
    /// μⁿ(tK)/Vol(K).
    pub mass_ratio: f64,
    /// (n!)ⁿVol^{n−1}(K), the limit of `mass_ratio`.
    pub mass_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeSweep {
    pub samples: Vec<PeSample>,
    /// Strict increase over the last three samples.
    pub tail_increasing: bool,
}

/// Pe(μ, tK) for μ with density e^{−‖x‖_K}.
pub fn pe_sweep(k: &Polytope, t_list: &[f64], grid: &SphereGrid, tol: f64) -> Result<PeSweep> {
    if !k.is_symmetric() || !k.contains_origin_interior() {
        return Err(Error::config("pe_sweep needs a symmetric body with the origin in its interior"));
    }
    if t_list.is_empty() || t_list.iter().any(|t| !(*t > 0.0)) || t_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config("t_list must be increasing and positive"));
    }
    let n = k.dim();
    let nf = n as f64;
    let mu = Density::exp_norm(k)?;
    let pi_polar = polar_volume_of(&projection_zonoid(k, Weighting::Lebesgue, tol)?, grid)?.value;
    let vol = k.volume();
    let mut samples = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let mass = measure_cones(&mu, k, t, tol * vol)?;
        let tk = k.scaled(t)?;
        let wscale = (-t).exp() * t.powf(nf - 1.0);
        let z = projection_zonoid(&tk, Weighting::Measure(&mu), tol * wscale)?;
        let pv = polar_volume_of(&z, grid)?;
        let w = scaled(product(&[pow_witness(mass, n), pv.into()]), 1.0 / tk.volume());
        let mass_ratio = mass.value.powi(n as i32) / vol;
        samples.push(PeSample {
            t,
            direct: QuadratureResult { value: w.value, error_estimate: w.error, evaluations: mass.evaluations },
            law: t.powf(-nf * nf) * (nf * t).exp() * pi_polar * mass_ratio,
            mass_ratio,
            mass_limit: factorial(n).powi(n as i32) * vol.powi(n as i32 - 1),
        });
    }
    let tail = &samples[samples.len().saturating_sub(3)..];
    let tail_increasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1].direct.value > w[0].direct.value);
    Ok(PeSweep { samples, tail_increasing })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessSample {
    pub r: f64,
    /// (γ_n)_λ(R·B₂ⁿ)
    pub average: QuadratureResult,
    /// γ_n(n·Vol(RB)·Π°(RB)) = γ_n(R·nκ_n/κ_{n−1}·B₂ⁿ)
    pub outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessSweep {
    pub n: usize,
    pub samples: Vec<SharpnessSample>,
    pub monotone: bool,
}

/// Both sides of the general-measure Zhang inequality for γ_n on growing balls.
pub fn gaussian_sharpness_sweep(n: usize, r_list: &[f64]) -> Result<SharpnessSweep> {
    if !(2..=3).contains(&n) {
        return Err(Error::config(format!("gaussian sharpness sweep supports n ∈ {{2, 3}}, got {n}")));
    }
    if r_list.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::config("radii must be positive"));
    }
    let g = Density::gaussian(n);
    let samples = r_list
        .iter()
        .map(|&r| {
            let ball = Body::Ball(Ball::new(n, r)?);
            let average = translated_average(AverageKind::MuLambda, &ball, &g, None, None, RandomStream::new(0, 0), 0)?;
            let outer = chi_cdf(n, r * n as f64 * kappa(n) / kappa(n - 1));
            Ok(SharpnessSample { r, average, outer })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = samples.windows(2).all(|w| {
        (w[1].r > w[0].r) == (w[1].average.value >= w[0].average.value - 3.0 * w[1].average.error_estimate)
            && (w[1].r > w[0].r) == (w[1].outer >= w[0].outer)
    });
    Ok(SharpnessSweep { n, samples, monotone })
}

/// Combined tolerance re-export for the CLI's per-row output.
pub fn budget(errors: &[f64]) -> f64 {
    combined_tolerance(errors)
}
