//! Isotropy of the weighted surface-area measure S_{μ,K}, the functional
//! I(A) = Σ wᵢ|Auᵢ| on SL_n, and the reverse isoperimetric checks built on them.

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::Polytope;
use crate::error::{Error, Result};
use crate::inequalities::{body_measure, f_unit_integral, polar_volume_of, q_tail_integral, ray_concavity_test, Carrier, Precision};
use crate::linalg::{norm, LinearMap};
use crate::measures::{facet_weights, ConcavityFamily, Density, Integrator};
use crate::numerics::{factorial, kappa, QuadratureResult, RandomStream, SphereGrid};
use crate::projection::{offset_vector, projection_zonoid, Generator, Weighting, Zonoid};
use crate::report::{radial_inclusion, Report, Witness};

/// Residual of the decomposition of identity for S_{μ,K}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyCertificate {
    /// ‖Id − (n/μ(∂K))·Σ wᵢ uᵢ⊗uᵢ‖_F
    pub residual: f64,
    pub weights: Vec<f64>,
    pub weight_errors: Vec<f64>,
    pub threshold: f64,
    pub isotropic: bool,
    /// Trace of the normalized sum; n up to rounding.
    pub trace: f64,
}

struct SurfaceMeasure {
    normals: Vec<Vec<f64>>,
    weights: Vec<QuadratureResult>,
}

impl SurfaceMeasure {
    fn new(k: &Polytope, mu: &Density, tol: f64) -> Result<Self> {
        if mu.dim() != k.dim() {
            return Err(Error::config("measure dimension does not match the body"));
        }
        let weights = facet_weights(mu, k, None, tol)?;
        let normals = k.facets().iter().map(|f| f.normal.clone()).collect();
        let total: f64 = weights.iter().map(|w| w.value).sum();
        if !(total > 0.0) {
            return Err(Error::domain("the body has zero boundary measure"));
        }
        Ok(Self { normals, weights })
    }

    fn total(&self) -> f64 {
        self.weights.iter().map(|w| w.value).sum()
    }

    fn value(&self, a: &DMatrix<f64>) -> f64 {
        self.normals.iter().zip(&self.weights).map(|(u, w)| w.value * (a * DMatrix::from_column_slice(u.len(), 1, u)).norm()).sum()
    }
}

/// Decomposition-of-identity residual from the facet weights.
pub fn isotropy_residual(k: &Polytope, mu: &Density, tol: f64) -> Result<IsotropyCertificate> {
    let s = SurfaceMeasure::new(k, mu, tol)?;
    Ok(certificate(&s, k.dim()))
}

fn certificate(s: &SurfaceMeasure, n: usize) -> IsotropyCertificate {
    let total = s.total();
    let total_err: f64 = s.weights.iter().map(|w| w.error_estimate).sum();
    let mut m = DMatrix::<f64>::zeros(n, n);
    // error of the normalized sum, entry-wise bounded by Σ|∂/∂wᵢ|·eᵢ
    let mut err = 0.0;
    for (u, w) in s.normals.iter().zip(&s.weights) {
        let uu = DMatrix::from_fn(n, n, |i, j| u[i] * u[j]);
        m += &uu * (n as f64 * w.value / total);
        err += n as f64 * w.error_estimate / total * uu.norm();
    }
    err += n as f64 * total_err / total * m.norm() / n as f64;
    let residual = (DMatrix::<f64>::identity(n, n) - &m).norm();
    let threshold = 1e-8f64.max(3.0 * err);
    IsotropyCertificate {
        residual,
        weights: s.weights.iter().map(|w| w.value).collect(),
        weight_errors: s.weights.iter().map(|w| w.error_estimate).collect(),
        threshold,
        isotropic: residual <= threshold,
        trace: m.trace(),
    }
}

/// I_{μ,K}(A) = Σ wᵢ|Auᵢ|.
pub fn i_functional(k: &Polytope, mu: &Density, a: &LinearMap, tol: f64) -> Result<QuadratureResult> {
    if a.dim() != k.dim() {
        return Err(Error::config("map dimension does not match the body"));
    }
    let s = SurfaceMeasure::new(k, mu, tol)?;
    let m = a.matrix();
    let value = s.value(&m);
    let error = s.normals.iter().zip(&s.weights).map(|(u, w)| w.error_estimate * norm(&a.apply(u))).sum();
    Ok(QuadratureResult { value, error_estimate: error, evaluations: s.weights.iter().map(|w| w.evaluations).sum() })
}

/// A point of SL_n written as exp(M) with tr M = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SLnPoint {
    pub parameter: LinearMap,
    pub map: LinearMap,
}

impl SLnPoint {
    pub fn identity(n: usize) -> Self {
        let zero = LinearMap::new(vec![vec![0.0; n]; n]).expect("zero matrix");
        Self { parameter: zero, map: LinearMap::identity(n) }
    }

    pub fn from_parameter(m: &LinearMap) -> Result<Self> {
        let mm = m.matrix();
        if mm.trace().abs() > 1e-12 * mm.norm().max(1.0) {
            return Err(Error::domain(format!("parameter has trace {}, expected 0", mm.trace())));
        }
        Ok(Self { parameter: m.clone(), map: LinearMap::from_matrix(&mm.exp())? })
    }
}

/// Coordinates of a traceless matrix: off-diagonal entries, then E_ii − E_nn.
fn traceless(n: usize, x: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] = x[k];
                k += 1;
            }
        }
    }
    for i in 0..n - 1 {
        m[(i, i)] += x[k];
        m[(n - 1, n - 1)] -= x[k];
        k += 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimization {
    /// Symmetric positive representative; I is invariant under A ↦ UA for orthogonal U.
    pub point: SLnPoint,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
}

const FD_STEP: f64 = 1e-5;

fn fd_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += FD_STEP;
            b[i] -= FD_STEP;
            (f(&a) - f(&b)) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Quasi-Newton descent with Armijo backtracking.
fn descend(f: &impl Fn(&[f64]) -> f64, x0: Vec<f64>, max_iters: usize, grad_tol: f64) -> (Vec<f64>, f64, Vec<f64>, usize) {
    let d = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    let mut g = fd_gradient(f, &x);
    let mut h = DMatrix::<f64>::identity(d, d);
    let mut it = 0;
    while it < max_iters && norm(&g) > grad_tol {
        it += 1;
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut p = -(&h * &gv);
        if p.dot(&gv) >= 0.0 {
            h = DMatrix::identity(d, d);
            p = -gv.clone();
        }
        let slope = p.dot(&gv);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-14 {
            let xn: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + t * b).collect();
            let fnew = f(&xn);
            if fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = fd_gradient(f, &xn);
        let s = nalgebra::DVector::from_iterator(d, xn.iter().zip(&x).map(|(a, b)| a - b));
        let y = nalgebra::DVector::from_iterator(d, gn.iter().zip(&g).map(|(a, b)| a - b));
        let sy = s.dot(&y);
        if sy > 1e-16 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(d, d);
            let left = &i - rho * &s * y.transpose();
            let right = &i - rho * &y * s.transpose();
            h = &left * &h * &right + rho * &s * s.transpose();
        }
        x = xn;
        fx = fnew;
        g = gn;
    }
    (x, fx, g, it)
}

/// Minimize I over SL_n from Id and three random starts.
pub fn minimize_i(k: &Polytope, mu: &Density, max_iters: usize, grad_tol: f64, seed: u64) -> Result<Minimization> {
    let n = k.dim();
    let s = SurfaceMeasure::new(k, mu, 1e-12)?;
    let dof = n * n - 1;
    let objective = |x: &[f64]| s.value(&traceless(n, x).exp());
    let normal = Normal::new(0.0, 0.3).expect("valid normal");
    let mut starts = vec![vec![0.0; dof]];
    for i in 0..3 {
        let mut rng = RandomStream::new(seed, 0).split(i + 1).rng();
        starts.push((0..dof).map(|_| normal.sample(&mut rng)).collect());
    }
    let runs: Vec<_> = starts.into_par_iter().map(|x0| descend(&objective, x0, max_iters, grad_tol)).collect();
    let (x, value, g, iterations) =
        runs.into_iter().reduce(|best, r| if r.1 < best.1 - 1e-14 * best.1.abs() { r } else { best }).expect("four starts");
    // canonical representative: the positive factor P = (AᵀA)^{1/2}, with log P as parameter
    let a = traceless(n, &x).exp();
    let eig = (a.transpose() * &a).symmetric_eigen();
    let log_p = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 0.5 * l.ln())) * eig.eigenvectors.transpose();
    let log_p = &log_p - DMatrix::<f64>::identity(n, n) * (log_p.trace() / n as f64);
    let log_p = (&log_p + log_p.transpose()) * 0.5;
    let point = SLnPoint::from_parameter(&LinearMap::from_matrix(&log_p)?)?;
    let gradient_norm = norm(&g);
    Ok(Minimization { point, value, converged: gradient_norm <= grad_tol, iterations, gradient_norm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallBound {
    pub bound: f64,
    pub observed: QuadratureResult,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Vol(L) ≤ (2ⁿ/n!)Π(cⱼ/αⱼ)^{cⱼ} for L the polar of the zonoid with weights wⱼ and
/// cⱼ = n·wⱼ/total, αⱼ = wⱼ/2.
pub fn ball_zonoid_volume_bound(weights: &[f64], normals: &[Vec<f64>], total: f64, grid: &SphereGrid) -> Result<BallBound> {
    if weights.len() != normals.len() || weights.is_empty() || weights.iter().any(|w| !(*w > 0.0)) || !(total > 0.0) {
        return Err(Error::config("need matching positive weights and normals"));
    }
    let n = normals[0].len();
    if normals.iter().any(|u| u.len() != n || (norm(u) - 1.0).abs() > 1e-9) {
        return Err(Error::config("normals must be unit vectors of one dimension"));
    }
    let c: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (u, cj) in normals.iter().zip(&c) {
        m += DMatrix::from_fn(n, n, |i, j| u[i] * u[j]) * *cj;
    }
    let residual = (DMatrix::<f64>::identity(n, n) - m).norm();
    if residual > 1e-8 {
        return Err(Error::hypothesis(format!("the weights do not decompose the identity (residual {residual:e})")));
    }
    let log_prod: f64 = c.iter().zip(weights).map(|(cj, w)| cj * (cj / (w / 2.0)).ln()).sum();
    let bound = 2f64.powi(n as i32) / factorial(n) * log_prod.exp();
    let gens = normals.iter().zip(weights).map(|(u, w)| Generator { direction: u.clone(), weight: *w, error: 0.0 }).collect();
    let observed = polar_volume_of(&Zonoid::new(n, gens)?, grid)?;
    let tolerance = 3.0 * observed.error_estimate + 1e-9 * bound;
    Ok(BallBound { bound, observed, residual, tolerance, pass: observed.value <= bound + tolerance })
}

fn require_isotropic(cert: &IsotropyCertificate) -> Result<()> {
    if cert.isotropic {
        Ok(())
    } else {
        Err(Error::hypothesis(format!("S_μ,K is not isotropic (residual {:e} > {:e})", cert.residual, cert.threshold)))
    }
}

/// h_{Π_μK} between μ(∂K)/(2n) and μ(∂K)/(2√n) on the grid.
pub fn isotropic_sandwich_check(k: &Polytope, mu: &Density, grid: &SphereGrid, tol: f64) -> Result<Report> {
    let cert = isotropy_residual(k, mu, tol)?;
    require_isotropic(&cert)?;
    let n = k.dim() as f64;
    let z = projection_zonoid(k, Weighting::Measure(mu), tol)?;
    let total: f64 = cert.weights.iter().sum();
    let total_err: f64 = cert.weight_errors.iter().sum();
    let (h, he): (Vec<f64>, Vec<f64>) = grid.directions().iter().map(|t| (z.support(t), z.support_error(t))).unzip();
    let lo = vec![total / (2.0 * n); h.len()];
    let hi = vec![total / (2.0 * n.sqrt()); h.len()];
    let lo_e = vec![total_err / (2.0 * n); h.len()];
    let hi_e = vec![total_err / (2.0 * n.sqrt()); h.len()];
    let parts = [radial_inclusion("lower", (&lo, &lo_e), (&h, &he), 1e-12), radial_inclusion("upper", (&h, &he), (&hi, &hi_e), 1e-12)];
    let h_min = h.iter().copied().fold(f64::INFINITY, f64::min);
    let h_max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Report::all("isotropic_sandwich", &parts)
        .witness("mu(boundary)", Witness { value: total, error: total_err })
        .witness("h_min", h_min)
        .witness("h_max", h_max)
        .witness("lower.margin", parts[0].margin)
        .witness("upper.margin", parts[1].margin)
        .witness("isotropy_residual", cert.residual)
        .config("grid", grid.len()))
}

/// (nκ_n/κ_{n−1})ⁿκ_n ≤ μⁿ(∂K)·Vol(Π_μ°K) ≤ 4ⁿnⁿ/n! for isotropic S_{μ,K}.
pub fn isotropic_volume_sandwich(k: &Polytope, mu: &Density, grid: &SphereGrid, tol: f64) -> Result<Report> {
    let cert = isotropy_residual(k, mu, tol)?;
    require_isotropic(&cert)?;
    let n = k.dim();
    let nf = n as f64;
    let total: f64 = cert.weights.iter().sum();
    let total_err: f64 = cert.weight_errors.iter().sum();
    let pv = polar_volume_of(&projection_zonoid(k, Weighting::Measure(mu), tol)?, grid)?;
    let value = total.powi(n as i32) * pv.value;
    let err = value * (nf * total_err / total + pv.error_estimate / pv.value);
    let p = Witness { value, error: err };
    let lower = (nf * kappa(n) / kappa(n - 1)).powi(n as i32) * kappa(n);
    let upper = (4.0 * nf).powi(n as i32) / factorial(n);
    let parts = [
        Report::inequality("lower", Witness::from(lower), p).with_tolerance_floor(1e-12 * upper),
        Report::inequality("upper", p, Witness::from(upper)).with_tolerance_floor(1e-12 * upper),
    ];
    Ok(Report::all("isotropic_volume_sandwich", &parts)
        .witness("product", p)
        .witness("polar_volume", pv)
        .witness("lower.margin", parts[0].margin)
        .witness("upper.margin", parts[1].margin)
        .witness("isotropy_residual", cert.residual))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReverseMode {
    /// Q-concave form, log-like families.
    QForm,
    /// F-concave form, non-negative families.
    FForm,
}

/// μ(∂K) against the reverse isoperimetric bound for isotropic S_{μ,K}.
pub fn reverse_isoperimetric(k: &Polytope, mu: &Density, family: &ConcavityFamily, mode: ReverseMode, precision: &Precision) -> Result<Report> {
    let n = k.dim();
    let nf = n as f64;
    let tol = precision.tol;
    let cert = isotropy_residual(k, mu, tol)?;
    require_isotropic(&cert)?;
    let eta = offset_vector(k, mu, None, Integrator::Cubature { tol }, tol)?;
    if !eta.is_projective() {
        return Err(Error::hypothesis(format!("K is not μ-projective (|η| = {:e})", norm(&eta.value))));
    }
    match family {
        ConcavityFamily::Custom { .. } => {
            ray_concavity_test(k, mu, None, family, Carrier::Plain, precision)?;
        }
        _ if !family.admits(mu, false) => {
            return Err(Error::hypothesis(format!("{} is not {}-concave", mu.label(), family.label())));
        }
        _ => {}
    }
    let a = body_measure(mu, k, tol)?;
    let vol = k.volume();
    let total: f64 = cert.weights.iter().sum();
    let total_err: f64 = cert.weight_errors.iter().sum();
    let (rhs, shortcut) = match (mode, family) {
        (ReverseMode::QForm, ConcavityFamily::Log) => (4.0 * nf * a.value * vol.powf(-1.0 / nf), true),
        (ReverseMode::QForm, fam) => {
            let qp = fam.fprime(a.value)?;
            if !(qp > 0.0) {
                return Err(Error::hypothesis(format!("Q′(μ(K)) = {qp} must be positive")));
            }
            let tail = q_tail_integral(fam, a.value, n)?;
            let v = (4.0 * nf / qp).powi(n as i32) * tail.value / (factorial(n - 1) * vol * a.value);
            (v.powf(1.0 / nf), false)
        }
        (ReverseMode::FForm, fam) => {
            let fa = fam.f(a.value)?;
            if !(fa > 0.0) {
                return Err(Error::hypothesis(format!("F(μ(K)) = {fa} must be positive")));
            }
            let ratio = fa / fam.fprime(a.value)?;
            let j = f_unit_integral(fam, a.value, n)?;
            let v = (4.0 * nf * ratio).powi(n as i32) * j.value / (factorial(n - 1) * vol * a.value);
            (v.powf(1.0 / nf), false)
        }
    };
    let rhs = Witness { value: rhs, error: rhs * a.error_estimate / a.value };
    let lhs = Witness { value: total, error: total_err };
    Ok(Report::inequality("reverse_isoperimetric", lhs, rhs)
        .with_tolerance_floor(1e-9 * rhs.value)
        .witness("mu(K)", a)
        .witness("mu(boundary)", lhs)
        .witness("isotropy_residual", cert.residual)
        .witness("eta_norm", Witness { value: norm(&eta.value), error: eta.error_estimate })
        .config("mode", serde_json::to_value(mode).expect("mode serializes"))
        .config("family", family.label())
        .config("log_shortcut", shortcut)
        .config("mu", mu.label()))
}
