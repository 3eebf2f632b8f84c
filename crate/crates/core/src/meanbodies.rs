//! Radial p-th mean bodies R_p K, spectral mean bodies S_p K and their inclusion chain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{Polytope, StarBody};
use crate::covariogram::covariogram_exact;
use crate::error::{Error, Result};
use crate::linalg::scale;
use crate::numerics::{beta, harmonic, integrate_1d, SphereGrid};
use crate::projection::{projection_zonoid, Weighting};
use crate::report::{radial_inclusion, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanBodyMethod {
    RayIntegral,
    SpectralRelation,
    DifferenceBody,
    ProjectionPolar,
}

/// Star body sampled on a grid, with per-direction error bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBodyResult {
    /// Order; `f64::INFINITY` for the difference body.
    pub p: f64,
    pub body: StarBody,
    pub errors: Vec<f64>,
    pub method: MeanBodyMethod,
}

impl MeanBodyResult {
    pub fn radial(&self) -> &[f64] {
        self.body.radial()
    }
}

/// c_{n,p} = (n·B(p+1, n))^{−1/p}, and exp(1 + 1/2 + … + 1/n) at p = 0.
pub fn c_np(n: usize, p: f64) -> Result<f64> {
    if n < 2 || !(p >= 0.0) {
        return Err(Error::domain(format!("c_np needs n ≥ 2 and p ≥ 0, got n = {n}, p = {p}")));
    }
    if p == 0.0 {
        return Ok(harmonic(n).exp());
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    Ok((n as f64 * beta(p + 1.0, n as f64)).powf(-1.0 / p))
}

/// ρ_{R_p K}(θ) with its error, for p ∈ (−1, ∞).
///
/// With V = Vol K, ρ = ρ_{DK}(θ) and ∫_K ρ_K(x,θ)^p dx = Vρ^p − p∫₀^ρ (V − g_K(rθ)) r^{p−1} dr
/// (log form at p = 0). The substitution r = ρ·t^{1/(p+1)} removes the endpoint singularity.
pub fn radial_mean_ray(k: &Polytope, rho_dk: f64, theta: &[f64], p: f64, tol: f64) -> Result<(f64, f64)> {
    let v = k.volume();
    let rho = rho_dk;
    let m = 1.0 / (p + 1.0);
    // r^{p−1}dr = ρ^{p+1}·m·dt/r, and (V − g)/r stays bounded as r → 0
    let r_min = 1e-6 * rho;
    let j = integrate_1d(
        |t| {
            let r = (rho * t.powf(m)).max(r_min);
            let gap = v - covariogram_exact(k, &scale(theta, r));
            gap / r * rho.powf(p + 1.0) * m
        },
        0.0,
        1.0,
        tol.max(1e-13) * v * rho.powf(p),
    )?;
    if p == 0.0 {
        let r0 = (rho.ln() - j.value / v).exp();
        return Ok((r0, r0 * j.error_estimate / v));
    }
    let moment = rho.powf(p) - p * j.value / v;
    if !(moment > 0.0) {
        return Err(Error::domain(format!("nonpositive p-th moment {moment} along {theta:?}")));
    }
    let r = moment.powf(1.0 / p);
    Ok((r, r * j.error_estimate / (v * moment)))
}

/// R_p K on the grid, p ∈ (−1, ∞].
pub fn radial_mean_body(k: &Polytope, p: f64, grid: &SphereGrid, tol: f64) -> Result<MeanBodyResult> {
    if !(p > -1.0) {
        return Err(Error::domain(format!("radial mean bodies need p > −1, got {p}")));
    }
    check_grid(k, grid)?;
    let dk = k.difference_body()?;
    if p.is_infinite() {
        return difference_body_result(&dk, grid);
    }
    let rows: Vec<(f64, f64)> = grid.directions().par_iter().map(|th| radial_mean_ray(k, dk.radial(th)?, th, p, tol)).collect::<Result<_>>()?;
    let (radial, errors) = rows.into_iter().unzip();
    Ok(MeanBodyResult { p, body: StarBody::new(grid.clone(), radial)?, errors, method: MeanBodyMethod::RayIntegral })
}

/// S_p K on the grid, p ∈ [−1, ∞].
pub fn spectral_mean_body(k: &Polytope, p: f64, grid: &SphereGrid, tol: f64) -> Result<MeanBodyResult> {
    if !(p >= -1.0) {
        return Err(Error::domain(format!("spectral mean bodies need p ≥ −1, got {p}")));
    }
    check_grid(k, grid)?;
    if p == -1.0 {
        let z = projection_zonoid(k, Weighting::Lebesgue, tol)?;
        let v = k.volume();
        let radial: Vec<f64> = grid.directions().iter().map(|th| v / z.support(th)).collect();
        let errors = vec![0.0; radial.len()];
        return Ok(MeanBodyResult { p, body: StarBody::new(grid.clone(), radial)?, errors, method: MeanBodyMethod::ProjectionPolar });
    }
    let r = radial_mean_body(k, p, grid, tol)?;
    if p.is_infinite() {
        return Ok(r);
    }
    let factor = if p == 0.0 { std::f64::consts::E } else { (p + 1.0).powf(1.0 / p) };
    let radial = r.radial().iter().map(|x| factor * x).collect();
    let errors = r.errors.iter().map(|e| factor * e).collect();
    Ok(MeanBodyResult { p, body: StarBody::new(grid.clone(), radial)?, errors, method: MeanBodyMethod::SpectralRelation })
}

fn check_grid(k: &Polytope, grid: &SphereGrid) -> Result<()> {
    if k.dim() != grid.dim() {
        return Err(Error::config("grid dimension does not match the body"));
    }
    Ok(())
}

fn difference_body_result(dk: &Polytope, grid: &SphereGrid) -> Result<MeanBodyResult> {
    let radial = grid.directions().iter().map(|th| dk.radial(th)).collect::<Result<Vec<_>>>()?;
    let errors = vec![0.0; radial.len()];
    Ok(MeanBodyResult { p: f64::INFINITY, body: StarBody::new(grid.clone(), radial)?, errors, method: MeanBodyMethod::DifferenceBody })
}

/// Direction-wise check of
/// S_{−1} ⊆ S_p ⊆ S_q ⊆ DK ⊆ c_{n,q}R_q ⊆ c_{n,p}R_p ⊆ n·Vol(K)·Π°K for p ≤ q in `p_list`,
/// together with R_p ⊆ R_q.
pub fn inclusion_chain_report(k: &Polytope, p_list: &[f64], grid: &SphereGrid, tol: f64) -> Result<Report> {
    if p_list.windows(2).any(|w| !(w[0] < w[1])) || p_list.iter().any(|p| !(*p >= -1.0)) {
        return Err(Error::config("p_list must be increasing within [−1, ∞]"));
    }
    let n = k.dim();
    let floor = 1e-9;
    let s_min = spectral_mean_body(k, -1.0, grid, tol)?;
    let dk = radial_mean_body(k, f64::INFINITY, grid, tol)?;
    let upper: Vec<f64> = s_min.radial().iter().map(|r| n as f64 * r).collect();
    let zeros = vec![0.0; grid.len()];

    let mut parts = Vec::new();
    let mut spectral = Vec::new();
    let mut scaled_radial = Vec::new();
    let mut radial = Vec::new();
    for &p in p_list.iter().filter(|p| p.is_finite() && **p > -1.0) {
        let s = spectral_mean_body(k, p, grid, tol)?;
        spectral.push(s);
        if p >= 0.0 {
            let r = radial_mean_body(k, p, grid, tol)?;
            let c = c_np(n, p)?;
            let cr: Vec<f64> = r.radial().iter().map(|x| c * x).collect();
            let ce: Vec<f64> = r.errors.iter().map(|x| c * x).collect();
            scaled_radial.push((p, cr, ce));
            radial.push(r);
        }
    }
    let rad = |m: &MeanBodyResult| (m.radial().to_vec(), m.errors.clone());
    let (smin, smin_e) = rad(&s_min);
    let (d, d_e) = rad(&dk);

    let mut prev = ("S_-1".to_string(), smin.clone(), smin_e.clone());
    for s in &spectral {
        let (v, e) = rad(s);
        let name = format!("S_{}", s.p);
        parts.push(radial_inclusion(&format!("{} <= {}", prev.0, name), (&prev.1, &prev.2), (&v, &e), floor));
        prev = (name, v, e);
    }
    parts.push(radial_inclusion(&format!("{} <= DK", prev.0), (&prev.1, &prev.2), (&d, &d_e), floor));
    for w in radial.windows(2) {
        let (a, b) = (rad(&w[0]), rad(&w[1]));
        parts.push(radial_inclusion(&format!("R_{} <= R_{}", w[0].p, w[1].p), (&a.0, &a.1), (&b.0, &b.1), floor));
    }
    let mut prev = ("DK".to_string(), d, d_e);
    for (p, cr, ce) in scaled_radial.iter().rev() {
        let name = format!("c_{n},{p} R_{p}");
        parts.push(radial_inclusion(&format!("{} <= {}", prev.0, name), (&prev.1, &prev.2), (cr, ce), floor));
        prev = (name, cr.clone(), ce.clone());
    }
    parts.push(radial_inclusion(&format!("{} <= n Vol(K) polar(PiK)", prev.0), (&prev.1, &prev.2), (&upper, &zeros), floor));

    let mut report = Report::all("inclusion_chain", &parts)
        .config("grid", grid.len())
        .config("p_list", p_list.iter().map(|p| if p.is_finite() { serde_json::json!(p) } else { serde_json::json!("inf") }).collect::<Vec<_>>());
    for part in &parts {
        report = report.witness(&format!("{}.margin", part.id), part.margin);
    }
    Ok(report)
}
