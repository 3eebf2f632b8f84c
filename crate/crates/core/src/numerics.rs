//! Deterministic randomness, sphere grids, adaptive quadrature, Monte Carlo and
//! simplex cubature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Seeded, splittable random source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Child stream `k`; children of distinct parents or indices do not overlap in practice.
    pub fn split(&self, k: u64) -> Self {
        Self { seed: self.seed, stream_index: splitmix64(self.stream_index ^ splitmix64(k.wrapping_add(1))) }
    }
}

/// Construction rule for a sphere grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridMode {
    EqualAngle2d,
    Fibonacci3d,
    UniformRandom(RandomStream),
}

/// Directions on S^{n-1} with quadrature weights summing to its surface area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    dim: usize,
    mode: GridMode,
    directions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Volume of the unit ball in R^m.
pub fn kappa(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / m as f64 * kappa(m - 2),
    }
}

/// Surface area of S^{n-1}.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * kappa(n)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Binomial coefficient with real upper argument, Γ(a+1)/(Γ(k+1)Γ(a−k+1)).
pub fn binomial(a: f64, k: usize) -> f64 {
    let mut out = 1.0;
    for j in 0..k {
        out *= (a - j as f64) / (j as f64 + 1.0);
    }
    out
}

/// P(|X| ≤ r) for a standard Gaussian vector X in R^n, n ∈ {1,..,4}.
pub fn chi_cdf(n: usize, r: f64) -> f64 {
    if r.is_infinite() {
        return 1.0;
    }
    let h = 0.5 * r * r;
    match n {
        1 => libm::erf(r / SQRT_2),
        2 => -libm::expm1(-h),
        3 => libm::erf(r / SQRT_2) - (2.0 / PI).sqrt() * r * (-h).exp(),
        4 => -libm::expm1(-h) - h * (-h).exp(),
        _ => f64::NAN,
    }
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

impl SphereGrid {
    pub fn new(n: usize, count: usize, mode: GridMode) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::config(format!("sphere grid dimension {n} outside 2..=4")));
        }
        if count < 2 * n {
            return Err(Error::config(format!("sphere grid needs at least {} directions", 2 * n)));
        }
        let directions: Vec<Vec<f64>> = match mode {
            GridMode::EqualAngle2d => {
                if n != 2 {
                    return Err(Error::config("equal_angle_2d grids require n = 2"));
                }
                (0..count)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / count as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect()
            }
            GridMode::Fibonacci3d => {
                if n != 3 {
                    return Err(Error::config("fibonacci_3d grids require n = 3"));
                }
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..count)
                    .map(|k| {
                        let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        let t = golden * k as f64;
                        vec![r * t.cos(), r * t.sin(), z]
                    })
                    .collect()
            }
            GridMode::UniformRandom(stream) => {
                let mut rng = stream.rng();
                (0..count).map(|_| random_direction(&mut rng, n)).collect()
            }
        };
        let w = sphere_area(n) / count as f64;
        Ok(Self { dim: n, mode, weights: vec![w; count], directions })
    }

    /// Default deterministic grid for dimension n.
    pub fn standard(n: usize, count: usize) -> Result<Self> {
        match n {
            2 => Self::new(2, count, GridMode::EqualAngle2d),
            3 => Self::new(3, count, GridMode::Fibonacci3d),
            _ => Self::new(n, count, GridMode::UniformRandom(RandomStream::new(0x5EED, 0))),
        }
    }

    /// Grid of the same mode with half as many directions, used for error estimates.
    pub fn coarsened(&self) -> Result<Self> {
        let mode = match self.mode {
            GridMode::UniformRandom(s) => GridMode::UniformRandom(s.split(1)),
            m => m,
        };
        Self::new(self.dim, (self.len() / 2).max(2 * self.dim), mode)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.directions.iter().map(|d| d.as_slice()).zip(self.weights.iter().copied())
    }
}

pub fn random_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let l = norm(&v);
        if l > 1e-12 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

/// Value of a numerical integral with an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, evaluations: 0 }
    }
}

pub fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function Φ.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse of Φ on (0,1).
pub fn gaussian_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("gaussian quantile needs p in (0,1), got {p}")));
    }
    if p > 0.5 {
        // 1 - p is exact here
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] =
        [-3.969683028665376e1, 2.209460984245205e2, -2.759285104469687e2, 1.383577518672690e2, -3.066479806614716e1, 2.506628277459239];
    const B: [f64; 5] = [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [-7.784894002430293e-3, -3.223964580411365e-1, -2.400758277161838, -2.549732539343734, 4.374664141464968, 2.938163982698783];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // one Newton step against the accurate distribution function
    let pdf = gaussian_pdf(x);
    if pdf > 0.0 {
        x - (gaussian_cdf(x) - p) / pdf
    } else {
        x
    }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_W: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    peak: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    let mut peak = 0.0f64;
    for i in 0..8 {
        let pts: &[f64] = if i == 7 { &[0.0] } else { &[-1.0, 1.0] };
        for s in pts {
            let x = c + s * h * GK_X[i];
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Evaluation { point: vec![x] });
            }
            peak = peak.max(v.abs());
            k += GK_W[i] * v;
            if i % 2 == 1 {
                g += G_W[i / 2] * v;
            }
        }
    }
    Ok(Panel { a, b, value: k * h, error: ((k - g) * h).abs(), peak })
}

const MAX_PANELS: usize = 4000;

fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<(QuadratureResult, f64)> {
    let first = gauss_kronrod(f, a, b)?;
    let mut peak = first.peak;
    let mut total = first.value;
    let mut err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut evals = 15;
    while err > tol.max(64.0 * f64::EPSILON * total.abs()) {
        if heap.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailure { estimate: total, error: err });
        }
        let p = heap.pop().expect("nonempty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::QuadratureFailure { estimate: total, error: err });
        }
        let l = gauss_kronrod(f, p.a, m)?;
        let r = gauss_kronrod(f, m, p.b)?;
        evals += 30;
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        peak = peak.max(l.peak).max(r.peak);
        heap.push(l);
        heap.push(r);
    }
    // recompute sums to avoid drift
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok((QuadratureResult { value, error_estimate: error, evaluations: evals }, peak))
}

/// Adaptive Gauss-Kronrod integration on [a, b]; `b` may be `f64::INFINITY`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(Error::config("integration bounds must be finite below"));
    }
    if b.is_finite() {
        if b == a {
            return Ok(QuadratureResult::exact(0.0));
        }
        return adaptive(&mut f, a, b, tol).map(|r| r.0);
    }
    // improper: panels of doubling width until the integrand has decayed
    let mut lo = a;
    let mut width = 1.0;
    let mut running_peak = 0.0f64;
    let mut quiet = 0;
    let mut out = QuadratureResult::exact(0.0);
    for _ in 0..200 {
        let (r, peak) = adaptive(&mut f, lo, lo + width, tol / 8.0)?;
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        out.evaluations += r.evaluations;
        running_peak = running_peak.max(peak);
        if peak < 1e-12 * running_peak {
            quiet += 1;
            if quiet == 3 {
                out.error_estimate += r.value.abs();
                return Ok(out);
            }
        } else {
            quiet = 0;
        }
        lo += width;
        width *= 2.0;
    }
    Err(Error::QuadratureFailure { estimate: out.value, error: out.error_estimate })
}

/// Point source for Monte Carlo integration.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;
    /// Measure of the region sampled uniformly.
    fn measure(&self) -> f64;
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);
}

/// Uniform points in an axis-parallel box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSampler {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSampler {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }
}

impl Sampler for BoxSampler {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn measure(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(&self.lo).zip(&self.hi) {
            *o = a + (b - a) * rng.random::<f64>();
        }
    }
}

/// Uniform points in a region given by a membership test inside a box, with known measure.
pub struct RejectionSampler<'a> {
    pub bounds: BoxSampler,
    pub inside: Box<dyn Fn(&[f64]) -> bool + Sync + 'a>,
    pub region_measure: f64,
}

impl Sampler for RejectionSampler<'_> {
    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn measure(&self) -> f64 {
        self.region_measure
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        loop {
            self.bounds.sample(rng, out);
            if (self.inside)(out) {
                return;
            }
        }
    }
}

pub const DEFAULT_SAMPLES: usize = 200_000;
const BLOCK: usize = 4096;

/// Monte Carlo integral of a vector-valued integrand; one result per component.
/// The same sample points serve every component.
pub fn monte_carlo_multi<S, F>(sampler: &S, components: usize, integrand: F, samples: usize, stream: RandomStream) -> Result<Vec<QuadratureResult>>
where
    S: Sampler + ?Sized,
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if samples < 1000 {
        return Err(Error::config(format!("Monte Carlo needs at least 1000 samples, got {samples}")));
    }
    let blocks = samples.div_ceil(BLOCK);
    let partial: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK.min(samples - b * BLOCK);
            let mut rng = stream.split(b as u64).rng();
            let mut x = vec![0.0; sampler.dim()];
            let mut v = vec![0.0; components];
            let mut sum = vec![0.0; components];
            let mut sq = vec![0.0; components];
            for _ in 0..count {
                sampler.sample(&mut rng, &mut x);
                v.iter_mut().for_each(|t| *t = 0.0);
                integrand(&x, &mut v);
                for k in 0..components {
                    if !v[k].is_finite() {
                        return Err(Error::Evaluation { point: x.clone() });
                    }
                    sum[k] += v[k];
                    sq[k] += v[k] * v[k];
                }
            }
            Ok((sum, sq))
        })
        .collect();
    let mut sum = vec![0.0; components];
    let mut sq = vec![0.0; components];
    for p in partial {
        let (s, q) = p?;
        for k in 0..components {
            sum[k] += s[k];
            sq[k] += q[k];
        }
    }
    let n = samples as f64;
    let vol = sampler.measure();
    Ok((0..components)
        .map(|k| {
            let mean = sum[k] / n;
            let var = ((sq[k] / n - mean * mean) * n / (n - 1.0)).max(0.0);
            QuadratureResult { value: mean * vol, error_estimate: 3.0 * (var / n).sqrt() * vol, evaluations: samples }
        })
        .collect())
}

/// Monte Carlo integral with a 3-standard-error budget.
pub fn monte_carlo<S, F>(sampler: &S, integrand: F, samples: usize, stream: RandomStream) -> Result<QuadratureResult>
where
    S: Sampler + ?Sized,
    F: Fn(&[f64]) -> f64 + Sync,
{
    monte_carlo_multi(sampler, 1, |x, out| out[0] = integrand(x), samples, stream).map(|mut v| v.remove(0))
}

/// A simplex given by its d+1 vertices in R^m (m ≥ d).
pub type Simplex = Vec<Vec<f64>>;

/// d-dimensional volume of a simplex embedded in R^m.
pub fn simplex_volume(s: &[Vec<f64>]) -> f64 {
    let d = s.len() - 1;
    let edges: Vec<Vec<f64>> = s[1..].iter().map(|v| crate::linalg::sub(v, &s[0])).collect();
    if d == s[0].len() {
        // full dimension: the plain determinant keeps relative accuracy on thin cells
        return crate::linalg::det_rows(&edges).abs() / factorial(d);
    }
    let gram: Vec<Vec<f64>> = edges.iter().map(|a| edges.iter().map(|b| dot(a, b)).collect()).collect();
    crate::linalg::det_rows(&gram).max(0.0).sqrt() / factorial(d)
}

/// Grundmann-Möller rule of degree 2s+1 on the d-simplex, as (barycentric node, weight)
/// pairs with weights summing to one.
pub fn grundmann_moller(d: usize, s: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    let df = factorial(d);
    for i in 0..=s {
        let denom = (d + 2 * s + 1 - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 2f64.powi(-2 * s as i32) * denom.powi(2 * s as i32 + 1) / (factorial(i) * factorial(d + 2 * s + 1 - i)) * df;
        for beta in compositions(s - i, d + 1) {
            let node: Vec<f64> = beta.iter().map(|&b| (2.0 * b as f64 + 1.0) / denom).collect();
            out.push((node, w));
        }
    }
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Adaptive cubature rules for a given simplex dimension.
pub struct SimplexCubature {
    low: Vec<(Vec<f64>, f64)>,
    high: Vec<(Vec<f64>, f64)>,
}

impl SimplexCubature {
    pub fn new(d: usize) -> Self {
        Self { low: grundmann_moller(d, 3), high: grundmann_moller(d, 4) }
    }

    fn apply<F: FnMut(&[f64]) -> f64>(rule: &[(Vec<f64>, f64)], s: &[Vec<f64>], vol: f64, f: &mut F, x: &mut [f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (node, w) in rule {
            x.iter_mut().for_each(|t| *t = 0.0);
            for (lam, v) in node.iter().zip(s) {
                for (t, c) in x.iter_mut().zip(v) {
                    *t += lam * c;
                }
            }
            let val = f(x);
            if !val.is_finite() {
                return Err(Error::Evaluation { point: x.to_vec() });
            }
            acc += w * val;
        }
        Ok(acc * vol)
    }

    /// Integrate over a union of simplices to absolute tolerance `tol`.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, simplices: &[Simplex], mut f: F, tol: f64) -> Result<QuadratureResult> {
        struct Cell {
            s: Simplex,
            vol: f64,
            value: f64,
            error: f64,
        }
        impl PartialEq for Cell {
            fn eq(&self, o: &Self) -> bool {
                self.error == o.error
            }
        }
        impl Eq for Cell {}
        impl PartialOrd for Cell {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Cell {
            fn cmp(&self, o: &Self) -> Ordering {
                self.error.total_cmp(&o.error)
            }
        }
        let m = match simplices.first() {
            Some(s) => s[0].len(),
            None => return Ok(QuadratureResult::exact(0.0)),
        };
        let mut x = vec![0.0; m];
        let mut evals = 0usize;
        let per = self.low.len() + self.high.len();
        let mut eval_cell = |s: Simplex, f: &mut F, evals: &mut usize| -> Result<Cell> {
            let vol = simplex_volume(&s);
            let hi = Self::apply(&self.high, &s, vol, f, &mut x)?;
            let lo = Self::apply(&self.low, &s, vol, f, &mut x)?;
            *evals += per;
            Ok(Cell { s, vol, value: hi, error: (hi - lo).abs() })
        };
        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut err = 0.0;
        for s in simplices {
            let c = eval_cell(s.clone(), &mut f, &mut evals)?;
            if c.vol > 0.0 {
                total += c.value;
                err += c.error;
                heap.push(c);
            }
        }
        let max_cells = 250_000 + 4 * simplices.len();
        while err > tol.max(64.0 * f64::EPSILON * total.abs()) {
            if heap.len() >= max_cells {
                return Err(Error::QuadratureFailure { estimate: total, error: err });
            }
            let Some(c) = heap.pop() else { break };
            // bisect the longest edge
            let k = c.s.len();
            let (mut bi, mut bj, mut best) = (0, 1, -1.0);
            for i in 0..k {
                for j in i + 1..k {
                    let l = crate::linalg::dist(&c.s[i], &c.s[j]);
                    if l > best {
                        best = l;
                        bi = i;
                        bj = j;
                    }
                }
            }
            let mid: Vec<f64> = c.s[bi].iter().zip(&c.s[bj]).map(|(a, b)| 0.5 * (a + b)).collect();
            let mut s1 = c.s.clone();
            s1[bi] = mid.clone();
            let mut s2 = c.s;
            s2[bj] = mid;
            total -= c.value;
            err -= c.error;
            for s in [s1, s2] {
                let cell = eval_cell(s, &mut f, &mut evals)?;
                total += cell.value;
                err += cell.error;
                heap.push(cell);
            }
        }
        let value: f64 = heap.iter().map(|c| c.value).sum();
        let error: f64 = heap.iter().map(|c| c.error).sum();
        Ok(QuadratureResult { value, error_estimate: error, evaluations: evals })
    }
}
