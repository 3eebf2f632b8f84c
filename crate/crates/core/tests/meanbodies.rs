use std::f64::consts::E;

use projbody::bodies::Polytope;
use projbody::linalg::dot;
use projbody::meanbodies::*;
use projbody::numerics::{random_direction, SphereGrid};
use projbody::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn triangle() -> Polytope {
    Polytope::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
}

fn square() -> Polytope {
    Polytope::cube(2, 1.0).unwrap()
}

fn e1_grid() -> SphereGrid {
    // equal-angle grid whose first direction is e₁
    SphereGrid::standard(2, 8).unwrap()
}

/// (1/Vol K)∫_K ρ_K(x,θ)^p dx through chord lengths X(y) along θ:
/// ∫ over θ⊥ of X^{p+1}/(p+1) (or X log X − X at p = 0), midpoint rule in y.
fn moment_oracle(k: &Polytope, theta: &[f64], p: f64, m: usize) -> f64 {
    let u = [-theta[1], theta[0]];
    let proj: Vec<f64> = k.vertices().iter().map(|v| dot(v, &u)).collect();
    let (a, b) = proj.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
    let h = (b - a) / m as f64;
    let mut acc = 0.0;
    for i in 0..m {
        let y = a + (i as f64 + 0.5) * h;
        let base = [y * u[0], y * u[1]];
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for f in k.facets() {
            let c = dot(&f.normal, theta);
            let rhs = f.offset - dot(&f.normal, &base);
            if c > 1e-15 {
                hi = hi.min(rhs / c);
            } else if c < -1e-15 {
                lo = lo.max(rhs / c);
            }
        }
        let x = (hi - lo).max(0.0);
        if x > 0.0 {
            acc += if p == 0.0 { x * x.ln() - x } else { x.powf(p + 1.0) / (p + 1.0) };
        }
    }
    acc * h / k.volume()
}

#[test]
fn constants() {
    assert!((c_np(2, 1.0).unwrap() - 3.0).abs() < 1e-12);
    assert!((c_np(2, 0.0).unwrap() - 1.5f64.exp()).abs() < 1e-12);
    assert!((c_np(2, 0.0).unwrap() - 4.48169).abs() < 1e-5);
    assert!(c_np(1, 1.0).is_err());
    assert!(c_np(2, -0.5).is_err());
    // c_{n,p} → 1 as p → ∞
    assert!(c_np(3, 400.0).unwrap() < 1.05);
}

#[test]
fn radial_examples() {
    let g = e1_grid();
    let r = radial_mean_body(&triangle(), 1.0, &g, 1e-12).unwrap();
    assert!((r.radial()[0] - 1.0 / 3.0).abs() < 1e-8);
    let r = radial_mean_body(&square(), 1.0, &g, 1e-12).unwrap();
    assert!((r.radial()[0] - 1.0).abs() < 1e-8);
    assert_eq!(r.method, MeanBodyMethod::RayIntegral);
    let inf = radial_mean_body(&triangle(), f64::INFINITY, &g, 1e-12).unwrap();
    let dk = triangle().difference_body().unwrap();
    for (th, r) in g.directions().iter().zip(inf.radial()) {
        assert_eq!(*r, dk.radial(th).unwrap());
    }
    assert!(matches!(radial_mean_body(&square(), -1.0, &g, 1e-12), Err(Error::Domain(_))));
}

#[test]
fn square_moments_along_axis() {
    // ρ_K(x, e₁) = 1 − x₁, so R_p(e₁) = 2(p+1)^{−1/p} and R_0(e₁) = 2/e
    let g = e1_grid();
    for p in [-0.5, -0.2, 0.0, 0.5, 2.0, 3.0] {
        let r = radial_mean_body(&square(), p, &g, 1e-12).unwrap().radial()[0];
        let truth = if p == 0.0 { 2.0 / E } else { 2.0 * (p + 1.0f64).powf(-1.0 / p) };
        assert!((r - truth).abs() < 1e-8, "p={p}: {r} vs {truth}");
    }
}

#[test]
fn moments_against_tensor_oracle() {
    let k = Polytope::from_points(&[vec![-1.0, -0.5], vec![1.2, -0.7], vec![0.6, 0.9], vec![-0.8, 0.6], vec![0.1, -1.0]]).unwrap();
    let grid = SphereGrid::standard(2, 6).unwrap();
    for p in [-0.5, 0.0, 1.0, 2.5] {
        let r = radial_mean_body(&k, p, &grid, 1e-12).unwrap();
        for (th, rho) in grid.directions().iter().zip(r.radial()) {
            let m = moment_oracle(&k, th, p, 20000);
            let truth = if p == 0.0 { m.exp() } else { m.powf(1.0 / p) };
            assert!((rho - truth).abs() < 1e-6 * truth, "p={p}: {rho} vs {truth}");
        }
    }
}

#[test]
fn spectral_examples() {
    let g = e1_grid();
    let s = spectral_mean_body(&triangle(), -1.0, &g, 1e-12).unwrap();
    assert!((s.radial()[0] - 0.5).abs() < 1e-12);
    let s = spectral_mean_body(&triangle(), 1.0, &g, 1e-12).unwrap();
    assert!((s.radial()[0] - 2.0 / 3.0).abs() < 1e-8);
    let s = spectral_mean_body(&square(), f64::INFINITY, &g, 1e-12).unwrap();
    let two_k = square().scaled(2.0).unwrap();
    for (th, r) in g.directions().iter().zip(s.radial()) {
        assert!((r - two_k.radial(th).unwrap()).abs() < 1e-12);
    }
    let s0 = spectral_mean_body(&square(), 0.0, &g, 1e-12).unwrap();
    let r0 = radial_mean_body(&square(), 0.0, &g, 1e-12).unwrap();
    assert!((s0.radial()[3] - E * r0.radial()[3]).abs() < 1e-12);
    assert!(spectral_mean_body(&square(), -1.5, &g, 1e-12).is_err());
}

#[test]
fn simplex_equality_case() {
    let g = e1_grid();
    let t = triangle();
    let r = radial_mean_body(&t, 1.0, &g, 1e-12).unwrap();
    let dk = t.difference_body().unwrap();
    assert!((c_np(2, 1.0).unwrap() * r.radial()[0] - dk.radial(&[1.0, 0.0]).unwrap()).abs() < 1e-8);
}

#[test]
fn inclusion_chain_triangle_is_tight() {
    let grid = SphereGrid::standard(2, 64).unwrap();
    let r = inclusion_chain_report(&triangle(), &[0.0, 1.0, 2.0], &grid, 1e-12).unwrap();
    assert!(r.pass, "{r:?}");
    for (name, w) in &r.witnesses {
        if name.ends_with(".margin") && !name.starts_with("S_") && !name.starts_with("R_") {
            assert!(w.value.abs() < 1e-6, "{name}: {}", w.value);
        }
    }
}

#[test]
fn inclusion_chain_square_strict() {
    let grid = SphereGrid::standard(2, 64).unwrap();
    let r = inclusion_chain_report(&square(), &[0.0, 1.0, 2.0], &grid, 1e-12).unwrap();
    assert!(r.pass, "{r:?}");
    let last = r.witnesses.iter().find(|(k, _)| k.contains("polar")).unwrap().1;
    assert!(last.value > 1e-3);
}

#[test]
fn inclusion_chain_random_pentagon_and_disk() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let pts: Vec<Vec<f64>> = (0..5).map(|_| random_direction(&mut rng, 2)).collect();
    let k = Polytope::from_points(&pts).unwrap();
    let grid = SphereGrid::standard(2, 64).unwrap();
    assert!(inclusion_chain_report(&k, &[0.0, 1.0, 2.0], &grid, 1e-12).unwrap().pass);
    let disk = Polytope::regular_polygon(256, 1.0).unwrap();
    let r = inclusion_chain_report(&disk, &[], &SphereGrid::standard(2, 32).unwrap(), 1e-10).unwrap();
    assert!(r.pass);
}

#[test]
fn chain_rejects_unsorted_orders() {
    let grid = SphereGrid::standard(2, 16).unwrap();
    assert!(inclusion_chain_report(&square(), &[1.0, 0.0], &grid, 1e-12).is_err());
}

#[test]
fn three_dimensional_simplex_axis() {
    // ρ_{R_1 T}(θ)·c_{3,1} = ρ_{DT}(θ) for the 3-simplex
    let t = Polytope::simplex(3).unwrap();
    let grid = SphereGrid::standard(3, 12).unwrap();
    let r = radial_mean_body(&t, 1.0, &grid, 1e-11).unwrap();
    let dk = t.difference_body().unwrap();
    let c = c_np(3, 1.0).unwrap();
    assert!((c - 4.0).abs() < 1e-12);
    for (th, rho) in grid.directions().iter().zip(r.radial()) {
        assert!((c * rho - dk.radial(th).unwrap()).abs() < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn jensen_monotone_and_even(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..7).map(|_| random_direction(&mut rng, 2)).collect();
        let k = Polytope::from_points(&pts).unwrap();
        let grid = SphereGrid::standard(2, 16).unwrap();
        let mut last: Option<Vec<f64>> = None;
        for p in [-0.5, 0.0, 0.01, 1.0, 3.0] {
            let r = radial_mean_body(&k, p, &grid, 1e-12).unwrap();
            let v = r.radial().to_vec();
            for i in 0..8 {
                prop_assert!((v[i] - v[i + 8]).abs() < 1e-9 * v[i]);
            }
            if let Some(prev) = &last {
                for (a, b) in prev.iter().zip(&v) {
                    prop_assert!(*a <= b + 1e-10);
                }
                if p == 0.01 {
                    for (a, b) in prev.iter().zip(&v) {
                        prop_assert!((b - a).abs() <= 1e-2 * a);
                    }
                }
            }
            last = Some(v);
        }
    }
}
