use std::f64::consts::PI;

use projbody::bodies::{Ball, Body, Polytope};
use projbody::covariogram::*;
use projbody::linalg::scale;
use projbody::measures::{Density, Integrator};
use projbody::numerics::{random_direction, RandomStream};
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

/// Tensor midpoint rule on a rectangle.
fn tensor_grid<F: Fn(f64, f64) -> f64>(f: F, lo: [f64; 2], hi: [f64; 2], m: usize) -> f64 {
    let hx = (hi[0] - lo[0]) / m as f64;
    let hy = (hi[1] - lo[1]) / m as f64;
    let mut s = 0.0;
    for i in 0..m {
        let x = lo[0] + (i as f64 + 0.5) * hx;
        for j in 0..m {
            let y = lo[1] + (j as f64 + 0.5) * hy;
            s += f(x, y);
        }
    }
    s * hx * hy
}

fn phi2(x: f64, y: f64) -> f64 {
    (-(x * x + y * y) / 2.0).exp() / (2.0 * PI)
}

#[test]
fn exact_covariogram_examples() {
    assert!((covariogram_exact(&square(), &[1.0, 0.0]) - 2.0).abs() < 1e-12);
    assert!((covariogram_exact(&triangle(), &[0.5, 0.0]) - 0.125).abs() < 1e-12);
    assert!((covariogram_exact(&triangle(), &[0.0, 0.0]) - 0.5).abs() < 1e-12);
    assert_eq!(covariogram_exact(&square(), &[2.5, 0.0]), 0.0);
}

#[test]
fn gaussian_plain_at_origin_is_mass() {
    let k = square();
    let g = Density::gaussian(2);
    let truth = tensor_grid(phi2, [-1.0, -1.0], [1.0, 1.0], 800);
    let r = mu_covariogram(&CovariogramQuery::plain(&k, &g), &[0.0, 0.0]).unwrap();
    assert!((r.value - truth).abs() <= r.error_estimate.max(1e-6));
    assert!((r.value - 0.46606).abs() < 1e-5);

    let mc = mu_covariogram(&CovariogramQuery::plain(&k, &g).with_integrator(Integrator::monte_carlo(4)), &[0.0, 0.0]).unwrap();
    assert!((mc.value - truth).abs() <= mc.error_estimate);
}

#[test]
fn gaussian_plain_against_tensor_oracle_off_origin() {
    let k = square();
    let g = Density::gaussian(2);
    let x = [0.4, -0.3];
    // K ∩ (K + x) = [−0.6, 1] × [−1, 0.7]
    let truth = tensor_grid(phi2, [-0.6, -1.0], [1.0, 0.7], 800);
    let r = mu_covariogram(&CovariogramQuery::plain(&k, &g), &x).unwrap();
    assert!((r.value - truth).abs() < 1e-6, "{} vs {truth}", r.value);
}

#[test]
fn polarized_vanishes_outside_difference_body() {
    let k = square();
    let g = Density::gaussian(2);
    let q = CovariogramQuery::polarized(&k, &g);
    assert_eq!(mu_covariogram(&q, &[2.1, 0.0]).unwrap().value, 0.0);
    assert_eq!(mu_covariogram(&q, &[2.0, 2.5]).unwrap().value, 0.0);
    let inside = mu_covariogram(&q, &[1.0, 0.0]).unwrap().value;
    // [−0.5, 0.5] × [−1, 1]
    let truth = tensor_grid(phi2, [-0.5, -1.0], [0.5, 1.0], 800);
    assert!((inside - truth).abs() < 1e-6);
}

#[test]
fn functional_at_origin_is_weighted_norm() {
    let k = square();
    let g = Density::gaussian(2);
    let truth = tensor_grid(|x, y| phi2(x, y).powi(2), [-1.0, -1.0], [1.0, 1.0], 800);
    let closed = (PI.sqrt() * libm::erf(1.0)).powi(2) / (4.0 * PI * PI);
    assert!((truth - closed).abs() < 1e-6);
    let r = mu_covariogram(&CovariogramQuery::functional(&k, &g, &g), &[0.0, 0.0]).unwrap();
    assert!((r.value - truth).abs() < 1e-6);
}

#[test]
fn functional_shift_evaluates_weight_at_y_minus_x() {
    let k = square();
    let g = Density::gaussian(2);
    let x = [0.5, 0.0];
    let truth = tensor_grid(|a, b| phi2(a - 0.5, b) * phi2(a, b), [-0.5, -1.0], [1.0, 1.0], 800);
    let r = mu_covariogram(&CovariogramQuery::functional(&k, &g, &g), &x).unwrap();
    assert!((r.value - truth).abs() < 1e-6);
}

#[test]
fn query_validation() {
    let k = square();
    let g = Density::gaussian(2);
    let mut q = CovariogramQuery::plain(&k, &g);
    q.weight = Some(&g);
    assert!(matches!(mu_covariogram(&q, &[0.0, 0.0]), Err(Error::Config(_))));
    let mut q = CovariogramQuery::plain(&k, &g);
    q.mode = CovariogramMode::Functional;
    assert!(matches!(mu_covariogram(&q, &[0.0, 0.0]), Err(Error::Config(_))));
    let g3 = Density::gaussian(3);
    assert!(mu_covariogram(&CovariogramQuery::plain(&k, &g3), &[0.0, 0.0]).is_err());
}

#[test]
fn richardson_weights_are_consistent() {
    assert_eq!(richardson_weights(1), vec![1.0]);
    assert_eq!(richardson_weights(2), vec![-1.0, 2.0]);
    for l in 1..5 {
        let w = richardson_weights(l);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn brightness_of_square_lebesgue() {
    let k = square();
    let l = Density::lebesgue(2);
    let q = CovariogramQuery::plain(&k, &l);
    let d = brightness_derivative(&q, &[1.0, 0.0], default_step(&k), 1.0).unwrap();
    assert!((d.value + 2.0).abs() < 1e-6);
}

#[test]
fn brightness_of_square_gaussian() {
    let k = square();
    let g = Density::gaussian(2);
    let a = (-0.5f64).exp() / (2.0 * PI) * tensor_grid(|_, y| (-0.5 * y * y).exp(), [0.0, -1.0], [1.0, 1.0], 4000);
    let d = brightness_derivative(&CovariogramQuery::plain(&k, &g), &[1.0, 0.0], default_step(&k), 1.0).unwrap();
    assert!((d.value + a).abs() <= d.error_estimate.max(1e-7), "{} vs {}", d.value, -a);
    assert!((d.value + 0.16519).abs() < 1e-4);
}

#[test]
fn brightness_of_triangle() {
    let k = triangle();
    let l = Density::lebesgue(2);
    let d = brightness_derivative(&CovariogramQuery::plain(&k, &l), &[1.0, 0.0], default_step(&k), 1.0).unwrap();
    assert!((d.value + 1.0).abs() < 1e-4);
}

#[test]
fn brightness_step_and_direction_checks() {
    let k = square();
    let l = Density::lebesgue(2);
    let q = CovariogramQuery::plain(&k, &l);
    assert!(brightness_derivative(&q, &[1.0, 1.0], 1e-3, 1.0).is_err());
    assert!(brightness_derivative(&q, &[1.0, 0.0], 1.0, 1.0).is_err());
}

#[test]
fn monte_carlo_brightness_reports_precision_error() {
    let k = square();
    let g = Density::gaussian(2);
    let q = CovariogramQuery::plain(&k, &g).with_integrator(Integrator::MonteCarlo { stream: RandomStream::new(3, 0), samples: 20_000 });
    let r = brightness_derivative(&q, &[1.0, 0.0], default_step(&k), 1e-6);
    assert!(matches!(r, Err(Error::Precision(_))));
}

#[test]
fn monte_carlo_brightness_within_its_budget() {
    let k = square();
    let g = Density::gaussian(2);
    let q = CovariogramQuery::plain(&k, &g).with_integrator(Integrator::MonteCarlo { stream: RandomStream::new(5, 0), samples: 200_000 });
    let d = brightness_derivative(&q, &[1.0, 0.0], 0.05, f64::INFINITY).unwrap();
    assert!((d.value + 0.1651908710340167).abs() <= d.error_estimate);
}

#[test]
fn translated_average_lebesgue_triangle() {
    let t = Body::Polytope(triangle());
    let l = Density::lebesgue(2);
    let r = translated_average(AverageKind::MuLambda, &t, &l, None, None, RandomStream::new(1, 0), 200_000).unwrap();
    assert!((r.value - 0.5).abs() <= r.error_estimate, "{r:?}");
}

#[test]
fn nu_mu_with_lebesgue_outer_measure() {
    let t = Body::Polytope(triangle());
    let g = Density::gaussian(2);
    let l = Density::lebesgue(2);
    let r = translated_average(AverageKind::NuMuBody, &t, &g, Some(&l), None, RandomStream::new(2, 0), 200_000).unwrap();
    assert!((r.value - 0.5).abs() <= r.error_estimate, "{r:?}");
}

#[test]
fn nu_mu_functional_with_lebesgue_outer_measure() {
    // ∫ g_{μ,f}(K,x) dx = Vol(K)·‖f‖, so the average is Vol(K)
    let t = Body::Polytope(triangle());
    let g = Density::gaussian(2);
    let l = Density::lebesgue(2);
    let r = translated_average(AverageKind::NuMuFunctional, &t, &g, Some(&l), Some(&g), RandomStream::new(3, 0), 200_000).unwrap();
    assert!((r.value - 0.5).abs() <= r.error_estimate, "{r:?}");
}

/// (γ₂)_λ(R·B) = E[g_B(|X|)/Vol B] for X standard normal in the plane.
fn disk_average_oracle(r: f64) -> f64 {
    let m = 20000;
    let top = (2.0 * r).min(40.0);
    let h = top / m as f64;
    let f = |t: f64| {
        let u = (t / (2.0 * r)).min(1.0);
        let lens = 2.0 / PI * (u.acos() - u * (1.0 - u * u).sqrt());
        lens * t * (-0.5 * t * t).exp()
    };
    (0..m).map(|k| f((k as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn gaussian_average_of_large_disk() {
    let g = Density::gaussian(2);
    let mut last = 0.0;
    for r in [1.0, 5.0, 20.0, 80.0] {
        let b = Body::Ball(Ball::new(2, r).unwrap());
        let v = translated_average(AverageKind::MuLambda, &b, &g, None, None, RandomStream::new(0, 0), 0).unwrap().value;
        assert!((v - disk_average_oracle(r)).abs() < 1e-6, "R={r}: {v}");
        assert!(v > last);
        last = v;
    }
    assert!(last >= 0.99);
}

#[test]
fn average_argument_checks() {
    let t = Body::Polytope(triangle());
    let g = Density::gaussian(2);
    assert!(translated_average(AverageKind::NuMuBody, &t, &g, None, None, RandomStream::new(0, 0), 1000).is_err());
    let l = Density::lebesgue(2);
    assert!(translated_average(AverageKind::NuMuFunctional, &t, &g, Some(&l), None, RandomStream::new(0, 0), 1000).is_err());
}

#[test]
fn simplex_covariogram_root_is_affine() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [2usize, 3] {
        let s = Polytope::simplex(n).unwrap();
        let dk = s.difference_body().unwrap();
        for _ in 0..25 {
            let th = random_direction(&mut rng, n);
            let rho = dk.radial(&th).unwrap();
            let g = |r: f64| covariogram_exact(&s, &scale(&th, r)).powf(1.0 / n as f64);
            // g vanishes on ∂DK, and the root would amplify rounding there
            let (a, b) = (g(0.0), 0.0);
            for k in 1..10 {
                let r = rho * k as f64 / 10.0;
                let chord = a + (b - a) * k as f64 / 10.0;
                assert!((g(r) - chord).abs() < 1e-9, "n={n} r={r} {} {chord}", g(r));
            }
        }
    }
}

#[test]
fn support_is_difference_body() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k = triangle();
    let dk = k.difference_body().unwrap();
    for _ in 0..50 {
        let th = random_direction(&mut rng, 2);
        let rho = dk.radial(&th).unwrap();
        assert!(covariogram_exact(&k, &scale(&th, rho * 0.999)) > 0.0);
        assert!(covariogram_exact(&k, &scale(&th, rho)).abs() < 1e-9);
        assert_eq!(covariogram_exact(&k, &scale(&th, rho * 1.001)), 0.0);
    }
}

fn pentagon(seed: u64) -> Polytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..12).map(|_| random_direction(&mut rng, 2)).collect();
    Polytope::from_points(&pts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn root_concave_along_rays(seed in 0u64..1000, a in 0.0f64..1.0, b in 0.0f64..1.0, ang in 0.0f64..6.3) {
        let k = pentagon(seed);
        let th = [ang.cos(), ang.sin()];
        let rho = k.difference_body().unwrap().radial(&th).unwrap();
        let g = |r: f64| covariogram_exact(&k, &scale(&th, r)).sqrt();
        let (r1, r2) = (a * rho, b * rho);
        prop_assert!(g((r1 + r2) / 2.0) >= 0.5 * (g(r1) + g(r2)) - 1e-9);
    }

    #[test]
    fn gaussian_covariogram_log_concave(seed in 0u64..1000, a in 0.0f64..0.9, b in 0.0f64..0.9, ang in 0.0f64..6.3) {
        let k = pentagon(seed);
        let g = Density::gaussian(2);
        let th = [ang.cos(), ang.sin()];
        let rho = k.difference_body().unwrap().radial(&th).unwrap();
        let q = CovariogramQuery::plain(&k, &g).with_integrator(Integrator::Cubature { tol: 1e-12 });
        let val = |r: f64| mu_covariogram(&q, &scale(&th, r)).unwrap();
        let (r1, r2) = (a * rho, b * rho);
        let (x, y, m) = (val(r1), val(r2), val((r1 + r2) / 2.0));
        let budget = 3.0 * (x.error_estimate / x.value + y.error_estimate / y.value + m.error_estimate / m.value);
        prop_assert!(m.value.ln() >= 0.5 * (x.value.ln() + y.value.ln()) - budget - 1e-12);
    }

    #[test]
    fn gaussian_covariogram_even_on_symmetric_bodies(ang in 0.0f64..6.3, r in 0.0f64..1.9) {
        let k = Polytope::regular_polygon(6, 1.0).unwrap();
        let g = Density::gaussian(2);
        let x = [r * ang.cos(), r * ang.sin()];
        let mx = [-x[0], -x[1]];
        let q = CovariogramQuery::plain(&k, &g);
        let (a, b) = (mu_covariogram(&q, &x).unwrap(), mu_covariogram(&q, &mx).unwrap());
        prop_assert!((a.value - b.value).abs() <= 3.0 * (a.error_estimate + b.error_estimate) + 1e-12);
    }

    #[test]
    fn polarized_even_for_any_measure_on_symmetric_bodies(ang in 0.0f64..6.3, r in 0.0f64..1.9) {
        let k = square();
        let mu = Density::exp_norm(&Polytope::regular_polygon(6, 1.0).unwrap()).unwrap();
        let x = [r * ang.cos(), r * ang.sin()];
        let q = CovariogramQuery::polarized(&k, &mu).with_integrator(Integrator::Cubature { tol: 1e-8 });
        let (a, b) = (mu_covariogram(&q, &x).unwrap(), mu_covariogram(&q, &[-x[0], -x[1]]).unwrap());
        prop_assert!((a.value - b.value).abs() <= 3.0 * (a.error_estimate + b.error_estimate) + 1e-12);
    }
}

#[test]
fn functional_with_creased_weight_matches_level_set_integral() {
    // ∫_R e^{-|z|_∞} dz over R = [-1, 0.5] × [-1, 1], via ∫ e^{-t} area(R ∩ tQ) dt in closed form
    let f2 = |t: f64| -(-t).exp() * (t * t + 2.0 * t + 2.0);
    let f1 = |t: f64| -(-t).exp() * (t + 1.0);
    let want = 4.0 * (f2(0.5) - f2(0.0)) + 2.0 * (f2(1.0) - f2(0.5)) + (f1(1.0) - f1(0.5)) + 3.0 * (-1.0f64).exp();
    let k = square();
    let leb = Density::lebesgue(2);
    let f = Density::exp_norm(&square()).unwrap();
    let q = CovariogramQuery::functional(&k, &leb, &f).with_integrator(Integrator::Cubature { tol: 1e-12 });
    let got = mu_covariogram(&q, &[0.5, 0.0]).unwrap();
    assert!((got.value - want).abs() < 1e-10, "{} vs {want}", got.value);
}
