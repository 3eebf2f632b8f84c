use std::f64::consts::{PI, SQRT_2};

use projbody::bodies::Polytope;
use projbody::linalg::LinearMap;
use projbody::measures::{facet_weights, ConcavityFamily, Density, Integrator};
use projbody::numerics::{binomial, kappa, random_direction, SphereGrid};
use projbody::projection::*;
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

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for k in 1..2 * m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Gaussian weight of one edge of [−1,1]².
fn edge_oracle() -> f64 {
    (-0.5f64).exp() / (2.0 * PI) * simpson(|y| (-0.5 * y * y).exp(), -1.0, 1.0, 2000)
}

fn random_polygon(seed: u64, points: usize) -> Polytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..points).map(|_| random_direction(&mut rng, 2)).collect();
    Polytope::from_points(&pts).unwrap()
}

#[test]
fn triangle_projection_body() {
    let z = projection_zonoid(&triangle(), Weighting::Lebesgue, 1e-12).unwrap();
    assert_eq!(z.generators().len(), 3);
    assert!((z.support(&[1.0, 0.0]) - 1.0).abs() < 1e-12);
    assert!((z.support(&[0.0, 1.0]) - 1.0).abs() < 1e-12);
    let d = [SQRT_2 / 2.0, SQRT_2 / 2.0];
    // facet-sum oracle: ½(1·√½ + 1·√½ + √2·1)
    assert!((z.support(&d) - SQRT_2).abs() < 1e-12);
}

#[test]
fn square_projection_bodies() {
    let k = square();
    let z = projection_zonoid(&k, Weighting::Lebesgue, 1e-12).unwrap();
    let g = Density::gaussian(2);
    let zg = projection_zonoid(&k, Weighting::Measure(&g), 1e-12).unwrap();
    let a = edge_oracle();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let t = random_direction(&mut rng, 2);
        let l1 = t[0].abs() + t[1].abs();
        assert!((z.support(&t) - 2.0 * l1).abs() < 1e-12);
        assert!((zg.support(&t) - a * l1).abs() < 1e-10);
        assert!((zg.support(&t) - 0.16519 * l1).abs() < 1e-5);
    }
}

#[test]
fn eta_vanishes_for_lebesgue() {
    for k in [triangle(), random_polygon(3, 9), Polytope::simplex(3).unwrap()] {
        let eta = offset_vector(&k, &Density::lebesgue(k.dim()), None, Integrator::monte_carlo(1), 1e-12).unwrap();
        assert_eq!(eta.kind, OffsetKind::Eta);
        assert!(eta.value.iter().all(|v| v.abs() < 1e-12));
        assert!(eta.is_projective());
    }
}

#[test]
fn eta_vanishes_for_symmetric_gaussian() {
    let k = square();
    let eta = offset_vector(&k, &Density::gaussian(2), None, Integrator::monte_carlo(2), 1e-12).unwrap();
    assert!(eta.is_projective());
    assert!(eta.is_consistent());
}

#[test]
fn eta_of_shifted_square_is_consistent() {
    let k = square().translated(&[0.4, -0.2]);
    let g = Density::gaussian(2);
    let mc = offset_vector(&k, &g, None, Integrator::monte_carlo(3), 1e-12).unwrap();
    assert!(!mc.is_projective());
    assert!(mc.is_consistent());
    let cub = offset_vector(&k, &g, None, Integrator::Cubature { tol: 1e-11 }, 1e-12).unwrap();
    for (a, b) in cub.value.iter().zip(&cub.cross_check) {
        assert!((a - b).abs() < 1e-9);
    }
    // ½∫_K ∂₁φ = ½∫(φ(1.4, y) − φ(−0.6, y)) dy over y ∈ [−1.2, 0.8]
    let phi = |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp() / (2.0 * PI);
    let e1 = 0.5 * simpson(|y| phi(1.4, y) - phi(-0.6, y), -1.2, 0.8, 2000);
    assert!((cub.value[0] - e1).abs() < 1e-10);
}

#[test]
fn tau_vanishes_for_density_weight() {
    let k = square();
    let g = Density::gaussian(2);
    let tau = offset_vector(&k, &g, Some(&g), Integrator::monte_carlo(4), 1e-12).unwrap();
    assert_eq!(tau.kind, OffsetKind::Tau);
    assert!(tau.is_projective());
    assert!(tau.is_consistent());
}

#[test]
fn tau_of_shifted_body_two_ways() {
    let k = triangle().translated(&[-0.2, -0.3]);
    let g = Density::gaussian(2);
    let f = Density::exp_norm(&square()).unwrap();
    let tau = offset_vector(&k, &g, Some(&f), Integrator::Cubature { tol: 1e-10 }, 1e-11).unwrap();
    assert!(tau.is_consistent(), "{tau:?}");
}

#[test]
fn brightness_examples() {
    let k = square();
    let l = Density::lebesgue(2);
    let g = Density::gaussian(2);
    let opts = BrightnessOptions::default();
    let e1 = [1.0, 0.0];
    let r = brightness_residual(&k, &l, None, &e1, BrightnessMode::Plain, opts).unwrap();
    assert!(r.residual <= 1e-6);
    let r = brightness_residual(&k, &g, None, &e1, BrightnessMode::Polarized, opts).unwrap();
    assert!(r.within(1.0), "{r:?}");
    assert!((r.support - edge_oracle()).abs() < 1e-10);
    let r = brightness_residual(&k, &g, Some(&g), &e1, BrightnessMode::Functional, opts).unwrap();
    assert!(r.within(1.0), "{r:?}");
    // facet oracle: ∫ over x = 1 of φ², times ½·2 edges
    let w = (-1.0f64).exp() / (4.0 * PI * PI) * simpson(|y| (-y * y).exp(), -1.0, 1.0, 2000);
    assert!((r.support - w).abs() < 1e-10);
}

#[test]
fn brightness_on_asymmetric_bodies() {
    let g = Density::gaussian(2);
    let opts = BrightnessOptions::default();
    let k = random_polygon(5, 7).translated(&[0.3, 0.1]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..4 {
        let t = random_direction(&mut rng, 2);
        let r = brightness_residual(&k, &g, None, &t, BrightnessMode::Plain, opts).unwrap();
        assert!(r.within(1.0), "{r:?}");
        let f = Density::gaussian(2);
        let r = brightness_residual(&k, &g, Some(&f), &t, BrightnessMode::Functional, opts).unwrap();
        assert!(r.within(1.0), "{r:?}");
    }
}

#[test]
fn polarized_requires_symmetry() {
    let g = Density::gaussian(2);
    let r = brightness_residual(&triangle(), &g, None, &[1.0, 0.0], BrightnessMode::Polarized, BrightnessOptions::default());
    assert!(matches!(r, Err(Error::Hypothesis(_))));
    let r = brightness_residual(&square(), &g, None, &[1.0, 0.0], BrightnessMode::Functional, BrightnessOptions::default());
    assert!(matches!(r, Err(Error::Config(_))));
}

#[test]
fn transform_law_examples() {
    let grid = SphereGrid::standard(2, 64).unwrap();
    let g = Density::gaussian(2);
    let l = Density::lebesgue(2);
    let id = LinearMap::identity(2);
    assert!(transform_law_residual(&square(), &g, &id, &grid, 1e-12).unwrap().residual < 1e-12);
    let d = LinearMap::diagonal(&[2.0, 0.5]).unwrap();
    assert!(transform_law_residual(&square(), &g, &d, &grid, 1e-12).unwrap().residual < 1e-4);
    let rot = LinearMap::rotation_2d(PI / 4.0);
    assert!(transform_law_residual(&triangle(), &l, &rot, &grid, 1e-12).unwrap().residual < 1e-9);
    let singular = LinearMap::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(transform_law_residual(&square(), &g, &singular, &grid, 1e-12).is_err());
}

#[test]
fn polar_volume_examples() {
    let grid = SphereGrid::standard(2, 8192).unwrap();
    let z = projection_zonoid(&triangle(), Weighting::Lebesgue, 1e-12).unwrap();
    let v = zonoid_polar_volume(&z, &grid).unwrap();
    assert!((v.value - 3.0).abs() < 1e-3);
    assert!((v.value - 3.0).abs() <= v.error_estimate.max(1e-9));

    let zg = projection_zonoid(&square(), Weighting::Measure(&Density::gaussian(2)), 1e-12).unwrap();
    let a = edge_oracle();
    let v = zonoid_polar_volume(&zg, &grid).unwrap();
    assert!((v.value - 2.0 / (a * a)).abs() / (2.0 / (a * a)) < 5e-3);
    assert!((v.value - 73.29).abs() / 73.29 < 5e-3);

    let disk = Polytope::regular_polygon(512, 1.0).unwrap();
    let zd = projection_zonoid(&disk, Weighting::Lebesgue, 1e-12).unwrap();
    let v = zonoid_polar_volume(&zd, &grid).unwrap();
    assert!((v.value - PI / 4.0).abs() < 1e-3);
}

#[test]
fn polar_volume_rejects_origin_outside() {
    let grid = SphereGrid::standard(2, 64).unwrap();
    let k = triangle();
    let eta_like = OffsetVector {
        kind: OffsetKind::Eta,
        value: vec![5.0, 0.0],
        error_estimate: 0.0,
        cross_check: vec![5.0, 0.0],
        cross_check_error: 0.0,
        scale: 1.0,
    };
    let z = projection_zonoid(&k, Weighting::Lebesgue, 1e-12).unwrap().with_offset(&eta_like);
    assert!(matches!(zonoid_polar_volume(&z, &grid), Err(Error::PolarDomain(_))));
}

#[test]
fn simplex_zhang_in_three_dimensions() {
    let s = Polytope::simplex(3).unwrap();
    let z = projection_zonoid(&s, Weighting::Lebesgue, 1e-12).unwrap();
    let v = zonoid_polar_volume(&z, &SphereGrid::standard(3, 4096).unwrap()).unwrap();
    let ratio = s.volume().powi(2) * v.value;
    assert!((ratio - 20.0 / 27.0).abs() < 1e-3, "{ratio}");
}

#[test]
fn halfspace_identity_examples() {
    let e1 = [1.0, 0.0];
    let r = halfspace_integral_identity(&square(), &Density::gaussian(2), &e1, 1e-12).unwrap();
    assert!((r.lhs - edge_oracle()).abs() < 1e-10);
    assert!(r.residual <= r.budget + 1e-12);
    let r = halfspace_integral_identity(&square(), &Density::lebesgue(2), &e1, 1e-12).unwrap();
    assert!((r.lhs - 2.0).abs() < 1e-12 && (r.rhs - 2.0).abs() < 1e-12);
    let r = halfspace_integral_identity(&triangle(), &Density::lebesgue(2), &e1, 1e-12).unwrap();
    assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12);
}

#[test]
fn halfspace_identity_on_shifted_body() {
    let k = random_polygon(11, 8).translated(&[0.5, 0.2]);
    let g = Density::gaussian(2);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..8 {
        let t = random_direction(&mut rng, 2);
        let r = halfspace_integral_identity(&k, &g, &t, 1e-12).unwrap();
        assert!(r.residual <= 3.0 * r.budget + 1e-12, "{r:?}");
    }
}

#[test]
fn exp_norm_scaling_law() {
    let grid = SphereGrid::standard(2, 128).unwrap();
    for k in [square(), Polytope::regular_polygon(6, 1.0).unwrap()] {
        let mu = Density::exp_norm(&k).unwrap();
        let base = projection_zonoid(&k, Weighting::Lebesgue, 1e-12).unwrap();
        for t in [0.5, 1.0, 2.0, 4.0] {
            let tk = k.scaled(t).unwrap();
            let z = projection_zonoid(&tk, Weighting::Measure(&mu), 1e-12).unwrap();
            let c = t * (-t).exp();
            for th in grid.directions() {
                let q = z.support(th) / (c * base.support(th));
                assert!((q - 1.0).abs() < 1e-3);
            }
        }
    }
}

#[test]
fn set_inclusion_for_lebesgue_and_gaussian() {
    let grid = SphereGrid::standard(2, 256).unwrap();
    let fam = ConcavityFamily::Power(0.5);
    for k in [triangle(), random_polygon(21, 10), square()] {
        let dk = k.difference_body().unwrap();
        let z = projection_zonoid(&k, Weighting::Lebesgue, 1e-12).unwrap();
        let v = k.volume();
        let bound = fam.f(v).unwrap() / fam.fprime(v).unwrap();
        for th in grid.directions() {
            assert!(dk.radial(th).unwrap() * z.support(th) <= bound + 1e-9);
        }
    }
    let g = Density::gaussian(2);
    let k = Polytope::regular_polygon(6, 1.3).unwrap();
    let m = projbody::measures::measure_body(&g, &k, Integrator::Cubature { tol: 1e-12 }).unwrap().value;
    let bound = fam.f(m).unwrap() / fam.fprime(m).unwrap();
    let dk = k.difference_body().unwrap();
    let z = projection_zonoid(&k, Weighting::Measure(&g), 1e-12).unwrap();
    for th in grid.directions() {
        assert!(dk.radial(th).unwrap() * z.support(th) <= bound + 1e-9);
    }
}

#[test]
fn zonoid_support_bounded_by_half_mass() {
    let g = Density::gaussian(2);
    let k = random_polygon(4, 9).translated(&[0.2, 0.0]);
    let z = projection_zonoid(&k, Weighting::Measure(&g), 1e-12).unwrap();
    let total: f64 = facet_weights(&g, &k, None, 1e-12).unwrap().iter().map(|w| w.value).sum();
    assert!((z.total_weight() - total).abs() < 1e-14);
    let eta = offset_vector(&k, &g, None, Integrator::Cubature { tol: 1e-10 }, 1e-12).unwrap();
    let shifted = z.clone().with_offset(&eta);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..64 {
        let t = random_direction(&mut rng, 2);
        assert!(z.support(&t) <= total / 2.0 + 1e-14);
        assert!(shifted.support(&t) >= -1e-12);
    }
}

#[test]
fn polar_volume_error_shrinks_with_grid() {
    let z = projection_zonoid(&random_polygon(6, 8), Weighting::Lebesgue, 1e-12).unwrap();
    let a = zonoid_polar_volume(&z, &SphereGrid::standard(2, 256).unwrap()).unwrap();
    let b = zonoid_polar_volume(&z, &SphereGrid::standard(2, 4096).unwrap()).unwrap();
    assert!(b.error_estimate < a.error_estimate);
    assert!((a.value - b.value).abs() <= a.error_estimate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reflection_leaves_projection_body(seed in 0u64..10_000) {
        let k = random_polygon(seed, 9);
        let a = projection_zonoid(&k, Weighting::Lebesgue, 1e-12).unwrap();
        let b = projection_zonoid(&k.reflected(), Weighting::Lebesgue, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..16 {
            let t = random_direction(&mut rng, 2);
            prop_assert!((a.support(&t) - b.support(&t)).abs() < 1e-12);
        }
    }

    #[test]
    fn zhang_petty_sandwich(seed in 0u64..10_000, points in 4usize..12) {
        let k = random_polygon(seed, points);
        let z = projection_zonoid(&k, Weighting::Lebesgue, 1e-12).unwrap();
        let v = zonoid_polar_volume(&z, &SphereGrid::standard(2, 2048).unwrap()).unwrap();
        let p = k.volume() * v.value;
        let err = k.volume() * v.error_estimate;
        let lo = binomial(4.0, 2) / 4.0;
        let hi = (kappa(2) / kappa(1)).powi(2);
        prop_assert!(p >= lo - err - 1e-12 && p <= hi + err + 1e-12);
    }

    #[test]
    fn support_is_positively_homogeneous(seed in 0u64..10_000, s in 0.1f64..5.0) {
        let k = random_polygon(seed, 7);
        let z = projection_zonoid(&k, Weighting::Lebesgue, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_direction(&mut rng, 2);
        let st: Vec<f64> = t.iter().map(|x| s * x).collect();
        prop_assert!((z.support(&st) - s * z.support(&t)).abs() < 1e-12 * (1.0 + s));
    }
}
