use std::f64::consts::{FRAC_2_PI, PI};

use projbody::bodies::Polytope;
use projbody::inequalities::*;
use projbody::measures::{ConcavityClass, ConcavityFamily, Density, DensityFlags};
use projbody::numerics::{binomial, gaussian_cdf, gaussian_pdf, random_direction, SphereGrid};
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

fn fast() -> Precision {
    Precision { grid: 512, tol: 1e-10, seed: 3, samples: 40_000 }
}

/// γ₂([−1,1]²) and the gaussian weight of one edge.
fn gaussian_square_oracle() -> (f64, f64) {
    let side = 2.0 * gaussian_cdf(1.0) - 1.0;
    (side * side, gaussian_pdf(1.0) * side)
}

#[test]
fn ids_round_trip() {
    for id in InequalityId::ALL {
        assert_eq!(id.name().parse::<InequalityId>().unwrap(), id);
        assert_eq!(serde_json::to_value(id).unwrap(), serde_json::json!(id.name()));
    }
    assert!(matches!("zhang".parse::<InequalityId>(), Err(Error::Config(_))));
}

#[test]
fn zhang_petty_triangle_and_square() {
    let tri = triangle();
    let sq = square();
    let leb = Density::lebesgue(2);
    let r = verify(InequalityId::ZhangPetty, &VerifyArgs::new(&tri, &leb)).unwrap();
    assert!(r.pass);
    assert!((r.witnesses["product"].value - 1.5).abs() < 1e-3);
    assert!(r.witnesses["zhang.margin"].value.abs() < 1e-3);
    // square: Π°K is the cross-polytope of radius 1/2, so the product is 4·½
    let r = verify(InequalityId::ZhangPetty, &VerifyArgs::new(&sq, &leb)).unwrap();
    assert!((r.witnesses["product"].value - 2.0).abs() < 1e-9);
    assert!((r.witnesses["petty.margin"].value - (PI * PI / 4.0 - 2.0)).abs() < 1e-9);
    assert_eq!(r.config["grid"], 4096);
}

#[test]
fn rogers_shephard_simplices() {
    let tri = triangle();
    let sq = square();
    let leb2 = Density::lebesgue(2);
    let r = verify(InequalityId::RogersShephard, &VerifyArgs::new(&tri, &leb2)).unwrap();
    assert!(r.pass && (r.lhs - 6.0).abs() < 1e-9 && r.rhs == 6.0);
    let leb3 = Density::lebesgue(3);
    let r = verify(InequalityId::RogersShephard, &VerifyArgs::new(&Polytope::simplex(3).unwrap(), &leb3)).unwrap();
    assert!(r.pass && (r.lhs - 20.0).abs() < 1e-9);
    let r = verify(InequalityId::RogersShephard, &VerifyArgs::new(&sq, &leb2)).unwrap();
    assert!((r.lhs - 4.0).abs() < 1e-12 && r.margin > 1.0);
}

#[test]
fn log_concave_zhang_gaussian_square() {
    let sq = square();
    let g = Density::gaussian(2);
    let (gk, a) = gaussian_square_oracle();
    let r = verify(InequalityId::LogConcaveZhang, &VerifyArgs::new(&sq, &g).precision(fast())).unwrap();
    assert!(r.pass);
    assert_eq!(r.lhs, 0.5);
    let ratio = gk * gk * (2.0 / (a * a)) / 4.0;
    assert!((r.rhs - ratio).abs() < 1e-6 * ratio, "{} vs {ratio}", r.rhs);
    assert!((r.rhs - 3.98).abs() < 0.01);
    assert!((r.witnesses["mu(K)"].value - 0.46606).abs() < 1e-5);
    assert!((r.witnesses["facet_weight.0"].value - 0.16519).abs() < 1e-5);
    assert!((r.witnesses["polar_volume"].value - 73.29).abs() < 0.01);
    assert!(r.witnesses["eta_norm"].value < 1e-9);
}

#[test]
fn surface_lower_bound_examples() {
    let sq = square();
    let leb = Density::lebesgue(2);
    let r = verify(InequalityId::SurfaceLowerBound, &VerifyArgs::new(&sq, &leb)).unwrap();
    assert!((r.lhs - PI.powi(3)).abs() < 1e-12);
    assert!((r.rhs - 32.0).abs() < 1e-9);
    let g = Density::gaussian(2);
    let (_, a) = gaussian_square_oracle();
    let r = verify(InequalityId::SurfaceLowerBound, &VerifyArgs::new(&sq, &g).precision(fast())).unwrap();
    let truth = (4.0 * a).powi(2) * 2.0 / (a * a);
    assert!(r.pass && (r.rhs - truth).abs() < 1e-6 * truth);
    assert!((r.margin - 0.994).abs() < 0.01);
    // the disk nearly attains the bound
    let disk = Polytope::regular_polygon(256, 1.0).unwrap();
    let r = verify(InequalityId::SurfaceLowerBound, &VerifyArgs::new(&disk, &leb)).unwrap();
    assert!(r.pass && r.margin < 1e-3 * r.lhs);
}

#[test]
fn polarized_zhang_gaussian_square() {
    let tri = triangle();
    let sq = square();
    let g = Density::gaussian(2);
    let leb = Density::lebesgue(2);
    let (gk, a) = gaussian_square_oracle();
    let args = VerifyArgs::new(&sq, &g).nu(&leb).s(0.5).precision(fast());
    let r = verify(InequalityId::PolarizedZhang, &args).unwrap();
    assert!(r.pass);
    assert!((r.lhs - 6.0).abs() < 1e-12);
    assert!((r.rhs - gk * gk * 2.0 / (a * a)).abs() < 1e-6 * r.rhs);
    assert!((r.rhs - 15.92).abs() < 0.01);
    // triangle is not symmetric
    let r = verify(InequalityId::PolarizedZhang, &VerifyArgs::new(&tri, &g).s(0.5));
    assert!(matches!(r, Err(Error::Hypothesis(_))));
    // the gaussian is not ½-concave on all convex sets
    let r = verify(InequalityId::SConcaveZhang, &VerifyArgs::new(&sq, &g).s(0.5));
    assert!(matches!(r, Err(Error::Hypothesis(_))));
}

#[test]
fn s_concave_lebesgue_matches_zhang_constant() {
    let tri = triangle();
    // sⁿ·binom(n+1/s, n) = binom(2n, n)/nⁿ at s = 1/n
    for n in 2..=4usize {
        let s = 1.0 / n as f64;
        let lhs = s.powi(n as i32) * binomial(n as f64 + 1.0 / s, n);
        assert!((lhs - binomial(2.0 * n as f64, n) / (n as f64).powi(n as i32)).abs() < 1e-12);
    }
    let leb = Density::lebesgue(2);
    let r = verify(InequalityId::SConcaveZhang, &VerifyArgs::new(&tri, &leb).s(0.5)).unwrap();
    assert!(r.pass);
    // Vol(K)·(3/2)/Vol(K) against Vol(K)·Vol(Π°K): simplex equality
    assert!((r.lhs - 0.75).abs() < 1e-12);
    assert!((r.rhs - 0.75).abs() < 1e-3);
}

#[test]
fn weak_and_radial_zhang() {
    let tri = triangle();
    let sq = square();
    let leb = Density::lebesgue(2);
    for id in [InequalityId::WeakZhang, InequalityId::ZhangRadialNondecreasing] {
        let r = verify(id, &VerifyArgs::new(&tri, &leb)).unwrap();
        assert!(r.pass, "{id}: {r:?}");
    }
    // lebesgue: binom(4,2)·½ = 3 = 2·½·Vol(Π°T)·... tight for the simplex
    let r = verify(InequalityId::ZhangRadialNondecreasing, &VerifyArgs::new(&tri, &leb)).unwrap();
    assert!((r.lhs - 3.0).abs() < 1e-12 && (r.rhs - 3.0).abs() < 3e-3);
    let g = Density::gaussian(2);
    let r = verify(InequalityId::WeakZhang, &VerifyArgs::new(&sq, &g).precision(fast())).unwrap();
    assert!(r.pass && r.lhs < r.rhs);
    // the gaussian decreases radially
    let r = verify(InequalityId::ZhangRadialNondecreasing, &VerifyArgs::new(&sq, &g));
    assert!(matches!(r, Err(Error::Hypothesis(_))));
    let rp = Density::radial_power(2, 1.0).unwrap();
    let r = verify(InequalityId::ZhangRadialNondecreasing, &VerifyArgs::new(&tri, &rp).precision(fast())).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn rst_for_decreasing_measures() {
    let tri = triangle();
    let g = Density::gaussian(2);
    let r = verify(InequalityId::RstRadiallyDecreasing, &VerifyArgs::new(&tri, &g).precision(fast())).unwrap();
    assert!(r.pass, "{r:?}");
    let rp = Density::radial_power(2, 1.0).unwrap();
    assert!(matches!(verify(InequalityId::RstRadiallyDecreasing, &VerifyArgs::new(&tri, &rp)), Err(Error::Hypothesis(_))));
}

#[test]
fn exp_norm_identity_on_square() {
    let sq = square();
    let g = Density::gaussian(2);
    let r = verify(InequalityId::ExpNormGradientIdentity, &VerifyArgs::new(&sq, &g).precision(fast())).unwrap();
    assert!(r.pass, "{r:?}");
    // lhs is Γ(2)·γ(∂K) = 4a
    let (_, a) = gaussian_square_oracle();
    assert!((r.lhs - 4.0 * a).abs() < 1e-8);
    assert!((r.rhs - r.lhs).abs() < 0.02 * r.lhs);
    assert!(matches!(verify(InequalityId::ExpNormGradientIdentity, &VerifyArgs::new(&sq.translated(&[1.5, 0.0]), &g)), Err(Error::Hypothesis(_))));
}

#[test]
fn big_set_inclusion() {
    let tri = triangle();
    let sq = square();
    let leb = Density::lebesgue(2);
    let r = verify(InequalityId::SetInclusionBig, &VerifyArgs::new(&tri, &leb).precision(fast())).unwrap();
    assert!(r.pass, "{r:?}");
    let g = Density::gaussian(2);
    let r = verify(InequalityId::SetInclusionBig, &VerifyArgs::new(&sq, &g).precision(fast())).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.config["covariogram"], "polarized");
    // φ is smallest at the corners of the square
    let corner = (-1.0f64).exp() / (2.0 * PI);
    assert!((r.witnesses["phi_min"].value - corner).abs() < 1e-12);
}

#[test]
fn q_concave_log_family() {
    let sq = square();
    let g = Density::gaussian(2);
    let args = VerifyArgs::new(&sq, &g).family(ConcavityFamily::Log).precision(fast());
    let r = verify(InequalityId::QConcaveZhang, &args).unwrap();
    assert!(r.pass, "{r:?}");
    // log family: rhs = n·Vol(Z°)·μ(K)(n−1)!·μ(K)/μ(K) and lhs = Vol(K)
    let (gk, a) = gaussian_square_oracle();
    assert!((r.rhs - 2.0 * (2.0 / (a * a)) * gk * gk).abs() < 1e-6 * r.rhs);
    assert_eq!(r.lhs, 4.0);
    // the power ½ family is not admitted for the gaussian on all sets
    let args = VerifyArgs::new(&sq, &g).family(ConcavityFamily::Power(0.5));
    assert!(matches!(verify(InequalityId::QConcaveZhang, &args), Err(Error::Hypothesis(_))));
}

#[test]
fn q_concave_numeric_hypothesis_failure() {
    // a custom exp family: exp∘g is not concave for the triangle covariogram
    let fam = ConcavityFamily::Custom {
        label: "exp".into(),
        f: std::sync::Arc::new(|x: f64| x.exp()),
        finv: std::sync::Arc::new(|y: f64| y.ln()),
        fprime: std::sync::Arc::new(|x: f64| x.exp()),
    };
    let leb = Density::lebesgue(2);
    let tri = triangle().scaled(6.0).unwrap();
    let r = verify(InequalityId::QConcaveZhang, &VerifyArgs::new(&tri, &leb).family(fam).precision(fast()));
    assert!(matches!(r, Err(Error::Hypothesis(_))), "{r:?}");
}

#[test]
fn tail_and_unit_integrals() {
    // log: a·(n−1)!
    let q = q_tail_integral(&ConcavityFamily::Log, 0.3, 3).unwrap();
    assert!((q.value - 0.6).abs() < 1e-14);
    // numeric path on a custom log agrees
    let fam = ConcavityFamily::Custom {
        label: "log".into(),
        f: std::sync::Arc::new(|x: f64| x.ln()),
        finv: std::sync::Arc::new(|y: f64| y.exp()),
        fprime: std::sync::Arc::new(|x: f64| 1.0 / x),
    };
    let q = q_tail_integral(&fam, 0.3, 3).unwrap();
    assert!((q.value - 0.6).abs() < 1e-8, "{}", q.value);
    // J for F(t) = t: ∫₀¹ a t (1−t) dt = a/6
    let j = f_unit_integral(&ConcavityFamily::Power(1.0), 0.6, 2).unwrap();
    assert!((j.value - 0.1).abs() < 1e-14);
    let lin = ConcavityFamily::Custom {
        label: "id".into(),
        f: std::sync::Arc::new(|x: f64| x),
        finv: std::sync::Arc::new(|y: f64| y),
        fprime: std::sync::Arc::new(|_: f64| 1.0),
    };
    assert!((f_unit_integral(&lin, 0.6, 2).unwrap().value - 0.1).abs() < 1e-12);
}

#[test]
fn two_measure_zhang_cases() {
    let tri = triangle();
    let sq = square();
    let leb = Density::lebesgue(2);
    let rp = Density::radial_power(2, 1.0).unwrap();
    // μ = ν = lebesgue with F(t) = t^{1/2} is the classical inequality, tight on the simplex
    let args = VerifyArgs::new(&tri, &leb).nu(&leb).precision(fast());
    let r = verify(InequalityId::TwoMeasureZhang, &args).unwrap();
    assert!(r.pass && r.margin.abs() < 2e-3 * r.rhs, "{r:?}");
    let args = VerifyArgs::new(&tri, &leb).nu(&rp).precision(fast());
    assert!(verify(InequalityId::TwoMeasureZhang, &args).unwrap().pass);
    // missing ν
    assert!(matches!(verify(InequalityId::TwoMeasureZhang, &VerifyArgs::new(&tri, &leb)), Err(Error::Config(_))));
    // gaussian ν decreases
    let g = Density::gaussian(2);
    let args = VerifyArgs::new(&tri, &leb).nu(&g);
    assert!(matches!(verify(InequalityId::TwoMeasureZhang, &args), Err(Error::Hypothesis(_))));
    // log family is not non-negative
    let args = VerifyArgs::new(&sq, &g).nu(&leb).family(ConcavityFamily::Log);
    assert!(matches!(verify(InequalityId::TwoMeasureZhang, &args), Err(Error::Hypothesis(_))));
    // gaussian μ on the square goes through the polarized covariogram
    let args = VerifyArgs::new(&sq, &g).nu(&leb).precision(fast());
    let r = verify(InequalityId::TwoMeasureZhang, &args).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.config["covariogram"], "polarized");
}

#[test]
fn two_measure_functional_form() {
    let tri = triangle().scaled(3.0).unwrap();
    let leb = Density::lebesgue(2);
    let flags = DensityFlags { even: false, radially_nondecreasing: false, radially_decreasing: false };
    // concave on the triangle, so g_f is ⅓-concave
    let bent =
        Density::custom(2, |x: &[f64]| 1.0 + 0.5 * x[0].tanh(), |x: &[f64]| vec![0.5 / x[0].cosh().powi(2), 0.0], flags, vec![], "bent").unwrap();
    let args = VerifyArgs::new(&tri, &leb).nu(&leb).f(&bent).family(ConcavityFamily::Power(1.0 / 3.0)).precision(fast());
    let r = verify(InequalityId::TwoMeasureZhang, &args).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.witnesses["concavity_min_deficit"].value > -1e-9);
    // an exponential tilt only gives a log-concave g_f
    let tilt = Density::custom(2, |x: &[f64]| (0.8 * x[0]).exp(), |x: &[f64]| vec![0.8 * (0.8 * x[0]).exp(), 0.0], flags, vec![], "tilt").unwrap();
    let args = VerifyArgs::new(&tri, &leb).nu(&leb).f(&tilt).precision(fast());
    assert!(matches!(verify(InequalityId::TwoMeasureZhang, &args), Err(Error::Hypothesis(_))));
}

#[test]
fn ehrhard_values() {
    let sq = square();
    let v = ehrhard_bound_value(2, 0.0).unwrap();
    assert!((v.value - FRAC_2_PI).abs() < 1e-8);
    for n in [2usize, 3] {
        let nf = if n == 2 { 2.0 } else { 6.0 };
        for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let v = ehrhard_bound_value(n, x).unwrap().value;
            assert!(v > 0.0 && v <= nf, "n={n}, x={x}: {v}");
        }
    }
    assert!(ehrhard_bound_value(1, 0.0).is_err());
    let g = Density::gaussian(2);
    let r = verify(InequalityId::EhrhardGaussian, &VerifyArgs::new(&sq, &g).precision(fast())).unwrap();
    assert!(r.pass, "{r:?}");
    let (gk, a) = gaussian_square_oracle();
    let ratio = 4.0 / (gk * gk * 2.0 / (a * a));
    assert!((r.witnesses["ratio"].value - ratio).abs() < 1e-6 * ratio);
    assert!(matches!(verify(InequalityId::EhrhardGaussian, &VerifyArgs::new(&sq, &Density::lebesgue(2))), Err(Error::Hypothesis(_))));
}

#[test]
fn berwald_examples() {
    let ys = [0.25, 0.5, 1.0, 2.0];
    let r = berwald_1d_check(|t| t * t, |_| 1.0, 2, 1.0, &ys, 1e-13).unwrap();
    assert!(r.pass);
    assert!((r.witnesses["beta"].value - 1.0 / 6.0).abs() < 1e-12);
    for y in ys {
        assert!(r.witnesses[&format!("y={y}.margin")].value.abs() < 1e-9);
    }
    let r = berwald_1d_check(|t| t, |r| r, 2, 1.0, &[1.0], 1e-13).unwrap();
    assert!(r.pass);
    assert!((r.witnesses["beta"].value - 1.0 / 3.0).abs() < 1e-12);
    assert!((r.rhs - 1.0 / 9.0).abs() < 1e-12 && (r.lhs - 1.0 / 12.0).abs() < 1e-12);
    assert!(berwald_1d_check(|t| t, |_| 1.0, 2, -1.0, &[1.0], 1e-12).is_err());
}

#[test]
fn pe_cross_check_and_sweep() {
    let tri = triangle();
    let k = square();
    let grid = SphereGrid::standard(2, 256).unwrap();
    let sw = pe_sweep(&k, &[1.0, 8.0, 12.0, 16.0], &grid, 1e-11).unwrap();
    let s1 = &sw.samples[0];
    assert!(s1.direct.value > 0.0 && s1.direct.value.is_finite());
    assert!((s1.direct.value - s1.law).abs() < 1e-3 * s1.law, "{} vs {}", s1.direct.value, s1.law);
    assert!(sw.tail_increasing);
    let last = sw.samples.last().unwrap();
    assert!((last.mass_ratio - last.mass_limit).abs() < 0.02 * last.mass_limit);
    // direct Pe at t = 1 matches the single-body evaluation
    let mu = Density::exp_norm(&k).unwrap();
    let direct = pe(&mu, &k, &grid, 1e-11).unwrap();
    assert!((direct.value - s1.direct.value).abs() < 1e-6 * direct.value);
    assert!(pe_sweep(&tri, &[1.0], &grid, 1e-10).is_err());
    assert!(pe_sweep(&k, &[2.0, 1.0], &grid, 1e-10).is_err());
}

#[test]
fn gaussian_sharpness() {
    let sw = gaussian_sharpness_sweep(2, &[0.5, 1.0, 2.0, 5.0, 20.0]).unwrap();
    assert!(sw.monotone);
    let r1 = &sw.samples[1];
    assert!((r1.outer - (1.0 - (-PI * PI / 2.0).exp())).abs() < 1e-12);
    assert!((r1.outer - 0.99281).abs() < 1e-5);
    let last = sw.samples.last().unwrap();
    assert!(last.outer >= 0.99);
    assert!(last.average.value <= last.outer);
    assert!(gaussian_sharpness_sweep(4, &[1.0]).is_err());
}

#[test]
fn verify_echoes_configuration() {
    let tri = triangle();
    let leb = Density::lebesgue(2);
    let p = Precision { seed: 11, ..fast() };
    let r = verify(InequalityId::RogersShephard, &VerifyArgs::new(&tri, &leb).precision(p)).unwrap();
    assert_eq!(r.config["seed"], 11);
    assert_eq!(r.config["samples"], 40_000);
    assert_eq!(r.config["mu"], "lebesgue");
    assert_eq!(r.id, "rogers_shephard");
    let g3 = Density::gaussian(3);
    assert!(matches!(verify(InequalityId::RogersShephard, &VerifyArgs::new(&tri, &g3)), Err(Error::Config(_))));
}

#[test]
fn reports_are_deterministic() {
    let tri = triangle();
    let g = Density::gaussian(2);
    let args = VerifyArgs::new(&tri, &g).precision(fast());
    let a = verify(InequalityId::WeakZhang, &args).unwrap();
    let b = verify(InequalityId::WeakZhang, &args).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn custom_family_classes_are_respected() {
    let sq = square();
    let custom = Density::custom(
        2,
        |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp(),
        |x: &[f64]| {
            let e = (-(x[0] * x[0] + x[1] * x[1])).exp();
            vec![-2.0 * x[0] * e, -2.0 * x[1] * e]
        },
        DensityFlags { even: true, radially_nondecreasing: false, radially_decreasing: true },
        vec![ConcavityClass::LogConcave],
        "narrow-gaussian",
    )
    .unwrap();
    let r = verify(InequalityId::LogConcaveZhang, &VerifyArgs::new(&sq, &custom).precision(fast())).unwrap();
    assert!(r.pass);
    assert!(matches!(verify(InequalityId::EhrhardGaussian, &VerifyArgs::new(&sq, &custom)), Err(Error::Hypothesis(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lebesgue_zhang_petty_on_random_polygons(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..6).map(|_| random_direction(&mut rng, 2)).collect();
        let k = Polytope::from_points(&pts).unwrap();
        let leb = Density::lebesgue(2);
        let p = Precision { grid: 256, ..Precision::default() };
        for id in [InequalityId::ZhangPetty, InequalityId::RogersShephard, InequalityId::SurfaceLowerBound] {
            let r = verify(id, &VerifyArgs::new(&k, &leb).precision(p)).unwrap();
            prop_assert!(r.pass, "{id}: {r:?}");
        }
    }

    #[test]
    fn ehrhard_below_factorial(x in -3.0f64..3.0) {
        prop_assert!(ehrhard_bound_value(2, x).unwrap().value <= 2.0);
        prop_assert!(ehrhard_bound_value(3, x).unwrap().value <= 6.0);
    }
}
