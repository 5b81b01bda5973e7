use proptest::prelude::*;
use radproj::analysis::{fit_power_law, FitMethod};
use radproj::geometry::{homogeneous_extension, positive_decomposition};
use radproj::lattice::{enumerate_slabs, finish, weighted_count, CountRequest};
use radproj::quadrature::QuadratureRule;
use radproj::{Rotation, SphereField, StarBody};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn planar_bodies() -> Vec<StarBody> {
    vec![
        StarBody::unit_ball(2).unwrap(),
        StarBody::ellipsoid(vec![2.0, 1.0]).unwrap(),
        StarBody::superellipsoid(2, 2).unwrap(),
        StarBody::superellipsoid(2, 5).unwrap(),
        StarBody::square(),
        StarBody::polygon(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, -2f64.sqrt()]], vec![1.0, 1.0, 1.0]).unwrap(),
        radproj::body_from_density(&SphereField::builtin("two-lobe").unwrap(), 2).unwrap(),
    ]
}

fn unit(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gauge_is_homogeneous(which in 0usize..7, angle in 0.0..std::f64::consts::TAU, len in 0.01f64..100.0, t in 0.01f64..100.0) {
        let body = &planar_bodies()[which];
        let u = unit(angle);
        let x = [len * u[0], len * u[1]];
        let g = body.gauge(&x);
        let gt = body.gauge(&[t * x[0], t * x[1]]);
        prop_assert!((gt - t * g).abs() <= 1e-12 * t * g);
    }

    #[test]
    fn radial_boundary_has_unit_gauge(which in 0usize..7, angle in 0.0..std::f64::consts::TAU) {
        let body = &planar_bodies()[which];
        let u = unit(angle);
        let r = body.radial(&u);
        prop_assert!((body.gauge(&[r * u[0], r * u[1]]) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn superellipsoid_gauge_is_power_mean(k in 1u32..8, x in -50.0f64..50.0, y in -50.0f64..50.0, z in -50.0f64..50.0) {
        let body = StarBody::superellipsoid(3, k).unwrap();
        let p = 2 * k as i32;
        let expected = (x.powi(p) + y.powi(p) + z.powi(p)).powf(1.0 / p as f64);
        prop_assert!((body.gauge(&[x, y, z]) - expected).abs() <= 1e-12 * expected.max(1e-300));
    }

    #[test]
    fn haar_rotations_are_special_orthogonal(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rot = Rotation::haar(n, &mut rng, "p").unwrap();
        prop_assert!(rot.orthogonality_residual() <= 1e-12);
        prop_assert!((rot.determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn extension_is_constant_on_rays(x in -10.0f64..10.0, y in -10.0f64..10.0, t in 1e-3f64..1e3) {
        prop_assume!(x != 0.0 || y != 0.0);
        let f = homogeneous_extension(&SphereField::builtin("exp-cos").unwrap());
        prop_assert_eq!(f.eval(&[x, y]).unwrap(), f.eval(&[x, y]).unwrap());
        let a = f.eval(&[x, y]).unwrap();
        let b = f.eval(&[t * x, t * y]).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn slab_splits_are_bitwise_stable(cut in -30i64..30, cut2 in -30i64..30, rho in 3.0f64..25.0, angle in 0.0f64..6.3) {
        let body = StarBody::superellipsoid(2, 2).unwrap();
        let rot = Rotation::planar(angle);
        let w = homogeneous_extension(&SphereField::builtin("tilt-wave").unwrap());
        let req = CountRequest::new(&body, rho).rotation(&rot).weight(&w);
        let whole = weighted_count(&req).unwrap();
        let (a, b) = (cut.min(cut2), cut.max(cut2));
        let parts = enumerate_slabs(&req, &[i64::MIN / 2..a, a..b, b..i64::MAX / 2]).unwrap();
        let split = finish(&req, &parts).unwrap();
        prop_assert_eq!(whole.weighted_count.to_bits(), split.weighted_count.to_bits());
        prop_assert_eq!(whole.point_count, split.point_count);
    }

    #[test]
    fn ball_counts_ignore_rotation(rho in 1.0f64..40.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for n in [2usize, 3] {
            let ball = StarBody::unit_ball(n).unwrap();
            let rot = Rotation::haar(n, &mut rng, "g").unwrap();
            let plain = weighted_count(&CountRequest::new(&ball, rho)).unwrap();
            let turned = weighted_count(&CountRequest::new(&ball, rho).rotation(&rot)).unwrap();
            prop_assert_eq!(plain.point_count, turned.point_count);
        }
    }

    #[test]
    fn ball_scaling(rho in 1.0f64..60.0) {
        let unit = StarBody::unit_ball(2).unwrap();
        let big = StarBody::ball(2, 2.0).unwrap();
        let a = weighted_count(&CountRequest::new(&unit, rho)).unwrap();
        let b = weighted_count(&CountRequest::new(&big, rho / 2.0)).unwrap();
        prop_assert_eq!(a.point_count, b.point_count);
    }

    #[test]
    fn constant_weight_equals_point_count(which in 0usize..7, rho in 0.5f64..30.0) {
        let body = &planar_bodies()[which];
        let r = weighted_count(&CountRequest::new(body, rho)).unwrap();
        prop_assert_eq!(r.weighted_count, r.point_count as f64);
    }

    #[test]
    fn decomposition_recomposes(angle in 0.0f64..6.3) {
        let f = SphereField::builtin("cos").unwrap();
        let parts = positive_decomposition(&f, 2);
        let u = unit(angle);
        prop_assert!((parts.plus.eval(&u) - parts.minus.eval(&u) - f.eval(&u)).abs() <= 1e-14);
        prop_assert!(parts.plus.eval(&u) > 0.0 && parts.minus.eval(&u) > 0.0);
    }

    #[test]
    fn fit_recovers_exact_power_laws(slope in -3.0f64..1.0, c in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = (0..40).map(|j| {
            let r = 10.0 * 2f64.powf(j as f64 / 4.0);
            (r, c * r.powf(slope))
        }).collect();
        for method in [FitMethod::AllPoints, FitMethod::DyadicEnvelope] {
            let fit = fit_power_law(&pts, (1.0, 1e9), method, 0.0).unwrap();
            prop_assert!((fit.slope - slope).abs() <= 1e-9);
        }
    }

    #[test]
    fn trapezoid_is_exact_for_low_trig_polynomials(coeffs in prop::collection::vec(-2.0f64..2.0, 17)) {
        // a_0 + Σ_{j=1}^{8} (a_j cos jθ + b_j sin jθ); the integral is 2π a_0.
        let rule = QuadratureRule::circle_trapezoid(32);
        let value = rule.integrate(|u| {
            let t = u[1].atan2(u[0]);
            coeffs[0] + (1..=8).map(|j| coeffs[j] * (j as f64 * t).cos() + coeffs[j + 8] * (j as f64 * t).sin()).sum::<f64>()
        });
        prop_assert!((value - 2.0 * std::f64::consts::PI * coeffs[0]).abs() <= 1e-12);
    }
}

#[test]
fn point_count_is_monotone_in_rho() {
    for body in planar_bodies() {
        let rot = Rotation::planar(0.37);
        let mut last = 0;
        for j in 0..200 {
            let rho = 0.5 + 0.137 * j as f64;
            let c = weighted_count(&CountRequest::new(&body, rho).rotation(&rot)).unwrap().point_count;
            assert!(c >= last, "{} at {rho}", body.label());
            last = c;
        }
    }
}
