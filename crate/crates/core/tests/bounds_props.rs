mod common;

use polybounds_core::bounds::{rectangle, trace_translation_curve, BoundsRectangle, CurveMode};
use polybounds_core::rho_core::{RhoVector, C64};
use polybounds_core::{
    invert_on_symmetric, mirror_tensor, rotate_tensor, translation_t, translation_t0, voigt_to_rho,
    RhoTensor, SearchOptions, VoigtTensor,
};
use proptest::prelude::*;

fn crystal() -> impl Strategy<Value = RhoTensor> {
    (prop::array::uniform9(-1.0f64..1.0), 0.05f64..1.0).prop_map(|(a, floor)| {
        let m = nalgebra::Matrix3::from_row_slice(&a);
        let g = m * m.transpose() + nalgebra::Matrix3::identity() * floor;
        voigt_to_rho(&VoigtTensor {
            c1111: g[(0, 0)],
            c1122: g[(0, 1)],
            c1112: g[(0, 2)] / 2.0,
            c2222: g[(1, 1)],
            c2212: g[(1, 2)] / 2.0,
            c1212: g[(2, 2)] / 4.0,
        })
    })
}

fn moduli(r: &BoundsRectangle) -> [f64; 4] {
    [r.kappa_minus(), r.kappa_plus(), r.mu_minus(), r.mu_plus()]
}

fn close(a: [f64; 4], b: [f64; 4], rel: f64) -> bool {
    a.iter()
        .zip(b.iter())
        .all(|(x, y)| (x - y).abs() <= rel * x.abs().max(y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rectangle_is_ordered_and_positive(c0 in crystal()) {
        let r = rectangle(&c0, &SearchOptions::default()).unwrap();
        let [km, kp, mm, mp] = moduli(&r);
        prop_assert!(km > 0.0 && mm > 0.0);
        prop_assert!(km <= kp * (1.0 + 1e-10));
        prop_assert!(mm <= mp * (1.0 + 1e-10));
        prop_assert!(r.checks.lambda_nonnegative && r.checks.mixed_denominator_nonnegative);
        prop_assert!(r.alpha1 >= 0.0);
        prop_assert!(r.bulk.c.a1().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn rectangle_is_rotation_and_mirror_invariant(c0 in crystal(), theta in -3.2f64..3.2) {
        let opts = SearchOptions::default();
        let base = moduli(&rectangle(&c0, &opts).unwrap());
        let turned = moduli(&rectangle(&rotate_tensor(&c0, theta), &opts).unwrap());
        let mirrored = moduli(&rectangle(&mirror_tensor(&c0), &opts).unwrap());
        prop_assert!(close(base, turned, 1e-8), "{base:?} {turned:?}");
        prop_assert!(close(base, mirrored, 1e-8), "{base:?} {mirrored:?}");
    }

    #[test]
    fn rectangle_scales_with_the_crystal(c0 in crystal(), s in 0.1f64..10.0) {
        let opts = SearchOptions::default();
        let base = moduli(&rectangle(&c0, &opts).unwrap());
        let scaled = moduli(&rectangle(&c0.scale(s), &opts).unwrap());
        prop_assert!(close(base.map(|x| x * s), scaled, 1e-8));
    }

    #[test]
    fn optimal_vectors_solve_their_equations(c0 in crystal()) {
        let r = rectangle(&c0, &SearchOptions::default()).unwrap();
        let c = r.bulk.c;
        let back = c0.apply(&translation_t0(r.bulk.t0).apply(&c));
        prop_assert!((back.0 - c.0).norm() < 1e-10 * c.norm());
        let up = &r.shear_upper;
        let v = up.null_vector;
        let back = c0.apply(&translation_t(up.t1, up.t2).apply(&v));
        prop_assert!((back.0 - v.0).norm() < 1e-8 * v.norm());
        let lo = &r.shear_lower;
        let w = lo.null_vector;
        let t = translation_t(lo.t1, lo.t2);
        prop_assert!((c0.apply(&w).0 - t.apply(&w).0).norm() < 1e-8 * c0.norm() * w.norm());
        let tw = t.apply(&w);
        prop_assert!((tw.a3() - tw.a4()).norm() < 1e-8 * tw.norm());
        let n = up.normalized().unwrap();
        prop_assert!((n.vector.a2() + 1.0).norm() < 1e-10);
        prop_assert!(n.vector.a1().norm() >= 1.0 - 1e-8);
        let n = lo.normalized().unwrap();
        prop_assert!((n.vector.a2() - 1.0).norm() < 1e-10);
        prop_assert!(n.vector.a1().norm() >= (lo.t2 / lo.t1).abs() * (1.0 - 1e-8));
        // Lower bulk: C0 e = I.
        let e = r.bulk.e;
        prop_assert!((c0.apply(&e).0 - RhoVector::identity().0).norm() < 1e-10);
    }

    #[test]
    fn curve_samples_are_on_the_boundary(c0 in crystal()) {
        let s0 = invert_on_symmetric(&c0).unwrap();
        for (t1, t2) in trace_translation_curve(&c0, CurveMode::Compliance, 64).unwrap() {
            let m = s0 - translation_t(t1, t2);
            prop_assert!(m.symmetric_eigenvalues()[0].abs() < 1e-8 * s0.norm());
        }
        for (t1, t2) in trace_translation_curve(&c0, CurveMode::Stiffness, 64).unwrap() {
            let m = c0 - translation_t(t1, t2);
            prop_assert!(m.full_eigenvalues()[0].abs() < 1e-8 * c0.norm());
        }
    }
}

#[test]
fn isotropic_curves_follow_the_factorizations() {
    let (kappa, mu) = (1.7, 0.6);
    let c0 = voigt_to_rho(&VoigtTensor::isotropic(kappa, mu));
    // Compliance: (1 - 2 mu t1)(1 - 2 mu t2)(1 + kappa (t1 + t2)) = 0 on the boundary.
    for (t1, t2) in trace_translation_curve(&c0, CurveMode::Compliance, 90).unwrap() {
        let f = [
            (1.0 - 2.0 * mu * t1),
            (1.0 - 2.0 * mu * t2),
            (1.0 + kappa * (t1 + t2)),
        ];
        assert!(f.iter().any(|x| x.abs() < 1e-9), "{t1} {t2}");
        assert!(f.iter().all(|x| *x > -1e-9));
    }
    // Stiffness: (2 mu - t1)(2 mu - t2)(kappa (t1 + t2) + t1 t2) = 0.
    for (t1, t2) in trace_translation_curve(&c0, CurveMode::Stiffness, 90).unwrap() {
        let f = [2.0 * mu - t1, 2.0 * mu - t2, kappa * (t1 + t2) + t1 * t2];
        assert!(f.iter().any(|x| x.abs() < 1e-9), "{t1} {t2}");
    }
    let r = rectangle(&c0, &SearchOptions::default()).unwrap();
    assert!((r.bulk.t0 - 1.0 / (2.0 * kappa)).abs() < 1e-12);
    let c = r.bulk.c;
    assert!(
        (c.0 - RhoVector::new(
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0)
        )
        .0)
            .norm()
            < 1e-10
    );
}

#[test]
fn orthotropic_crystals_satisfy_the_rectangle_checks() {
    let mut r = common::rng(3);
    for _ in 0..20 {
        let v = polybounds_core::sample::random_orthotropic(&mut r);
        let c0 = voigt_to_rho(&v);
        assert!(c0.0.iter().all(|z| z.im.abs() < 1e-14));
        let rect = rectangle(&c0, &SearchOptions::default()).unwrap();
        assert!(rect.lambda >= 0.0);
        assert!(rect.eta * rect.shear_lower.t1 * rect.shear_lower.t2 >= 0.0);
    }
}
