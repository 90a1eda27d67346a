//! Rotation/squeeze algebra and the closed-form symmetric eigen-solver.

use approx::assert_abs_diff_eq;
use fsoirs::geometry::{eig_sym_2x2, rot, solve2, squeeze, squeeze_inv, AnglePair, Mat2, Vec2};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn assert_mat_eq(m: Mat2, n: Mat2, tol: f64) {
    assert!((m - n).max_abs() <= tol, "{m:?} != {n:?}");
}

#[test]
fn rotation_inverse_example() {
    assert_mat_eq(rot(0.7) * rot(-0.7), Mat2::IDENTITY, 1e-15);
    assert_mat_eq(rot(FRAC_PI_2), Mat2::new(0.0, -1.0, 1.0, 0.0), 1e-15);
}

#[test]
fn eig_known_matrix() {
    let e = eig_sym_2x2(Mat2::new(2.0, 1.0, 1.0, 2.0)).unwrap();
    assert_abs_diff_eq!(e.l1, 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(e.l2, 1.0, epsilon = 1e-14);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert_abs_diff_eq!(e.v1.x.abs(), s, epsilon = 1e-14);
    assert_abs_diff_eq!(e.v1.y.abs(), s, epsilon = 1e-14);
    assert!(e.v1.x * e.v1.y > 0.0);
}

#[test]
fn eig_degenerate_uses_identity_basis() {
    let e = eig_sym_2x2(Mat2::diag(2.5, 2.5)).unwrap();
    assert_eq!((e.l1, e.l2), (2.5, 2.5));
    assert_eq!(e.vectors(), Mat2::IDENTITY);
}

#[test]
fn eig_rejects_asymmetric_and_nan() {
    assert!(eig_sym_2x2(Mat2::new(1.0, 2.0, 0.0, 1.0)).is_err());
    assert!(eig_sym_2x2(Mat2::new(f64::NAN, 0.0, 0.0, 1.0)).is_err());
}

#[test]
fn angle_ranges() {
    assert!(AnglePair::new(0.0, PI).validate("x").is_ok());
    assert!(AnglePair::new(FRAC_PI_2, 0.0).validate("x").is_err());
    assert!(AnglePair::new(0.1, -PI).validate("x").is_err());
    assert!(squeeze_inv(FRAC_PI_2).is_err());
}

#[test]
fn solve2_singular() {
    assert!(solve2(Mat2::new(1.0, 2.0, 2.0, 4.0), Vec2::new(1.0, 1.0), 1e-12).is_none());
    let x = solve2(Mat2::new(2.0, 1.0, 1.0, 3.0), Vec2::new(3.0, 5.0), 1e-12).unwrap();
    assert_abs_diff_eq!(x.x, 0.8, epsilon = 1e-14);
    assert_abs_diff_eq!(x.y, 1.4, epsilon = 1e-14);
}

proptest! {
    #[test]
    fn rotation_is_orthonormal(tau in -10.0f64..10.0) {
        let r = rot(tau);
        prop_assert!((r.transpose() * r - Mat2::IDENTITY).max_abs() <= 1e-15);
        prop_assert!((r.det() - 1.0).abs() <= 1e-15);
        prop_assert!((rot(tau) * rot(-tau) - Mat2::IDENTITY).max_abs() <= 1e-15);
    }

    #[test]
    fn squeeze_is_diagonal_projection(tau in 0.0f64..1.55) {
        let t = squeeze(tau);
        prop_assert_eq!(t.b, 0.0);
        prop_assert_eq!(t.c, 0.0);
        prop_assert_eq!(t.d, 1.0);
        prop_assert!((0.0..=1.0).contains(&t.a));
        prop_assert!((squeeze_inv(tau).unwrap() * t - Mat2::IDENTITY).max_abs() <= 1e-14);
    }

    #[test]
    fn eig_reconstructs(a in -1e3f64..1e3, b in -1e3f64..1e3, d in -1e3f64..1e3) {
        let m = Mat2::new(a, b, b, d);
        let e = eig_sym_2x2(m).unwrap();
        prop_assert!(e.l1 >= e.l2);
        prop_assert!((e.reconstruct() - m).max_abs() <= 1e-12 * m.max_abs().max(1e-300));
        let v = e.vectors();
        prop_assert!((v.transpose() * v - Mat2::IDENTITY).max_abs() <= 1e-14);
        prop_assert!((v.det() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn eig_is_rotation_equivariant(l1 in 0.1f64..10.0, l2 in 0.1f64..10.0, tau in -3.0f64..3.0) {
        let r = rot(tau);
        let m = r * Mat2::diag(l1, l2) * r.transpose();
        let sym = Mat2::new(m.a, 0.5 * (m.b + m.c), 0.5 * (m.b + m.c), m.d);
        let e = eig_sym_2x2(sym).unwrap();
        prop_assert!((e.l1 - l1.max(l2)).abs() <= 1e-12 * 10.0);
        prop_assert!((e.l2 - l1.min(l2)).abs() <= 1e-12 * 10.0);
    }
}

#[test]
fn exact_quadrant_trig() {
    use fsoirs::geometry::sin_cos_exact;
    assert_eq!(sin_cos_exact(PI), (0.0, -1.0));
    assert_eq!(sin_cos_exact(-FRAC_PI_2), (-1.0, 0.0));
    assert_eq!(sin_cos_exact(0.0), (0.0, 1.0));
    assert_eq!(sin_cos_exact(0.3), 0.3f64.sin_cos());
    assert_eq!(rot(PI), Mat2::new(-1.0, 0.0, 0.0, -1.0));
}
