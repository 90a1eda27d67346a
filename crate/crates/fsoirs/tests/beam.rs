//! Beam normalization, oblique-plane flux conservation and phase gradients.

mod common;

use approx::assert_relative_eq;
use common::{simpson, LAMBDA};
use fsoirs::beam::{
    self, density_1d, gauss_phase, gauss_phase_rel, intensity_orth_1d, intensity_orth_2d, inv_curvature,
    oblique_density, width, BeamSpec, ObliquePlane,
};
use fsoirs::geometry::{AnglePair, Vec2};
use proptest::prelude::*;
use std::f64::consts::PI;

/// `∫∫ f` over a square of half-side `half`, by nested adaptive Simpson.
fn plane_integral<F: Fn(Vec2) -> f64>(f: F, half: f64) -> f64 {
    simpson(
        |x| simpson(|y| f(Vec2::new(x, y)), -half, half, 16, 1e-11),
        -half,
        half,
        16,
        1e-10,
    )
}

#[test]
fn width_reference_value() {
    // z_R = π w0²/λ ≈ 2.027 m, so w(200) ≈ w0·200/z_R.
    let w = width(200.0, 1e-3, LAMBDA);
    assert_relative_eq!(w, 0.09868, max_relative = 2e-4);
}

#[test]
fn line_density_normalized() {
    for z in [1.0, 200.0, 1000.0] {
        let w = width(z, 1e-3, LAMBDA);
        let total = simpson(|a| intensity_orth_1d(a, z, 1e-3, LAMBDA), -6.0 * w, 6.0 * w, 32, 1e-12);
        assert!((total - 1.0).abs() <= 1e-6, "z = {z}: {total}");
        assert_relative_eq!(density_1d(0.0, w), 2f64.sqrt() / (PI.sqrt() * w), max_relative = 1e-15);
    }
}

#[test]
fn plane_density_normalized() {
    for z in [1.0, 200.0, 1000.0] {
        let spec = BeamSpec::astigmatic(LAMBDA, 1e-3, 2.5e-3, 0.4);
        let half = 6.0 * width(z, 1e-3, LAMBDA).max(width(z, 2.5e-3, LAMBDA));
        let total = plane_integral(|a| intensity_orth_2d(a, z, &spec), half);
        assert!((total - 1.0).abs() <= 1e-6, "z = {z}: {total}");
    }
}

#[test]
fn oblique_density_conserves_flux() {
    let spec = BeamSpec::simple(LAMBDA, 2e-3, 3);
    let d = 200.0;
    let w = width(d, 2e-3, LAMBDA);
    for theta in [0.0, PI / 6.0, PI / 3.0] {
        let plane = ObliquePlane {
            d,
            angles: AnglePair::new(theta, 0.4),
        };
        let half = 6.0 * w / theta.cos();
        let total = plane_integral(|a| oblique_density(|p| intensity_orth_2d(p, d, &spec), plane, a), half);
        assert!((total - 1.0).abs() <= 1e-6, "θ = {theta}: {total}");
    }
}

#[test]
fn oblique_footprint_stretches_by_secant() {
    let spec = BeamSpec::simple(LAMBDA, 2e-3, 3);
    let d = 300.0;
    let w = width(d, 2e-3, LAMBDA);
    let theta = 0.9;
    let plane = ObliquePlane {
        d,
        angles: AnglePair::new(theta, 0.0),
    };
    let f = |a: Vec2| oblique_density(|p| intensity_orth_2d(p, d, &spec), plane, a);
    let peak = f(Vec2::new(0.0, 0.0));
    // The e⁻² contour sits at w/cos θ along x and at w along y.
    assert_relative_eq!(f(Vec2::new(w / theta.cos(), 0.0)) / peak, (-2.0f64).exp(), max_relative = 1e-12);
    assert_relative_eq!(f(Vec2::new(0.0, w)) / peak, (-2.0f64).exp(), max_relative = 1e-12);
}

#[test]
fn phase_gradient_matches_finite_difference() {
    let spec = BeamSpec::simple(LAMBDA, 1e-3, 2);
    let (a, z, h) = (0.01, 0.1, 1e-4);
    let fd = (gauss_phase(a + h, z, &spec) - gauss_phase(a - h, z, &spec)) / (2.0 * h);
    let exact = -beam::wavenumber(LAMBDA) * a * inv_curvature(z, 1e-3, LAMBDA);
    assert_relative_eq!(fd, exact, max_relative = 1e-6);
}

proptest! {
    #[test]
    fn width_even_and_monotone(z in 0.0f64..5e3, dz in 1e-3f64..100.0, w0 in 1e-4f64..1e-2) {
        prop_assert_eq!(width(z, w0, LAMBDA), width(-z, w0, LAMBDA));
        prop_assert!(width(z + dz, w0, LAMBDA) > width(z, w0, LAMBDA));
        prop_assert!(width(z, w0, LAMBDA) >= w0);
    }

    #[test]
    fn relative_phase_gradient(a in -0.2f64..0.2, z in 1.0f64..2e3, w0 in 5e-4f64..5e-3) {
        let h = 1e-5;
        let fd = (gauss_phase_rel(a + h, z, w0, LAMBDA, 3) - gauss_phase_rel(a - h, z, w0, LAMBDA, 3)) / (2.0 * h);
        let exact = -beam::wavenumber(LAMBDA) * a * inv_curvature(z, w0, LAMBDA);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs() + 1e-9);
    }
}
