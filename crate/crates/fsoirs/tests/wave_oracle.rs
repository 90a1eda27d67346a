//! Huygens–Fresnel cross-check: convergence in the IRS sampling step, limiting
//! cases and consistency with the geometric-optics GML. Lens sampling is kept
//! coarse so each case runs in seconds.

mod common;

use common::{simpson_rel, A_L, LAMBDA};
use fsoirs::irs2d::{conditional_gml_2d, LinkGeometry2D, WaistBranch};
use fsoirs::wave_oracle::*;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn fig3_geometry(a_r: f64, a_l: f64) -> LinkGeometry2D {
    LinkGeometry2D::on_reflected_ray(200.0, 200.0, PI / 6.0, 0.0, 0.0, a_r, a_l)
}

fn setup(geom: LinkGeometry2D, lens_samples: usize) -> OracleSetup {
    let mut s = OracleSetup::new(geom, 1e-3, LAMBDA, WaistBranch::Collimated);
    s.lens_samples = lens_samples;
    s
}

#[test]
fn huygens_converges_in_surface_step() {
    let coarse = setup(fig3_geometry(0.1, A_L), 400);
    let mut fine = coarse;
    fine.oversample = 4;
    let a = Oracle::new(coarse).unwrap();
    let b = Oracle::new(fine).unwrap();
    assert!(b.surface_samples() >= 2 * a.surface_samples() - 2);
    let (fa, fb) = (a.compare_models(), b.compare_models());
    assert!((fa.huygens - fb.huygens).abs() < 1e-3, "{} vs {}", fa.huygens, fb.huygens);
}

#[test]
fn specular_mirror_models_agree() {
    let g = LinkGeometry2D::on_reflected_ray(200.0, 200.0, PI / 6.0, PI / 6.0, 0.0, 0.1, A_L);
    let f = Oracle::new(setup(g, 400)).unwrap().compare_models();
    for v in [f.huygens, f.discrete, f.quantized] {
        assert!((v - f.geometric).abs() <= 0.01, "{f:?}");
    }
}

#[test]
fn shrinking_irs_collects_nothing() {
    let mut last = f64::INFINITY;
    for a_r in [1e-2, 1e-3, 1e-4] {
        let f = Oracle::new(setup(fig3_geometry(a_r, A_L), 400)).unwrap().compare_models();
        assert!(f.huygens < last && f.geometric <= 0.03 * a_r / 1e-3, "{f:?}");
        last = f.huygens;
    }
    assert!(last < 1e-3);
}

#[test]
fn large_lens_conserves_energy() {
    // A 1 m lens captures essentially all reflected power; the fraction must
    // not exceed unity beyond discretization error.
    let f = Oracle::new(setup(fig3_geometry(0.1, 1.0), 4000)).unwrap().compare_models();
    for v in [f.huygens, f.discrete, f.quantized] {
        assert!(v <= 1.02, "{f:?}");
    }
}

#[test]
fn geometric_fraction_is_the_conditional_gml() {
    let s = setup(fig3_geometry(0.1, A_L), 200);
    let o = Oracle::new(s).unwrap();
    let f = o.compare_models();
    let direct = conditional_gml_2d(&s.geom, o.mirror()).h_g;
    assert!((f.geometric - direct).abs() <= 1e-12);
    // The geometric density integrates to the same fraction over the lens.
    let q = simpson_rel(|y| o.geometric_density(y), -A_L, A_L, 256, 1e-11);
    assert!((q - direct).abs() <= 1e-8, "{q} vs {direct}");
}

#[test]
fn invalid_setups_are_rejected() {
    let mut s = setup(fig3_geometry(0.1, A_L), 10);
    s.pitch = Some(2.0 * LAMBDA);
    s.oversample = 1;
    assert!(Oracle::new(s).is_err());
    let mut s = setup(fig3_geometry(0.1, A_L), 10);
    s.bits = 0;
    assert!(Oracle::new(s).is_err());
    let mut s = setup(fig3_geometry(0.1, A_L), 0);
    s.lens_samples = 0;
    assert!(Oracle::new(s).is_err());
}

#[test]
fn pairwise_sum_is_exact_on_integers() {
    let v: Vec<f64> = (1..=10_000).map(f64::from).collect();
    assert_eq!(pairwise_sum(&v), 50_005_000.0);
    assert_eq!(pairwise_sum(&[]), 0.0);
}

#[test]
fn quantizer_ties_go_toward_zero() {
    let q = TAU / 16.0;
    assert_eq!(quantize_phase(0.5 * q, 4), 0.0);
    assert_eq!(quantize_phase(1.5 * q, 4), q);
    assert_eq!(quantize_phase(TAU - 0.4 * q, 4), 0.0);
}

proptest! {
    #[test]
    fn quantizer_error_is_half_a_level(phase in -50.0f64..50.0, bits in 1u8..=12) {
        let q = quantize_phase(phase, bits);
        let step = TAU / f64::from(1u32 << bits);
        prop_assert!((0.0..TAU).contains(&q));
        prop_assert!((q / step - (q / step).round()).abs() < 1e-9);
        let d = (phase - q).rem_euclid(TAU);
        let err = d.min(TAU - d);
        prop_assert!(err <= 0.5 * step * (1.0 + 1e-9));
    }
}
