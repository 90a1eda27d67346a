//! Helpers shared by the integration tests: an adaptive Simpson integrator
//! that is independent of the library's quadrature, and the reference link.
#![allow(dead_code)]

use std::f64::consts::PI;

use fsoirs::geometry::AnglePair;
use fsoirs::irs3d::LinkGeometry3D;
use fsoirs::pointing::{Angles2D, Angles3D};

pub const LAMBDA: f64 = 1550e-9;
pub const A_L: f64 = 0.025;

pub fn table1_angles_2d() -> Angles2D {
    Angles2D {
        theta_i: PI / 6.0,
        theta_r: PI / 5.0,
        theta_rl: PI / 6.0,
    }
}

pub fn table1_angles_3d() -> Angles3D {
    Angles3D {
        psi_i: AnglePair::new(PI / 6.0, 0.0),
        psi_r: AnglePair::new(PI / 5.0, 7.0 * PI / 8.0),
        theta_rl: PI / 6.0,
    }
}

pub fn table1_geometry_3d() -> LinkGeometry3D {
    LinkGeometry3D {
        d_sr: 400.0,
        d_rl: 500.0,
        psi_i: AnglePair::new(PI / 6.0, 0.0),
        psi_r: AnglePair::new(PI / 5.0, 7.0 * PI / 8.0),
        theta_rl: PI / 6.0,
        a_l: A_L,
        irs_half: (0.5, 0.5),
    }
}

/// Adaptive Simpson over `panels` equal sub-intervals of `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let m = 0.5 * (lo + hi);
            let (fa, fm, fb) = (f(lo), f(m), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            refine(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫₀^{A₀} pdf(h) dh` with `h = A₀ e^{−s²}`, which smooths both endpoints.
pub fn integrate_gml_pdf<F: Fn(f64) -> f64>(pdf: F, a0: f64, s_max: f64) -> f64 {
    simpson(
        |s| {
            let h = a0 * (-s * s).exp();
            if h <= 0.0 || s == 0.0 {
                0.0
            } else {
                pdf(h) * 2.0 * s * h
            }
        },
        0.0,
        s_max,
        64,
        1e-10,
    )
}

/// [`simpson`] with a tolerance relative to a coarse first estimate.
pub fn simpson_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rel_tol: f64) -> f64 {
    let scale = simpson(&f, a, b, panels, f64::INFINITY).abs();
    simpson(f, a, b, panels, rel_tol * scale)
}
