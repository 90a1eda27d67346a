//! Spatial IRS link: elliptical footprint on the surface, the equivalent
//! rotated-astigmatic source, the 3D phase profile and the conditional GML.
//!
//! The IRS is the `x–y` plane. Angle pairs `(θ, φ)` give the elevation from
//! the surface normal and the azimuth of the *node position* as seen from the
//! IRS centre; the source sits at azimuth 0 and a plain mirror reflects
//! towards azimuth π.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beam::{self, footprint_shape, width};
use crate::error::{Error, Result};
use crate::geometry::{eig_sym_2x2, rot, sin_cos_exact, squeeze, squeeze_inv, AnglePair, Mat2, Vec2};
use crate::irs2d::{waist_for_width, WaistBranch};
use crate::special::erf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry3D {
    pub d_sr: f64,
    pub d_rl: f64,
    pub psi_i: AnglePair,
    pub psi_r: AnglePair,
    pub theta_rl: f64,
    /// Lens radius.
    pub a_l: f64,
    /// IRS half-extents along x and y (the model assumes no truncation).
    #[serde(default = "default_irs_extent")]
    pub irs_half: (f64, f64),
}

fn default_irs_extent() -> (f64, f64) {
    (0.5, 0.5)
}

impl LinkGeometry3D {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_sr > 0.0 && self.d_rl > 0.0) {
            return Err(Error::invalid("d_sr and d_rl must be positive"));
        }
        self.psi_i.validate("incidence angles")?;
        self.psi_r.validate("reflection angles")?;
        if self.psi_i.phi != 0.0 {
            return Err(Error::invalid("the x axis is defined by the source: φ_i must be 0"));
        }
        if !(self.theta_rl.abs() < PI / 2.0) {
            return Err(Error::invalid("theta_rl must satisfy |θ_rl| < π/2"));
        }
        if !(self.a_l > 0.0) {
            return Err(Error::invalid("lens radius must be positive"));
        }
        Ok(())
    }

    pub fn d_e2e(&self) -> f64 {
        self.d_sr + self.d_rl
    }
}

/// Power density of the incident beam on the IRS plane.
pub fn irs_density_3d(a: Vec2, d_sr: f64, theta_i: f64, w0: f64, wavelength: f64) -> f64 {
    let w = width(d_sr, w0, wavelength);
    let c = theta_i.cos();
    2.0 * c / (PI * w * w) * (-2.0 * (c * c * a.x * a.x + a.y * a.y) / (w * w)).exp()
}

/// Equivalent general-astigmatic source seen from direction `psi_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentSource3D {
    pub w01: f64,
    pub w02: f64,
    /// Footprint rotation `φ̂`.
    pub rot: f64,
    pub psi_hat: AnglePair,
    /// Eigenvalues `λ₁ ≥ λ₂` (1/m²) of the footprint-matching matrix.
    pub lambda: (f64, f64),
}

impl EquivalentSource3D {
    pub fn beam(&self, wavelength: f64) -> beam::BeamSpec {
        beam::BeamSpec::astigmatic(wavelength, self.w01, self.w02, self.rot)
    }

    /// Density this source produces on the IRS plane.
    pub fn irs_density(&self, a: Vec2, d_sr: f64, wavelength: f64) -> f64 {
        let spec = self.beam(wavelength);
        let plane = beam::ObliquePlane {
            d: d_sr,
            angles: self.psi_hat,
        };
        beam::oblique_density(|p| beam::intensity_orth_2d(p, d_sr, &spec), plane, a)
    }
}

/// Matrix whose eigenpairs define the equivalent source:
/// `T_θ̂⁻ᵀ R_φ̂ᵀ S T²_θᵢ R_φ̂ T_θ̂⁻¹` with `S = I/w²(d_sr, w₀)`.
pub fn footprint_matching_matrix(d_sr: f64, theta_i: f64, psi_hat: AnglePair, w0: f64, wavelength: f64) -> Result<Mat2> {
    let w = width(d_sr, w0, wavelength);
    let s = 1.0 / (w * w);
    let ti = squeeze(theta_i);
    let tinv = squeeze_inv(psi_hat.theta)?;
    let r = rot(psi_hat.phi);
    let m = tinv.transpose() * r.transpose() * (ti * ti).scale(s) * r * tinv;
    // Symmetrize away rounding so the eigen solver sees an exactly symmetric matrix.
    let off = 0.5 * (m.b + m.c);
    Ok(Mat2::new(m.a, off, off, m.d))
}

pub fn equivalent_source_3d(
    d_sr: f64,
    theta_i: f64,
    psi_hat: AnglePair,
    w0: f64,
    wavelength: f64,
    branch: WaistBranch,
) -> Result<EquivalentSource3D> {
    let m = footprint_matching_matrix(d_sr, theta_i, psi_hat, w0, wavelength)?;
    let e = eig_sym_2x2(m)?;
    if !(e.l2 > 0.0) {
        return Err(Error::Numerical("footprint matrix is not positive definite".into()));
    }
    let w_src = width(d_sr, w0, wavelength);
    let solve = |lam: f64| -> Result<f64> {
        let target = 1.0 / lam.sqrt();
        if branch == WaistBranch::Matching && ((target - w_src) / w_src).abs() <= 4.0 * f64::EPSILON {
            return Ok(w0);
        }
        waist_for_width(d_sr, target, wavelength, w0, branch)
    };
    let w01 = solve(e.l1)?;
    let w02 = solve(e.l2)?;
    // R_φ̂ = [ν₁, ν₂]ᵀ with ν₁ = (cos φ̂, −sin φ̂).
    let rot_angle = (-e.v1.y).atan2(e.v1.x);
    Ok(EquivalentSource3D {
        w01,
        w02,
        rot: rot_angle,
        psi_hat,
        lambda: (e.l1, e.l2),
    })
}

/// Phase-shift profile for reflecting towards `Ψ_r`, built from the equivalent
/// source at `Ψ̂_i = Ψ_r`. Bulk `−k·z` terms are differenced analytically.
pub fn phase_profile_3d(a: Vec2, geom: &LinkGeometry3D, w0: f64, src: &EquivalentSource3D, wavelength: f64) -> f64 {
    let k = beam::wavenumber(wavelength);
    let (ti, tr, pr) = (geom.psi_i.theta, geom.psi_r.theta, geom.psi_r.phi);
    let (sp, cp) = sin_cos_exact(pr);
    let along_r = tr.sin() * (a.x * cp + a.y * sp);
    let along_i = -a.x * ti.sin();
    let zr = geom.d_sr + along_r;
    let zi = geom.d_sr + along_i;
    let bulk = -k * (along_r - along_i);

    let p = rot(src.rot) * squeeze(tr) * rot(-pr);
    let ah = p.mul_vec(a);
    let c1 = beam::inv_curvature(zr, src.w01, wavelength);
    let c2 = beam::inv_curvature(zr, src.w02, wavelength);
    let out = -0.5 * k * (ah.x * ah.x * c1 + ah.y * ah.y * c2) + beam::gouy_astig(zr, src.w01, src.w02, wavelength);

    let ti_m = squeeze(ti);
    let rho2 = ti_m.mul_vec(a).norm_sq();
    let inc = -0.5 * k * rho2 * beam::inv_curvature(zi, w0, wavelength) + beam::gouy(zi, w0, wavelength, 3);
    PI + bulk + (out - inc)
}

/// Large-distance limit of [`phase_profile_3d`]: a constant phase gradient.
pub fn linear_phase_3d(a: Vec2, geom: &LinkGeometry3D, wavelength: f64) -> f64 {
    let k = beam::wavenumber(wavelength);
    let (ti, tr, pr) = (geom.psi_i.theta, geom.psi_r.theta, geom.psi_r.phi);
    let (sp, cp) = sin_cos_exact(pr);
    PI - k * (a.x * (ti.sin() + tr.sin() * cp) + a.y * tr.sin() * sp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmlParams3D {
    pub a0: f64,
    /// Misalignment scale (m²) in `A₀ exp(−2‖u‖²/t)`.
    pub t: f64,
    pub nu: (f64, f64),
    pub delta: (f64, f64),
    /// Reflected beam widths `w(d_e2e, ŵ₀ᵢ)`.
    pub w_e2e: (f64, f64),
}

impl GmlParams3D {
    pub fn new(src: &EquivalentSource3D, d_e2e: f64, theta_rl: f64, a_l: f64, wavelength: f64) -> Result<Self> {
        let w1 = width(d_e2e, src.w01, wavelength);
        let w2 = width(d_e2e, src.w02, wavelength);
        let s = footprint_shape(w1, w2, src.rot);
        let t_rl = squeeze(theta_rl);
        let b = t_rl.transpose() * s * t_rl;
        let off = 0.5 * (b.b + b.c);
        let e = eig_sym_2x2(Mat2::new(b.a, off, off, b.d))?;
        let nu1 = a_l * (PI * e.l1 / 2.0).sqrt();
        let nu2 = a_l * (PI * e.l2 / 2.0).sqrt();
        let (e1, e2) = (erf(nu1), erf(nu2));
        let a0 = e1 * e2;
        let t = PI * a_l * a_l / (4.0 * nu1 * nu2)
            * (PI * e1 * e2 / (nu1 * nu2 * (-(nu1 * nu1 + nu2 * nu2)).exp())).sqrt();
        Ok(Self {
            a0,
            t,
            nu: (nu1, nu2),
            delta: (e.l1, e.l2),
            w_e2e: (w1, w2),
        })
    }

    /// `A₀` through the peak-density form `π² cos θ_rl I_max a_l² erf(ν₁)erf(ν₂)/(4ν₁ν₂)`.
    pub fn a0_from_peak_density(&self, theta_rl: f64, a_l: f64) -> f64 {
        let imax = 2.0 / (PI * self.w_e2e.0 * self.w_e2e.1);
        PI * PI * theta_rl.cos() * imax * a_l * a_l / (4.0 * self.nu.0 * self.nu.1) * erf(self.nu.0) * erf(self.nu.1)
    }
}

pub fn conditional_gml_3d(u: Vec2, p: &GmlParams3D) -> f64 {
    p.a0 * (-2.0 * u.norm_sq() / p.t).exp()
}

/// Equivalent source and GML parameters of a link, with the reflection direction as `Ψ̂_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link3D {
    pub geom: LinkGeometry3D,
    pub source: EquivalentSource3D,
    pub gml: GmlParams3D,
}

impl Link3D {
    pub fn new(geom: LinkGeometry3D, w0: f64, wavelength: f64, branch: WaistBranch) -> Result<Self> {
        geom.validate()?;
        let source = equivalent_source_3d(geom.d_sr, geom.psi_i.theta, geom.psi_r, w0, wavelength, branch)?;
        let gml = GmlParams3D::new(&source, geom.d_e2e(), geom.theta_rl, geom.a_l, wavelength)?;
        Ok(Self { geom, source, gml })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 1550e-9;

    #[test]
    fn block_diagonal_case() {
        let ti = PI / 6.0;
        let src = equivalent_source_3d(400.0, ti, AnglePair::new(ti, 0.0), 2e-3, LAMBDA, WaistBranch::Matching).unwrap();
        assert_eq!(src.w01, 2e-3);
        assert_eq!(src.w02, 2e-3);
        assert_eq!(src.rot, 0.0);
    }

    #[test]
    fn normal_incidence_is_circular() {
        let src = equivalent_source_3d(400.0, 0.0, AnglePair::new(0.0, 0.0), 2e-3, LAMBDA, WaistBranch::Matching).unwrap();
        assert_eq!((src.w01, src.w02, src.rot), (2e-3, 2e-3, 0.0));
    }

    #[test]
    fn a0_forms_agree() {
        let g = LinkGeometry3D {
            d_sr: 400.0,
            d_rl: 500.0,
            psi_i: AnglePair::new(PI / 6.0, 0.0),
            psi_r: AnglePair::new(PI / 5.0, 7.0 * PI / 8.0),
            theta_rl: PI / 6.0,
            a_l: 0.025,
            irs_half: (0.5, 0.5),
        };
        let link = Link3D::new(g, 1e-3, LAMBDA, WaistBranch::Matching).unwrap();
        assert_relative_eq!(
            link.gml.a0,
            link.gml.a0_from_peak_density(g.theta_rl, g.a_l),
            max_relative = 1e-13
        );
        let u = Vec2::new(0.0, (link.gml.t / 2.0).sqrt());
        assert_relative_eq!(conditional_gml_3d(u, &link.gml), link.gml.a0 / std::f64::consts::E, max_relative = 1e-14);
    }
}
