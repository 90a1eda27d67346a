//! Gaussian and general astigmatic Gaussian beams: width, wavefront curvature,
//! Gouy phase, phase fronts and normalized power densities on perpendicular
//! and oblique planes.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rot, squeeze, AnglePair, Mat2, Vec2};

/// A (possibly astigmatic) Gaussian beam.
///
/// For a simple beam `w01 == w02` and `rot == 0`. `dim` is the space dimension
/// (2 for the planar model, 3 for the spatial one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub wavelength: f64,
    #[serde(default = "one")]
    pub e0: f64,
    pub w01: f64,
    pub w02: f64,
    #[serde(default)]
    pub rot: f64,
    pub dim: u8,
}

fn one() -> f64 {
    1.0
}

impl BeamSpec {
    pub fn simple(wavelength: f64, w0: f64, dim: u8) -> Self {
        Self {
            wavelength,
            e0: 1.0,
            w01: w0,
            w02: w0,
            rot: 0.0,
            dim,
        }
    }

    pub fn astigmatic(wavelength: f64, w01: f64, w02: f64, rot: f64) -> Self {
        Self {
            wavelength,
            e0: 1.0,
            w01,
            w02,
            rot,
            dim: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::invalid("beam: wavelength must be positive"));
        }
        if !(self.w01 > 0.0 && self.w02 > 0.0 && self.w01.is_finite() && self.w02.is_finite()) {
            return Err(Error::invalid("beam: waist radii must be positive"));
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::invalid("beam: dimension must be 2 or 3"));
        }
        Ok(())
    }

    pub fn k(&self) -> f64 {
        wavenumber(self.wavelength)
    }

    pub fn is_astigmatic(&self) -> bool {
        self.w01 != self.w02
    }
}

/// Plane crossed by a beam at distance `d` along its axis, tilted by `angles`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObliquePlane {
    pub d: f64,
    pub angles: AnglePair,
}

pub fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}

pub fn rayleigh_range(w0: f64, wavelength: f64) -> f64 {
    PI * w0 * w0 / wavelength
}

pub fn width(z: f64, w0: f64, wavelength: f64) -> f64 {
    let zr = rayleigh_range(w0, wavelength);
    w0 * (z / zr).hypot(1.0)
}

/// Wavefront curvature; the waist plane is flat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    Flat,
    Radius(f64),
}

impl Curvature {
    /// `1/R`, exactly zero for a flat front.
    pub fn inverse(self) -> f64 {
        match self {
            Curvature::Flat => 0.0,
            Curvature::Radius(r) => 1.0 / r,
        }
    }
}

pub fn curvature(z: f64, w0: f64, wavelength: f64) -> Curvature {
    if z == 0.0 {
        return Curvature::Flat;
    }
    let zr = rayleigh_range(w0, wavelength);
    Curvature::Radius(z * (1.0 + (zr / z) * (zr / z)))
}

/// `1/R(z) = z / (z² + z_R²)`, well defined at the waist.
pub fn inv_curvature(z: f64, w0: f64, wavelength: f64) -> f64 {
    let zr = rayleigh_range(w0, wavelength);
    z / (z * z + zr * zr)
}

/// Gouy phase `((n−1)/2)·atan(z/z_R)`.
pub fn gouy(z: f64, w0: f64, wavelength: f64, n: u8) -> f64 {
    0.5 * f64::from(n - 1) * (z / rayleigh_range(w0, wavelength)).atan()
}

/// Two-axis Gouy phase of an astigmatic beam.
pub fn gouy_astig(z: f64, w01: f64, w02: f64, wavelength: f64) -> f64 {
    0.5 * ((z / rayleigh_range(w01, wavelength)).atan()
        + (z / rayleigh_range(w02, wavelength)).atan())
}

/// Phase of a simple Gaussian beam at transverse offset `a` and axial distance `z`,
/// without the bulk `−k z` term.
pub fn gauss_phase_rel(a: f64, z: f64, w0: f64, wavelength: f64, n: u8) -> f64 {
    let k = wavenumber(wavelength);
    -k * a * a * 0.5 * inv_curvature(z, w0, wavelength) + gouy(z, w0, wavelength, n)
}

/// Unwrapped phase `−kz − k a²/(2R) + ψ` of a simple beam (uses `w01`).
pub fn gauss_phase(a: f64, z: f64, spec: &BeamSpec) -> f64 {
    -spec.k() * z + gauss_phase_rel(a, z, spec.w01, spec.wavelength, spec.dim)
}

/// Unwrapped phase of a rotated astigmatic beam at transverse point `a`.
pub fn astig_phase(a: Vec2, z: f64, spec: &BeamSpec) -> f64 {
    let k = spec.k();
    let p = rot(spec.rot).mul_vec(a);
    let c1 = inv_curvature(z, spec.w01, spec.wavelength);
    let c2 = inv_curvature(z, spec.w02, spec.wavelength);
    -k * z - 0.5 * k * (p.x * p.x * c1 + p.y * p.y * c2)
        + gouy_astig(z, spec.w01, spec.w02, spec.wavelength)
}

/// Complex field amplitude of a simple beam, `−kz` term included.
pub fn field(a: f64, z: f64, spec: &BeamSpec) -> num_complex::Complex64 {
    let w = width(z, spec.w01, spec.wavelength);
    let amp = spec.e0 * (spec.w01 / w).powf(0.5 * f64::from(spec.dim - 1)) * (-(a * a) / (w * w)).exp();
    num_complex::Complex64::from_polar(amp, gauss_phase(a, z, spec))
}

/// Normalized density of a planar Gaussian beam on a perpendicular line.
pub fn intensity_orth_1d(a: f64, z: f64, w0: f64, wavelength: f64) -> f64 {
    density_1d(a, width(z, w0, wavelength))
}

/// `√2/(√π w) · exp(−2a²/w²)`.
pub fn density_1d(a: f64, w: f64) -> f64 {
    SQRT_2 / (PI.sqrt() * w) * (-2.0 * a * a / (w * w)).exp()
}

/// Shape matrix `R_φᵀ diag(1/w₁², 1/w₂²) R_φ` of a rotated astigmatic footprint.
pub fn footprint_shape(w1: f64, w2: f64, rot_angle: f64) -> Mat2 {
    let r = rot(rot_angle);
    r.transpose() * Mat2::diag(1.0 / (w1 * w1), 1.0 / (w2 * w2)) * r
}

/// Normalized density on a perpendicular plane; handles astigmatic beams.
pub fn intensity_orth_2d(a: Vec2, z: f64, spec: &BeamSpec) -> f64 {
    let w1 = width(z, spec.w01, spec.wavelength);
    let w2 = width(z, spec.w02, spec.wavelength);
    let s = footprint_shape(w1, w2, spec.rot);
    2.0 / (PI * w1 * w2) * (-2.0 * s.quad_form(a)).exp()
}

/// Density on an oblique plane from the perpendicular density:
/// `cos θ · I_orth(T_θ R_{−φ} ã)`.
pub fn oblique_density<F: Fn(Vec2) -> f64>(density_orth: F, plane: ObliquePlane, a: Vec2) -> f64 {
    let m = oblique_map(plane.angles);
    plane.angles.theta.cos() * density_orth(m.mul_vec(a))
}

/// Linear map from oblique-plane coordinates to the perpendicular plane.
pub fn oblique_map(angles: AnglePair) -> Mat2 {
    squeeze(angles.theta) * rot(-angles.phi)
}
