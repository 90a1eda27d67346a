//! Physical-optics cross-check of the planar GML: the field reflected by a
//! continuous, a discretized and a phase-quantized IRS is propagated to the
//! lens with a 2D Huygens–Fresnel integral and the collected power fraction is
//! compared with the geometric-optics value.
//!
//! All three wave models share one sample grid on the IRS (`oversample`
//! points per unit cell, the first at the cell centre). The continuous model
//! evaluates the surface field at every sample; the discrete models treat
//! each unit cell as a point scatterer at its centre, weighted by the pitch. For each lens point the kernel `e^{−jkρ}/√ρ` is advanced with a
//! second-order phase recurrence, re-anchored exactly at every block start.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{self, width};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::irs2d::{self, EquivalentMirror2D, LinkGeometry2D, WaistBranch};

/// Samples per re-anchored recurrence block.
const BLOCK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSetup {
    pub geom: LinkGeometry2D,
    pub w0: f64,
    pub wavelength: f64,
    #[serde(default)]
    pub branch: WaistBranch,
    /// Passivity constant; `√(cos θ_i / cos θ_r)` when absent.
    #[serde(default)]
    pub varsigma: Option<f64>,
    /// Unit-cell pitch; `λ/2` when absent.
    #[serde(default)]
    pub pitch: Option<f64>,
    /// Samples per unit cell for the Huygens sums.
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    /// Phase quantization bits of the discrete-phase IRS.
    #[serde(default = "default_bits")]
    pub bits: u8,
    #[serde(default = "default_lens_samples")]
    pub lens_samples: usize,
    /// Include the `cos` obliquity factor of the Rayleigh–Sommerfeld kernel.
    #[serde(default = "default_true")]
    pub obliquity: bool,
}

fn default_oversample() -> usize {
    2
}
fn default_bits() -> u8 {
    4
}
fn default_lens_samples() -> usize {
    10_000
}
fn default_true() -> bool {
    true
}

impl OracleSetup {
    pub fn new(geom: LinkGeometry2D, w0: f64, wavelength: f64, branch: WaistBranch) -> Self {
        Self {
            geom,
            w0,
            wavelength,
            branch,
            varsigma: None,
            pitch: None,
            oversample: default_oversample(),
            bits: default_bits(),
            lens_samples: default_lens_samples(),
            obliquity: true,
        }
    }

    pub fn pitch(&self) -> f64 {
        self.pitch.unwrap_or(0.5 * self.wavelength)
    }

    pub fn step(&self) -> f64 {
        self.pitch() / self.oversample as f64
    }

    pub fn varsigma(&self) -> f64 {
        self.varsigma
            .unwrap_or_else(|| (self.geom.theta_i.cos() / self.geom.theta_r.cos()).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        self.geom.validate()?;
        if !(self.w0 > 0.0 && self.wavelength > 0.0) {
            return Err(Error::invalid("w0 and wavelength must be positive"));
        }
        if self.oversample == 0 || !(self.pitch() > 0.0) {
            return Err(Error::invalid("pitch and oversample must be positive"));
        }
        if self.step() > 0.5 * self.wavelength * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "IRS sampling step {:e} m exceeds λ/2; refine pitch or oversample",
                self.step()
            )));
        }
        if !(1..=16).contains(&self.bits) {
            return Err(Error::invalid("bits must lie in 1..=16"));
        }
        if self.lens_samples == 0 {
            return Err(Error::invalid("lens_samples must be positive"));
        }
        Ok(())
    }

    /// Total power of the source beam, `|E₀|² w₀ √(π/2)` (with `E₀ = 1`).
    pub fn source_power(&self) -> f64 {
        self.w0 * (PI / 2.0).sqrt()
    }
}

/// Nearest point of the `2^bits` uniform phase grid (ties toward zero),
/// returned in `[0, 2π)`.
pub fn quantize_phase(phase: f64, bits: u8) -> f64 {
    let levels = (1u64 << bits) as f64;
    let q = TAU / levels;
    let v = phase.rem_euclid(TAU) / q;
    let n = (v - 0.5).ceil();
    (n.rem_euclid(levels)) * q
}

/// Surface fields of the three wave models on the shared IRS grid.
#[derive(Debug, Clone)]
struct SurfaceFields {
    /// Offset of the first sample from the IRS centre.
    first: f64,
    step: f64,
    continuous: Vec<Complex64>,
    discrete: Vec<Complex64>,
    quantized: Vec<Complex64>,
}

fn surface_fields(setup: &OracleSetup, w0_hat: f64) -> SurfaceFields {
    let g = &setup.geom;
    let pitch = setup.pitch();
    let m = setup.oversample;
    let step = setup.step();
    let cells = (2.0 * g.a_r / pitch).floor() as usize;
    let first = -0.5 * (cells as f64 - 1.0) * pitch;
    let vs = setup.varsigma();
    let k = beam::wavenumber(setup.wavelength);
    let (si, ci) = g.theta_i.sin_cos();

    // Reflected surface field ς E_inc(y) e^{jΔφ(y)}; phases relative to −k d_sr.
    let incident = |y: f64| -> (f64, f64) {
        let z = g.d_sr + y * si;
        let w = width(z, setup.w0, setup.wavelength);
        let a = y * ci;
        let amp = vs * (setup.w0 / w).sqrt() * (-(a * a) / (w * w)).exp();
        let ph = -k * y * si + beam::gauss_phase_rel(a, z, setup.w0, setup.wavelength, 2);
        (amp, ph)
    };
    let profile = |y: f64| irs2d::phase_profile_2d(y, g, setup.w0, w0_hat, setup.wavelength);

    let n = cells * m;
    let mut continuous = Vec::with_capacity(n);
    let mut discrete = Vec::with_capacity(n);
    let mut quantized = Vec::with_capacity(n);
    let zero = Complex64::new(0.0, 0.0);
    for c in 0..cells {
        for j in 0..m {
            let y = g.y_r + first + (c * m + j) as f64 * step;
            let (amp, ph) = incident(y);
            let dphi = profile(y);
            continuous.push(Complex64::from_polar(amp, ph + dphi));
            if j == 0 {
                // Weight m·step = pitch on the cell-centre sample.
                let w = m as f64 * amp;
                discrete.push(Complex64::from_polar(w, ph + dphi));
                quantized.push(Complex64::from_polar(w, ph + quantize_phase(dphi, setup.bits)));
            } else {
                discrete.push(zero);
                quantized.push(zero);
            }
        }
    }
    SurfaceFields {
        first,
        step,
        continuous,
        discrete,
        quantized,
    }
}

/// Huygens fields `[continuous, discrete, quantized]` at point `r`, up to a
/// common unit-modulus factor.
fn fields_at(setup: &OracleSetup, sf: &SurfaceFields, r: Vec2) -> [Complex64; 3] {
    let k = beam::wavenumber(setup.wavelength);
    let g = &setup.geom;
    let rx = r.x - g.y_r;
    let z = r.y;
    let d = rx.hypot(z);
    let h = sf.step;
    let n = sf.continuous.len();
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    let rho_of = |delta: f64| (delta - rx).hypot(z);
    let mut start = 0;
    while start < n {
        let len = BLOCK.min(n - start);
        let d0 = sf.first + start as f64 * h;
        let rho0 = rho_of(d0);
        let rho1 = rho_of(d0 + h);
        // ρ − d and ρ₁ − ρ₀ in cancellation-free form.
        let excess = d0 * (d0 - 2.0 * rx) / (rho0 + d);
        let diff1 = h * (2.0 * d0 + h - 2.0 * rx) / (rho0 + rho1);
        let mid = rho_of(d0 + 0.5 * len as f64 * h);
        let curv = z * z / (mid * mid * mid);
        let mut amp = 1.0 / mid.sqrt();
        if setup.obliquity {
            amp *= z / mid;
        }
        let mut kern = Complex64::from_polar(amp, -k * excess);
        let mut rotor = Complex64::from_polar(1.0, -k * diff1);
        let step2 = Complex64::from_polar(1.0, -k * curv * h * h);
        let (c, dd, q) = (
            &sf.continuous[start..start + len],
            &sf.discrete[start..start + len],
            &sf.quantized[start..start + len],
        );
        let mut a0 = Complex64::new(0.0, 0.0);
        let mut a1 = Complex64::new(0.0, 0.0);
        let mut a2 = Complex64::new(0.0, 0.0);
        for i in 0..len {
            a0 += c[i] * kern;
            a1 += dd[i] * kern;
            a2 += q[i] * kern;
            kern *= rotor;
            rotor *= step2;
        }
        acc[0] += a0;
        acc[1] += a1;
        acc[2] += a2;
        start += len;
    }
    // |1/√(jλ)| · h
    let scale = h / setup.wavelength.sqrt();
    acc.map(|a| a * scale)
}

/// Fractions of the source power collected by the lens under each model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFractions {
    pub geometric: f64,
    pub huygens: f64,
    pub discrete: f64,
    pub quantized: f64,
}

/// Row of the lens-line density profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRow {
    /// Offset along the lens line from the lens centre (m).
    pub y_m: f64,
    pub geometric: f64,
    pub huygens: f64,
    pub discrete: f64,
    pub quantized: f64,
}

pub struct Oracle {
    setup: OracleSetup,
    mirror: EquivalentMirror2D,
    surface: SurfaceFields,
}

impl Oracle {
    pub fn new(setup: OracleSetup) -> Result<Self> {
        setup.validate()?;
        let mirror = EquivalentMirror2D::new(&setup.geom, setup.w0, setup.wavelength, setup.branch)?;
        let surface = surface_fields(&setup, mirror.w0_hat);
        Ok(Self { setup, mirror, surface })
    }

    pub fn mirror(&self) -> &EquivalentMirror2D {
        &self.mirror
    }

    pub fn surface_samples(&self) -> usize {
        self.surface.continuous.len()
    }

    fn lens_point(&self, s: f64) -> Vec2 {
        self.setup.geom.lens_center() + s * self.setup.geom.lens_tangent()
    }

    /// Power densities (per metre of lens line, normalized to the source
    /// power) of the three wave models at offsets `s` along the lens line.
    pub fn wave_densities(&self, s: &[f64]) -> Vec<[f64; 3]> {
        let norm = self.setup.geom.theta_rl.cos() / self.setup.source_power();
        s.par_iter()
            .map(|&si| fields_at(&self.setup, &self.surface, self.lens_point(si)).map(|e| e.norm_sqr() * norm))
            .collect()
    }

    /// Geometric-optics density along the lens line (zero outside the wedge).
    pub fn geometric_density(&self, s: f64) -> f64 {
        let g = &self.setup.geom;
        let (lo, hi) = irs2d::wedge_on_lens_line(g, &self.mirror);
        if s < lo || s > hi {
            return 0.0;
        }
        let tc = (self.mirror.p_c - g.lens_center()).dot(g.lens_tangent());
        let c = g.theta_rl.cos();
        c * irs2d::reflected_density_2d((s - tc) * c, self.mirror.d_e2e, self.mirror.w0_hat, self.setup.wavelength)
    }

    pub fn compare_models(&self) -> ModelFractions {
        let g = &self.setup.geom;
        let n = self.setup.lens_samples;
        let ds = 2.0 * g.a_l / n as f64;
        let s: Vec<f64> = (0..n).map(|i| -g.a_l + (i as f64 + 0.5) * ds).collect();
        let dens = self.wave_densities(&s);
        let sum = |j: usize| pairwise_sum(&dens.iter().map(|d| d[j]).collect::<Vec<_>>()) * ds;
        ModelFractions {
            geometric: irs2d::conditional_gml_2d(g, &self.mirror).h_g,
            huygens: sum(0),
            discrete: sum(1),
            quantized: sum(2),
        }
    }

    pub fn density_profile(&self, s: &[f64]) -> Vec<DensityRow> {
        self.wave_densities(s)
            .into_iter()
            .zip(s)
            .map(|(d, &y)| DensityRow {
                y_m: y,
                geometric: self.geometric_density(y),
                huygens: d[0],
                discrete: d[1],
                quantized: d[2],
            })
            .collect()
    }
}

/// Summation with a fixed pairwise tree, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}
