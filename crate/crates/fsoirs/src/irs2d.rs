//! Planar IRS link: power density on the surface, the equivalent mirror
//! system (equivalent source waist and virtual source), the proposed phase
//! profile, the truncation wedge, and exact/approximate conditional GML.
//!
//! Coordinates: the IRS lies on the `y` axis (z = 0) and beams live in z > 0.
//! The source sits at `d_sr·(−sin θ_i, cos θ_i)`; the reflected beam leaves the
//! origin along `(sin θ_r, cos θ_r)`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::beam::{self, width};
use crate::error::{Error, Result};
use crate::geometry::{solve2, Mat2, Vec2};
use crate::special::erf;

/// Which root of the width equation `w(d, ŵ₀) = T` to use.
///
/// The equation `W² − T²W + q² = 0` (`W = ŵ₀²`, `q = λd/π`) has two positive
/// roots with product `q²`. `Matching` keeps the root on the same side of `q`
/// as the source waist (a diverging far-field source when `d > z_R`; it gives
/// `ŵ₀ = w₀` when nothing changes). `Collimated` always takes the larger root,
/// i.e. a quasi-collimated source whose Rayleigh range exceeds `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaistBranch {
    #[default]
    Matching,
    Collimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry2D {
    pub d_sr: f64,
    pub theta_i: f64,
    pub theta_r: f64,
    pub theta_rl: f64,
    /// IRS half-length.
    pub a_r: f64,
    /// Lens half-length.
    pub a_l: f64,
    pub y_l: f64,
    pub z_l: f64,
    #[serde(default)]
    pub y_r: f64,
}

impl LinkGeometry2D {
    /// Lens centred on the reflected beam line at distance `d_rl` from the IRS.
    pub fn on_reflected_ray(
        d_sr: f64,
        d_rl: f64,
        theta_i: f64,
        theta_r: f64,
        theta_rl: f64,
        a_r: f64,
        a_l: f64,
    ) -> Self {
        Self {
            d_sr,
            theta_i,
            theta_r,
            theta_rl,
            a_r,
            a_l,
            y_l: d_rl * theta_r.sin(),
            z_l: d_rl * theta_r.cos(),
            y_r: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let half_pi = PI / 2.0;
        if !(self.d_sr > 0.0 && self.d_sr.is_finite()) {
            return Err(Error::invalid("d_sr must be positive"));
        }
        if !(self.a_r > 0.0) || !(self.a_l >= 0.0) {
            return Err(Error::invalid("IRS half-length must be positive and lens half-length non-negative"));
        }
        for (name, v) in [("theta_i", self.theta_i), ("theta_r", self.theta_r)] {
            if !(0.0..half_pi).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} rad outside [0, π/2)")));
            }
        }
        if !(self.theta_rl.abs() < half_pi) {
            return Err(Error::invalid("theta_rl must satisfy |θ_rl| < π/2"));
        }
        if !(self.z_l > 0.0) || !self.y_l.is_finite() {
            return Err(Error::invalid("lens must lie in front of the IRS (z_l > 0)"));
        }
        Ok(())
    }

    pub fn lens_center(&self) -> Vec2 {
        Vec2::new(self.y_l, self.z_l)
    }

    /// Distance from the IRS centre to the lens centre.
    pub fn d_rl(&self) -> f64 {
        self.lens_center().norm()
    }

    /// Angle between the lens line and the IRS line, `θ̃ = θ_r − θ_rl`.
    pub fn lens_tilt(&self) -> f64 {
        self.theta_r - self.theta_rl
    }

    /// Unit vector along the lens line, pointing from corner `p₂` to `p₁`.
    pub fn lens_tangent(&self) -> Vec2 {
        let t = self.lens_tilt();
        Vec2::new(t.cos(), -t.sin())
    }

    /// Lens corner points `(p₁, p₂)`.
    pub fn lens_corners(&self) -> (Vec2, Vec2) {
        let c = self.lens_center();
        let t = self.lens_tangent();
        (c + self.a_l * t, c - self.a_l * t)
    }

    /// Copy with the lens slid by `u` along its own line.
    pub fn with_lens_offset(&self, u: f64) -> Self {
        let c = self.lens_center() + u * self.lens_tangent();
        Self {
            y_l: c.x,
            z_l: c.y,
            ..*self
        }
    }
}

fn width_equation_roots(d: f64, target: f64, wavelength: f64) -> Result<(f64, f64)> {
    let q = wavelength * d / PI;
    let t2 = target * target;
    let disc = t2 * t2 - 4.0 * q * q;
    if !(disc >= 0.0) {
        return Err(Error::NoEquivalentWaist {
            target,
            min: (2.0 * q).sqrt(),
        });
    }
    let hi = 0.5 * (t2 + disc.sqrt());
    // Product of roots is q²; dividing avoids cancellation in the small root.
    let lo = if hi > 0.0 { q * q / hi } else { 0.0 };
    Ok((lo, hi))
}

/// Waist `ŵ₀` of a simple beam whose width at distance `d` equals `target`.
///
/// `w0_ref` is the waist whose propagation regime the `Matching` branch follows.
pub fn waist_for_width(d: f64, target: f64, wavelength: f64, w0_ref: f64, branch: WaistBranch) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::invalid("target width must be positive"));
    }
    if d == 0.0 {
        return Ok(target);
    }
    let (lo, hi) = width_equation_roots(d.abs(), target, wavelength)?;
    let q = wavelength * d.abs() / PI;
    let w = match branch {
        WaistBranch::Collimated => hi,
        WaistBranch::Matching => {
            if w0_ref * w0_ref <= q {
                lo
            } else {
                hi
            }
        }
    };
    Ok(w.sqrt())
}

/// Waist of the equivalent source seen from angle `θ̂_i` that reproduces the
/// source's footprint on the IRS: `w(d_sr, ŵ₀) = (cos θ̂_i / cos θ_i)·w(d_sr, w₀)`.
pub fn equivalent_waist_2d(
    d_sr: f64,
    w0: f64,
    wavelength: f64,
    theta_i: f64,
    theta_hat: f64,
    branch: WaistBranch,
) -> Result<f64> {
    if theta_hat == theta_i && branch == WaistBranch::Matching {
        return Ok(w0);
    }
    let target = theta_hat.cos() / theta_i.cos() * width(d_sr, w0, wavelength);
    waist_for_width(d_sr, target, wavelength, w0, branch)
}

/// Power density of the incident beam along the IRS line.
pub fn irs_density_2d(y: f64, geom: &LinkGeometry2D, w0: f64, wavelength: f64) -> f64 {
    let w = width(geom.d_sr, w0, wavelength);
    let c = geom.theta_i.cos();
    SQRT_2 * c / (PI.sqrt() * w) * (-2.0 * c * c * y * y / (w * w)).exp()
}

/// The IRS phase-shift profile that makes the surface reflect like a mirror
/// lit by the equivalent source (waist `w0_hat`, incidence `θ_r`).
///
/// The bulk `−k·z` terms are differenced analytically, so the result keeps full
/// precision even though each beam phase is of order `k·d_sr`.
pub fn phase_profile_2d(y: f64, geom: &LinkGeometry2D, w0: f64, w0_hat: f64, wavelength: f64) -> f64 {
    let k = beam::wavenumber(wavelength);
    let (si, ci) = geom.theta_i.sin_cos();
    let (sr, cr) = geom.theta_r.sin_cos();
    let zi = geom.d_sr + y * si;
    let zr = geom.d_sr + y * sr;
    let bulk = -k * y * (sr - si);
    let out = beam::gauss_phase_rel(y * cr, zr, w0_hat, wavelength, 2);
    let inc = beam::gauss_phase_rel(y * ci, zi, w0, wavelength, 2);
    PI + bulk + (out - inc)
}

/// Boundary of the region lit through the finite IRS aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRegion {
    pub p_vs: Vec2,
    pub s1: f64,
    pub s2: f64,
    /// IRS edge points `(y_r + a_r, 0)` and `(y_r − a_r, 0)`.
    pub edges: (Vec2, Vec2),
}

impl TruncationRegion {
    /// Whether `p` lies inside the wedge spanned from the virtual source
    /// through the IRS edges (on the far side of the IRS).
    pub fn contains(&self, p: Vec2) -> bool {
        if p.y < 0.0 {
            return false;
        }
        let d = p - self.p_vs;
        let e1 = self.edges.0 - self.p_vs;
        let e2 = self.edges.1 - self.p_vs;
        // Inside the cone if p is between the two edge rays.
        let c1 = e2.cross(d);
        let c2 = d.cross(e1);
        let orient = e2.cross(e1);
        if orient == 0.0 {
            return false;
        }
        c1 * orient >= 0.0 && c2 * orient >= 0.0
    }
}

pub fn virtual_source_2d(geom: &LinkGeometry2D) -> (Vec2, TruncationRegion) {
    let p_vs = Vec2::new(-geom.d_sr * geom.theta_r.sin(), -geom.d_sr * geom.theta_r.cos());
    let hi = Vec2::new(geom.y_r + geom.a_r, 0.0);
    let lo = Vec2::new(geom.y_r - geom.a_r, 0.0);
    let s1 = -p_vs.y / (hi.x - p_vs.x);
    let s2 = -p_vs.y / (lo.x - p_vs.x);
    (
        p_vs,
        TruncationRegion {
            p_vs,
            s1,
            s2,
            edges: (hi, lo),
        },
    )
}

/// Centre of the reflected footprint: where the reflected beam line meets the lens line.
pub fn footprint_center_2d(geom: &LinkGeometry2D) -> Vec2 {
    let tilt = geom.lens_tilt();
    let s = (tilt.sin() * geom.y_l + tilt.cos() * geom.z_l) / geom.theta_rl.cos();
    Vec2::new(s * geom.theta_r.sin(), s * geom.theta_r.cos())
}

/// Reflection angle that steers the footprint centre onto the lens centre.
pub fn optimal_reflection_angle(y_l: f64, z_l: f64) -> f64 {
    y_l.atan2(z_l)
}

/// Density of the reflected (truncated) Gaussian beam at distance `r` from the footprint centre.
pub fn reflected_density_2d(r: f64, d_e2e: f64, w0_hat: f64, wavelength: f64) -> f64 {
    beam::density_1d(r, width(d_e2e, w0_hat, wavelength))
}

/// Everything the conditional GML needs about the equivalent mirror system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentMirror2D {
    pub w0_hat: f64,
    pub p_vs: Vec2,
    pub region: TruncationRegion,
    pub p_c: Vec2,
    /// Virtual-source-to-footprint distance.
    pub d_e2e: f64,
    /// Reflected beam width at the lens, `w(d_e2e, ŵ₀)`.
    pub w_e2e: f64,
}

impl EquivalentMirror2D {
    pub fn new(geom: &LinkGeometry2D, w0: f64, wavelength: f64, branch: WaistBranch) -> Result<Self> {
        geom.validate()?;
        let w0_hat = equivalent_waist_2d(geom.d_sr, w0, wavelength, geom.theta_i, geom.theta_r, branch)?;
        Ok(Self::with_waist(geom, w0_hat, wavelength))
    }

    pub fn with_waist(geom: &LinkGeometry2D, w0_hat: f64, wavelength: f64) -> Self {
        let (p_vs, region) = virtual_source_2d(geom);
        let p_c = footprint_center_2d(geom);
        let d_e2e = (p_c - p_vs).norm();
        Self {
            w0_hat,
            p_vs,
            region,
            p_c,
            d_e2e,
            w_e2e: width(d_e2e, w0_hat, wavelength),
        }
    }
}

/// Breakdown of an exact conditional GML evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gml2D {
    pub h_g: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Whether the wedge clipped the lens.
    pub truncated: bool,
    /// Whether the footprint centre lies on the (clipped) lens segment.
    pub center_on_lens: bool,
}

/// Where a wedge boundary ray meets the lens line, as a signed offset along the
/// lens from its centre. `None` for (near-)parallel lines or a backward hit.
fn boundary_hit(geom: &LinkGeometry2D, p_vs: Vec2, edge: Vec2) -> Option<f64> {
    let dir = edge - p_vs;
    let t = geom.lens_tangent();
    let m = Mat2::from_cols(dir, -t);
    let scale = dir.norm();
    let sol = solve2(m, geom.lens_center() - p_vs, 1e-12 * scale)?;
    if sol.x <= 0.0 {
        return None;
    }
    Some(sol.y)
}

/// Offsets along the lens line (from the lens centre) of the wedge boundaries, ordered.
pub fn wedge_on_lens_line(geom: &LinkGeometry2D, mirror: &EquivalentMirror2D) -> (f64, f64) {
    let t = geom.lens_tangent();
    let tc = (mirror.p_c - geom.lens_center()).dot(t);
    let a = boundary_hit(geom, mirror.p_vs, mirror.region.edges.0);
    let b = boundary_hit(geom, mirror.p_vs, mirror.region.edges.1);
    match (a, b) {
        (Some(a), Some(b)) => (a.min(b), a.max(b)),
        // One boundary never reaches the lens line: that side of the wedge is open.
        (Some(a), None) | (None, Some(a)) => {
            if a >= tc {
                (f64::NEG_INFINITY, a)
            } else {
                (a, f64::INFINITY)
            }
        }
        (None, None) => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// Exact conditional GML of the planar link (erf form with wedge clipping).
pub fn conditional_gml_2d(geom: &LinkGeometry2D, mirror: &EquivalentMirror2D) -> Gml2D {
    if geom.a_l == 0.0 {
        return Gml2D {
            h_g: 0.0,
            rho1: 0.0,
            rho2: 0.0,
            truncated: false,
            center_on_lens: false,
        };
    }
    let t = geom.lens_tangent();
    let tc = (mirror.p_c - geom.lens_center()).dot(t);
    let (wlo, whi) = wedge_on_lens_line(geom, mirror);
    let lo = (-geom.a_l).max(wlo);
    let hi = geom.a_l.min(whi);
    let truncated = lo > -geom.a_l || hi < geom.a_l;
    if !(hi > lo) {
        return Gml2D {
            h_g: 0.0,
            rho1: 0.0,
            rho2: 0.0,
            truncated: true,
            center_on_lens: false,
        };
    }
    let rho1 = (hi - tc).abs();
    let rho2 = (lo - tc).abs();
    let k = SQRT_2 * geom.theta_rl.cos() / mirror.w_e2e;
    let center_on_lens = (rho1 + rho2 - (hi - lo)).abs() <= 1e-9 * geom.a_l;
    let (e1, e2) = (erf(k * rho1), erf(k * rho2));
    let h_g = if center_on_lens {
        0.5 * (e1 + e2)
    } else {
        0.5 * (e1 - e2).abs()
    };
    Gml2D {
        h_g,
        rho1,
        rho2,
        truncated,
        center_on_lens,
    }
}

/// Lens slide offsets `u` (see [`LinkGeometry2D::with_lens_offset`]) at which
/// a lens edge first leaves the truncation wedge: `(negative side, positive side)`.
pub fn truncation_onset(geom: &LinkGeometry2D, mirror: &EquivalentMirror2D) -> (f64, f64) {
    let (wlo, whi) = wedge_on_lens_line(geom, mirror);
    // Sliding the lens by u shifts the wedge by −u in lens coordinates.
    (wlo + geom.a_l, whi - geom.a_l)
}

/// Parameters of the Gaussian-shaped approximation `A₀ exp(−2u²/(t w²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmlApproxParams2D {
    pub a0: f64,
    pub t: f64,
    pub nu: f64,
    pub w_e2e: f64,
}

impl GmlApproxParams2D {
    pub fn new(a_l: f64, theta_rl: f64, w_e2e: f64) -> Self {
        let c = theta_rl.cos();
        let nu = SQRT_2 * c * a_l / w_e2e;
        let a0 = erf(nu);
        let t = PI.sqrt() * a0 / (2.0 * nu * (-nu * nu).exp() * c * c);
        Self { a0, t, nu, w_e2e }
    }

    pub fn from_mirror(geom: &LinkGeometry2D, mirror: &EquivalentMirror2D) -> Self {
        Self::new(geom.a_l, geom.theta_rl, mirror.w_e2e)
    }
}

pub fn conditional_gml_2d_approx(u: f64, p: &GmlApproxParams2D) -> f64 {
    p.a0 * (-2.0 * u * u / (p.t * p.w_e2e * p.w_e2e)).exp()
}

/// Exact GML for a lens slid by `u` along its line, without truncation:
/// `½[erf(k(a_l − u)) + erf(k(a_l + u))]`.
pub fn untruncated_gml_2d(u: f64, a_l: f64, theta_rl: f64, w_e2e: f64) -> f64 {
    let k = SQRT_2 * theta_rl.cos() / w_e2e;
    0.5 * (erf(k * (a_l - u)) + erf(k * (a_l + u)))
}
