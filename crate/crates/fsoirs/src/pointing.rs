//! Building sway: misalignment mappings from node displacements to the lens
//! plane, and the resulting statistical laws of the GML.
//!
//! Every law is handled through the log-loss `L = ln(A₀/h_g) ≥ 0`, whose
//! density is smooth (or has an integrable `L^{−1/2}` endpoint) where the
//! density of `h_g` itself may blow up at `A₀`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{eig_sym_2x2, rot, sin_cos_exact, squeeze, squeeze_inv, AnglePair, Mat2, Vec2};
use crate::irs2d::GmlApproxParams2D;
use crate::irs3d::GmlParams3D;
use crate::quad::{self, QuadOpts};
use crate::special::{bessel_i0e, erfc};

/// Standard deviations (m) of independent zero-mean Gaussian displacements of
/// the source, the IRS (along its normal) and the lens.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SwayModel {
    pub sigma_s: f64,
    pub sigma_r: f64,
    pub sigma_l: f64,
}

impl SwayModel {
    pub fn new(sigma_s: f64, sigma_r: f64, sigma_l: f64) -> Self {
        Self { sigma_s, sigma_r, sigma_l }
    }

    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("sigma_s", self.sigma_s), ("sigma_r", self.sigma_r), ("sigma_l", self.sigma_l)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{n} must be a finite non-negative SD, got {v}")));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(c * self.sigma_s, c * self.sigma_r, c * self.sigma_l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles2D {
    pub theta_i: f64,
    pub theta_r: f64,
    pub theta_rl: f64,
}

/// Coefficients `(c_s, c_r, c_l)` with `u = c_s ε_s + c_r ε_r + c_l ε_l`.
pub fn sensitivity_2d(a: &Angles2D) -> [f64; 3] {
    let k = 1.0 / a.theta_rl.cos();
    let ci = a.theta_i.cos();
    [
        k * a.theta_r.cos() / ci,
        -k * (a.theta_i + a.theta_r).sin() / ci,
        -k,
    ]
}

pub fn misalignment_2d(eps_s: f64, eps_r: f64, eps_l: f64, a: &Angles2D) -> f64 {
    let [cs, cr, cl] = sensitivity_2d(a);
    cs * eps_s + cr * eps_r + cl * eps_l
}

pub fn misalignment_var_2d(sway: &SwayModel, a: &Angles2D) -> f64 {
    let [cs, cr, cl] = sensitivity_2d(a);
    (cs * sway.sigma_s).powi(2) + (cr * sway.sigma_r).powi(2) + (cl * sway.sigma_l).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles3D {
    pub psi_i: AnglePair,
    pub psi_r: AnglePair,
    pub theta_rl: f64,
}

/// Linear maps from the displacements to the lens-plane misalignment:
/// `u = source·ε_s + irs·ε_r + lens·ε_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity3D {
    pub source: Mat2,
    pub irs: Vec2,
    pub lens: Mat2,
}

impl Sensitivity3D {
    /// Per-component SD coefficients of `u` for unit-SD displacements:
    /// `[(source), (irs), (lens)]`, each as `(u₁, u₂)`.
    pub fn sd_coefficients(&self) -> [(f64, f64); 3] {
        let row_norms = |m: Mat2| ((m.a * m.a + m.b * m.b).sqrt(), (m.c * m.c + m.d * m.d).sqrt());
        [
            row_norms(self.source),
            (self.irs.x.abs(), self.irs.y.abs()),
            row_norms(self.lens),
        ]
    }
}

pub fn sensitivity_3d(a: &Angles3D) -> Result<Sensitivity3D> {
    let (ti, tr, pr) = (a.psi_i.theta, a.psi_r.theta, a.psi_r.phi);
    let lens = squeeze_inv(a.theta_rl)?;
    let proj = lens * squeeze(tr) * rot(-pr);
    let (sp, cp) = sin_cos_exact(pr);
    let v = Vec2::new(tr.tan() * cp - ti.tan(), tr.tan() * sp);
    Ok(Sensitivity3D {
        source: proj * squeeze_inv(ti)?,
        irs: -proj.mul_vec(v),
        lens: lens.scale(-1.0),
    })
}

pub fn misalignment_3d(eps_s: Vec2, eps_r: f64, eps_l: Vec2, a: &Angles3D) -> Result<Vec2> {
    let s = sensitivity_3d(a)?;
    Ok(s.source.mul_vec(eps_s) + eps_r * s.irs + s.lens.mul_vec(eps_l))
}

/// Covariance of the 3D misalignment and its Hoyt parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisalignmentCov {
    pub sigma: Mat2,
    /// Eigenvalues `χ₁ ≥ χ₂`.
    pub chi: (f64, f64),
    pub q: f64,
    pub omega: f64,
}

impl MisalignmentCov {
    pub fn from_matrix(sigma: Mat2) -> Result<Self> {
        let off = 0.5 * (sigma.b + sigma.c);
        let sigma = Mat2::new(sigma.a, off, off, sigma.d);
        let e = eig_sym_2x2(sigma)?;
        let chi = (e.l1.max(0.0), e.l2.max(0.0));
        Ok(Self::from_eigen(sigma, chi))
    }

    fn from_eigen(sigma: Mat2, chi: (f64, f64)) -> Self {
        let q = if chi.0 > 0.0 { (chi.1 / chi.0).sqrt() } else { 1.0 };
        Self {
            sigma,
            chi,
            q,
            omega: chi.0 + chi.1,
        }
    }
}

pub fn misalignment_cov_3d(sway: &SwayModel, a: &Angles3D) -> Result<MisalignmentCov> {
    let s = sensitivity_3d(a)?;
    let v = s.irs;
    let irs = Mat2::new(v.x * v.x, v.x * v.y, v.y * v.x, v.y * v.y);
    let sigma = (s.source * s.source.transpose()).scale(sway.sigma_s.powi(2))
        + irs.scale(sway.sigma_r.powi(2))
        + (s.lens * s.lens.transpose()).scale(sway.sigma_l.powi(2));
    MisalignmentCov::from_matrix(sigma)
}

/// Component variances `(σ²_u₁, σ²_u₂)` for a lens facing the beam with
/// in-plane reflection (`φ_r = π`, `θ_rl = 0`).
pub fn in_plane_variances(sway: &SwayModel, theta_i: f64, theta_r: f64) -> (f64, f64) {
    let ci2 = theta_i.cos().powi(2);
    let s2 = sway.sigma_s.powi(2);
    let l2 = sway.sigma_l.powi(2);
    let u1 = theta_r.cos().powi(2) / ci2 * s2 + (theta_i + theta_r).sin().powi(2) / ci2 * sway.sigma_r.powi(2) + l2;
    (u1, s2 + l2)
}

/// Misalignment variance when only the IRS sways (the in-plane case).
pub fn irs_only_variance(sigma_r: f64, theta_i: f64, theta_r: f64) -> f64 {
    (theta_i + theta_r).sin().powi(2) / theta_i.cos().powi(2) * sigma_r * sigma_r
}

/// Hoyt `(q, Ω)` for a mechanically steered mirror.
pub fn mirror_params(sway: &SwayModel, theta_i: f64) -> (f64, f64) {
    let base = sway.sigma_s.powi(2) + sway.sigma_l.powi(2);
    let tilt = 4.0 * sway.sigma_r.powi(2) * theta_i.sin().powi(2);
    let q = if base + tilt > 0.0 { (base / (base + tilt)).sqrt() } else { 1.0 };
    (q, 2.0 * base + tilt)
}

/// Statistical law of the GML under Gaussian sway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GmlLaw {
    /// No sway: `h_g ≡ A₀`.
    PointMass { a0: f64 },
    /// Scalar Gaussian misalignment (planar link): `L ~ Gamma(½, 1/ϖ)`.
    Planar { a0: f64, varpi: f64 },
    /// Anisotropic bivariate misalignment: `‖u‖` is Hoyt distributed.
    Hoyt { a0: f64, q: f64, omega: f64, t: f64, varpi: f64 },
    /// Only the IRS sways in-plane: `|u|` is one-sided Gaussian.
    OneSided { a0: f64, t: f64, sigma_t2: f64, rho: f64 },
}

/// Below this `q` the Hoyt law is replaced by its one-sided limit.
const ONE_SIDED_Q: f64 = 1e-6;

impl GmlLaw {
    pub fn planar(params: &GmlApproxParams2D, sigma_u2: f64) -> Self {
        if sigma_u2 == 0.0 {
            return Self::PointMass { a0: params.a0 };
        }
        Self::Planar {
            a0: params.a0,
            varpi: params.t * params.w_e2e * params.w_e2e / (4.0 * sigma_u2),
        }
    }

    pub fn hoyt(a0: f64, t: f64, q: f64, omega: f64) -> Self {
        if omega == 0.0 {
            return Self::PointMass { a0 };
        }
        if q < ONE_SIDED_Q {
            return Self::one_sided(a0, t, omega);
        }
        Self::Hoyt {
            a0,
            q,
            omega,
            t,
            varpi: (1.0 + q * q) * t / (4.0 * q * omega),
        }
    }

    pub fn spatial(params: &GmlParams3D, cov: &MisalignmentCov) -> Self {
        Self::hoyt(params.a0, params.t, cov.q, cov.omega)
    }

    pub fn one_sided(a0: f64, t: f64, sigma_t2: f64) -> Self {
        if sigma_t2 == 0.0 {
            return Self::PointMass { a0 };
        }
        Self::OneSided {
            a0,
            t,
            sigma_t2,
            rho: t / (4.0 * sigma_t2),
        }
    }

    pub fn a0(&self) -> f64 {
        match *self {
            Self::PointMass { a0 } | Self::Planar { a0, .. } | Self::Hoyt { a0, .. } | Self::OneSided { a0, .. } => a0,
        }
    }

    /// Exponent rate of the `L^{−1/2} e^{−rL}` family, if the law belongs to it.
    fn half_gamma_rate(&self) -> Option<f64> {
        match *self {
            Self::Planar { varpi, .. } => Some(varpi),
            Self::OneSided { rho, .. } => Some(rho),
            _ => None,
        }
    }

    fn hoyt_rates(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Self::Hoyt { q, varpi, .. } => {
                let c1 = (1.0 + q * q) * varpi / (2.0 * q);
                let c2 = (1.0 - q * q) * varpi / (2.0 * q);
                Some((varpi, c1, c2))
            }
            _ => None,
        }
    }

    /// Density of `L = ln(A₀/h_g)` for `L > 0`.
    pub fn l_density(&self, l: f64) -> f64 {
        if !(l > 0.0) || !l.is_finite() {
            return 0.0;
        }
        if let Some(r) = self.half_gamma_rate() {
            return (r / (PI * l)).sqrt() * (-r * l).exp();
        }
        if let Some((varpi, c1, c2)) = self.hoyt_rates() {
            return varpi * (-(c1 - c2) * l).exp() * bessel_i0e(c2 * l);
        }
        0.0
    }

    /// Density of `h_g` on `(0, A₀)`; zero outside. Not defined for a point mass (returns 0).
    pub fn pdf(&self, h: f64) -> f64 {
        let a0 = self.a0();
        if !(h > 0.0 && h < a0) {
            return 0.0;
        }
        self.l_density((a0 / h).ln()) / h
    }

    /// `Pr{L > ℓ}`.
    pub fn l_survival(&self, ell: f64) -> Result<f64> {
        if ell <= 0.0 {
            return Ok(1.0);
        }
        match *self {
            Self::PointMass { .. } => Ok(0.0),
            Self::Planar { .. } | Self::OneSided { .. } => {
                let r = self.half_gamma_rate().unwrap_or(0.0);
                Ok(erfc((r * ell).sqrt()))
            }
            Self::Hoyt { .. } => {
                let tail = quad::integrate_to_inf(|l| self.l_density(l), ell, QuadOpts::tol(1e-15, 1e-11))?;
                Ok(tail.value.clamp(0.0, 1.0))
            }
        }
    }

    /// `Pr{h_g ≤ h}`.
    pub fn cdf(&self, h: f64) -> Result<f64> {
        let a0 = self.a0();
        if h >= a0 {
            return Ok(1.0);
        }
        if h <= 0.0 {
            return Ok(0.0);
        }
        self.l_survival((a0 / h).ln())
    }

    /// `E{h_g^m}` for `m ≥ 0`.
    pub fn moment(&self, m: f64) -> f64 {
        let a0 = self.a0();
        let mgf = match *self {
            Self::PointMass { .. } => 1.0,
            Self::Planar { varpi: r, .. } | Self::OneSided { rho: r, .. } => (1.0 + m / r).powf(-0.5),
            Self::Hoyt { q, varpi, .. } => ((1.0 + m / (q * varpi)) * (1.0 + m * q / varpi)).powf(-0.5),
        };
        a0.powf(m) * mgf
    }

    /// `E{g(L)}` by adaptive quadrature. `breaks` are extra break points in `L`
    /// where `g` changes quickly.
    pub fn expect_l<G: FnMut(f64) -> f64>(&self, mut g: G, breaks: &[f64], opts: QuadOpts) -> Result<f64> {
        let rate = match *self {
            Self::PointMass { .. } => return Ok(g(0.0)),
            Self::Planar { varpi: r, .. } | Self::OneSided { rho: r, .. } => r,
            Self::Hoyt { q, varpi, .. } => q * varpi,
        };
        let half_gamma = self.half_gamma_rate();
        // With L = s² the L^{−1/2} endpoint becomes a smooth Gaussian in s.
        let mut integrand = |s: f64| {
            let l = s * s;
            let w = match half_gamma {
                Some(r) => 2.0 * (r / PI).sqrt() * (-r * l).exp(),
                None => 2.0 * s * self.l_density(l),
            };
            if w == 0.0 {
                0.0
            } else {
                w * g(l)
            }
        };
        let scale = 1.0 / rate.sqrt();
        let mut pts: Vec<f64> = vec![0.0, scale, 4.0 * scale];
        pts.extend(breaks.iter().filter(|&&b| b > 0.0 && b.is_finite()).map(|b| b.sqrt()));
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        let last = *pts.last().unwrap_or(&0.0);
        let head = quad::integrate_pieces(&mut integrand, &pts, opts)?;
        let tail = quad::integrate_to_inf(&mut integrand, last, opts)?;
        Ok(head.value + tail.value)
    }
}
