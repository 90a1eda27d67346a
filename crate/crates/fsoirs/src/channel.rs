//! Atmospheric loss, turbulence fading, the composite channel and outage.
//!
//! Outage integrals are written over the GML log-loss `L = ln(A₀/h_g)`:
//! `P_out = E_L{F_a(y₀ e^L)}` with `y₀ = √(γ_thr/γ̄)/(η h_p A₀)` and `F_a` the
//! turbulence CDF, which is the printed `x`-integral under `x = e^{−L}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beam::wavenumber;
use crate::error::{Error, Result};
use crate::pointing::GmlLaw;
use crate::quad::{self, QuadOpts};
use crate::special::{bessel_k_scaled, erfc, ln_gamma, reg_hyp_1f2_with_mag};

/// Default Rytov-variance threshold between the LN and GG regimes.
pub const DEFAULT_RYTOV_THRESHOLD: f64 = 0.3;

pub fn atmospheric_loss(zeta: f64, kappa: f64, d_sr: f64, d_rl: f64) -> f64 {
    zeta * 10f64.powf(-kappa * d_sr / 10.0) * 10f64.powf(-kappa * d_rl / 10.0)
}

/// Rytov variance `1.23 C_n² k^{7/6} d^{11/6}`.
pub fn rytov(cn2: f64, wavelength: f64, d: f64) -> f64 {
    1.23 * cn2 * wavenumber(wavelength).powf(7.0 / 6.0) * d.powf(11.0 / 6.0)
}

/// Gamma-Gamma shape parameters `(α, β)` for a plane wave.
pub fn gg_params(rytov_var: f64) -> (f64, f64) {
    let s125 = rytov_var.powf(1.2);
    let a = 1.0 / ((0.49 * rytov_var / (1.0 + 1.11 * s125).powf(7.0 / 6.0)).exp_m1());
    let b = 1.0 / ((0.51 * rytov_var / (1.0 + 0.69 * s125).powf(5.0 / 6.0)).exp_m1());
    (a, b)
}

/// Unit-mean turbulence fading law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TurbulenceModel {
    /// `ln h_a ~ N(−2σ², 4σ²)`, with `σ²` the log-amplitude variance.
    LogNormal { sigma2: f64 },
    GammaGamma { alpha: f64, beta: f64 },
}

impl TurbulenceModel {
    /// Pick the model from the Rytov variance (`σ² = σ_R²/4` for LN).
    pub fn from_rytov(rytov_var: f64, threshold: f64) -> Self {
        if rytov_var < threshold {
            Self::LogNormal { sigma2: rytov_var / 4.0 }
        } else {
            let (alpha, beta) = gg_params(rytov_var);
            Self::GammaGamma { alpha, beta }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::LogNormal { sigma2 } if !(sigma2 > 0.0 && sigma2.is_finite()) => {
                Err(Error::invalid("log-normal σ² must be positive"))
            }
            Self::GammaGamma { alpha, beta } if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) => {
                Err(Error::invalid("Gamma-Gamma α, β must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn pdf(&self, h: f64) -> f64 {
        if !(h > 0.0) || !h.is_finite() {
            return 0.0;
        }
        match *self {
            Self::LogNormal { sigma2 } => {
                let z = h.ln() + 2.0 * sigma2;
                (-z * z / (8.0 * sigma2)).exp() / ((8.0 * PI * sigma2).sqrt() * h)
            }
            Self::GammaGamma { alpha, beta } => gg_pdf(h, alpha, beta),
        }
    }

    /// `E{h_a²}`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            Self::LogNormal { sigma2 } => (4.0 * sigma2).exp(),
            Self::GammaGamma { alpha, beta } => (1.0 + 1.0 / alpha) * (1.0 + 1.0 / beta),
        }
    }

    /// `Pr{h_a ≤ y}`.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Ok(0.0);
        }
        if y == f64::INFINITY {
            return Ok(1.0);
        }
        match *self {
            Self::LogNormal { sigma2 } => Ok(ln_cdf(y, sigma2)),
            Self::GammaGamma { alpha, beta } => gg_cdf(y, alpha, beta),
        }
    }
}

fn ln_cdf(y: f64, sigma2: f64) -> f64 {
    0.5 * erfc(((1.0 / y).ln() - 2.0 * sigma2) / (8.0 * sigma2).sqrt())
}

fn gg_pdf(h: f64, alpha: f64, beta: f64) -> f64 {
    let ab = alpha * beta;
    let x = 2.0 * (ab * h).sqrt();
    let Ok(ks) = bessel_k_scaled(alpha - beta, x) else {
        return 0.0;
    };
    if ks == 0.0 || !ks.is_finite() {
        return 0.0;
    }
    let ln = std::f64::consts::LN_2 + 0.5 * (alpha + beta) * (ab * h).ln() - ln_gamma(alpha) - ln_gamma(beta) - h.ln()
        + ks.ln()
        - x;
    ln.exp()
}

/// Whether `α − β` is close enough to an integer that the closed GG form is
/// ill-conditioned.
pub fn gg_near_integer(alpha: f64, beta: f64) -> bool {
    let d = alpha - beta;
    (d - d.round()).abs() < 1e-3
}

/// The closed GG CDF `π/sin(π(α−β))·[f(α,β) − f(β,α)]` and an absolute
/// rounding-error bound for it.
pub fn gg_cdf_series(y: f64, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let z = alpha * beta * y;
    let part = |a: f64, b: f64| -> Result<(f64, f64)> {
        let (s, mag) = reg_hyp_1f2_with_mag(b, b - a + 1.0, b + 1.0, z)?;
        let pref = (b * z.ln() - ln_gamma(a)).exp();
        Ok((pref * s, pref * mag))
    };
    let (fab, mab) = part(alpha, beta)?;
    let (fba, mba) = part(beta, alpha)?;
    let k = PI / (PI * (alpha - beta)).sin();
    let value = k * (fab - fba);
    let bound = (k.abs() * (mab + mba) + value.abs()) * 64.0 * f64::EPSILON;
    Ok((value, bound))
}

/// Largest acceptable rounding-error bound on the closed GG CDF (absolute,
/// relative) before quadrature of the density is used instead.
const GG_SERIES_ERR: (f64, f64) = (1e-12, 1e-9);

fn gg_cdf(y: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !gg_near_integer(alpha, beta) {
        if let Ok((v, bound)) = gg_cdf_series(y, alpha, beta) {
            if bound <= GG_SERIES_ERR.0.max(GG_SERIES_ERR.1 * v.abs()) {
                return Ok(v.clamp(0.0, 1.0));
            }
        }
    }
    gg_cdf_quad(y, alpha, beta)
}

/// GG CDF by quadrature of the density, integrating whichever side is smaller.
pub fn gg_cdf_quad(y: f64, alpha: f64, beta: f64) -> Result<f64> {
    let opts = QuadOpts::tol(1e-16, 1e-11);
    let f = |h: f64| gg_pdf(h, alpha, beta);
    if y <= 1.0 {
        // Below the mean the CDF is the smaller side; split at powers of ten
        // so the h^{min(α,β)−1} onset is resolved.
        let mut pts = vec![0.0];
        pts.extend((0..=12).rev().map(|k| y * 10f64.powi(-k)));
        Ok(quad::integrate_pieces(f, &pts, opts)?.value.clamp(0.0, 1.0))
    } else {
        let tail = quad::integrate_to_inf(f, y, opts)?;
        Ok((1.0 - tail.value).clamp(0.0, 1.0))
    }
}

/// How the SNR axis `γ̄` is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    /// `γ̄ = P²/σ_n²`, the transmit SNR.
    #[default]
    Transmit,
    /// `γ̄ = E{h²}·P²/σ_n²`, the average received SNR.
    AverageReceived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// PD responsivity.
    pub eta: f64,
    /// IRS reflection efficiency.
    pub zeta: f64,
    /// Attenuation coefficient (1/m).
    pub kappa: f64,
    /// SNR `γ̄` (linear), interpreted per `convention`.
    pub snr: f64,
    pub snr_thr: f64,
    #[serde(default)]
    pub convention: SnrConvention,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid("eta must lie in (0, 1]"));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return Err(Error::invalid("zeta must lie in (0, 1]"));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::invalid("kappa must be non-negative"));
        }
        if !(self.snr > 0.0) || !(self.snr_thr >= 0.0) {
            return Err(Error::invalid("snr must be positive and snr_thr non-negative"));
        }
        Ok(())
    }

    pub fn h_p(&self, d_sr: f64, d_rl: f64) -> f64 {
        atmospheric_loss(self.zeta, self.kappa, d_sr, d_rl)
    }

    /// Transmit SNR `P²/σ_n²` for a channel with deterministic gain `η h_p`.
    pub fn transmit_snr(&self, h_p: f64, law: &GmlLaw, turb: &TurbulenceModel) -> f64 {
        match self.convention {
            SnrConvention::Transmit => self.snr,
            SnrConvention::AverageReceived => {
                let eh2 = (self.eta * h_p).powi(2) * law.moment(2.0) * turb.second_moment();
                self.snr / eh2
            }
        }
    }

    /// Outage occurs when `h ≤ h_th`.
    pub fn gain_threshold(&self, h_p: f64, law: &GmlLaw, turb: &TurbulenceModel) -> f64 {
        (self.snr_thr / self.transmit_snr(h_p, law, turb)).sqrt()
    }
}

/// Density of `h = η h_p h_g h_a`.
pub fn composite_pdf(h: f64, h_p: f64, eta: f64, law: &GmlLaw, turb: &TurbulenceModel) -> Result<f64> {
    if !(h > 0.0) {
        return Ok(0.0);
    }
    Ok(composite_h_pdf(h, h_p, eta, law, turb)? / h)
}

/// `h·f_h(h) = E_L{z f_a(z)}` with `z = h e^L/(η h_p A₀)`.
fn composite_h_pdf(h: f64, h_p: f64, eta: f64, law: &GmlLaw, turb: &TurbulenceModel) -> Result<f64> {
    let scale = eta * h_p * law.a0();
    let z0 = h / scale;
    // The turbulence density peaks near z = 1, i.e. L = −ln z₀.
    let peak = -z0.ln();
    let breaks: Vec<f64> = if peak > 0.0 { vec![peak] } else { vec![] };
    law.expect_l(
        |l| {
            let z = z0 * l.exp();
            // Far tail: z overflows and its density underflows.
            if z.is_finite() { z * turb.pdf(z) } else { 0.0 }
        },
        &breaks,
        QuadOpts::tol(1e-300, 1e-10),
    )
}

/// Outage probability by direct quadrature of the composite density.
pub fn outage_generic(budget: &LinkBudget, h_p: f64, law: &GmlLaw, turb: &TurbulenceModel) -> Result<f64> {
    let h_th = budget.gain_threshold(h_p, law, turb);
    if h_th == 0.0 {
        return Ok(0.0);
    }
    // h = h_th e^{−v}: ∫₀^{h_th} f_h dh = ∫₀^∞ h f_h(h) dv.
    let opts = QuadOpts::tol(1e-300, 1e-9);
    let mut err = None;
    let mut g = |v: f64| match composite_h_pdf(h_th * (-v).exp(), h_p, budget.eta, law, turb) {
        Ok(x) => x,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let head = quad::integrate_pieces(&mut g, &[0.0, 1.0, 4.0, 16.0], opts)?;
    let tail = quad::integrate_to_inf(&mut g, 16.0, opts)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((head.value + tail.value).clamp(0.0, 1.0))
}

/// Turbulence-CDF argument offset `y₀` and the `L` at which `y₀e^L = 1`.
fn outage_setup(budget: &LinkBudget, h_p: f64, law: &GmlLaw, turb: &TurbulenceModel) -> (f64, f64) {
    let h_th = budget.gain_threshold(h_p, law, turb);
    let y0 = h_th / (budget.eta * h_p * law.a0());
    (y0, -y0.ln())
}

/// Outage probability with log-normal turbulence.
pub fn outage_ln(budget: &LinkBudget, h_p: f64, law: &GmlLaw, sigma2: f64) -> Result<f64> {
    let turb = TurbulenceModel::LogNormal { sigma2 };
    turb.validate()?;
    let (y0, l_mid) = outage_setup(budget, h_p, law, &turb);
    if y0 == 0.0 {
        return Ok(0.0);
    }
    let ln_y0 = y0.ln();
    let s8 = (8.0 * sigma2).sqrt();
    let breaks = [l_mid + 2.0 * sigma2, l_mid + 2.0 * sigma2 + 2.0 * s8];
    let p = law.expect_l(
        |l| 0.5 * erfc((-(ln_y0 + l) - 2.0 * sigma2) / s8),
        &breaks,
        QuadOpts::tol(1e-300, 1e-10),
    )?;
    Ok(p.clamp(0.0, 1.0))
}

/// Outage probability with Gamma-Gamma turbulence via the closed
/// hypergeometric CDF; falls back to [`outage_generic`] when `α − β` is
/// within 1e-3 of an integer.
pub fn outage_gg(budget: &LinkBudget, h_p: f64, law: &GmlLaw, alpha: f64, beta: f64) -> Result<f64> {
    let turb = TurbulenceModel::GammaGamma { alpha, beta };
    turb.validate()?;
    if gg_near_integer(alpha, beta) {
        return outage_generic(budget, h_p, law, &turb);
    }
    let (y0, l_mid) = outage_setup(budget, h_p, law, &turb);
    if y0 == 0.0 {
        return Ok(0.0);
    }
    let mut err = None;
    let breaks = [l_mid, l_mid + 2.0, l_mid + 6.0];
    // The inner CDF is itself accurate to ~1e-9 relative, so the outer
    // tolerance stays above that noise floor.
    let p = law.expect_l(
        |l| match gg_cdf(y0 * l.exp(), alpha, beta) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        &breaks,
        QuadOpts::tol(1e-300, 1e-8),
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Outage for either turbulence model through its dedicated formula.
pub fn outage(budget: &LinkBudget, h_p: f64, law: &GmlLaw, turb: &TurbulenceModel) -> Result<f64> {
    match *turb {
        TurbulenceModel::LogNormal { sigma2 } => outage_ln(budget, h_p, law, sigma2),
        TurbulenceModel::GammaGamma { alpha, beta } => outage_gg(budget, h_p, law, alpha, beta),
    }
}
