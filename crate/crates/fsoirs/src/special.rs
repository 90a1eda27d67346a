//! Special functions: error function, Gamma in log and reciprocal form,
//! exponentially scaled modified Bessel functions `e^{−x} I₀(x)` and
//! `e^{x} K_ν(x)` for real order, and the regularized hypergeometric ₁F̃₂.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn erf(x: f64) -> f64 {
    statrs::function::erf::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `1/Γ(x)`, exactly zero at the poles `x = 0, −1, −2, …`.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 0.5 {
        if x > 170.0 {
            return (-ln_gamma(x)).exp();
        }
        return 1.0 / gamma(x);
    }
    // Reflection: 1/Γ(x) = Γ(1−x)·sin(πx)/π.
    sin_pi(x) * gamma(1.0 - x) / PI
}

/// `sin(πx)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// Exponentially scaled `e^{−|x|} I₀(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 30.0 {
        // Power series; every term is positive so there is no cancellation.
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Hankel expansion; at x > 30 its smallest term is far below f64 resolution.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
            if next < 1e-17 * sum || next > term {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

// 1/Γ(1+z) = Σ C[k] z^k.
const RGAMMA1P: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary quantities for |μ| ≤ ½:
/// (γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1−μ)) with γ₁ = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ),
/// γ₂ = (1/Γ(1−μ) + 1/Γ(1+μ))/2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let m2 = mu * mu;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut p = 1.0;
    for k in (0..RGAMMA1P.len()).step_by(2) {
        even += RGAMMA1P[k] * p;
        if k + 1 < RGAMMA1P.len() {
            odd += RGAMMA1P[k + 1] * p;
        }
        p *= m2;
    }
    // 1/Γ(1±μ) = even ± μ·odd
    (-odd, even, even + mu * odd, even - mu * odd)
}

/// Exponentially scaled `e^{x} K_ν(x)` for real ν and x > 0.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(Error::invalid(format!("bessel_k_scaled: need x > 0, got {x}")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let eps = 1e-16;
    let (mut kmu, mut k1);
    if x < 2.0 {
        // Temme's series for K_μ and K_{μ+1}.
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < eps { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < eps { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut i = 1.0;
        loop {
            ff = (i * ff + p + q) / (i * i - mu2);
            c *= dd / i;
            p /= i - mu;
            q /= i + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - i * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * eps {
                break;
            }
            i += 1.0;
            if i > 500.0 {
                return Err(Error::Numerical("bessel_k_scaled: series did not converge".into()));
            }
        }
        let scale = x.exp();
        kmu = sum * scale;
        k1 = sum1 * xi2 * scale;
    } else {
        // Steed's continued fraction (CF2).
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut i = 2.0;
        loop {
            a -= 2.0 * (i - 1.0);
            c = -a * c / i;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < eps {
                break;
            }
            i += 1.0;
            if i > 100_000.0 {
                return Err(Error::Numerical("bessel_k_scaled: continued fraction did not converge".into()));
            }
        }
        h *= a1;
        kmu = (PI / (2.0 * x)).sqrt() / s;
        k1 = kmu * (mu + x + 0.5 - h) * xi;
    }
    // Forward recurrence is stable for K.
    let mut order = mu;
    for _ in 0..(nl as u64) {
        let next = (order + 1.0) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
        order += 1.0;
    }
    Ok(kmu)
}

/// `ln K_ν(x)`, finite where `K_ν` itself would underflow or overflow.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)?.ln() - x)
}

/// Regularized hypergeometric `₁F̃₂(a; b₁, b₂; z) = Σ (a)_k z^k / (Γ(b₁+k) Γ(b₂+k) k!)`.
///
/// Also returns Σ|term|, which bounds the rounding error of the sum.
pub fn reg_hyp_1f2_with_mag(a: f64, b1: f64, b2: f64, z: f64) -> Result<(f64, f64)> {
    const CAP: usize = 10_000;
    let pole = |b: f64| b <= 0.0 && b == b.floor();
    let direct = pole(b1) || pole(b2);
    let mut term = rgamma(b1) * rgamma(b2);
    let mut sum = term;
    let mut mag = term.abs();
    for k in 0..CAP {
        let kf = k as f64;
        if direct {
            let kk = kf + 1.0;
            let poch = ln_gamma_ratio(a, kk);
            term = match poch {
                Some((lp, sign)) => {
                    let r = rgamma(b1 + kk) * rgamma(b2 + kk);
                    if r == 0.0 || z == 0.0 {
                        0.0
                    } else {
                        sign * r * (lp + kk * z.abs().ln() - ln_gamma(kk + 1.0)).exp()
                            * if z < 0.0 && (kk as u64) % 2 == 1 { -1.0 } else { 1.0 }
                    }
                }
                None => 0.0,
            };
        } else {
            term *= (a + kf) * z / ((kf + 1.0) * (b1 + kf) * (b2 + kf));
        }
        sum += term;
        mag += term.abs();
        let past_peak = kf > 2.0 && (kf + 1.0) * (b1 + kf).abs() * (b2 + kf).abs() > 2.0 * ((a + kf).abs() * z.abs());
        if past_peak && term.abs() <= 1e-16 * sum.abs().max(f64::MIN_POSITIVE) {
            return Ok((sum, mag));
        }
        if term == 0.0 && past_peak && (!direct || (kf > -b1 && kf > -b2)) {
            return Ok((sum, mag));
        }
        if !sum.is_finite() {
            return Err(Error::Numerical(format!("₁F̃₂ overflow at z = {z}")));
        }
    }
    Err(Error::Numerical(format!("₁F̃₂ series exceeded {CAP} terms at z = {z}")))
}

pub fn reg_hyp_1f2(a: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    Ok(reg_hyp_1f2_with_mag(a, b1, b2, z)?.0)
}

/// `(ln|(a)_k|, sign)` of the Pochhammer symbol, `None` when it vanishes.
fn ln_gamma_ratio(a: f64, k: f64) -> Option<(f64, f64)> {
    let mut lp = 0.0;
    let mut sign = 1.0;
    let mut i = 0.0;
    while i < k {
        let f = a + i;
        if f == 0.0 {
            return None;
        }
        if f < 0.0 {
            sign = -sign;
        }
        lp += f.abs().ln();
        i += 1.0;
    }
    Some((lp, sign))
}
