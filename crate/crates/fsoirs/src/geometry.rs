//! Planar coordinate transforms and closed-form symmetric 2×2 eigendecomposition.
//!
//! `rot(τ)` is the counter-clockwise rotation `[[cos τ, −sin τ], [sin τ, cos τ]]`,
//! `squeeze(τ)` is the oblique-projection matrix `diag(cos τ, 1)`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// z-component of the planar cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v.scale(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn diag(p: f64, q: f64) -> Self {
        Self::new(p, 0.0, 0.0, q)
    }

    /// Matrix whose columns are `u` and `v`.
    pub fn from_cols(u: Vec2, v: Vec2) -> Self {
        Self::new(u.x, v.x, u.y, v.y)
    }

    /// Matrix whose rows are `u` and `v`.
    pub fn from_rows(u: Vec2, v: Vec2) -> Self {
        Self::new(u.x, u.y, v.x, v.y)
    }

    pub fn transpose(self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn det(self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(self) -> Result<Self> {
        let det = self.det();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if det == 0.0 || !det.is_finite() || det.abs() < 1e-300 * scale * scale {
            return Err(Error::Singular("2x2 matrix is not invertible"));
        }
        Ok(Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn max_abs(self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quad_form(self, v: Vec2) -> f64 {
        v.dot(self.mul_vec(v))
    }

    pub fn col(self, j: usize) -> Vec2 {
        match j {
            0 => Vec2::new(self.a, self.c),
            _ => Vec2::new(self.b, self.d),
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

/// Elevation/azimuth pair. Elevation is measured from the surface normal.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnglePair {
    pub theta: f64,
    pub phi: f64,
}

impl AnglePair {
    pub const fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn validate(self, what: &str) -> Result<Self> {
        use std::f64::consts::{FRAC_PI_2, PI};
        if !(self.theta.is_finite() && self.phi.is_finite()) {
            return Err(Error::invalid(format!("{what}: angles must be finite")));
        }
        if !(0.0..FRAC_PI_2).contains(&self.theta) {
            return Err(Error::invalid(format!(
                "{what}: elevation {} rad outside [0, π/2)",
                self.theta
            )));
        }
        if !(self.phi > -PI && self.phi <= PI) {
            return Err(Error::invalid(format!(
                "{what}: azimuth {} rad outside (−π, π]",
                self.phi
            )));
        }
        Ok(self)
    }
}

/// `(sin τ, cos τ)`, exact at multiples of π/2 so that azimuths such as `π`
/// (stored as the nearest double) give exactly `(0, −1)`.
pub fn sin_cos_exact(tau: f64) -> (f64, f64) {
    let q = tau / std::f64::consts::FRAC_PI_2;
    let n = q.round();
    if (q - n).abs() <= 4.0 * f64::EPSILON * n.abs().max(1.0) {
        return match (n as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        };
    }
    tau.sin_cos()
}

pub fn rot(tau: f64) -> Mat2 {
    let (s, c) = sin_cos_exact(tau);
    Mat2::new(c, -s, s, c)
}

pub fn squeeze(tau: f64) -> Mat2 {
    Mat2::diag(tau.cos(), 1.0)
}

/// `squeeze(τ)⁻¹`; fails where the projection collapses (cos τ = 0).
pub fn squeeze_inv(tau: f64) -> Result<Mat2> {
    let c = tau.cos();
    if c.abs() < 1e-15 {
        return Err(Error::Singular("squeeze matrix at grazing angle"));
    }
    Ok(Mat2::diag(1.0 / c, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEig {
    pub l1: f64,
    pub l2: f64,
    pub v1: Vec2,
    pub v2: Vec2,
}

impl SymEig {
    /// Columns `[v1 v2]`.
    pub fn vectors(&self) -> Mat2 {
        Mat2::from_cols(self.v1, self.v2)
    }

    pub fn reconstruct(&self) -> Mat2 {
        let v = self.vectors();
        v * Mat2::diag(self.l1, self.l2) * v.transpose()
    }
}

/// Closed-form eigendecomposition of a symmetric 2×2 matrix.
///
/// Eigenvalues come out as `l1 ≥ l2`; the basis is right-handed and falls back
/// to the identity when the eigenvalues coincide.
pub fn eig_sym_2x2(m: Mat2) -> Result<SymEig> {
    let scale = m.max_abs();
    if !(m.a.is_finite() && m.b.is_finite() && m.c.is_finite() && m.d.is_finite()) {
        return Err(Error::invalid("eig_sym_2x2: non-finite entry"));
    }
    if (m.b - m.c).abs() > 1e-12 * scale {
        return Err(Error::invalid("eig_sym_2x2: matrix is not symmetric"));
    }
    let b = 0.5 * (m.b + m.c);
    let mean = 0.5 * (m.a + m.d);
    let half_diff = 0.5 * (m.a - m.d);
    let r = half_diff.hypot(b);
    if r <= 1e-15 * scale || r == 0.0 {
        return Ok(SymEig {
            l1: mean,
            l2: mean,
            v1: Vec2::new(1.0, 0.0),
            v2: Vec2::new(0.0, 1.0),
        });
    }
    // Half-angle form: the leading eigenvector sits at angle ½·atan2(2b, a−d).
    let ang = 0.5 * b.atan2(half_diff);
    let (s, c) = ang.sin_cos();
    let v1 = Vec2::new(c, s);
    Ok(SymEig {
        l1: mean + r,
        l2: mean - r,
        v1,
        v2: Vec2::new(-s, c),
    })
}

/// Solve `M x = rhs`; `None` when the system is numerically singular.
pub fn solve2(m: Mat2, rhs: Vec2, tol: f64) -> Option<Vec2> {
    let det = m.det();
    if det.abs() < tol {
        return None;
    }
    Some(Vec2::new(
        (rhs.x * m.d - m.b * rhs.y) / det,
        (m.a * rhs.y - rhs.x * m.c) / det,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rotation_basics() {
        assert_eq!(rot(0.0), Mat2::IDENTITY);
        let r = rot(FRAC_PI_2);
        assert_abs_diff_eq!(r.a, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(r.b, -1.0);
        assert_abs_diff_eq!(r.c, 1.0);
        let p = rot(0.7) * rot(-0.7);
        assert_abs_diff_eq!((p - Mat2::IDENTITY).max_abs(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn squeeze_basics() {
        let s = squeeze(PI / 3.0);
        assert_abs_diff_eq!(s.a, 0.5, epsilon = 1e-15);
        assert_eq!(s.d, 1.0);
        let p = squeeze_inv(0.4).unwrap() * squeeze(0.4);
        assert_abs_diff_eq!((p - Mat2::IDENTITY).max_abs(), 0.0, epsilon = 1e-15);
        assert!(squeeze_inv(FRAC_PI_2).is_err());
    }

    #[test]
    fn eig_examples() {
        let e = eig_sym_2x2(Mat2::diag(3.0, 1.0)).unwrap();
        assert_eq!((e.l1, e.l2), (3.0, 1.0));
        assert_abs_diff_eq!(e.v1.x, 1.0);
        let e = eig_sym_2x2(Mat2::new(2.0, 1.0, 1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(e.l1, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.l2, 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(e.v1.x, h, epsilon = 1e-15);
        assert_abs_diff_eq!(e.v1.y, h, epsilon = 1e-15);
        let e = eig_sym_2x2(Mat2::diag(1.0, 3.0)).unwrap();
        assert_eq!(e.l1, 3.0);
        assert!(Mat2::from_cols(e.v1, e.v2).det() > 0.0);
        let e = eig_sym_2x2(Mat2::diag(2.0, 2.0)).unwrap();
        assert_eq!(e.v1, Vec2::new(1.0, 0.0));
        assert!(eig_sym_2x2(Mat2::new(1.0, 0.5, 0.2, 1.0)).is_err());
    }

    #[test]
    fn angle_validation() {
        assert!(AnglePair::new(0.3, PI).validate("x").is_ok());
        assert!(AnglePair::new(FRAC_PI_2, 0.0).validate("x").is_err());
        assert!(AnglePair::new(0.1, -PI).validate("x").is_err());
    }
}
