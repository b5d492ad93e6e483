use num_complex::Complex64;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, StarError};

pub type C64 = Complex64;

/// 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        Mat2::new(o, z, z, o)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut r = *self;
        for row in r.m.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        r
    }

    pub fn add(&self, other: &Mat2) -> Self {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] += other.m[i][j];
            }
        }
        r
    }

    pub fn sub(&self, other: &Mat2) -> Self {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] -= other.m[i][j];
            }
        }
        r
    }

    pub fn mul(&self, other: &Mat2) -> Self {
        let mut r = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                r.m[i][j] = self.m[i][0] * other.m[0][j] + self.m[i][1] * other.m[1][j];
            }
        }
        r
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inv(&self) -> Result<Mat2> {
        let d = self.det();
        if d.norm() < 1e-300 {
            return Err(StarError::DegenerateProduct { det_abs: d.norm() });
        }
        let inv_d = C64::new(1.0, 0.0) / d;
        Ok(Mat2::new(
            self.m[1][1] * inv_d,
            -self.m[0][1] * inv_d,
            -self.m[1][0] * inv_d,
            self.m[0][0] * inv_d,
        ))
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: (C64, C64)) -> (C64, C64) {
        (
            self.m[0][0] * v.0 + self.m[0][1] * v.1,
            self.m[1][0] * v.0 + self.m[1][1] * v.1,
        )
    }
}

fn c_to_pair<S: Serializer>(c: &C64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    (c.re, c.im).serialize(ser)
}

fn pair_to_c<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<C64, D::Error> {
    let (re, im): (f64, f64) = Deserialize::deserialize(de)?;
    Ok(C64::new(re, im))
}

/// The expression parameter: a complex symmetric matrix
/// K = [[delta, c], [c, delta_prime]] together with a positive hbar.
///
/// K selects the ordering under which algebra elements are written as
/// ordinary functions; Lambda = K + J with J the standard skew matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpressionParameter {
    #[serde(serialize_with = "c_to_pair", deserialize_with = "pair_to_c")]
    pub delta: C64,
    #[serde(serialize_with = "c_to_pair", deserialize_with = "pair_to_c")]
    pub c: C64,
    #[serde(serialize_with = "c_to_pair", deserialize_with = "pair_to_c")]
    pub delta_prime: C64,
    pub hbar: f64,
}

impl ExpressionParameter {
    pub fn new(delta: C64, c: C64, delta_prime: C64, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(StarError::Invalid(format!("hbar must be positive, got {hbar}")));
        }
        Ok(ExpressionParameter { delta, c, delta_prime, hbar })
    }

    pub fn from_reals(delta: f64, c: f64, delta_prime: f64) -> Self {
        ExpressionParameter {
            delta: C64::new(delta, 0.0),
            c: C64::new(c, 0.0),
            delta_prime: C64::new(delta_prime, 0.0),
            hbar: 1.0,
        }
    }

    /// Weyl ordering, K = 0.
    pub fn weyl() -> Self {
        Self::from_reals(0.0, 0.0, 0.0)
    }

    /// Unit ordering, K = I.
    pub fn unit() -> Self {
        Self::from_reals(1.0, 0.0, 1.0)
    }

    pub fn i_hbar(&self) -> C64 {
        C64::new(0.0, self.hbar)
    }

    /// Fixed square root of i*hbar (principal branch); every normalization
    /// involving sqrt((i hbar)^n) is built from powers of this value so the
    /// matrix-element laws hold exactly.
    pub fn sqrt_i_hbar(&self) -> C64 {
        self.i_hbar().sqrt()
    }

    /// K as a matrix.
    pub fn k_matrix(&self) -> Mat2 {
        Mat2::new(self.delta, self.c, self.c, self.delta_prime)
    }

    /// Lambda = K + J = [[delta, c-1], [c+1, delta_prime]].
    pub fn lambda(&self) -> Mat2 {
        let one = C64::new(1.0, 0.0);
        Mat2::new(self.delta, self.c - one, self.c + one, self.delta_prime)
    }

    /// Principal square root of delta * delta_prime, cached branch choice.
    pub fn rho(&self) -> C64 {
        (self.delta * self.delta_prime).sqrt()
    }

    /// (1+c)^2 - delta*delta_prime; vanishes on the separating boundary
    /// where the vacuum degenerates.
    pub fn kappa_plus(&self) -> C64 {
        let one = C64::new(1.0, 0.0);
        (one + self.c) * (one + self.c) - self.delta * self.delta_prime
    }

    /// (1-c)^2 - delta*delta_prime; vanishes where the bar-vacuum degenerates.
    pub fn kappa_minus(&self) -> C64 {
        let one = C64::new(1.0, 0.0);
        (one - self.c) * (one - self.c) - self.delta * self.delta_prime
    }

    pub fn has_complex_entries(&self) -> bool {
        self.delta.im != 0.0 || self.c.im != 0.0 || self.delta_prime.im != 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_layout() {
        let k = ExpressionParameter::from_reals(0.5, 2.0, 0.25);
        let l = k.lambda();
        assert_eq!(l.m[0][0], C64::new(0.5, 0.0));
        assert_eq!(l.m[0][1], C64::new(1.0, 0.0));
        assert_eq!(l.m[1][0], C64::new(3.0, 0.0));
        assert_eq!(l.m[1][1], C64::new(0.25, 0.0));
    }

    #[test]
    fn mat2_inverse() {
        let a = Mat2::new(
            C64::new(1.0, 1.0),
            C64::new(0.5, 0.0),
            C64::new(-0.25, 0.5),
            C64::new(2.0, -1.0),
        );
        let p = a.mul(&a.inv().unwrap());
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p.m[i][j] - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hbar_must_be_positive() {
        assert!(ExpressionParameter::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let k = ExpressionParameter::new(C64::new(0.5, 0.1), C64::new(2.0, 0.0), C64::new(0.25, -0.3), 2.0).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        let back: ExpressionParameter = serde_json::from_str(&s).unwrap();
        assert_eq!(k, back);
    }
}
