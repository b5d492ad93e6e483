use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::param::C64;

/// Relative threshold below which a coefficient is treated as a rounding zero.
pub const COEFF_EPS: f64 = 1e-14;

/// A polynomial in the commuting expression variables (u, v) with complex
/// coefficients, stored sparsely with exponent pairs sorted lexicographically.
/// Canonical form keeps no zero coefficients.
#[derive(Clone, PartialEq, Default)]
pub struct WeylPolynomial {
    coeffs: BTreeMap<(u32, u32), C64>,
}

impl fmt::Debug for WeylPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&(i, j), c)| format!("({:.6e}{:+.6e}i) u^{} v^{}", c.re, c.im, i, j))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl WeylPolynomial {
    pub fn zero() -> Self {
        WeylPolynomial { coeffs: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, c);
        p
    }

    /// c * u^i * v^j
    pub fn term(i: u32, j: u32, c: C64) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn u() -> Self {
        Self::term(1, 0, C64::new(1.0, 0.0))
    }

    pub fn v() -> Self {
        Self::term(0, 1, C64::new(1.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> C64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &C64)> {
        self.coeffs.iter()
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: C64) {
        let e = self.coeffs.entry((i, j)).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if e.norm() == 0.0 {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop coefficients that are zero relative to the polynomial scale.
    pub fn canonicalize(&mut self) {
        let scale = self.max_coeff();
        if scale == 0.0 {
            self.coeffs.clear();
            return;
        }
        let cut = COEFF_EPS * scale;
        self.coeffs.retain(|_, c| c.norm() > cut);
    }

    pub fn canonicalized(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (&(i, j), &c) in other.coeffs.iter() {
            r.add_term(i, j, c);
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (&(i, j), &c) in other.coeffs.iter() {
            r.add_term(i, j, -c);
        }
        r
    }

    pub fn scaled(&self, s: C64) -> Self {
        if s.norm() == 0.0 {
            return Self::zero();
        }
        let mut r = self.clone();
        for c in r.coeffs.values_mut() {
            *c *= s;
        }
        r
    }

    /// Commutative (pointwise) product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut r = Self::zero();
        for (&(i1, j1), &c1) in self.coeffs.iter() {
            for (&(i2, j2), &c2) in other.coeffs.iter() {
                r.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        r
    }

    /// d^a/du^a d^b/dv^b, exact.
    pub fn deriv(&self, a: u32, b: u32) -> Self {
        let mut r = Self::zero();
        for (&(i, j), &c) in self.coeffs.iter() {
            if i < a || j < b {
                continue;
            }
            let mut f = 1.0;
            for k in 0..a {
                f *= (i - k) as f64;
            }
            for k in 0..b {
                f *= (j - k) as f64;
            }
            r.add_term(i - a, j - b, c * f);
        }
        r
    }

    pub fn eval(&self, u: C64, v: C64) -> C64 {
        // Horner over the sparse map would need dense layout; direct powers
        // are fine at the degrees used here.
        let mut upow: Vec<C64> = vec![C64::new(1.0, 0.0)];
        let mut vpow: Vec<C64> = vec![C64::new(1.0, 0.0)];
        let (du, dv) = self
            .coeffs
            .keys()
            .fold((0u32, 0u32), |(a, b), &(i, j)| (a.max(i), b.max(j)));
        for k in 1..=du as usize {
            let last = upow[k - 1];
            upow.push(last * u);
        }
        for k in 1..=dv as usize {
            let last = vpow[k - 1];
            vpow.push(last * v);
        }
        let mut acc = C64::new(0.0, 0.0);
        for (&(i, j), &c) in self.coeffs.iter() {
            acc += c * upow[i as usize] * vpow[j as usize];
        }
        acc
    }

    /// Highest exponent pair in (total degree, lexicographic) order.
    pub fn leading_term(&self) -> Option<((u32, u32), C64)> {
        self.coeffs
            .iter()
            .max_by_key(|(&(i, j), _)| (i + j, i))
            .map(|(&k, &c)| (k, c))
    }

    /// Max norm of the coefficient-wise difference.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for (&(i, j), &c) in self.coeffs.iter() {
            d = d.max((c - other.coeff(i, j)).norm());
        }
        for (&(i, j), &c) in other.coeffs.iter() {
            d = d.max((c - self.coeff(i, j)).norm());
        }
        d
    }
}

/// Serialized as an array of {i, j, re, im}, sorted by exponents.
#[derive(Serialize, Deserialize)]
struct TermRecord {
    i: u32,
    j: u32,
    re: f64,
    im: f64,
}

impl Serialize for WeylPolynomial {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.coeffs.len()))?;
        for (&(i, j), c) in self.coeffs.iter() {
            seq.serialize_element(&TermRecord { i, j, re: c.re, im: c.im })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for WeylPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let terms: Vec<TermRecord> = Deserialize::deserialize(de)?;
        let mut p = WeylPolynomial::zero();
        for t in terms {
            p.add_term(t.i, t.j, Complex64::new(t.re, t.im));
        }
        Ok(p)
    }
}
