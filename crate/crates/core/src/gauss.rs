//! The closed class C[u,v] e^{Q(u,v)}: Gaussian elements, their exact star
//! products, intertwiner transport, and the closed-form star-exponentials of
//! the quadratic generator H = (1/(i hbar)) u o v.


use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cont::continue_sqrt;
use crate::error::{Result, StarError};
use crate::param::{C64, ExpressionParameter, Mat2};
use crate::poly::WeylPolynomial;


fn c_pair<S: Serializer>(c: &C64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    (c.re, c.im).serialize(ser)
}

fn pair_c<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<C64, D::Error> {
    let (re, im): (f64, f64) = Deserialize::deserialize(de)?;
    Ok(C64::new(re, im))
}

/// Coefficients of the exponent (1/(i hbar)) (qu u^2 + qv v^2 + 2 quv u v).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Quad {
    #[serde(serialize_with = "c_pair", deserialize_with = "pair_c")]
    pub qu: C64,
    #[serde(serialize_with = "c_pair", deserialize_with = "pair_c")]
    pub qv: C64,
    #[serde(serialize_with = "c_pair", deserialize_with = "pair_c")]
    pub quv: C64,
}

impl Quad {
    pub fn zero() -> Self {
        Quad::default()
    }

    pub fn is_zero(&self) -> bool {
        self.qu.norm() == 0.0 && self.qv.norm() == 0.0 && self.quv.norm() == 0.0
    }

    pub fn norm(&self) -> f64 {
        self.qu.norm().max(self.qv.norm()).max(self.quv.norm())
    }

    pub fn distance(&self, other: &Quad) -> f64 {
        (self.qu - other.qu)
            .norm()
            .max((self.qv - other.qv).norm())
            .max((self.quv - other.quv).norm())
    }

    /// Matrix F with exponent = (u,v) F (u,v)^T, i.e. F = (1/(i hbar)) [[qu, quv], [quv, qv]].
    pub fn f_matrix(&self, i_hbar: C64) -> Mat2 {
        let inv = C64::new(1.0, 0.0) / i_hbar;
        Mat2::new(self.qu * inv, self.quv * inv, self.quv * inv, self.qv * inv)
    }

    pub fn from_f_matrix(f: &Mat2, i_hbar: C64) -> Self {
        Quad {
            qu: f.m[0][0] * i_hbar,
            qv: f.m[1][1] * i_hbar,
            quv: (f.m[0][1] + f.m[1][0]) * 0.5 * i_hbar,
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Quad { qu: self.qu * s, qv: self.qv * s, quv: self.quv * s }
    }
}

/// amplitude * prefactor(u,v) * exp((1/(i hbar))(qu u^2 + qv v^2 + 2 quv uv)).
///
/// amplitude = 0 is the zero element regardless of the other fields.
/// `conventional_zero` marks zeros that were assigned by the associativity
/// convention for divergent vacuum products rather than computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussElement {
    #[serde(serialize_with = "c_pair", deserialize_with = "pair_c")]
    pub amplitude: C64,
    pub quad: Quad,
    pub prefactor: WeylPolynomial,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub conventional_zero: bool,
}

impl GaussElement {
    pub fn zero() -> Self {
        GaussElement {
            amplitude: C64::new(0.0, 0.0),
            quad: Quad::zero(),
            prefactor: WeylPolynomial::one(),
            conventional_zero: false,
        }
    }

    pub fn conventional_zero() -> Self {
        let mut z = Self::zero();
        z.conventional_zero = true;
        z
    }

    pub fn one() -> Self {
        Self::pure(C64::new(1.0, 0.0), Quad::zero())
    }

    pub fn pure(amplitude: C64, quad: Quad) -> Self {
        GaussElement { amplitude, quad, prefactor: WeylPolynomial::one(), conventional_zero: false }
    }

    pub fn with_prefactor(amplitude: C64, quad: Quad, prefactor: WeylPolynomial) -> Self {
        GaussElement { amplitude, quad, prefactor, conventional_zero: false }.canonicalized()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude.norm() == 0.0 || self.prefactor.is_zero()
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut r = self.clone();
        r.amplitude *= s;
        r
    }

    /// Fold the prefactor scale into the amplitude so prefactor coefficients
    /// stay O(1).
    pub fn canonicalized(mut self) -> Self {
        if self.amplitude.norm() == 0.0 || self.prefactor.is_zero() {
            return GaussElement { conventional_zero: self.conventional_zero, ..Self::zero() };
        }
        self.prefactor.canonicalize();
        let m = self.prefactor.max_coeff();
        if m > 0.0 && (m < 0.5 || m > 2.0) {
            let s = C64::new(m, 0.0);
            self.prefactor = self.prefactor.scaled(C64::new(1.0 / m, 0.0));
            self.amplitude *= s;
        }
        self
    }

    /// Add another element with the same quadratic form.
    pub fn add_same_quad(&self, other: &GaussElement) -> GaussElement {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        debug_assert!(self.quad.distance(&other.quad) <= 1e-9 * (1.0 + self.quad.norm()));
        let p = self
            .prefactor
            .scaled(self.amplitude)
            .add(&other.prefactor.scaled(other.amplitude));
        GaussElement::with_prefactor(C64::new(1.0, 0.0), self.quad, p)
    }

    /// Pointwise value at (u, v).
    pub fn eval(&self, u: C64, v: C64, hbar: f64) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let ih = C64::new(0.0, hbar);
        let q = (self.quad.qu * u * u + self.quad.qv * v * v + self.quad.quv * u * v * 2.0) / ih;
        self.amplitude * self.prefactor.eval(u, v) * q.exp()
    }
}

pub(crate) enum Side {
    Left,
    Right,
}

#[derive(Clone)]
pub(crate) enum Gen {
    U,
    V,
}

/// Star product of a Gaussian element with a single generator on one side.
/// Exact: the bidifferential series has a single correction term.
pub(crate) fn mul_gen(g: &GaussElement, gen: Gen, side: Side, k: &ExpressionParameter) -> GaussElement {
    if g.is_zero() {
        return GaussElement::zero();
    }
    let lam = k.lambda();
    let ih2 = k.i_hbar() * 0.5;
    let (ca, cb, xpoly) = match (&side, &gen) {
        (Side::Right, Gen::U) => (lam.m[0][0], lam.m[1][0], WeylPolynomial::u()),
        (Side::Right, Gen::V) => (lam.m[0][1], lam.m[1][1], WeylPolynomial::v()),
        (Side::Left, Gen::U) => (lam.m[0][0], lam.m[0][1], WeylPolynomial::u()),
        (Side::Left, Gen::V) => (lam.m[1][0], lam.m[1][1], WeylPolynomial::v()),
    };
    let p = &g.prefactor;
    // (d_u + Q_u) P and (d_v + Q_v) P with (i hbar/2) folded in:
    // (i hbar/2) Q_u = qu u + quv v, (i hbar/2) Q_v = quv u + qv v.
    let qu_lin = WeylPolynomial::term(1, 0, g.quad.qu).add(&WeylPolynomial::term(0, 1, g.quad.quv));
    let qv_lin = WeylPolynomial::term(1, 0, g.quad.quv).add(&WeylPolynomial::term(0, 1, g.quad.qv));
    let du = p.deriv(1, 0).scaled(ih2).add(&p.mul(&qu_lin));
    let dv = p.deriv(0, 1).scaled(ih2).add(&p.mul(&qv_lin));
    let pref = p.mul(&xpoly).add(&du.scaled(ca)).add(&dv.scaled(cb));
    GaussElement::with_prefactor(g.amplitude, g.quad, pref)
}

/// Table R_{ab} = ((d_u + Q_u)^a (d_v + Q_v)^b) P for a Gaussian P e^Q, used
/// by the terminating star series against polynomials.
fn shifted_deriv_table(g: &GaussElement, amax: u32, k: &ExpressionParameter) -> Vec<Vec<WeylPolynomial>> {
    let inv_ih = C64::new(1.0, 0.0) / k.i_hbar();
    let qu_lin = WeylPolynomial::term(1, 0, g.quad.qu * inv_ih * 2.0)
        .add(&WeylPolynomial::term(0, 1, g.quad.quv * inv_ih * 2.0));
    let qv_lin = WeylPolynomial::term(1, 0, g.quad.quv * inv_ih * 2.0)
        .add(&WeylPolynomial::term(0, 1, g.quad.qv * inv_ih * 2.0));
    let mut rows: Vec<Vec<WeylPolynomial>> = Vec::new();
    for a in 0..=amax {
        let mut row: Vec<WeylPolynomial> = Vec::new();
        for b in 0..=(amax - a) {
            let p = if a == 0 && b == 0 {
                g.prefactor.clone()
            } else if b == 0 {
                let prev = &rows[(a - 1) as usize][0];
                prev.deriv(1, 0).add(&prev.mul(&qu_lin))
            } else {
                let prev = &row[(b - 1) as usize];
                prev.deriv(0, 1).add(&prev.mul(&qv_lin))
            };
            row.push(p);
        }
        rows.push(row);
    }
    rows
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// f * (P e^Q): exact, the series terminates at deg f.
pub fn poly_star_gauss(f: &WeylPolynomial, g: &GaussElement, k: &ExpressionParameter) -> GaussElement {
    if f.is_zero() || g.is_zero() {
        return GaussElement::zero();
    }
    let kmax = f.degree() as usize;
    let lam = k.lambda();
    let ih2 = k.i_hbar() * 0.5;
    let r = shifted_deriv_table(g, kmax as u32, k);
    let mut acc = WeylPolynomial::zero();
    for m11 in 0..=kmax {
        for m12 in 0..=(kmax - m11) {
            for m21 in 0..=(kmax - m11 - m12) {
                for m22 in 0..=(kmax - m11 - m12 - m21) {
                    let kk = m11 + m12 + m21 + m22;
                    let fd = f.deriv((m11 + m12) as u32, (m21 + m22) as u32);
                    if fd.is_zero() {
                        continue;
                    }
                    let c = ih2.powu(kk as u32)
                        / (factorial(m11) * factorial(m12) * factorial(m21) * factorial(m22))
                        * lam.m[0][0].powu(m11 as u32)
                        * lam.m[0][1].powu(m12 as u32)
                        * lam.m[1][0].powu(m21 as u32)
                        * lam.m[1][1].powu(m22 as u32);
                    if c.norm() == 0.0 {
                        continue;
                    }
                    acc = acc.add(&fd.mul(&r[m11 + m21][m12 + m22]).scaled(c));
                }
            }
        }
    }
    GaussElement::with_prefactor(g.amplitude, g.quad, acc)
}

/// (P e^Q) * f: exact, the series terminates at deg f.
pub fn gauss_star_poly(g: &GaussElement, f: &WeylPolynomial, k: &ExpressionParameter) -> GaussElement {
    if f.is_zero() || g.is_zero() {
        return GaussElement::zero();
    }
    let kmax = f.degree() as usize;
    let lam = k.lambda();
    let ih2 = k.i_hbar() * 0.5;
    let r = shifted_deriv_table(g, kmax as u32, k);
    let mut acc = WeylPolynomial::zero();
    for m11 in 0..=kmax {
        for m12 in 0..=(kmax - m11) {
            for m21 in 0..=(kmax - m11 - m12) {
                for m22 in 0..=(kmax - m11 - m12 - m21) {
                    let kk = m11 + m12 + m21 + m22;
                    let fd = f.deriv((m11 + m21) as u32, (m12 + m22) as u32);
                    if fd.is_zero() {
                        continue;
                    }
                    let c = ih2.powu(kk as u32)
                        / (factorial(m11) * factorial(m12) * factorial(m21) * factorial(m22))
                        * lam.m[0][0].powu(m11 as u32)
                        * lam.m[0][1].powu(m12 as u32)
                        * lam.m[1][0].powu(m21 as u32)
                        * lam.m[1][1].powu(m22 as u32);
                    if c.norm() == 0.0 {
                        continue;
                    }
                    acc = acc.add(&r[m11 + m12][m21 + m22].mul(&fd).scaled(c));
                }
            }
        }
    }
    GaussElement::with_prefactor(g.amplitude, g.quad, acc)
}

const DET_FLOOR: f64 = 1e-12;

/// Star product of two pure Gaussian exponents with linear source terms:
/// e^{u^T F u + j.u} * e^{u^T G u + j'.u}. Returns the amplitude factor
/// det(W)^{-1/2} (branch anchored at the unit by a linear homotopy), the
/// composed exponent, and the source-coupling data
///   exp(u^T A j + u^T B j' + j^T R1 j + j'^T R2 j' + j^T R3 j')
/// used to reconstruct polynomial prefactors by differentiation at j = 0.
struct PureStar {
    amp: C64,
    quad: Quad,
    a_mat: Mat2,
    b_mat: Mat2,
    r1: Mat2,
    r2: Mat2,
    r3: Mat2,
}

fn pure_star(a: &Quad, b: &Quad, k: &ExpressionParameter) -> Result<PureStar> {
    let ih = k.i_hbar();
    let f = a.f_matrix(ih);
    let g = b.f_matrix(ih);
    let m = k.lambda().scale(ih * 0.5);
    let mt = m.transpose();
    let x = g.mul(&mt).mul(&f).mul(&m); // G M^T F M
    let w_of = |s: C64| Mat2::identity().sub(&x.scale(s * 4.0));
    let det = |s: C64| w_of(s).det();
    // det(W(s)) is quadratic in s; the branch is anchored at the unit along
    // the straight homotopy, and when a root of the quadratic sits on the
    // segment the path detours through the upper half plane (the side is a
    // fixed convention, applied only when the straight path degenerates)
    let straight = continue_sqrt(
        &|t| det(C64::new(t, 0.0)),
        C64::new(1.0, 0.0),
        DET_FLOOR,
        0.25,
    );
    let sqrt_w = match straight {
        Ok(v) => v,
        Err(_) => {
            let s_path = |t: f64| C64::new(t, -0.25 * (std::f64::consts::PI * t).sin());
            continue_sqrt(&|t| det(s_path(t)), C64::new(1.0, 0.0), DET_FLOOR, 0.25)
                .map_err(|e| StarError::DegenerateProduct { det_abs: e.abs })?
        }
    };
    let w = w_of(C64::new(1.0, 0.0));
    let w_inv = w.inv().map_err(|_| StarError::DegenerateProduct { det_abs: w.det().norm() })?;
    // C = F + (I + 2 F M) W^{-1} G (I + 2 M^T F)
    let two = C64::new(2.0, 0.0);
    let i2fm = Mat2::identity().add(&f.mul(&m).scale(two));
    let i2mtf = Mat2::identity().add(&mt.mul(&f).scale(two));
    let c = f.add(&i2fm.mul(&w_inv).mul(&g).mul(&i2mtf));
    let a_mat = Mat2::identity().add(&i2fm.mul(&w_inv).mul(&g).mul(&mt).scale(two));
    let b_mat = i2fm.mul(&w_inv);
    let r1 = m.mul(&w_inv).mul(&g).mul(&mt);
    let r2 = mt.mul(&f).mul(&m).mul(&w_inv);
    let r3 = m.mul(&w_inv);
    Ok(PureStar {
        amp: C64::new(1.0, 0.0) / sqrt_w,
        quad: Quad::from_f_matrix(&c, ih),
        a_mat,
        b_mat,
        r1,
        r2,
        r3,
    })
}

/// Coefficients x_{ij} such that `target` equals sum x_{ij} * top(L_{ij}),
/// solved degree block by degree block, subtracting the full L_{ij} each time.
/// `table[i][j]` must have leading total degree i + j.
fn block_expand(
    target: &WeylPolynomial,
    table: &[Vec<GaussElement>],
) -> Result<Vec<((u32, u32), C64)>> {
    let deg = target.degree() as usize;
    let mut rem = target.clone();
    let mut out = Vec::new();
    let scale = target.max_coeff().max(1e-300);
    for d in (0..=deg).rev() {
        // collect the degree-d part of the remainder
        let mut rhs: Vec<C64> = vec![C64::new(0.0, 0.0); d + 1];
        for (&(i, j), &c) in rem.iter() {
            if (i + j) as usize == d {
                rhs[i as usize] = c;
            }
        }
        if rhs.iter().all(|c| c.norm() <= 1e-14 * scale) {
            continue;
        }
        // columns: top-degree coefficients of table[i][d-i]
        let n = d + 1;
        let mut mat: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; n];
        for col in 0..n {
            let entry = &table[col][d - col];
            for (&(i, j), &c) in entry.prefactor.iter() {
                if (i + j) as usize == d {
                    mat[i as usize][col] = c * entry.amplitude;
                }
            }
        }
        let x = solve_dense(&mut mat, &mut rhs.clone())
            .ok_or(StarError::DegenerateProduct { det_abs: 0.0 })?;
        for (col, xc) in x.iter().enumerate() {
            if xc.norm() <= 1e-300 {
                continue;
            }
            let entry = &table[col][d - col];
            rem = rem.sub(&entry.prefactor.scaled(*xc * entry.amplitude));
            out.push(((col as u32, (d - col) as u32), *xc));
        }
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting for small dense systems.
fn solve_dense(mat: &mut [Vec<C64>], rhs: &mut [C64]) -> Option<Vec<C64>> {
    let n = rhs.len();
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, mat[r][col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if piv_abs < 1e-250 {
            return None;
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        let inv = C64::new(1.0, 0.0) / mat[col][col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = mat[r][col] * inv;
            if f.norm() == 0.0 {
                continue;
            }
            for c2 in col..n {
                let sub = mat[col][c2] * f;
                mat[r][c2] -= sub;
            }
            let sub = rhs[col] * f;
            rhs[r] -= sub;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        x[i] = rhs[i] / mat[i][i];
    }
    Some(x)
}

/// Exact star product of two Gaussian elements with polynomial prefactors.
///
/// The pure cores compose in closed form; prefactors enter through linear
/// source terms whose derivatives at zero are generated by a Wick-type
/// recursion, so the only inexactness is floating-point rounding and the
/// branch of det(W)^{-1/2}, tracked continuously from the unit.
pub fn gauss_star(a: &GaussElement, b: &GaussElement, k: &ExpressionParameter) -> Result<GaussElement> {
    if a.is_zero() || b.is_zero() {
        return Ok(GaussElement::zero());
    }
    // polynomial shortcuts: a or b with zero quadratic part
    if a.quad.is_zero() {
        let r = poly_star_gauss(&a.prefactor, b, k);
        return Ok(r.scaled(a.amplitude));
    }
    if b.quad.is_zero() {
        let r = gauss_star_poly(a, &b.prefactor, k);
        return Ok(r.scaled(b.amplitude));
    }
    let ps = pure_star(&a.quad, &b.quad, k)?;
    let amp = a.amplitude * b.amplitude * ps.amp;
    if a.prefactor == WeylPolynomial::one() && b.prefactor == WeylPolynomial::one() {
        return Ok(GaussElement::pure(amp, ps.quad));
    }

    // Wick recursion for T_alpha = (d^alpha e^S)|_{j=j'=0} with
    // S = u^T A j + u^T B j' + j^T R1 j + j'^T R2 j' + j^T R3 j'.
    // Variables: 0,1 = components of j; 2,3 = components of j'.
    let lin: [WeylPolynomial; 4] = [
        WeylPolynomial::term(1, 0, ps.a_mat.m[0][0]).add(&WeylPolynomial::term(0, 1, ps.a_mat.m[1][0])),
        WeylPolynomial::term(1, 0, ps.a_mat.m[0][1]).add(&WeylPolynomial::term(0, 1, ps.a_mat.m[1][1])),
        WeylPolynomial::term(1, 0, ps.b_mat.m[0][0]).add(&WeylPolynomial::term(0, 1, ps.b_mat.m[1][0])),
        WeylPolynomial::term(1, 0, ps.b_mat.m[0][1]).add(&WeylPolynomial::term(0, 1, ps.b_mat.m[1][1])),
    ];
    // s2[mu][nu] = d_nu d_mu S
    let mut s2 = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            s2[i][j] = ps.r1.m[i][j] + ps.r1.m[j][i];
            s2[i + 2][j + 2] = ps.r2.m[i][j] + ps.r2.m[j][i];
            s2[i][j + 2] = ps.r3.m[i][j];
            s2[j + 2][i] = ps.r3.m[i][j];
        }
    }
    let (pa, qa) = max_exponents(&a.prefactor);
    let (pb, qb) = max_exponents(&b.prefactor);
    let dims = [pa as usize + 1, qa as usize + 1, pb as usize + 1, qb as usize + 1];
    let total = dims[0] * dims[1] * dims[2] * dims[3];
    let stride = [dims[1] * dims[2] * dims[3], dims[2] * dims[3], dims[3], 1];
    let mut table: Vec<WeylPolynomial> = Vec::with_capacity(total);
    for flat in 0..total {
        let idx = [
            flat / stride[0],
            (flat / stride[1]) % dims[1],
            (flat / stride[2]) % dims[2],
            flat % dims[3],
        ];
        if idx == [0, 0, 0, 0] {
            table.push(WeylPolynomial::one());
            continue;
        }
        let mu = (0..4).find(|&m| idx[m] > 0).unwrap();
        let mut prev = idx;
        prev[mu] -= 1;
        let prev_flat = prev[0] * stride[0] + prev[1] * stride[1] + prev[2] * stride[2] + prev[3];
        let mut acc = table[prev_flat].mul(&lin[mu]);
        for nu in 0..4 {
            if prev[nu] == 0 || s2[mu][nu].norm() == 0.0 {
                continue;
            }
            let mut pp = prev;
            pp[nu] -= 1;
            let pp_flat = pp[0] * stride[0] + pp[1] * stride[1] + pp[2] * stride[2] + pp[3];
            acc = acc.add(&table[pp_flat].scaled(s2[mu][nu] * prev[nu] as f64));
        }
        table.push(acc);
    }
    let mut pref = WeylPolynomial::zero();
    for (&(i1, j1), &c1) in a.prefactor.iter() {
        for (&(i2, j2), &c2) in b.prefactor.iter() {
            let flat = i1 as usize * stride[0]
                + j1 as usize * stride[1]
                + i2 as usize * stride[2]
                + j2 as usize;
            pref = pref.add(&table[flat].scaled(c1 * c2));
        }
    }
    Ok(GaussElement::with_prefactor(amp, ps.quad, pref))
}

fn max_exponents(p: &WeylPolynomial) -> (u32, u32) {
    p.iter().fold((0, 0), |(a, b), (&(i, j), _)| (a.max(i), b.max(j)))
}

/// The vacuum: the limit of e_*^{t (2/(i hbar)) u*v} as t -> -infinity,
/// annihilated by v* on the left and *u on the right.
pub fn vacuum(k: &ExpressionParameter) -> Result<GaussElement> {
    let kap = k.kappa_plus();
    if kap.norm() <= 1e-12 {
        return Err(StarError::DegenerateK(format!(
            "(1+c)^2 - delta delta' = {kap} (separating boundary)"
        )));
    }
    let amp = C64::new(2.0, 0.0) / kap.sqrt();
    let one = C64::new(1.0, 0.0);
    let quad = Quad {
        qu: k.delta_prime / kap,
        qv: k.delta / kap,
        quv: -(one + k.c) / kap,
    };
    Ok(GaussElement::pure(amp, quad))
}

/// The bar-vacuum: the limit of e_*^{t (2/(i hbar)) v*u} as t -> +infinity,
/// annihilated by u* on the left and *v on the right.
pub fn bar_vacuum(k: &ExpressionParameter) -> Result<GaussElement> {
    let kap = k.kappa_minus();
    if kap.norm() <= 1e-12 {
        return Err(StarError::DegenerateK(format!(
            "(1-c)^2 - delta delta' = {kap}"
        )));
    }
    let amp = C64::new(2.0, 0.0) / kap.sqrt();
    let one = C64::new(1.0, 0.0);
    let quad = Quad {
        qu: k.delta_prime / kap,
        qv: k.delta / kap,
        quv: (one - k.c) / kap,
    };
    Ok(GaussElement::pure(amp, quad))
}

/// Star-exponential e^{alpha z} e_*^{z H}, H = (1/(i hbar)) u o v, evaluated
/// on the principal sheet reached from the origin by the straight segment.
pub fn star_exp_quadratic(z: C64, alpha: C64, k: &ExpressionParameter) -> Result<GaussElement> {
    crate::branch::trace_segment_from_origin(z, alpha, k)
}

/// The polar element: the star-exponential continued to z = pi i from the
/// positive origin along the straight segment.
pub fn polar_element(k: &ExpressionParameter) -> Result<GaussElement> {
    let disc = k.c * k.c - k.delta * k.delta_prime;
    if disc.norm() <= 1e-12 {
        return Err(StarError::DegenerateK(format!("c^2 - delta delta' = {disc}")));
    }
    star_exp_quadratic(C64::new(0.0, std::f64::consts::PI), C64::new(0.0, 0.0), k)
}

/// Parallel transport of a Gaussian element from the K-expression to the
/// K2-expression. Consistent with the polynomial intertwiner; fails with
/// TransportBlowUp when the transported Gaussian degenerates along the
/// linear parameter path.
pub fn intertwine_gauss(
    a: &GaussElement,
    k: &ExpressionParameter,
    k2: &ExpressionParameter,
) -> Result<GaussElement> {
    if a.is_zero() {
        return Ok(GaussElement::zero());
    }
    let ih = k.i_hbar();
    let f = a.quad.f_matrix(ih);
    let dmat = k2.k_matrix().sub(&k.k_matrix());
    let df = dmat.mul(&f);
    let w_of = |s: f64| Mat2::identity().sub(&df.scale(ih * s));
    let sqrt_w = continue_sqrt(&|s| w_of(s).det(), C64::new(1.0, 0.0), DET_FLOOR, 0.25)
        .map_err(|e| StarError::TransportBlowUp(e.abs))?;
    let w_inv = w_of(1.0)
        .inv()
        .map_err(|_| StarError::TransportBlowUp(w_of(1.0).det().norm()))?;
    let f_new = f.mul(&w_inv);
    let pure_out = GaussElement::pure(a.amplitude / sqrt_w, Quad::from_f_matrix(&f_new, ih));
    if a.prefactor == WeylPolynomial::one() {
        return Ok(pure_out);
    }
    // Expand P e^Q over two-sided generator words gl^{*i} * e^Q * gr^{*j};
    // the intertwiner fixes the generators and is a star morphism, so the
    // transported element uses the same words around the transported core.
    // The generator pair is chosen so the word family is nondegenerate
    // (one-sided families collapse on vacuum-type Gaussians).
    let pure_in = GaussElement::pure(C64::new(1.0, 0.0), a.quad);
    let deg = a.prefactor.degree();
    let mut best: Option<(f64, Gen, Gen)> = None;
    for (gl, gr) in [(Gen::U, Gen::V), (Gen::V, Gen::U)] {
        let lw = mul_gen(&pure_in, gl.clone(), Side::Left, k);
        let rw = mul_gen(&pure_in, gr.clone(), Side::Right, k);
        let det = (lw.prefactor.coeff(1, 0) * rw.prefactor.coeff(0, 1)
            - lw.prefactor.coeff(0, 1) * rw.prefactor.coeff(1, 0))
            .norm();
        if best.as_ref().map(|(d, _, _)| det > *d).unwrap_or(true) {
            best = Some((det, gl, gr));
        }
    }
    let (_, gl, gr) = best.unwrap();
    // table[i][j] = gl^{*i} * e^Q * gr^{*j} at K
    let table = bisided_table(&pure_in, &gl, &gr, deg, k);
    let words = block_expand(&a.prefactor, &table)?;
    // reassemble at K2 around the transported core
    let table2 = bisided_table(
        &GaussElement::pure(C64::new(1.0, 0.0), pure_out.quad),
        &gl,
        &gr,
        deg,
        k2,
    );
    let mut acc = GaussElement::pure(C64::new(0.0, 0.0), pure_out.quad);
    for ((i, j), cc) in words.iter() {
        acc = acc.add_same_quad(&table2[*i as usize][*j as usize].scaled(*cc));
    }
    Ok(acc.scaled(pure_out.amplitude).canonicalized())
}

fn bisided_table(
    base: &GaussElement,
    gl: &Gen,
    gr: &Gen,
    deg: u32,
    k: &ExpressionParameter,
) -> Vec<Vec<GaussElement>> {
    let mut table: Vec<Vec<GaussElement>> = Vec::new();
    for i in 0..=deg {
        let head = if i == 0 {
            base.clone()
        } else {
            mul_gen(&table[(i - 1) as usize][0], gl.clone(), Side::Left, k)
        };
        let mut row = vec![head];
        for j in 1..=(deg - i) {
            let prev = row[(j - 1) as usize].clone();
            row.push(mul_gen(&prev, gr.clone(), Side::Right, k));
        }
        table.push(row);
    }
    table
}

/// Pointwise value of a Gaussian element; hbar enters through the exponent
/// normalization.
pub fn evaluate(a: &GaussElement, u: C64, v: C64, hbar: f64) -> C64 {
    a.eval(u, v, hbar)
}

/// Star-exponential words applied to a Gaussian: g -> u^{*n} * g and
/// g -> g * u^{*n} etc., used to build matrix elements.
pub fn left_word(g: &GaussElement, u_pow: u32, v_pow: u32, k: &ExpressionParameter) -> GaussElement {
    // u^{*u_pow} * v^{*v_pow} * g
    let mut cur = g.clone();
    for _ in 0..v_pow {
        cur = mul_gen(&cur, Gen::V, Side::Left, k);
    }
    for _ in 0..u_pow {
        cur = mul_gen(&cur, Gen::U, Side::Left, k);
    }
    cur
}

pub fn right_word(g: &GaussElement, u_pow: u32, v_pow: u32, k: &ExpressionParameter) -> GaussElement {
    // g * u^{*u_pow} * v^{*v_pow}
    let mut cur = g.clone();
    for _ in 0..u_pow {
        cur = mul_gen(&cur, Gen::U, Side::Right, k);
    }
    for _ in 0..v_pow {
        cur = mul_gen(&cur, Gen::V, Side::Right, k);
    }
    cur
}

/// Star product that treats the divergent vacuum/bar-vacuum pairing as the
/// conventional zero required by associativity, instead of failing.
pub fn gauss_star_vacuum_aware(
    a: &GaussElement,
    b: &GaussElement,
    k: &ExpressionParameter,
) -> Result<GaussElement> {
    match gauss_star(a, b, k) {
        Ok(r) => Ok(r),
        Err(StarError::DegenerateProduct { .. }) => Ok(GaussElement::conventional_zero()),
        Err(e) => Err(e),
    }
}
