//! Exact star products and intertwiners on polynomials.



use crate::param::{C64, ExpressionParameter};
use crate::poly::WeylPolynomial;

const MAX_FACT: usize = 170;

fn factorials() -> &'static [f64] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![1.0f64; MAX_FACT + 1];
        for k in 1..=MAX_FACT {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

/// The product f *_Lambda g with Lambda = K + J, evaluated through the
/// bidifferential series; the series terminates at min(deg f, deg g) for
/// polynomials, so the result is exact up to rounding.
pub fn star_product(
    f: &WeylPolynomial,
    g: &WeylPolynomial,
    k: &ExpressionParameter,
) -> WeylPolynomial {
    if f.is_zero() || g.is_zero() {
        return WeylPolynomial::zero();
    }
    let lam = k.lambda();
    let l11 = lam.m[0][0];
    let l12 = lam.m[0][1];
    let l21 = lam.m[1][0];
    let l22 = lam.m[1][1];
    let ih2 = k.i_hbar() * 0.5;
    let kmax = (f.degree().min(g.degree())) as usize;
    let fact = factorials();

    // Derivative tables; entry None marks an identically zero derivative.
    let dmax = kmax as u32;
    let mut df: Vec<Vec<WeylPolynomial>> = Vec::new();
    let mut dg: Vec<Vec<WeylPolynomial>> = Vec::new();
    for a in 0..=dmax {
        let mut row_f = Vec::new();
        let mut row_g = Vec::new();
        for b in 0..=(dmax - a) {
            row_f.push(f.deriv(a, b));
            row_g.push(g.deriv(a, b));
        }
        df.push(row_f);
        dg.push(row_g);
    }

    let mut acc = WeylPolynomial::zero();
    let mut pow_ih2 = vec![C64::new(1.0, 0.0)];
    for _ in 0..kmax {
        let last = *pow_ih2.last().unwrap();
        pow_ih2.push(last * ih2);
    }

    for m11 in 0..=kmax {
        for m12 in 0..=(kmax - m11) {
            for m21 in 0..=(kmax - m11 - m12) {
                for m22 in 0..=(kmax - m11 - m12 - m21) {
                    let kk = m11 + m12 + m21 + m22;
                    let fa = m11 + m12;
                    let fb = m21 + m22;
                    let ga = m11 + m21;
                    let gb = m12 + m22;
                    let fd = &df[fa][fb];
                    if fd.is_zero() {
                        continue;
                    }
                    let gd = &dg[ga][gb];
                    if gd.is_zero() {
                        continue;
                    }
                    let mut c = pow_ih2[kk]
                        / (fact[m11] * fact[m12] * fact[m21] * fact[m22]);
                    c *= l11.powu(m11 as u32)
                        * l12.powu(m12 as u32)
                        * l21.powu(m21 as u32)
                        * l22.powu(m22 as u32);
                    if c.norm() == 0.0 {
                        continue;
                    }
                    acc = acc.add(&fd.mul(gd).scaled(c));
                }
            }
        }
    }
    acc.canonicalized()
}

/// n-fold star power of f.
pub fn star_pow(f: &WeylPolynomial, n: u32, k: &ExpressionParameter) -> WeylPolynomial {
    let mut acc = WeylPolynomial::one();
    for _ in 0..n {
        acc = star_product(&acc, f, k);
    }
    acc
}

/// The intertwiner from the K-expression to the K2-expression:
/// exp((i hbar / 4) sum (K2 - K)^{ij} d_i d_j), a terminating series on
/// polynomials, and an algebra morphism between the two star products.
pub fn intertwine(
    f: &WeylPolynomial,
    k: &ExpressionParameter,
    k2: &ExpressionParameter,
) -> WeylPolynomial {
    let d11 = k2.delta - k.delta;
    let d12 = k2.c - k.c;
    let d22 = k2.delta_prime - k.delta_prime;
    let ih4 = k.i_hbar() * 0.25;
    let mut acc = f.clone();
    let mut term = f.clone();
    let mut n = 1.0;
    loop {
        // T term = (i hbar/4) (d11 dudu + 2 d12 dudv + d22 dvdv) term
        let next = term
            .deriv(2, 0)
            .scaled(ih4 * d11)
            .add(&term.deriv(1, 1).scaled(ih4 * d12 * 2.0))
            .add(&term.deriv(0, 2).scaled(ih4 * d22))
            .scaled(C64::new(1.0 / n, 0.0));
        if next.is_zero() {
            break;
        }
        acc = acc.add(&next);
        term = next;
        n += 1.0;
    }
    acc.canonicalized()
}

/// Pochhammer symbol (a)_n = a (a+1) ... (a+n-1) for n >= 0 with (a)_0 = 1,
/// extended to negative orders by (a)_{-n} = (a-1)(a-2) ... (a-n).
pub fn pochhammer(a: C64, n: i32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    if n >= 0 {
        for k in 0..n {
            acc *= a + k as f64;
        }
    } else {
        for k in 1..=(-n) {
            acc *= a - k as f64;
        }
    }
    acc
}

/// zeta^k: u^k for k >= 0, v^{|k|} for k < 0.
pub fn monomial(k: i32) -> WeylPolynomial {
    if k >= 0 {
        WeylPolynomial::term(k as u32, 0, C64::new(1.0, 0.0))
    } else {
        WeylPolynomial::term(0, (-k) as u32, C64::new(1.0, 0.0))
    }
}

/// zeta-hat^l: v^l for l >= 0, u^{|l|} for l < 0.
pub fn monomial_dual(l: i32) -> WeylPolynomial {
    if l >= 0 {
        WeylPolynomial::term(0, l as u32, C64::new(1.0, 0.0))
    } else {
        WeylPolynomial::term((-l) as u32, 0, C64::new(1.0, 0.0))
    }
}

/// Coefficients of the star-ordered expansion p = sum c_{ij} u^{*i} * v^{*j}.
///
/// The basis elements u^{*i} * v^{*j} have leading term u^i v^j with unit
/// coefficient, so the conversion is a triangular sweep by total degree.
pub struct StarOrdered {
    pub coeffs: Vec<((u32, u32), C64)>,
}

/// Table of the ordered basis elements u^{*i} * v^{*j} for i + j <= deg.
pub fn star_basis(deg: u32, k: &ExpressionParameter) -> Vec<Vec<WeylPolynomial>> {
    let u = WeylPolynomial::u();
    let v = WeylPolynomial::v();
    let mut upow: Vec<WeylPolynomial> = vec![WeylPolynomial::one()];
    for i in 1..=deg {
        let prev = &upow[(i - 1) as usize];
        upow.push(star_product(prev, &u, k));
    }
    let mut table: Vec<Vec<WeylPolynomial>> = Vec::new();
    for i in 0..=deg {
        let mut row = vec![upow[i as usize].clone()];
        for j in 1..=(deg - i) {
            let prev = &row[(j - 1) as usize];
            row.push(star_product(prev, &v, k));
        }
        table.push(row);
    }
    table
}

/// Expand p in the star-ordered basis of the K-expression.
pub fn to_star_ordered(p: &WeylPolynomial, k: &ExpressionParameter) -> StarOrdered {
    let deg = p.degree();
    let basis = star_basis(deg, k);
    let mut rem = p.clone();
    let mut coeffs = Vec::new();
    let scale = p.max_coeff().max(1e-300);
    while let Some(((i, j), c)) = rem.leading_term() {
        if c.norm() <= 1e-15 * scale {
            // strip rounding residue and continue with the next leading term
            let mut r2 = rem.clone();
            r2.add_term(i, j, -c);
            rem = r2;
            if rem.is_zero() {
                break;
            }
            continue;
        }
        coeffs.push(((i, j), c));
        rem = rem.sub(&basis[i as usize][j as usize].scaled(c));
    }
    StarOrdered { coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_poly(rng: &mut ChaCha8Rng, deg: u32) -> WeylPolynomial {
        let mut p = WeylPolynomial::zero();
        for i in 0..=deg {
            for j in 0..=(deg - i) {
                if rng.gen_bool(0.6) {
                    p.add_term(i, j, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
        }
        if p.is_zero() {
            p.add_term(0, 0, c(1.0, 0.0));
        }
        p
    }

    fn rand_param(rng: &mut ChaCha8Rng) -> ExpressionParameter {
        ExpressionParameter {
            delta: c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
            c: c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
            delta_prime: c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
            hbar: 1.0,
        }
    }

    #[test]
    fn generator_products() {
        let k = ExpressionParameter::new(c(0.3, 0.1), c(-0.2, 0.4), c(0.7, 0.0), 2.0).unwrap();
        let u = WeylPolynomial::u();
        let v = WeylPolynomial::v();
        let ih = k.i_hbar();
        // u*u = u^2 + (i hbar/2) K11
        let uu = star_product(&u, &u, &k);
        assert!((uu.coeff(2, 0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((uu.coeff(0, 0) - ih * 0.5 * k.delta).norm() < 1e-14);
        // u*v = uv + (i hbar/2)(K12 - 1), v*u = uv + (i hbar/2)(K12 + 1)
        let uv = star_product(&u, &v, &k);
        let vu = star_product(&v, &u, &k);
        assert!((uv.coeff(0, 0) - ih * 0.5 * (k.c - 1.0)).norm() < 1e-14);
        assert!((vu.coeff(0, 0) - ih * 0.5 * (k.c + 1.0)).norm() < 1e-14);
        // commutation relation u*v - v*u = -i hbar, for any K
        let comm = uv.sub(&vu);
        assert!((comm.coeff(0, 0) + ih).norm() < 1e-14);
        assert_eq!(comm.num_terms(), 1);
    }

    #[test]
    fn associativity_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let k = rand_param(&mut rng);
            let f = rand_poly(&mut rng, 4);
            let g = rand_poly(&mut rng, 4);
            let h = rand_poly(&mut rng, 4);
            let lhs = star_product(&star_product(&f, &g, &k), &h, &k);
            let rhs = star_product(&f, &star_product(&g, &h, &k), &k);
            let scale = lhs.max_coeff().max(1.0);
            assert!(lhs.distance(&rhs) <= 1e-12 * scale, "assoc failed: {}", lhs.distance(&rhs));
        }
    }

    #[test]
    fn intertwiner_morphism_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let k = rand_param(&mut rng);
            let k2 = rand_param(&mut rng);
            let k3 = rand_param(&mut rng);
            let f = rand_poly(&mut rng, 4);
            let g = rand_poly(&mut rng, 4);
            // morphism: I(f *_K g) = I(f) *_{K2} I(g)
            let lhs = intertwine(&star_product(&f, &g, &k), &k, &k2);
            let rhs = star_product(&intertwine(&f, &k, &k2), &intertwine(&g, &k, &k2), &k2);
            let scale = lhs.max_coeff().max(1.0);
            assert!(lhs.distance(&rhs) <= 1e-12 * scale);
            // composition: I_{K2}^{K3} of I_K^{K2} = I_K^{K3}
            let once = intertwine(&intertwine(&f, &k, &k2), &k2, &k3);
            let direct = intertwine(&f, &k, &k3);
            assert!(once.distance(&direct) <= 1e-12 * once.max_coeff().max(1.0));
        }
    }

    #[test]
    fn intertwine_fixed_points_and_example() {
        let k0 = ExpressionParameter::weyl();
        let k2 = ExpressionParameter::from_reals(0.4, -0.3, 1.2);
        let one = WeylPolynomial::one();
        assert_eq!(intertwine(&one, &k0, &k2), one);
        // u^2 under I_0^{K'} gains (i hbar/2) K'_{11}
        let u2 = WeylPolynomial::term(2, 0, c(1.0, 0.0));
        let r = intertwine(&u2, &k0, &k2);
        assert!((r.coeff(0, 0) - k0.i_hbar() * 0.5 * k2.delta).norm() < 1e-14);
        assert!((r.coeff(2, 0) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(c(0.37, 0.0), 0), c(1.0, 0.0));
        assert!((pochhammer(c(0.5, 0.0), 2) - c(0.75, 0.0)).norm() < 1e-15);
        assert!((pochhammer(c(0.5, 0.0), -1) - c(-0.5, 0.0)).norm() < 1e-15);
        assert!((pochhammer(c(0.5, 0.0), -2) - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn monomial_conventions() {
        assert_eq!(monomial(0), WeylPolynomial::one());
        assert_eq!(monomial(2), WeylPolynomial::term(2, 0, c(1.0, 0.0)));
        assert_eq!(monomial(-3), WeylPolynomial::term(0, 3, c(1.0, 0.0)));
        assert_eq!(monomial_dual(2), WeylPolynomial::term(0, 2, c(1.0, 0.0)));
        assert_eq!(monomial_dual(-1), WeylPolynomial::u());
    }

    #[test]
    fn bumping_identity() {
        // v * f(u*v) = f(v*u) * v for f a polynomial of one star argument
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let k = rand_param(&mut rng);
            let u = WeylPolynomial::u();
            let v = WeylPolynomial::v();
            let uv = star_product(&u, &v, &k);
            let vu = star_product(&v, &u, &k);
            let a: Vec<C64> = (0..4).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let apply = |x: &WeylPolynomial| {
                let mut acc = WeylPolynomial::zero();
                for (n, cn) in a.iter().enumerate() {
                    acc = acc.add(&star_pow(x, n as u32, &k).scaled(*cn));
                }
                acc
            };
            let lhs = star_product(&v, &apply(&uv), &k);
            let rhs = star_product(&apply(&vu), &v, &k);
            assert!(lhs.distance(&rhs) <= 1e-12 * lhs.max_coeff().max(1.0));
        }
    }

    #[test]
    fn rising_star_factorization() {
        // (1/(i hbar))^n v^n * u^n = {(1/(i hbar)) v*u}_{*n}, n <= 5
        let k = ExpressionParameter::from_reals(0.5, 0.3, -0.2);
        let inv_ih = c(1.0, 0.0) / k.i_hbar();
        let u = WeylPolynomial::u();
        let v = WeylPolynomial::v();
        let vu = star_product(&v, &u, &k).scaled(inv_ih);
        for n in 0..=5u32 {
            let mut vn = WeylPolynomial::one();
            let mut un = WeylPolynomial::one();
            for _ in 0..n {
                vn = star_product(&vn, &v, &k);
                un = star_product(&un, &u, &k);
            }
            let lhs = star_product(&vn, &un, &k).scaled(inv_ih.powu(n));
            // {A}_{*n} = A * (A+1) * ... * (A+n-1)
            let mut rhs = WeylPolynomial::one();
            for m in 0..n {
                rhs = star_product(&rhs, &vu.add(&WeylPolynomial::constant(c(m as f64, 0.0))), &k);
            }
            assert!(lhs.distance(&rhs) <= 1e-12 * lhs.max_coeff().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn star_ordered_expansion_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let k = rand_param(&mut rng);
        let p = rand_poly(&mut rng, 5);
        let so = to_star_ordered(&p, &k);
        let basis = star_basis(p.degree(), &k);
        let mut back = WeylPolynomial::zero();
        for ((i, j), c) in so.coeffs.iter() {
            back = back.add(&basis[*i as usize][*j as usize].scaled(*c));
        }
        assert!(back.distance(&p) <= 1e-12 * p.max_coeff().max(1.0));
    }
}
