//! Elements defined by integrals: period-integral vacuums, the pseudo-vacuum,
//! matrix elements, the star-delta function, and one-sided star-inverses with
//! analytic continuation.

use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::branch::{self, Generator, KClass, TraceRun};
use crate::error::{Result, StarError};
use crate::gauss::{self, GaussElement, Quad};
use crate::param::{C64, ExpressionParameter};
use crate::poly::WeylPolynomial;
use crate::quadrule;
use crate::weyl::pochhammer;

/// A finite weighted sum of Gaussian elements representing a contour or line
/// integral. Evaluation and star products distribute over the nodes.
#[derive(Clone, Debug)]
pub struct QuadratureElement {
    pub nodes: Vec<(C64, GaussElement)>,
    pub meta: String,
}

impl Serialize for QuadratureElement {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Node<'a> {
            weight: (f64, f64),
            value: &'a GaussElement,
        }
        let mut st = ser.serialize_struct("QuadratureElement", 2)?;
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .map(|(w, g)| Node { weight: (w.re, w.im), value: g })
            .collect();
        st.serialize_field("nodes", &nodes)?;
        st.serialize_field("meta", &self.meta)?;
        st.end()
    }
}

impl QuadratureElement {
    pub fn empty(meta: impl Into<String>) -> Self {
        QuadratureElement { nodes: Vec::new(), meta: meta.into() }
    }

    pub fn from_gauss(g: GaussElement, meta: impl Into<String>) -> Self {
        QuadratureElement { nodes: vec![(C64::new(1.0, 0.0), g)], meta: meta.into() }
    }

    pub fn eval(&self, u: C64, v: C64, hbar: f64) -> C64 {
        self.nodes.iter().map(|(w, g)| *w * g.eval(u, v, hbar)).sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        QuadratureElement {
            nodes: self.nodes.iter().map(|(w, g)| (*w * s, g.clone())).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().cloned());
        QuadratureElement { nodes, meta: format!("({}) + ({})", self.meta, other.meta) }
    }

    /// p * self, node by node (exact in each node).
    pub fn star_poly_left(&self, p: &WeylPolynomial, k: &ExpressionParameter) -> Self {
        QuadratureElement {
            nodes: self
                .nodes
                .iter()
                .map(|(w, g)| (*w, gauss::poly_star_gauss(p, g, k)))
                .collect(),
            meta: format!("poly * ({})", self.meta),
        }
    }

    /// self * p, node by node.
    pub fn star_poly_right(&self, p: &WeylPolynomial, k: &ExpressionParameter) -> Self {
        QuadratureElement {
            nodes: self
                .nodes
                .iter()
                .map(|(w, g)| (*w, gauss::gauss_star_poly(g, p, k)))
                .collect(),
            meta: format!("({}) * poly", self.meta),
        }
    }

    /// g * self, node by node.
    pub fn star_gauss_left(&self, g: &GaussElement, k: &ExpressionParameter) -> Result<Self> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (w, n) in &self.nodes {
            nodes.push((*w, gauss::gauss_star(g, n, k)?));
        }
        Ok(QuadratureElement { nodes, meta: format!("gauss * ({})", self.meta) })
    }

    pub fn star_gauss_right(&self, g: &GaussElement, k: &ExpressionParameter) -> Result<Self> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (w, n) in &self.nodes {
            nodes.push((*w, gauss::gauss_star(n, g, k)?));
        }
        Ok(QuadratureElement { nodes, meta: format!("({}) * gauss", self.meta) })
    }

    /// Pairwise star product of two quadrature elements. `vacuum_aware` maps
    /// divergent node pairs to the conventional zero instead of failing.
    pub fn star(
        &self,
        other: &Self,
        k: &ExpressionParameter,
        vacuum_aware: bool,
    ) -> Result<Self> {
        let mut nodes = Vec::with_capacity(self.nodes.len() * other.nodes.len());
        for (wa, a) in &self.nodes {
            for (wb, b) in &other.nodes {
                let g = if vacuum_aware {
                    gauss::gauss_star_vacuum_aware(a, b, k)?
                } else {
                    gauss::gauss_star(a, b, k)?
                };
                if !g.is_zero() {
                    nodes.push((*wa * *wb, g));
                }
            }
        }
        Ok(QuadratureElement {
            nodes,
            meta: format!("({}) * ({})", self.meta, other.meta),
        })
    }

    /// Project onto a single Gaussian with polynomial prefactor around the
    /// given base exponent, truncated at total degree `deg`.
    pub fn to_gauss_with_prefactor(&self, base: Quad, deg: u32, hbar: f64) -> GaussElement {
        let ih = C64::new(0.0, hbar);
        let mut acc = WeylPolynomial::zero();
        let mmax = deg / 2;
        for (w, g) in &self.nodes {
            if g.is_zero() {
                continue;
            }
            let dq = Quad {
                qu: g.quad.qu - base.qu,
                qv: g.quad.qv - base.qv,
                quv: g.quad.quv - base.quv,
            };
            let dq_poly = WeylPolynomial::term(2, 0, dq.qu / ih)
                .add(&WeylPolynomial::term(0, 2, dq.qv / ih))
                .add(&WeylPolynomial::term(1, 1, dq.quv * 2.0 / ih));
            // exp(dq) truncated
            let mut etrunc = WeylPolynomial::one();
            let mut term = WeylPolynomial::one();
            for m in 1..=mmax {
                term = term.mul(&dq_poly).scaled(C64::new(1.0 / m as f64, 0.0));
                term = truncate_degree(&term, deg);
                if term.is_zero() {
                    break;
                }
                etrunc = etrunc.add(&term);
            }
            let contrib = truncate_degree(&g.prefactor.mul(&etrunc), deg).scaled(*w * g.amplitude);
            acc = acc.add(&contrib);
        }
        GaussElement::with_prefactor(C64::new(1.0, 0.0), base, acc)
    }
}

pub(crate) fn truncate_degree(p: &WeylPolynomial, deg: u32) -> WeylPolynomial {
    let mut out = WeylPolynomial::zero();
    for (&(i, j), &c) in p.iter() {
        if i + j <= deg {
            out.add_term(i, j, c);
        }
    }
    out
}

/// (1/(2 pi m)) int_0^{2 pi m} e_*^{(s + i tau) G} d tau for the given
/// generator, traced continuously along the vertical line.
pub fn period_integral(
    s: f64,
    variant: Generator,
    period_multiple: u32,
    k: &ExpressionParameter,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    period_integral_alpha(s, variant.alpha(), period_multiple, k, total_nodes)
}

/// Same with an arbitrary scalar shift alpha: integrand e_*^{(s+i tau)(alpha + H)}.
pub fn period_integral_alpha(
    s: f64,
    alpha: C64,
    period_multiple: u32,
    k: &ExpressionParameter,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    let ss = branch::singular_structure(k);
    for endpoint in [ss.a, ss.b] {
        if endpoint.is_finite() && (s - endpoint).abs() <= branch::GENERIC_TOL {
            return Err(StarError::OnSingularLine { s });
        }
    }
    let period = 2.0 * PI * period_multiple as f64;
    let mut run = TraceRun::start(k, 1);
    run.advance(C64::new(s, 0.0))?;
    let (panels, npp) = quadrule::panels_for(total_nodes);
    let rule = quadrule::composite_unit(panels, npp);
    let mut nodes = Vec::with_capacity(rule.len());
    for (t, w) in rule {
        run.advance(C64::new(s, period * t))?;
        nodes.push((C64::new(w, 0.0), run.element(alpha)));
    }
    Ok(QuadratureElement {
        nodes,
        meta: format!("period integral s={s}, alpha={alpha}, period=2pi*{period_multiple}"),
    })
}

/// The pseudo-vacuum (1/(2 pi)) int_0^{2 pi} e_*^{i t H} dt; nontrivial only
/// in the K0 class.
pub fn pseudo_vacuum(k: &ExpressionParameter, total_nodes: usize) -> Result<QuadratureElement> {
    let ss = branch::singular_structure(k);
    if ss.class != KClass::KZero {
        return Err(StarError::WrongClass("K0"));
    }
    period_integral(0.0, Generator::UoV, 1, k, total_nodes)
}

/// Period integral of e_*^{i t (H + q/p)} over t in [0, 2 pi p]; vanishes for
/// q/p != 0 in (-1/2, 1/2).
pub fn pseudo_vacuum_rational(
    q: i32,
    p: u32,
    k: &ExpressionParameter,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    let alpha = C64::new(q as f64 / p as f64, 0.0);
    period_integral_alpha(0.0, alpha, p, k, total_nodes)
}

fn sqrt_factorial(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for k in 1..=n {
        acc *= (k as f64).sqrt();
    }
    acc
}

/// E_{p,q} = u^{*p} * vacuum * v^{*q} / (sqrt(p! q!) sqrt(i hbar)^{p+q}),
/// satisfying the matrix-unit law E_{p,q} * E_{r,s} = delta_{q,r} E_{p,s}.
pub fn matrix_element_e(p: u32, q: u32, k: &ExpressionParameter) -> Result<GaussElement> {
    let vac = gauss::vacuum(k)?;
    let e = gauss::right_word(&gauss::left_word(&vac, p, 0, k), 0, q, k);
    let norm = k.sqrt_i_hbar().powu(p + q) * (sqrt_factorial(p) * sqrt_factorial(q));
    Ok(e.scaled(C64::new(1.0, 0.0) / norm))
}

/// Ebar_{p,q} = i^{p+q} v^{*p} * bar-vacuum * u^{*q} / (sqrt(p! q!) sqrt(i hbar)^{p+q}).
pub fn matrix_element_ebar(p: u32, q: u32, k: &ExpressionParameter) -> Result<GaussElement> {
    let bv = gauss::bar_vacuum(k)?;
    let e = gauss::right_word(&gauss::left_word(&bv, 0, p, k), q, 0, k);
    let phase = C64::new(0.0, 1.0).powu(p + q);
    let norm = k.sqrt_i_hbar().powu(p + q) * (sqrt_factorial(p) * sqrt_factorial(q));
    Ok(e.scaled(phase / norm))
}

/// D_{k,l} = zeta^k * pseudo-vacuum * zeta-hat^l, normalized by
/// sqrt((1/2)_k (1/2)_l (i hbar)^{|k|+|l|}).
pub fn matrix_element_d(
    kk: i32,
    ll: i32,
    k: &ExpressionParameter,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    let pv = pseudo_vacuum(k, total_nodes)?;
    let one = C64::new(1.0, 0.0);
    let (lu, lv) = if kk >= 0 { (kk as u32, 0u32) } else { (0, (-kk) as u32) };
    let (ru, rv) = if ll >= 0 { (0u32, ll as u32) } else { ((-ll) as u32, 0) };
    let nodes = pv
        .nodes
        .iter()
        .map(|(w, g)| {
            (*w, gauss::right_word(&gauss::left_word(g, lu, lv, k), ru, rv, k))
        })
        .collect();
    let norm = pochhammer(C64::new(0.5, 0.0), kk).sqrt()
        * pochhammer(C64::new(0.5, 0.0), ll).sqrt()
        * k.sqrt_i_hbar().powu(kk.unsigned_abs() + ll.unsigned_abs());
    Ok(QuadratureElement {
        nodes,
        meta: format!("D_{{{kk},{ll}}}"),
    }
    .scaled(one / norm))
}

/// D_{n,n} through its direct formula (1/(2 pi)) int e_*^{i t (H - n)} dt.
pub fn d_diagonal(n: i32, k: &ExpressionParameter, total_nodes: usize) -> Result<QuadratureElement> {
    let ss = branch::singular_structure(k);
    if ss.class != KClass::KZero {
        return Err(StarError::WrongClass("K0"));
    }
    period_integral_alpha(0.0, C64::new(-n as f64, 0.0), 1, k, total_nodes)
}

const STRIP_MARGIN: f64 = 1e-9;

/// Extend the truncation length so the analytic tail bound e^{-T * margin}
/// stays below 1e-9, capped to keep节 runtimes bounded.
fn extend_for_tail(t_max: f64, margin: f64) -> f64 {
    let needed = 21.0 / margin.max(1e-3);
    t_max.max(needed.min(2000.0))
}

/// The star-delta function int_R e_*^{t(z + H)} dt, truncated at |t| = t_max
/// with an exp(-t_max/2)-type tail. Defined on the strip |Re z| < 1/2.
pub fn star_delta(
    z: C64,
    k: &ExpressionParameter,
    t_max: f64,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    if z.re.abs() >= 0.5 - STRIP_MARGIN {
        return Err(StarError::OutOfStrip { z });
    }
    let t_max = extend_for_tail(t_max, 0.5 - z.re.abs());
    let mut run = TraceRun::start(k, 1);
    run.advance(C64::new(-t_max, 0.0))?;
    let (panels, npp) = quadrule::panels_for(total_nodes);
    let rule = quadrule::composite_unit(panels, npp);
    let mut nodes = Vec::with_capacity(rule.len());
    for (t, w) in rule {
        let tt = -t_max + 2.0 * t_max * t;
        run.advance(C64::new(tt, 0.0))?;
        let weight = C64::new(2.0 * t_max * w, 0.0) * (z * tt).exp();
        nodes.push((weight, run.element(C64::new(0.0, 0.0))));
    }
    Ok(QuadratureElement {
        nodes,
        meta: format!("star-delta z={z}, T={t_max}, tail<={:.1e}", (-t_max * (0.5 - z.re.abs())).exp()),
    })
}

/// (z + H)^{-1}_{*+} = int_{-inf}^0 e_*^{t(z+H)} dt, for Re z > -1/2.
pub fn inverse_plus(
    z: C64,
    k: &ExpressionParameter,
    t_max: f64,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    if z.re <= -0.5 + STRIP_MARGIN {
        return Err(StarError::OutOfDomain { z });
    }
    let t_max = extend_for_tail(t_max, z.re + 0.5);
    let mut run = TraceRun::start(k, 1);
    run.advance(C64::new(-t_max, 0.0))?;
    let (panels, npp) = quadrule::panels_for(total_nodes);
    let rule = quadrule::composite_unit(panels, npp);
    let mut nodes = Vec::with_capacity(rule.len());
    for (t, w) in rule {
        let tt = -t_max + t_max * t;
        run.advance(C64::new(tt, 0.0))?;
        let weight = C64::new(t_max * w, 0.0) * (z * tt).exp();
        nodes.push((weight, run.element(C64::new(0.0, 0.0))));
    }
    Ok(QuadratureElement { nodes, meta: format!("inverse_plus z={z}") })
}

/// (z + H)^{-1}_{*-} = -int_0^{inf} e_*^{t(z+H)} dt, for Re z < 1/2.
pub fn inverse_minus(
    z: C64,
    k: &ExpressionParameter,
    t_max: f64,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    if z.re >= 0.5 - STRIP_MARGIN {
        return Err(StarError::OutOfDomain { z });
    }
    let t_max = extend_for_tail(t_max, 0.5 - z.re);
    let mut run = TraceRun::start(k, 1);
    let (panels, npp) = quadrule::panels_for(total_nodes);
    let rule = quadrule::composite_unit(panels, npp);
    let mut nodes = Vec::with_capacity(rule.len());
    for (t, w) in rule {
        let tt = t_max * t;
        run.advance(C64::new(tt, 0.0))?;
        let weight = C64::new(-t_max * w, 0.0) * (z * tt).exp();
        nodes.push((weight, run.element(C64::new(0.0, 0.0))));
    }
    Ok(QuadratureElement { nodes, meta: format!("inverse_minus z={z}") })
}

/// Analytic continuation of the plus-inverse to Re z > -(n + 1/2): the
/// first n poles are split off with residues E_{k,k} and the remainder is the
/// pole-subtracted half-line integral.
pub struct InverseContinuation {
    pub z: C64,
    /// (pole location -(k+1/2), residue E_{k,k})
    pub poles: Vec<(C64, GaussElement)>,
    pub remainder: QuadratureElement,
}

impl InverseContinuation {
    pub fn eval(&self, u: C64, v: C64, hbar: f64) -> C64 {
        let mut acc = self.remainder.eval(u, v, hbar);
        for (pole, e) in &self.poles {
            acc += e.eval(u, v, hbar) / (self.z - pole);
        }
        acc
    }

    /// Flatten to a quadrature element (pole terms become single nodes).
    pub fn as_quadrature(&self) -> QuadratureElement {
        let mut q = self.remainder.clone();
        for (pole, e) in &self.poles {
            q.nodes.push((C64::new(1.0, 0.0) / (self.z - pole), e.clone()));
        }
        q.meta = format!("continued inverse z={}", self.z);
        q
    }
}

pub fn inverse_continued(
    z: C64,
    n: u32,
    k: &ExpressionParameter,
    t_max: f64,
    total_nodes: usize,
) -> Result<InverseContinuation> {
    if z.re <= -(n as f64 + 0.5) + STRIP_MARGIN {
        return Err(StarError::OutOfDomain { z });
    }
    let margin = z.re + n as f64 + 0.5;
    let t_max = (21.0 / margin.max(1e-3)).clamp(10.0, t_max.max(100.0));
    for kk in 0..n {
        let pole = C64::new(-(kk as f64 + 0.5), 0.0);
        if (z - pole).norm() < 1e-9 {
            return Err(StarError::AtPole { z });
        }
    }
    // In the K+ class the partial-fraction representation converges in
    // Hol(C^2) and avoids the catastrophic cancellation of the subtracted
    // half-line integral at deep Re z: the remainder is the convergent tail
    // of the pole series itself.
    if crate::branch::singular_structure(k).class == crate::branch::KClass::KPlus {
        let mut poles = Vec::new();
        for kk in 0..n {
            poles.push((C64::new(-(kk as f64 + 0.5), 0.0), matrix_element_e(kk, kk, k)?));
        }
        let mut nodes = Vec::new();
        let probe = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let mut kk = n;
        loop {
            let e = matrix_element_e(kk, kk, k)?;
            let w = C64::new(1.0, 0.0) / (z + kk as f64 + 0.5);
            let mut sz: f64 = 0.0;
            for u in &probe {
                for v in &probe {
                    sz = sz.max(e.eval(*u, *v, k.hbar).norm());
                }
            }
            nodes.push((w, e));
            if sz * w.norm() < 1e-13 || kk > n + 400 {
                break;
            }
            kk += 1;
        }
        return Ok(InverseContinuation {
            z,
            poles,
            remainder: QuadratureElement {
                nodes,
                meta: format!("partial-fraction tail from k = {n}, z={z}"),
            },
        });
    }
    let mut poles = Vec::new();
    for kk in 0..n {
        poles.push((
            C64::new(-(kk as f64 + 0.5), 0.0),
            matrix_element_e(kk, kk, k)?,
        ));
    }
    // remainder = int_{-T}^0 [ e^{tz} e_*^{tH} - sum_k e^{t(z+k+1/2)} E_kk ] dt;
    // the subtracted terms integrate in closed form and are folded back in as
    // single nodes so the stored object is exactly the subtracted integral.
    let mut run = TraceRun::start(k, 1);
    run.advance(C64::new(-t_max, 0.0))?;
    let (panels, npp) = quadrule::panels_for(total_nodes);
    let rule = quadrule::composite_unit(panels, npp);
    let mut nodes: Vec<(C64, GaussElement)> = Vec::with_capacity(rule.len() + n as usize);
    for (t, w) in rule {
        let tt = -t_max + t_max * t;
        run.advance(C64::new(tt, 0.0))?;
        nodes.push((C64::new(t_max * w, 0.0) * (z * tt).exp(), run.element(C64::new(0.0, 0.0))));
    }
    for (kk, (_, e)) in poles.iter().enumerate() {
        // -int_{-T}^0 e^{t(z+k+1/2)} dt = -(1 - e^{-T(z+k+1/2)})/(z+k+1/2)
        let lam = z + C64::new(kk as f64 + 0.5, 0.0);
        let integral = (C64::new(1.0, 0.0) - (-lam * t_max).exp()) / lam;
        nodes.push((-integral, e.clone()));
    }
    Ok(InverseContinuation {
        z,
        poles,
        remainder: QuadratureElement {
            nodes,
            meta: format!("pole-subtracted inverse, n={n}, z={z}"),
        },
    })
}

/// Left inverse v-circle = u * (v*u)^{-1}_{*+} with v * v-circle = 1 and
/// v-circle * v = 1 - vacuum.
pub fn v_circle(k: &ExpressionParameter, t_max: f64, total_nodes: usize) -> Result<QuadratureElement> {
    // (v*u)^{-1}_{*+} = (1/(i hbar)) int_{-inf}^0 e_*^{t(1/2 + H)} dt
    let mut run = TraceRun::start(k, 1);
    run.advance(C64::new(-t_max, 0.0))?;
    let (panels, npp) = quadrule::panels_for(total_nodes);
    let rule = quadrule::composite_unit(panels, npp);
    let mut nodes = Vec::with_capacity(rule.len());
    let inv_ih = C64::new(1.0, 0.0) / k.i_hbar();
    for (t, w) in rule {
        let tt = -t_max + t_max * t;
        run.advance(C64::new(tt, 0.0))?;
        nodes.push((C64::new(t_max * w, 0.0) * inv_ih, run.element(C64::new(0.5, 0.0))));
    }
    let q = QuadratureElement { nodes, meta: "(v*u)^{-1}_{*+}".into() };
    Ok(q.star_poly_left(&WeylPolynomial::u(), k))
}

/// Right inverse u-bullet = v * (u*v)^{-1}_{*-} with u * u-bullet = 1 and
/// u-bullet * u = 1 - bar-vacuum.
pub fn u_bullet(k: &ExpressionParameter, t_max: f64, total_nodes: usize) -> Result<QuadratureElement> {
    // (u*v)^{-1}_{*-} = -(1/(i hbar)) int_0^{inf} e_*^{t(H - 1/2)} dt
    let mut run = TraceRun::start(k, 1);
    let (panels, npp) = quadrule::panels_for(total_nodes);
    let rule = quadrule::composite_unit(panels, npp);
    let mut nodes = Vec::with_capacity(rule.len());
    let inv_ih = C64::new(1.0, 0.0) / k.i_hbar();
    for (t, w) in rule {
        let tt = t_max * t;
        run.advance(C64::new(tt, 0.0))?;
        nodes.push((C64::new(-t_max * w, 0.0) * inv_ih, run.element(C64::new(-0.5, 0.0))));
    }
    let q = QuadratureElement { nodes, meta: "(u*v)^{-1}_{*-}".into() };
    Ok(q.star_poly_left(&WeylPolynomial::v(), k))
}

/// Group-branch product of two exponential-line period elements with a
/// star-word sandwich: the double period integral of
///   e_*^{(s1+i sigma)(alpha_a + H)} * u^{*i} * v^{*j} * e_*^{(s2+i tau)(alpha_b + H)}
/// with the exponentials composed by the exponential law anchored on the
/// real axis, so the composed value depends on sigma + tau only. The sigma
/// integral of the phases is done in closed form and the remaining xi-line
/// is traced once.
pub struct PeriodFactor {
    pub s: f64,
    pub alpha: C64,
    pub period_multiple: u32,
}

pub fn group_exp_sandwich(
    left: &PeriodFactor,
    mid_words: &[((u32, u32), C64)],
    right: &PeriodFactor,
    k: &ExpressionParameter,
    total_nodes: usize,
) -> Result<QuadratureElement> {
    let p1 = 2.0 * PI * left.period_multiple as f64;
    let p2 = 2.0 * PI * right.period_multiple as f64;
    let s_sum = left.s + right.s;
    // one continuous trace up the line Re z = s1 + s2
    let mut run = TraceRun::start(k, 1);
    run.advance(C64::new(s_sum, 0.0))?;
    let (panels_base, npp) = quadrule::panels_for(total_nodes);
    // panels split at the kernel's corner xi = min(p1, p2) and max(p1, p2)
    let cuts = [0.0, p1.min(p2), p1.max(p2), p1 + p2];
    let mut out = QuadratureElement::empty("group sandwich");
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi - lo < 1e-12 {
            continue;
        }
        let panels = ((panels_base as f64 * (hi - lo) / (p1 + p2)).ceil() as usize).max(2);
        for (t, w) in quadrule::composite_unit(panels, npp) {
            let xi = lo + (hi - lo) * t;
            run.advance(C64::new(s_sum, xi))?;
            let core = run.element(C64::new(0.0, 0.0));
            // sigma window for this xi
            let sig_lo = (xi - p2).max(0.0);
            let sig_hi = xi.min(p1);
            if sig_hi <= sig_lo {
                continue;
            }
            for ((iu, jv), cm) in mid_words {
                let ca = left.alpha + *iu as f64; // e_*^{w1 (ca + H)}
                let cb = right.alpha + *jv as f64;
                // phases e^{ca (s1 + i sigma)} e^{cb (s2 + i (xi - sigma))};
                // integrate the sigma-dependence in closed form
                let mu = (ca - cb) * C64::new(0.0, 1.0);
                let window = if mu.norm() < 1e-14 {
                    C64::new(sig_hi - sig_lo, 0.0)
                } else {
                    ((mu * sig_hi).exp() - (mu * sig_lo).exp()) / mu
                };
                let phase = (ca * left.s + cb * right.s + cb * C64::new(0.0, xi)).exp();
                let weight = *cm * phase * window * ((hi - lo) * w / (p1 * p2));
                let g = gauss::right_word(&gauss::left_word(&core, *iu, 0, k), 0, *jv, k);
                out.nodes.push((weight, g));
            }
        }
    }
    Ok(out)
}

/// vacuum * p(u,v) * bar-vacuum through the 4 pi period-integral
/// representations with the anchored group branch; vanishes for every
/// polynomial p when the combined line lands inside the exchanging strip.
pub fn vacuum_sandwich_bar(
    mid: &WeylPolynomial,
    k: &ExpressionParameter,
    nodes: usize,
) -> Result<QuadratureElement> {
    let ss = crate::branch::singular_structure(k);
    let words = crate::weyl::to_star_ordered(mid, k);
    group_exp_sandwich(
        &PeriodFactor { s: ss.a.min(ss.b) - 1.0, alpha: C64::new(-0.5, 0.0), period_multiple: 2 },
        &words.coeffs,
        &PeriodFactor { s: ss.a.max(ss.b) + 1.0, alpha: C64::new(0.5, 0.0), period_multiple: 2 },
        k,
        nodes,
    )
}

/// Nodes (weight, i tau) of the normalized vertical period rule at Re = s.
pub fn period_nodes(s: f64, period_multiple: u32, total_nodes: usize) -> Vec<(C64, C64)> {
    let period = 2.0 * std::f64::consts::PI * period_multiple as f64;
    let (panels, npp) = quadrule::panels_for(total_nodes);
    quadrule::composite_unit(panels, npp)
        .into_iter()
        .map(|(t, w)| (C64::new(w, 0.0), C64::new(s, period * t)))
        .collect()
}

/// z + H as a polynomial in the K-expression: (1/(i hbar)) u v + c/2 + z.
pub fn z_plus_h(z: C64, k: &ExpressionParameter) -> WeylPolynomial {
    let inv_ih = C64::new(1.0, 0.0) / k.i_hbar();
    WeylPolynomial::term(1, 1, inv_ih)
        .add(&WeylPolynomial::constant(k.c * 0.5 + z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::vacuum;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn probes() -> Vec<(C64, C64)> {
        let mut g = Vec::new();
        for ur in [-1.0, 0.0, 1.0] {
            for vr in [-1.0, 0.0, 1.0] {
                g.push((c(ur, 0.0), c(vr, 0.0)));
            }
        }
        g
    }

    fn max_abs_q(q: &QuadratureElement, hbar: f64) -> f64 {
        probes()
            .iter()
            .map(|(u, v)| q.eval(*u, *v, hbar).norm())
            .fold(0.0, f64::max)
    }

    fn rel_err_q_g(q: &QuadratureElement, g: &GaussElement, hbar: f64) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (u, v) in probes() {
            let x = q.eval(u, v, hbar);
            let y = g.eval(u, v, hbar);
            worst = worst.max((x - y).norm());
            scale = scale.max(y.norm());
        }
        worst / scale.max(1e-300)
    }

    #[test]
    fn period_integral_reproduces_vacuum() {
        // K0 sample: s < a gives the vacuum, s > b gives zero
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let ss = branch::singular_structure(&k);
        let vac = vacuum(&k).unwrap();
        let q = period_integral(ss.a - 1.0, Generator::UStarV, 1, &k, 256).unwrap();
        assert!(rel_err_q_g(&q, &vac, 1.0) < 1e-9, "{}", rel_err_q_g(&q, &vac, 1.0));
        let zero = period_integral(ss.b + 1.0, Generator::UStarV, 1, &k, 256).unwrap();
        assert!(max_abs_q(&zero, 1.0) < 1e-9);
        // bar-vacuum from the v*u variant on the right of b
        let bv = gauss::bar_vacuum(&k).unwrap();
        let qb = period_integral(ss.b + 1.0, Generator::VStarU, 1, &k, 256).unwrap();
        assert!(rel_err_q_g(&qb, &bv, 1.0) < 1e-9);
        let zb = period_integral(ss.a - 1.0, Generator::VStarU, 1, &k, 256).unwrap();
        assert!(max_abs_q(&zb, 1.0) < 1e-9);
    }

    #[test]
    fn four_pi_period_integral_is_piecewise_constant() {
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let vac = vacuum(&k).unwrap();
        let q = period_integral(-2.0, Generator::UStarV, 2, &k, 512).unwrap();
        assert!(rel_err_q_g(&q, &vac, 1.0) < 1e-9);
        let z = period_integral(0.4, Generator::UStarV, 2, &k, 512).unwrap();
        assert!(max_abs_q(&z, 1.0) < 1e-8);
    }

    #[test]
    fn pseudo_vacuum_basics() {
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let pv = pseudo_vacuum(&k, 256).unwrap();
        // s-independence inside (a, b)
        let pv_shift = period_integral(0.3, Generator::UoV, 1, &k, 256).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((pv.eval(u, v, 1.0) - pv_shift.eval(u, v, 1.0)).norm());
        }
        assert!(worst < 1e-9, "{worst}");
        // (u o v) * pv = 0
        let uov = z_plus_h(c(0.0, 0.0), &k);
        let ann = pv.star_poly_left(&uov, &k);
        assert!(max_abs_q(&ann, 1.0) < 1e-9);
        // 2pi and 4pi period integrals agree
        let pv4 = period_integral(0.0, Generator::UoV, 2, &k, 512).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((pv.eval(u, v, 1.0) - pv4.eval(u, v, 1.0)).norm());
        }
        assert!(worst < 1e-9);
        // idempotency
        let sq = pv.star(&pv, &k, false).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((sq.eval(u, v, 1.0) - pv.eval(u, v, 1.0)).norm());
        }
        assert!(worst < 1e-8, "{worst}");
        // wrong class is rejected
        assert!(matches!(
            pseudo_vacuum(&ExpressionParameter::from_reals(0.5, 2.0, 0.5), 64),
            Err(StarError::WrongClass(_))
        ));
    }

    #[test]
    fn pseudo_vacuum_rational_vanishes() {
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let q = pseudo_vacuum_rational(1, 3, &k, 1024).unwrap();
        assert!(max_abs_q(&q, 1.0) < 1e-8, "{}", max_abs_q(&q, 1.0));
    }

    #[test]
    fn vacuum_pseudo_vacuum_orthogonality() {
        // vacuum * pseudo-vacuum = 0 in the group-branch pairing: both
        // factors as period integrals with the exponentials composed along
        // the group path (the branch implied by the change-of-variables
        // vanishing argument)
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let ss = crate::branch::singular_structure(&k);
        let vac = vacuum(&k).unwrap();
        let scale = vac.eval(c(0.5, 0.0), c(0.5, 0.0), 1.0).norm();
        let one_word = [((0u32, 0u32), c(1.0, 0.0))];
        // the pseudo-vacuum factor uses its 4 pi window, under which the
        // half-integer resonance of the vacuum side cancels
        let prod = group_exp_sandwich(
            &PeriodFactor { s: ss.a.min(ss.b) - 1.0, alpha: c(-0.5, 0.0), period_multiple: 1 },
            &one_word,
            &PeriodFactor { s: 0.0, alpha: c(0.0, 0.0), period_multiple: 2 },
            &k,
            512,
        )
        .unwrap();
        assert!(max_abs_q(&prod, 1.0) / scale < 1e-8, "{}", max_abs_q(&prod, 1.0) / scale);
        // and the reversed order
        let prod2 = group_exp_sandwich(
            &PeriodFactor { s: 0.0, alpha: c(0.0, 0.0), period_multiple: 2 },
            &one_word,
            &PeriodFactor { s: ss.a.min(ss.b) - 1.0, alpha: c(-0.5, 0.0), period_multiple: 1 },
            &k,
            512,
        )
        .unwrap();
        assert!(max_abs_q(&prod2, 1.0) / scale < 1e-8, "{}", max_abs_q(&prod2, 1.0) / scale);
    }

    #[test]
    fn vacuum_polynomial_bar_vacuum_sandwich_vanishes() {
        // vacuum * p(u,v) * bar-vacuum = 0 for every polynomial p
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let vac = vacuum(&k).unwrap();
        let scale = vac.eval(c(0.5, 0.0), c(0.5, 0.0), 1.0).norm();
        let mid = WeylPolynomial::term(2, 1, c(0.7, -0.3))
            .add(&WeylPolynomial::term(1, 2, c(-0.2, 0.5)))
            .add(&WeylPolynomial::one());
        let q = vacuum_sandwich_bar(&mid, &k, 128).unwrap();
        assert!(max_abs_q(&q, 1.0) / scale < 1e-8, "{}", max_abs_q(&q, 1.0) / scale);
    }

    #[test]
    fn vacuum_sandwich_evaluates_at_origin() {
        // vacuum * f * vacuum = f(0,0) vacuum in the group-branch pairing
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let ss = crate::branch::singular_structure(&k);
        let vac = vacuum(&k).unwrap();
        let f = WeylPolynomial::term(1, 1, c(0.4, 0.2))
            .add(&WeylPolynomial::term(2, 0, c(-0.3, 0.1)))
            .add(&WeylPolynomial::constant(c(0.8, -0.5)));
        let words = crate::weyl::to_star_ordered(&f, &k);
        let s_left = ss.a.min(ss.b) - 1.0;
        let q = group_exp_sandwich(
            &PeriodFactor { s: s_left, alpha: c(-0.5, 0.0), period_multiple: 1 },
            &words.coeffs,
            &PeriodFactor { s: s_left, alpha: c(-0.5, 0.0), period_multiple: 1 },
            &k,
            512,
        )
        .unwrap();
        // the sandwich keeps only the constant star-ordered word
        let a00 = words
            .coeffs
            .iter()
            .find(|((i, j), _)| *i == 0 && *j == 0)
            .map(|(_, cc)| *cc)
            .unwrap_or(c(0.0, 0.0));
        let want = vac.scaled(a00);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (u, v) in probes() {
            let wv = want.eval(u, v, 1.0);
            worst = worst.max((q.eval(u, v, 1.0) - wv).norm());
            scale = scale.max(wv.norm());
        }
        assert!(worst / scale.max(1.0) < 1e-8, "{}", worst / scale.max(1.0));
    }

    #[test]
    fn matrix_units() {
        let k = ExpressionParameter::from_reals(0.5, 2.0, 0.5);
        // E_{0,0} = vacuum
        let e00 = matrix_element_e(0, 0, &k).unwrap();
        let vac = vacuum(&k).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((e00.eval(u, v, 1.0) - vac.eval(u, v, 1.0)).norm());
        }
        assert!(worst < 1e-13);
        // E_{1,2} * E_{2,0} = E_{1,0}; E_{1,2} * E_{1,0} = 0
        let e12 = matrix_element_e(1, 2, &k).unwrap();
        let e20 = matrix_element_e(2, 0, &k).unwrap();
        let e10 = matrix_element_e(1, 0, &k).unwrap();
        let p = gauss::gauss_star(&e12, &e20, &k).unwrap();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((p.eval(u, v, 1.0) - e10.eval(u, v, 1.0)).norm());
            scale = scale.max(e10.eval(u, v, 1.0).norm());
        }
        assert!(worst / scale < 1e-11, "{}", worst / scale);
        let zero = gauss::gauss_star(&e12, &e10, &k).unwrap();
        for (u, v) in probes() {
            assert!(zero.eval(u, v, 1.0).norm() < 1e-11);
        }
    }

    #[test]
    fn vacuum_sandwich_scalar() {
        // (vac * v^q) * (u^p * vac) = delta_{p,q} p! (i hbar)^p vac
        let k = ExpressionParameter::from_reals(0.5, 2.0, 0.5);
        let vac = vacuum(&k).unwrap();
        for p in 0..=3u32 {
            for q in 0..=3u32 {
                let left = gauss::right_word(&vac, 0, q, &k);
                let right = gauss::left_word(&vac, p, 0, &k);
                let prod = gauss::gauss_star(&left, &right, &k).unwrap();
                let expect = if p == q {
                    let mut f = 1.0;
                    for m in 1..=p {
                        f *= m as f64;
                    }
                    vac.scaled(k.i_hbar().powu(p) * f)
                } else {
                    GaussElement::zero()
                };
                let mut worst: f64 = 0.0;
                for (u, v) in probes() {
                    worst = worst.max((prod.eval(u, v, 1.0) - expect.eval(u, v, 1.0)).norm());
                }
                let scale = if p == q { vac.amplitude.norm() * 3.0 } else { 1.0 };
                assert!(worst / scale < 1e-10, "p={p} q={q}: {worst}");
            }
        }
    }

    #[test]
    fn d_family_matrix_units() {
        // D_{k,l} * D_{l,m} = D_{k,m}; distinct middle indices annihilate
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let d10 = matrix_element_d(1, 0, &k, 128).unwrap();
        let d01 = matrix_element_d(0, 1, &k, 128).unwrap();
        let d11 = matrix_element_d(1, 1, &k, 128).unwrap();
        let prod = d10.star(&d01, &k, false).unwrap();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (u, v) in probes() {
            let w = d11.eval(u, v, 1.0);
            worst = worst.max((prod.eval(u, v, 1.0) - w).norm());
            scale = scale.max(w.norm());
        }
        assert!(worst / scale < 1e-7, "{}", worst / scale);
        // D_{1,0} * D_{1,1} = 0
        let z = d10.star(&d11, &k, false).unwrap();
        for (u, v) in probes() {
            assert!(z.eval(u, v, 1.0).norm() / scale < 1e-7);
        }
    }

    #[test]
    fn star_delta_annihilation_and_difference() {
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let z = c(0.1, 0.0);
        let delta = star_delta(z, &k, 40.0, 512).unwrap();
        let ann = delta.star_poly_left(&z_plus_h(z, &k), &k);
        assert!(max_abs_q(&ann, 1.0) < 1e-7, "{}", max_abs_q(&ann, 1.0));
        // delta = inverse_plus - inverse_minus
        let ip = inverse_plus(z, &k, 40.0, 512).unwrap();
        let im = inverse_minus(z, &k, 40.0, 512).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            let d = delta.eval(u, v, 1.0) - (ip.eval(u, v, 1.0) - im.eval(u, v, 1.0));
            worst = worst.max(d.norm());
        }
        assert!(worst < 1e-7, "{worst}");
        assert!(star_delta(c(0.7, 0.0), &k, 40.0, 64).is_err());
    }

    #[test]
    fn inverses_invert() {
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        for z in [c(0.2, 0.0), c(0.3, 0.4), c(-0.1, -0.6)] {
            let ip = inverse_plus(z, &k, 40.0, 512).unwrap();
            let res = ip.star_poly_left(&z_plus_h(z, &k), &k);
            let mut worst: f64 = 0.0;
            for (u, v) in probes() {
                worst = worst.max((res.eval(u, v, 1.0) - c(1.0, 0.0)).norm());
            }
            assert!(worst < 1e-8, "z={z}: {worst}");
        }
        let z = c(0.2, 0.0);
        let im = inverse_minus(z, &k, 40.0, 512).unwrap();
        let res = im.star_poly_left(&z_plus_h(z, &k), &k);
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((res.eval(u, v, 1.0) - c(1.0, 0.0)).norm());
        }
        assert!(worst < 1e-8);
        assert!(inverse_plus(c(-0.6, 0.0), &k, 40.0, 64).is_err());
        assert!(inverse_minus(c(0.6, 0.0), &k, 40.0, 64).is_err());
    }

    #[test]
    fn reflection_identity() {
        // the reflected family -((-z) + H)^{-1}_{*-} is a star-inverse of
        // (z - H): the sign/reflection law in action
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let z = c(0.2, 0.0);
        let reflected = inverse_minus(-z, &k, 40.0, 512).unwrap().scaled(c(-1.0, 0.0));
        // z - H as a polynomial: z - (uv/(i hbar) + c/2)
        let inv_ih = c(1.0, 0.0) / k.i_hbar();
        let z_minus_h = WeylPolynomial::constant(z - k.c * 0.5)
            .sub(&WeylPolynomial::term(1, 1, inv_ih));
        let res = reflected.star_poly_left(&z_minus_h, &k);
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((res.eval(u, v, 1.0) - c(1.0, 0.0)).norm());
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn resolvent_identity() {
        // inv(a) * inv(b) = (inv(a) - inv(b)) / (b - a)
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let (a, b) = (c(0.2, 0.0), c(0.4, 0.0));
        let ia = inverse_plus(a, &k, 40.0, 192).unwrap();
        let ib = inverse_plus(b, &k, 40.0, 192).unwrap();
        let prod = ia.star(&ib, &k, false).unwrap();
        let diff = ia.add(&ib.scaled(c(-1.0, 0.0))).scaled(c(1.0, 0.0) / (b - a));
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((prod.eval(u, v, 1.0) - diff.eval(u, v, 1.0)).norm());
        }
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn continuation_agrees_on_overlap_and_extends() {
        let k = ExpressionParameter::from_reals(0.5, 2.0, 0.5);
        let z = c(0.2, 0.3);
        let cont = inverse_continued(z, 2, &k, 40.0, 512).unwrap();
        let plain = inverse_plus(z, &k, 40.0, 512).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((cont.eval(u, v, 1.0) - plain.eval(u, v, 1.0)).norm());
        }
        assert!(worst < 1e-7, "{worst}");
        // the continuation is finite past the first pole
        let deep = inverse_continued(c(-1.2, 0.0), 2, &k, 40.0, 512).unwrap();
        let val = deep.eval(c(0.5, 0.0), c(0.5, 0.0), 1.0);
        assert!(val.is_finite());
        // inverse property still holds there: (z + H) * continued = 1
        let ann = deep
            .as_quadrature()
            .star_poly_left(&z_plus_h(c(-1.2, 0.0), &k), &k);
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((ann.eval(u, v, 1.0) - c(1.0, 0.0)).norm());
        }
        assert!(worst < 1e-6, "{worst}");
        assert!(matches!(
            inverse_continued(c(-1.5, 0.0), 2, &k, 40.0, 64),
            Err(StarError::AtPole { .. })
        ));
    }

    #[test]
    fn half_inverses() {
        // needs a parameter with no singular points on the real axis in
        // either direction
        let k = ExpressionParameter::from_reals(0.5, 0.0, 0.5);
        let vc = v_circle(&k, 60.0, 768).unwrap();
        // v * v-circle = 1
        let left = vc.star_poly_left(&WeylPolynomial::v(), &k);
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((left.eval(u, v, 1.0) - c(1.0, 0.0)).norm());
        }
        assert!(worst < 1e-7, "v*v-circle: {worst}");
        // v-circle * v = 1 - vacuum
        let right = vc.star_poly_right(&WeylPolynomial::v(), &k);
        let vac = vacuum(&k).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            let want = c(1.0, 0.0) - vac.eval(u, v, 1.0);
            worst = worst.max((right.eval(u, v, 1.0) - want).norm());
        }
        assert!(worst < 1e-7, "v-circle*v: {worst}");
        // u-bullet: u * u-bullet = 1, u-bullet * u = 1 - bar-vacuum
        let ub = u_bullet(&k, 60.0, 768).unwrap();
        let l2 = ub.star_poly_left(&WeylPolynomial::u(), &k);
        let bv = gauss::bar_vacuum(&k).unwrap();
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            worst = worst.max((l2.eval(u, v, 1.0) - c(1.0, 0.0)).norm());
        }
        assert!(worst < 1e-7, "u*u-bullet: {worst}");
        let r2 = ub.star_poly_right(&WeylPolynomial::u(), &k);
        let mut worst: f64 = 0.0;
        for (u, v) in probes() {
            let want = c(1.0, 0.0) - bv.eval(u, v, 1.0);
            worst = worst.max((r2.eval(u, v, 1.0) - want).norm());
        }
        assert!(worst < 1e-7, "u-bullet*u: {worst}");
    }

    #[test]
    fn powers_of_half_inverse_on_vacuum() {
        // (v-circle)^n * vacuum = (1/n!) (u/(i hbar))^{*n} * vacuum; the
        // intermediate quadrature is re-projected onto a single Gaussian so
        // node counts stay bounded across the iteration.
        let k = ExpressionParameter::from_reals(0.5, 2.0, 0.5);
        let vac = vacuum(&k).unwrap();
        let vc = v_circle(&k, 40.0, 512).unwrap();
        let mut cur = vac.clone();
        for n in 1..=3u32 {
            let prod = vc.star(&QuadratureElement::from_gauss(cur, "step"), &k, false).unwrap();
            let mut fact = 1.0;
            for m in 1..=n {
                fact *= m as f64;
            }
            let want = gauss::left_word(&vac, n, 0, &k)
                .scaled((C64::new(1.0, 0.0) / k.i_hbar()).powu(n) / fact);
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for (u, v) in probes() {
                let w = want.eval(u, v, 1.0);
                worst = worst.max((prod.eval(u, v, 1.0) - w).norm());
                scale = scale.max(w.norm());
            }
            assert!(worst / scale < 1e-6, "n={n}: {}", worst / scale);
            cur = prod.to_gauss_with_prefactor(vac.quad, n + 2, 1.0);
        }
    }
}
