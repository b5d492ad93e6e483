//! Singular sets of the star-exponential e_*^{z H}, H = (1/(i hbar)) u o v,
//! the K-class decomposition, slit conventions and the sign-continuous
//! evaluation along paths on the double cover.
//!
//! All singular data is reported in the z-coordinate of H; the amplitude of
//! the star-exponential is 2/sqrt(D(z)) with
//!   D(z) = Delta^2 - E^2 delta delta',
//!   E = 2 sinh(z/2),  Delta = 2 cosh(z/2) - c E,
//! so D factors through w = e^z and the singular points form two vertical
//! lattices with spacing 2 pi i.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cont::continue_sqrt;
use crate::error::{Result, StarError};
use crate::gauss::{GaussElement, Quad};
use crate::param::{C64, ExpressionParameter};

/// Tolerance for genericity decisions (distance to the real/imaginary axis
/// and to the a = 0 / b = 0 degeneracies).
pub const GENERIC_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KClass {
    KPlus,
    KZero,
    KMinus,
    NonGeneric,
    NoSingularities,
}

impl std::fmt::Display for KClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KClass::KPlus => "KPlus",
            KClass::KZero => "KZero",
            KClass::KMinus => "KMinus",
            KClass::NonGeneric => "NonGeneric",
            KClass::NoSingularities => "NoSingularities",
        };
        write!(f, "{s}")
    }
}

/// Exchanging-interval endpoints and the singular lattice of e_*^{z H}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularStructure {
    /// a = log |(1+c-rho)/(1-c+rho)|; -inf / +inf when that line is absent.
    pub a: f64,
    /// b = log |(1+c+rho)/(1-c-rho)|; -inf / +inf when that line is absent.
    pub b: f64,
    /// base point of the a-line lattice (spacing 2 pi i), when present
    pub sigma_a: Option<C64>,
    pub sigma_b: Option<C64>,
    pub class: KClass,
    /// false when delta delta' = 0: the singular points are poles of the
    /// amplitude, not square-root branch points, and there are no sheets.
    pub branching: bool,
}

impl SingularStructure {
    /// All lattice points with |Im z - Im z0| within `pad` of the window.
    pub fn lattice_near(&self, z: C64, pad: f64) -> Vec<C64> {
        let mut pts = Vec::new();
        for base in [self.sigma_a, self.sigma_b].into_iter().flatten() {
            let k0 = ((z.im - base.im) / (2.0 * PI)).round() as i64;
            for k in (k0 - 2)..=(k0 + 2) {
                let p = base + C64::new(0.0, 2.0 * PI * k as f64);
                if (z - p).norm() <= pad {
                    pts.push(p);
                }
            }
        }
        pts
    }

    /// Distance from z to the singular set (within a few lattice periods).
    pub fn distance(&self, z: C64) -> f64 {
        let mut d = f64::INFINITY;
        for base in [self.sigma_a, self.sigma_b].into_iter().flatten() {
            let k0 = ((z.im - base.im) / (2.0 * PI)).round() as i64;
            for k in (k0 - 1)..=(k0 + 1) {
                let p = base + C64::new(0.0, 2.0 * PI * k as f64);
                d = d.min((z - p).norm());
            }
        }
        d
    }

    /// Distance from the segment [z0, z1] to the singular set.
    pub fn segment_distance(&self, z0: C64, z1: C64) -> f64 {
        let mut d = f64::INFINITY;
        for base in [self.sigma_a, self.sigma_b].into_iter().flatten() {
            let lo = z0.im.min(z1.im) - 2.0 * PI;
            let hi = z0.im.max(z1.im) + 2.0 * PI;
            let k_lo = ((lo - base.im) / (2.0 * PI)).floor() as i64;
            let k_hi = ((hi - base.im) / (2.0 * PI)).ceil() as i64;
            for k in k_lo..=k_hi {
                let p = base + C64::new(0.0, 2.0 * PI * k as f64);
                d = d.min(point_segment_distance(p, z0, z1));
            }
        }
        d
    }
}

fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Singular structure of e_*^{z H} under the K-expression.
pub fn singular_structure(k: &ExpressionParameter) -> SingularStructure {
    let one = C64::new(1.0, 0.0);
    let rho = k.rho();
    // D = e^{-z} P1(e^z) P2(e^z) with
    //   P1(w) = (1-c+rho) w + (1+c-rho),  P2(w) = (1-c-rho) w + (1+c+rho);
    // the singular lines sit at Re z = log |w_i| for the roots w_i.
    let c1 = one - k.c + rho;
    let c0 = one + k.c - rho;
    let d1 = one - k.c - rho;
    let d0 = one + k.c + rho;
    let line = |num: C64, den: C64| -> (f64, Option<C64>) {
        // root of den * w + num
        if den.norm() <= 1e-14 * (1.0 + num.norm()) {
            (f64::INFINITY, None)
        } else if num.norm() <= 1e-14 * (1.0 + den.norm()) {
            (f64::NEG_INFINITY, None)
        } else {
            let w = -num / den;
            let base = C64::new(w.norm().ln(), w.arg());
            (base.re, Some(base))
        }
    };
    let (a, sigma_a) = line(c0, c1);
    let (b, sigma_b) = line(d0, d1);
    let branching = (k.delta * k.delta_prime).norm() > 1e-14;

    let class = if sigma_a.is_none() && sigma_b.is_none() {
        KClass::NoSingularities
    } else {
        let finite_near_zero = (a.is_finite() && a.abs() <= GENERIC_TOL)
            || (b.is_finite() && b.abs() <= GENERIC_TOL);
        if finite_near_zero {
            KClass::NonGeneric
        } else {
            let lo = a.min(b);
            let hi = a.max(b);
            if lo > GENERIC_TOL {
                KClass::KPlus
            } else if hi < -GENERIC_TOL {
                KClass::KMinus
            } else {
                KClass::KZero
            }
        }
    };
    SingularStructure { a, b, sigma_a, sigma_b, class, branching }
}

pub(crate) fn d_of(z: C64, k: &ExpressionParameter) -> C64 {
    let half = z * 0.5;
    let e = half.sinh() * 2.0;
    let delta_big = half.cosh() * 2.0 - k.c * e;
    delta_big * delta_big - e * e * k.delta * k.delta_prime
}

pub(crate) fn quad_of(z: C64, k: &ExpressionParameter) -> Quad {
    let half = z * 0.5;
    let e = half.sinh() * 2.0;
    let delta_big = half.cosh() * 2.0 - k.c * e;
    let d = delta_big * delta_big - e * e * k.delta * k.delta_prime;
    Quad {
        qu: e * e * k.delta_prime / d,
        qv: e * e * k.delta / d,
        quv: e * delta_big / d,
    }
}

/// Sign-continuous evaluation state along a path in the z-plane.
#[derive(Clone)]
pub(crate) struct TraceRun<'a> {
    k: &'a ExpressionParameter,
    ss: SingularStructure,
    pub z: C64,
    sqrt_d: C64,
}

impl<'a> TraceRun<'a> {
    /// Start at the origin on the given sheet; sqrt(D(0)) = 2.
    pub fn start(k: &'a ExpressionParameter, sheet: i8) -> Self {
        TraceRun {
            k,
            ss: singular_structure(k),
            z: C64::new(0.0, 0.0),
            sqrt_d: C64::new(2.0 * sheet as f64, 0.0),
        }
    }

    /// Continue along the straight segment from the current point to z1.
    pub fn advance(&mut self, z1: C64) -> Result<()> {
        let dist = self.ss.segment_distance(self.z, z1);
        if dist < GENERIC_TOL {
            let bad = self
                .ss
                .lattice_near((self.z + z1) * 0.5, (z1 - self.z).norm() + 2.0 * PI)
                .into_iter()
                .min_by(|p, q| {
                    point_segment_distance(*p, self.z, z1)
                        .total_cmp(&point_segment_distance(*q, self.z, z1))
                })
                .unwrap_or(z1);
            return Err(StarError::PathHitsSingularity { z: bad, dist });
        }
        let z0 = self.z;
        let dz = z1 - z0;
        let len = dz.norm();
        if len == 0.0 {
            return Ok(());
        }
        // step cap: the argument of D along the segment cannot wind a full
        // turn within a step; D winds like the angle subtended at the nearest
        // lattice point plus the e^{+-z} scale of its factors.
        let max_h = (2.0 / (len * (1.0 / dist + 3.0))).min(1.0);
        let f = |t: f64| d_of(z0 + dz * t, self.k);
        let s = continue_sqrt(&f, self.sqrt_d, 1e-18, max_h).map_err(|e| {
            StarError::PathHitsSingularity { z: z0 + dz * e.t, dist: e.abs.sqrt() }
        })?;
        self.sqrt_d = s;
        self.z = z1;
        Ok(())
    }

    /// Current value of e^{alpha z} e_*^{z H} as a Gaussian element.
    pub fn element(&self, alpha: C64) -> GaussElement {
        let amp = C64::new(2.0, 0.0) / self.sqrt_d * (alpha * self.z).exp();
        GaussElement::pure(amp, quad_of(self.z, self.k))
    }

    /// +1 when the continued sqrt agrees with the principal branch at the
    /// current point, -1 otherwise.
    pub fn sheet(&self) -> i8 {
        let principal = d_of(self.z, self.k).sqrt();
        if (self.sqrt_d - principal).norm() <= (self.sqrt_d + principal).norm() {
            1
        } else {
            -1
        }
    }
}

pub(crate) fn trace_segment_from_origin(
    z: C64,
    alpha: C64,
    k: &ExpressionParameter,
) -> Result<GaussElement> {
    let mut run = TraceRun::start(k, 1);
    run.advance(z)?;
    Ok(run.element(alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(&self) -> i8 {
        match self {
            Sheet::Plus => 1,
            Sheet::Minus => -1,
        }
    }
}

/// A point of the double cover: (z, -) evaluates to the negation of (z, +).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SheetPoint {
    pub z: C64,
    pub sheet: Sheet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlitConvention {
    /// Vertical slits joining consecutive pairs of lattice points; used for
    /// half-integer alpha, where the two infinities split.
    BetweenSingularities,
    /// Horizontal slits running from each singular point to +infinity; used
    /// for integer alpha.
    ToInfinity,
}

/// A piecewise-linear path on the double cover.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SheetedPath {
    pub waypoints: Vec<C64>,
    pub start_sheet: Sheet,
    pub convention: SlitConvention,
}

impl SheetedPath {
    /// Path starting at the origin through the given waypoints.
    pub fn from_origin(mut waypoints: Vec<C64>, start_sheet: Sheet) -> Self {
        let zero = C64::new(0.0, 0.0);
        if waypoints.first().map(|w| (w - zero).norm() > 0.0).unwrap_or(true) {
            waypoints.insert(0, zero);
        }
        SheetedPath { waypoints, start_sheet, convention: SlitConvention::BetweenSingularities }
    }

    pub fn with_convention(mut self, convention: SlitConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn is_closed(&self) -> bool {
        match (self.waypoints.first(), self.waypoints.last()) {
            (Some(a), Some(b)) => (a - b).norm() < 1e-12,
            _ => false,
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        self.waypoints.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Number of slit crossings of the path under its convention.
pub fn crossing_count(path: &SheetedPath, k: &ExpressionParameter) -> usize {
    let ss = singular_structure(k);
    let mut slits: Vec<(C64, C64)> = Vec::new();
    let (mut im_lo, mut im_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut re_lo, mut re_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in &path.waypoints {
        im_lo = im_lo.min(w.im);
        im_hi = im_hi.max(w.im);
        re_lo = re_lo.min(w.re);
        re_hi = re_hi.max(w.re);
    }
    for base in [ss.sigma_a, ss.sigma_b].into_iter().flatten() {
        let k_lo = ((im_lo - base.im) / (2.0 * PI)).floor() as i64 - 2;
        let k_hi = ((im_hi - base.im) / (2.0 * PI)).ceil() as i64 + 2;
        for kk in k_lo..=k_hi {
            let p = base + C64::new(0.0, 2.0 * PI * kk as f64);
            match path.convention {
                SlitConvention::BetweenSingularities => {
                    // pair lattice points (2m, 2m+1) on each line
                    if kk.rem_euclid(2) == 0 {
                        slits.push((p, p + C64::new(0.0, 2.0 * PI)));
                    }
                }
                SlitConvention::ToInfinity => {
                    let far = re_hi.max(p.re) + 1.0;
                    slits.push((p, C64::new(far, p.im)));
                }
            }
        }
    }
    let mut count = 0;
    for (a, b) in path.segments() {
        for (s0, s1) in &slits {
            if segments_intersect(a, b, *s0, *s1) {
                count += 1;
            }
        }
    }
    count
}

fn orient(a: C64, b: C64, c: C64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_intersect(a: C64, b: C64, c: C64, d: C64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 * o2 < 0.0) && (o3 * o4 < 0.0)
}

/// Value of e_*^{z (alpha + H)} at the end of the path with the tracked
/// sheet sign. Paths must stay at least GENERIC_TOL away from the singular
/// set; crossing a slit just moves the point to the other sheet.
pub fn trace_star_exp(
    path: &SheetedPath,
    alpha: C64,
    k: &ExpressionParameter,
) -> Result<(GaussElement, Sheet)> {
    let mut run = TraceRun::start(k, path.start_sheet.sign());
    for (a, b) in path.segments() {
        if a == run.z || (a - run.z).norm() < 1e-15 {
            run.advance(b)?;
        } else {
            run.advance(a)?;
            run.advance(b)?;
        }
    }
    let sheet = if run.sheet() > 0 { Sheet::Plus } else { Sheet::Minus };
    Ok((run.element(alpha), sheet))
}

/// Evaluate at a sheet point along the default straight path from 0_+.
pub fn eval_sheet_point(p: &SheetPoint, alpha: C64, k: &ExpressionParameter) -> Result<GaussElement> {
    let g = trace_segment_from_origin(p.z, alpha, k)?;
    Ok(match p.sheet {
        Sheet::Plus => g,
        Sheet::Minus => g.scaled(C64::new(-1.0, 0.0)),
    })
}

/// The square of the polar element as a q-scalar: the star-exponential traced
/// to z = 2 pi i along the imaginary axis. -1 in the K+ and K- classes, +1 in
/// K0 (and for orderings without singular points).
pub fn q_scalar_square(k: &ExpressionParameter) -> Result<i32> {
    let ss = singular_structure(k);
    if ss.class == KClass::NonGeneric {
        return Err(StarError::NonGenericK);
    }
    let mut run = TraceRun::start(k, 1);
    run.advance(C64::new(0.0, 2.0 * PI))?;
    let g = run.element(C64::new(0.0, 0.0));
    let val = g.amplitude;
    if (val - 1.0).norm() < 1e-6 {
        Ok(1)
    } else if (val + 1.0).norm() < 1e-6 {
        Ok(-1)
    } else {
        Err(StarError::Invalid(format!(
            "q-scalar did not come back to +-1: {val}"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    /// H itself: (1/(i hbar)) u o v
    UoV,
    /// (1/(i hbar)) u * v = H - 1/2
    UStarV,
    /// (1/(i hbar)) v * u = H + 1/2
    VStarU,
}

impl Generator {
    /// Scalar shift alpha with e_*^{z G} = e^{alpha z} e_*^{z H}.
    pub fn alpha(&self) -> C64 {
        match self {
            Generator::UoV => C64::new(0.0, 0.0),
            Generator::UStarV => C64::new(-0.5, 0.0),
            Generator::VStarU => C64::new(0.5, 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodicityType {
    Periodic2Pi,
    Alternating2Pi,
}

/// Periodicity of e_*^{(s+it) G} in t with period 2 pi: inside the exchanging
/// interval the u o v generator is periodic and the u*v / v*u generators are
/// alternating; outside the pattern is complementary.
pub fn periodicity_type(
    s: f64,
    k: &ExpressionParameter,
    variant: Generator,
) -> Result<PeriodicityType> {
    let ss = singular_structure(k);
    for endpoint in [ss.a, ss.b] {
        if endpoint.is_finite() && (s - endpoint).abs() <= GENERIC_TOL {
            return Err(StarError::OnSingularLine { s });
        }
    }
    let inside = s > ss.a.min(ss.b) && s < ss.a.max(ss.b);
    let base_periodic = inside; // e_*^{z H} itself
    let flips = matches!(variant, Generator::UStarV | Generator::VStarU);
    let periodic = base_periodic != flips;
    Ok(if periodic {
        PeriodicityType::Periodic2Pi
    } else {
        PeriodicityType::Alternating2Pi
    })
}
