//! Residues and closed-path integrals of star-exponentials on the double
//! cover: Laurent coefficients at branch points, the winding-number residue
//! theorem, secondary residues, and principal values across branch points.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::branch::{self, SheetedPath, TraceRun};
use crate::cont::continue_sqrt;
use crate::error::{Result, StarError};
use crate::gauss::GaussElement;
use crate::gauss::Quad;
use crate::integral::{truncate_degree, QuadratureElement};
use crate::param::{C64, ExpressionParameter};
use crate::poly::WeylPolynomial;
use crate::quadrule;

/// Laurent data of e_*^{(sigma + s^2)(alpha + H)} at a singular point: the
/// odd coefficients a_{2k-1} in the local double-cover coordinate s. The
/// coefficients are entire functions times a fixed Gaussian; they are stored
/// with prefactors truncated at the requested degree.
pub struct LaurentData {
    pub sigma: C64,
    pub alpha: C64,
    pub coeffs: BTreeMap<i32, GaussElement>,
}

impl LaurentData {
    pub fn coeff(&self, k: i32) -> Option<&GaussElement> {
        self.coeffs.get(&k)
    }
}

/// The Gaussian factor common to all Laurent coefficients at a branch point:
/// exp(-(1/(2 i hbar))(u^2/delta + v^2/delta')).
pub fn residue_base_quad(k: &ExpressionParameter) -> Result<Quad> {
    if (k.delta * k.delta_prime).norm() <= 1e-14 {
        return Err(StarError::Invalid(
            "residue expansion requires branching singular points (delta delta' != 0)".into(),
        ));
    }
    let half = C64::new(-0.5, 0.0);
    Ok(Quad {
        qu: half / k.delta,
        qv: half / k.delta_prime,
        quv: C64::new(0.0, 0.0),
    })
}

fn phi_psi(z: C64, k: &ExpressionParameter) -> (C64, C64) {
    let half = z * 0.5;
    let e = half.sinh() * 2.0;
    let dl = half.cosh() * 2.0 - k.c * e;
    let rho = k.rho();
    (dl - rho * e, dl + rho * e)
}

/// Nearest singular point to sigma, or an error when sigma is regular.
fn confirm_singular(sigma: C64, k: &ExpressionParameter) -> Result<()> {
    let ss = branch::singular_structure(k);
    if ss.distance(sigma) > branch::GENERIC_TOL {
        return Err(StarError::NotASingularPoint { sigma });
    }
    Ok(())
}

/// Laurent coefficients a_{2k-1}(sigma, K) by quadrature of
/// s^{-2k} e_*^{(sigma+s^2)(alpha+H)} over the circle s = r e^{i theta};
/// the z-image winds twice around sigma and the branch is traced
/// continuously from the origin through `approach`.
#[allow(clippy::too_many_arguments)]
pub fn laurent_coefficients(
    sigma: C64,
    alpha: C64,
    k: &ExpressionParameter,
    k_lo: i32,
    k_hi: i32,
    radius: f64,
    nodes: usize,
    approach: Option<Vec<C64>>,
    prefactor_degree: u32,
) -> Result<LaurentData> {
    confirm_singular(sigma, k)?;
    let base = residue_base_quad(k)?;
    let mut run = TraceRun::start(k, 1);
    let start = sigma + radius * radius;
    for w in approach.unwrap_or_default() {
        run.advance(w)?;
    }
    run.advance(start)?;
    // sample the circle
    let mut samples: Vec<(C64, GaussElement)> = Vec::with_capacity(nodes);
    for j in 0..=nodes {
        let th = 2.0 * PI * j as f64 / nodes as f64;
        let s = C64::from_polar(radius, th);
        let z = sigma + s * s;
        run.advance(z)?;
        if j < nodes {
            samples.push((s, run.element(alpha)));
        } else {
            // double-cover consistency: after a full s-circle the value closes
            let closing = run.element(alpha);
            debug_assert!(
                (closing.amplitude - samples[0].1.amplitude).norm()
                    <= 1e-6 * samples[0].1.amplitude.norm().max(1e-30)
            );
        }
    }
    let mut coeffs = BTreeMap::new();
    for kk in k_lo..=k_hi {
        // a_{2k-1} = (1/(2 pi i)) oint s^{-2k} f ds = (1/n) sum s^{1-2k} f
        let mut q = QuadratureElement::empty(format!("a_{}(sigma={sigma})", 2 * kk - 1));
        for (s, g) in &samples {
            let w = s.powi(1 - 2 * kk) / nodes as f64;
            q.nodes.push((w, g.clone()));
        }
        coeffs.insert(kk, q.to_gauss_with_prefactor(base, prefactor_degree, k.hbar));
    }
    Ok(LaurentData { sigma, alpha, coeffs })
}

/// Raw quadrature route: the Laurent coefficients as unprojected node sums.
#[allow(clippy::too_many_arguments)]
pub fn laurent_coefficients_raw(
    sigma: C64,
    alpha: C64,
    k: &ExpressionParameter,
    k_lo: i32,
    k_hi: i32,
    radius: f64,
    nodes: usize,
    approach: Option<Vec<C64>>,
) -> Result<BTreeMap<i32, QuadratureElement>> {
    confirm_singular(sigma, k)?;
    let mut run = TraceRun::start(k, 1);
    let start = sigma + radius * radius;
    for w in approach.unwrap_or_default() {
        run.advance(w)?;
    }
    run.advance(start)?;
    let mut samples: Vec<(C64, GaussElement)> = Vec::with_capacity(nodes);
    for j in 0..nodes {
        let th = 2.0 * PI * j as f64 / nodes as f64;
        let s = C64::from_polar(radius, th);
        run.advance(sigma + s * s)?;
        samples.push((s, run.element(alpha)));
    }
    let mut out = BTreeMap::new();
    for kk in k_lo..=k_hi {
        let mut q = QuadratureElement::empty(format!("raw a_{}", 2 * kk - 1));
        for (s, g) in &samples {
            q.nodes.push((s.powi(1 - 2 * kk) / nodes as f64, g.clone()));
        }
        out.insert(kk, q);
    }
    Ok(out)
}

/// Closed-form route to the Laurent coefficients: series in the analytic
/// data of the vanishing factor, anchored to the same branch as the traced
/// quadrature. Independent of `laurent_coefficients` except for sharing the
/// branch normalization at one reference point.
#[allow(clippy::too_many_arguments)]
pub fn laurent_series(
    sigma: C64,
    alpha: C64,
    k: &ExpressionParameter,
    k_lo: i32,
    k_hi: i32,
    m_max: usize,
    prefactor_degree: u32,
    wradius: f64,
    wnodes: usize,
) -> Result<LaurentData> {
    confirm_singular(sigma, k)?;
    let base = residue_base_quad(k)?;
    let ih = k.i_hbar();
    let rho = k.rho();
    // square roots of delta, delta' compatible with rho
    let mut sd = k.delta.sqrt();
    let sdp = k.delta_prime.sqrt();
    if (sd * sdp - rho).norm() > (sd * sdp + rho).norm() {
        sd = -sd;
    }
    let (phi_s, psi_s) = phi_psi(sigma, k);
    let psi_vanishes = psi_s.norm() < phi_s.norm();
    // A_van couples to the vanishing factor; A_oth to the other one.
    let a_plus = WeylPolynomial::term(1, 0, C64::new(1.0, 0.0) / sd)
        .add(&WeylPolynomial::term(0, 1, C64::new(1.0, 0.0) / sdp));
    let a_minus = WeylPolynomial::term(1, 0, C64::new(1.0, 0.0) / sd)
        .sub(&WeylPolynomial::term(0, 1, C64::new(1.0, 0.0) / sdp));
    let (a_van, a_oth) = if psi_vanishes { (a_minus, a_plus) } else { (a_plus, a_minus) };
    let x_van = a_van.mul(&a_van).scaled(C64::new(0.25, 0.0) / ih);
    let x_oth = a_oth.mul(&a_oth).scaled(C64::new(0.25, 0.0) / ih);

    let van = |z: C64| {
        let (p, q) = phi_psi(z, k);
        if psi_vanishes { q } else { p }
    };
    let oth = |z: C64| {
        let (p, q) = phi_psi(z, k);
        if psi_vanishes { p } else { q }
    };

    // branch alignment: traced sqrt(D) at z_ref = sigma + wr equals
    // sqrt(w) * root(w) with root = sqrt(van/w * oth); fix root's sign there.
    let mut run = TraceRun::start(k, 1);
    let zref = sigma + wradius;
    run.advance(zref)?;
    let traced_sqrt_d = C64::new(2.0, 0.0) / run.element(C64::new(0.0, 0.0)).amplitude;
    let root_ref_sq = van(zref) / wradius * oth(zref);
    let mut root_ref = root_ref_sq.sqrt();
    let wr_sqrt = C64::new(wradius.sqrt(), 0.0);
    if (wr_sqrt * root_ref - traced_sqrt_d).norm() > (wr_sqrt * root_ref + traced_sqrt_d).norm() {
        root_ref = -root_ref;
    }

    // g(w) = w * oth / van (analytic, g(0) = singular-part coefficient)
    let g_of = |w: C64| w * oth(sigma + w) / van(sigma + w);
    // Taylor coefficients of g by a Cauchy circle
    let mut g_taylor = vec![C64::new(0.0, 0.0); m_max + 2];
    for j in 0..wnodes {
        let th = 2.0 * PI * j as f64 / wnodes as f64;
        let w = C64::from_polar(wradius, th);
        let gv = g_of(w);
        for (m, gm) in g_taylor.iter_mut().enumerate() {
            *gm += gv * C64::from_polar(wradius.powi(-(m as i32)), -(m as f64) * th)
                / wnodes as f64;
        }
    }
    let g0 = g_taylor[0];

    // h(w) = exp(gtilde(w) X_van) exp((van/oth)(w) X_oth) e^{alpha w}
    //        * 2 / (sqrt(van/w) sqrt(oth)) with the aligned branch,
    // where gtilde(w) = (g(w) - g0)/w. Polynomial-valued Taylor by Cauchy.
    let mmax_needed = (m_max as i32 + k_hi.max(0)) as usize;
    let mut h_taylor: Vec<WeylPolynomial> = vec![WeylPolynomial::zero(); mmax_needed + 1];
    let exp_trunc = |p: &WeylPolynomial, deg: u32| -> WeylPolynomial {
        let mut acc = WeylPolynomial::one();
        let mut term = WeylPolynomial::one();
        let mut m = 1.0;
        loop {
            term = truncate_degree(&term.mul(p), deg).scaled(C64::new(1.0 / m, 0.0));
            if term.is_zero() || m > deg as f64 {
                break;
            }
            acc = acc.add(&term);
            m += 1.0;
        }
        acc
    };
    // continuation of root(w) = sqrt(van/w * oth) around the w-circle
    let root_sq_of = |th: f64| {
        let w = C64::from_polar(wradius, th);
        van(sigma + w) / w * oth(sigma + w)
    };
    let mut roots: Vec<C64> = Vec::with_capacity(wnodes);
    let mut cur_root = root_ref;
    let mut cur_sq = root_sq_of(0.0);
    roots.push(cur_root);
    for j in 1..wnodes {
        let th0 = 2.0 * PI * (j - 1) as f64 / wnodes as f64;
        let th1 = 2.0 * PI * j as f64 / wnodes as f64;
        let f = |t: f64| root_sq_of(th0 + (th1 - th0) * t);
        cur_root = continue_sqrt(&f, cur_root, 1e-18, 0.5)
            .map_err(|_| StarError::Invalid("root continuation failed".into()))?;
        cur_sq = f(1.0);
        roots.push(cur_root);
    }
    let _ = cur_sq;
    for j in 0..wnodes {
        let th = 2.0 * PI * j as f64 / wnodes as f64;
        let w = C64::from_polar(wradius, th);
        let gtilde = (g_of(w) - g0) / w;
        let f1 = exp_trunc(&x_van.scaled(gtilde), prefactor_degree);
        let ratio = van(sigma + w) / oth(sigma + w);
        let f2 = exp_trunc(&x_oth.scaled(ratio), prefactor_degree);
        let scalar = (alpha * w).exp() * C64::new(2.0, 0.0) / roots[j];
        let hval = truncate_degree(&f1.mul(&f2), prefactor_degree).scaled(scalar);
        for (m, hm) in h_taylor.iter_mut().enumerate() {
            let cw = C64::from_polar(wradius.powi(-(m as i32)), -(m as f64) * th) / wnodes as f64;
            *hm = hm.add(&hval.scaled(cw));
        }
    }

    // a_{2k-1} = e^{alpha sigma} e^{Q0} sum_m (g0 X_van)^m / m! h_{m+k}
    let mut coeffs = BTreeMap::new();
    let scalar = (alpha * sigma).exp();
    for kk in k_lo..=k_hi {
        let mut acc = WeylPolynomial::zero();
        let mut pow = WeylPolynomial::one();
        let mut mfact = 1.0;
        for m in 0..=m_max {
            if m > 0 {
                pow = truncate_degree(&pow.mul(&x_van.scaled(g0)), prefactor_degree);
                mfact *= m as f64;
            }
            let idx = m as i32 + kk;
            if idx < 0 {
                continue;
            }
            let idx = idx as usize;
            if idx >= h_taylor.len() {
                continue;
            }
            acc = acc.add(&truncate_degree(&pow.mul(&h_taylor[idx]), prefactor_degree)
                .scaled(C64::new(1.0 / mfact, 0.0)));
        }
        coeffs.insert(
            kk,
            GaussElement::with_prefactor(scalar, base, acc),
        );
    }
    Ok(LaurentData { sigma, alpha, coeffs })
}

/// Integral of e_*^{z (alpha + H)} dz along a closed piecewise-linear path.
/// Fails on open paths and on paths with an odd effective sheet monodromy.
pub fn closed_path_integral(
    path: &SheetedPath,
    alpha: C64,
    k: &ExpressionParameter,
    nodes_per_segment: usize,
) -> Result<QuadratureElement> {
    if !path.is_closed() {
        return Err(StarError::OpenPath);
    }
    let mut run = TraceRun::start(k, path.start_sheet.sign());
    // approach the starting point
    let first = path.waypoints[0];
    run.advance(first)?;
    let start_sqrt_sign = run.element(C64::new(0.0, 0.0)).amplitude;
    let (x, w) = quadrule::gauss_legendre(nodes_per_segment);
    let mut nodes = Vec::new();
    for (a, b) in path.segments() {
        let dz = b - a;
        for i in 0..nodes_per_segment {
            let t = 0.5 * (x[i] + 1.0);
            run.advance(a + dz * t)?;
            nodes.push((dz * (0.5 * w[i]), run.element(alpha)));
        }
        run.advance(b)?;
    }
    let end_sqrt_sign = run.element(C64::new(0.0, 0.0)).amplitude;
    if (start_sqrt_sign - end_sqrt_sign).norm() > 1e-6 * start_sqrt_sign.norm() {
        return Err(StarError::OddCrossings);
    }
    Ok(QuadratureElement { nodes, meta: format!("closed path integral alpha={alpha}") })
}

/// Residue through the winding theorem: the integral of
/// e_*^{z(alpha+H)} d sqrt(z - sigma) over the closed path traversed twice
/// equals (winding number around sigma) x Res(sigma, alpha, K), even when
/// other singular points lie inside; 0 when sigma is regular.
pub fn residue_via_winding(
    path: &SheetedPath,
    sigma: C64,
    alpha: C64,
    k: &ExpressionParameter,
    nodes_per_segment: usize,
    prefactor_degree: u32,
) -> Result<GaussElement> {
    if !path.is_closed() {
        return Err(StarError::OpenPath);
    }
    let base = residue_base_quad(k)?;
    let mut run = TraceRun::start(k, path.start_sheet.sign());
    let first = path.waypoints[0];
    run.advance(first)?;
    let mut sq = (first - sigma).sqrt();
    let mut prev = first;
    let (x, w) = quadrule::gauss_legendre(nodes_per_segment);
    let mut nodes = Vec::new();
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    for _lap in 0..2 {
        for (a, b) in path.segments() {
            let dz = b - a;
            for i in 0..nodes_per_segment {
                let t = 0.5 * (x[i] + 1.0);
                let z = a + dz * t;
                run.advance(z)?;
                // continue sqrt(z - sigma) from the previous sample
                let f = |s: f64| (prev + (z - prev) * s) - sigma;
                let len = (z - prev).norm().max(1e-12);
                let dist = ((prev - sigma).norm().min((z - sigma).norm())).max(1e-12);
                sq = continue_sqrt(&f, sq, 1e-20, (dist / len).min(1.0))
                    .map_err(|e| StarError::PathHitsSingularity { z: sigma, dist: e.abs.sqrt() })?;
                prev = z;
                let weight = dz * (0.5 * w[i]) / (sq * 2.0) / two_pi_i;
                nodes.push((weight, run.element(alpha)));
            }
            run.advance(b)?;
            let f = |s: f64| (prev + (b - prev) * s) - sigma;
            let len = (b - prev).norm().max(1e-12);
            let dist = ((prev - sigma).norm().min((b - sigma).norm())).max(1e-12);
            sq = continue_sqrt(&f, sq, 1e-20, (dist / len).min(1.0))
                .map_err(|e| StarError::PathHitsSingularity { z: sigma, dist: e.abs.sqrt() })?;
            prev = b;
        }
    }
    let q = QuadratureElement { nodes, meta: format!("winding residue at {sigma}") };
    Ok(q.to_gauss_with_prefactor(base, prefactor_degree, k.hbar))
}

/// Residue over a small circle around sigma itself, with the local
/// double-cover parameterization z = sigma + s^2.
pub fn residue_at(
    sigma: C64,
    alpha: C64,
    k: &ExpressionParameter,
    radius: f64,
    nodes: usize,
    prefactor_degree: u32,
) -> Result<GaussElement> {
    let data = laurent_coefficients(sigma, alpha, k, 0, 0, radius, nodes, None, prefactor_degree)?;
    Ok(data.coeffs.into_values().next().unwrap())
}

/// Secondary residue a_{-2}: the coefficient of s^{-2}, extracted by
/// (1/(2 pi i)) oint s f(s) ds. Vanishes identically at branch points.
pub fn secondary_residue(
    sigma: C64,
    alpha: C64,
    k: &ExpressionParameter,
    radius: f64,
    nodes: usize,
) -> Result<QuadratureElement> {
    confirm_singular(sigma, k)?;
    let mut run = TraceRun::start(k, 1);
    run.advance(sigma + radius * radius)?;
    let mut q = QuadratureElement::empty(format!("secondary residue at {sigma}"));
    for j in 0..nodes {
        let th = 2.0 * PI * j as f64 / nodes as f64;
        let s = C64::from_polar(radius, th);
        run.advance(sigma + s * s)?;
        // (1/(2 pi i)) f(s) s ds = (1/(2 pi i)) f s (i s) dtheta
        let wgt = s * s / nodes as f64;
        q.nodes.push((wgt, run.element(alpha)));
    }
    Ok(q)
}

/// Integral of psi(s) e_*^{(z0+s^2)(alpha+H)} ds over the s-circle (the
/// z-image winds twice); psi is given through integer powers of s. Supported
/// only on singular z0: vanishes whenever z0 is regular.
pub fn psi_weighted_integral(
    z0: C64,
    alpha: C64,
    k: &ExpressionParameter,
    psi_powers: &[(i32, C64)],
    radius: f64,
    nodes: usize,
) -> Result<QuadratureElement> {
    let mut run = TraceRun::start(k, 1);
    run.advance(z0 + radius * radius)?;
    let mut q = QuadratureElement::empty(format!("psi-weighted integral at {z0}"));
    for j in 0..nodes {
        let th = 2.0 * PI * j as f64 / nodes as f64;
        let s = C64::from_polar(radius, th);
        run.advance(z0 + s * s)?;
        let mut psi = C64::new(0.0, 0.0);
        for (p, cp) in psi_powers {
            psi += cp * s.powi(*p);
        }
        // ds = i s dtheta
        let wgt = psi * s * C64::new(0.0, 1.0) * (2.0 * PI / nodes as f64);
        q.nodes.push((wgt, run.element(alpha)));
    }
    Ok(q)
}

/// Principal-value period integral along a singular line: (1/(2 pi)) times
/// vp-int_0^{2 pi} e_*^{(s_line + i tau)(alpha + H)} d tau, where the line
/// Re z = s_line carries one branch point per period. The passage through the
/// branch point is deformed onto the side where the essential singularity
/// decays; the arc contribution vanishes in the small-radius limit.
pub fn vp_line_integral(
    s_line: f64,
    alpha: C64,
    k: &ExpressionParameter,
    total_nodes: usize,
    detour: f64,
) -> Result<QuadratureElement> {
    let ss = branch::singular_structure(k);
    // locate the branch point on the window (0, 2 pi)
    let mut tau0: Option<f64> = None;
    for basept in [ss.sigma_a, ss.sigma_b].into_iter().flatten() {
        if (basept.re - s_line).abs() < 1e-9 {
            let mut t = basept.im.rem_euclid(2.0 * PI);
            if t < 1e-9 {
                t += 2.0 * PI;
            }
            tau0 = Some(t);
        }
    }
    let Some(tau0) = tau0 else {
        return Err(StarError::OnSingularLine { s: s_line });
    };
    let sigma = C64::new(s_line, tau0);
    // decay-side detection: essential exponent coefficient at a real probe
    let probe = (C64::new(0.9, 0.0), C64::new(0.4, 0.0));
    let decay_sign = {
        let eval_growth = |side: f64| {
            let z = sigma + C64::new(side * detour, 0.0);
            let q = branch::quad_of(z, k);
            let ih = k.i_hbar();
            let e = (q.qu * probe.0 * probe.0
                + q.qv * probe.1 * probe.1
                + q.quv * probe.0 * probe.1 * 2.0)
                / ih;
            e.re
        };
        if eval_growth(1.0) < eval_growth(-1.0) {
            1.0
        } else {
            -1.0
        }
    };
    let mid = C64::new(s_line + decay_sign * detour, tau0);
    // path: (s,0) -> (s, tau0 - detour) -> mid -> (s, tau0 + detour) -> (s, 2 pi)
    let p0 = C64::new(s_line, 0.0);
    let p1 = C64::new(s_line, tau0 - detour);
    let p2 = C64::new(s_line, tau0 + detour);
    let p3 = C64::new(s_line, 2.0 * PI);
    let mut run = TraceRun::start(k, 1);
    run.advance(p0)?;
    let mut q = QuadratureElement::empty(format!("vp line integral at Re z = {s_line}"));
    // graded panels toward the branch point on the two long segments
    let legs: Vec<(C64, C64, bool)> = vec![
        (p0, p1, true),   // grade toward the end
        (p1, mid, false), // short detour legs: plain rule
        (mid, p2, false),
        (p2, p3, false), // grade toward the start, handled below by reversal flag
    ];
    let (panels, npp) = quadrule::panels_for(total_nodes / 2);
    for (idx, (a, b, grade_end)) in legs.iter().enumerate() {
        let rule = quadrule::composite_unit(panels.max(4), npp);
        for (t, w) in rule {
            // smooth grading: cluster points near the singular endpoint
            let (tt, jac) = if idx == 0 && *grade_end {
                // t' = 1-(1-t)^3 clusters at t=1
                let s = 1.0 - (1.0 - t).powi(3);
                (s, 3.0 * (1.0 - t).powi(2))
            } else if idx == 3 {
                // cluster at t=0
                (t.powi(3), 3.0 * t * t)
            } else {
                (t, 1.0)
            };
            let z = a + (b - a) * tt;
            run.advance(z)?;
            let weight = (b - a) * (w * jac) / C64::new(0.0, 2.0 * PI);
            q.nodes.push((weight, run.element(alpha)));
        }
        run.advance(*b)?;
    }
    Ok(q)
}
