//! Continuous branch tracking for square roots along parameterized paths.

use crate::param::C64;

#[derive(Debug, Clone, Copy)]
pub struct SqrtFail {
    /// parameter in [0,1] where the radicand became too small
    pub t: f64,
    pub abs: f64,
}

/// Continue the square root of `f(t)` for t in [0,1], starting from a known
/// branch value `sqrt0` with sqrt0^2 = f(0).
///
/// Steps are subdivided until the radicand ratio between consecutive samples
/// stays close to 1, so the principal square root of each ratio is the
/// continuous one. `max_h` caps the step size; the caller must choose it
/// small enough that the argument of f cannot wind a full turn within one
/// step (the ratio test alone cannot see whole windings).
pub fn continue_sqrt(
    f: &dyn Fn(f64) -> C64,
    sqrt0: C64,
    floor: f64,
    max_h: f64,
) -> Result<C64, SqrtFail> {
    let max_h = max_h.clamp(1e-6, 1.0);
    let mut t = 0.0f64;
    let mut w = f(0.0);
    if w.norm() < floor {
        return Err(SqrtFail { t: 0.0, abs: w.norm() });
    }
    let mut s = sqrt0;
    let mut h = max_h;
    while t < 1.0 {
        let t_next = (t + h).min(1.0);
        let w_next = f(t_next);
        if w_next.norm() < floor {
            return Err(SqrtFail { t: t_next, abs: w_next.norm() });
        }
        let ratio = w_next / w;
        if (ratio - 1.0).norm() > 0.5 {
            h *= 0.5;
            if h < 1e-13 {
                return Err(SqrtFail { t, abs: w.norm() });
            }
            continue;
        }
        s *= ratio.sqrt();
        w = w_next;
        t = t_next;
        h = (h * 1.9).min(max_h);
    }
    Ok(s)
}
