//! Safeguarded line search along a descent direction.
//!
//! Trial steps come from secant or quadratic interpolation of the 1-D
//! restriction; every accepted step satisfies the Armijo condition
//! `f(t) ≤ f(0) + c t f'(0)`, or its rounding-tolerant form near a minimizer:
//! `f(t) ≤ f(0) + δ` together with `-0.9|f'(0)| ≤ f'(t) ≤ 0.8|f'(0)|`, where
//! `δ` is the caller's estimate of the rounding error in `f`.
//! The search stops early once the directional derivative has dropped to a
//! tenth of its initial magnitude.

#[derive(Debug, Clone, Copy)]
pub(crate) struct LineSearch {
    pub c1: f64,
    pub shrink: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Step {
    pub t: f64,
    pub f: f64,
}

impl LineSearch {
    /// `phi(t)` returns the value and derivative along the line. `d0 < 0`;
    /// `noise` bounds the rounding error of `f`.
    pub fn search(
        &self,
        f0: f64,
        d0: f64,
        t0: f64,
        noise: f64,
        mut phi: impl FnMut(f64) -> (f64, f64),
    ) -> Option<Step> {
        debug_assert!(d0 < 0.0);
        let mut lo = (0.0, f0, d0);
        let mut prev_lo = lo;
        let mut hi: Option<(f64, f64, f64)> = None;
        let mut best: Option<Step> = None;
        let mut t = t0;
        for _ in 0..self.max_evals {
            let (f, d) = phi(t);
            let level = f.is_finite() && f <= f0 + noise;
            let armijo = f.is_finite() && f <= f0 + self.c1 * t * d0;
            let wolfe = level && d >= 0.9 * d0 && d <= -0.8 * d0;
            if armijo || wolfe {
                if level && d.abs() <= 0.1 * d0.abs() {
                    return Some(Step { t, f });
                }
                if best.map_or(true, |b| f < b.f) {
                    best = Some(Step { t, f });
                }
            }
            if level && d < 0.0 {
                prev_lo = lo;
                lo = (t, f, d);
            } else {
                hi = Some((t, f, d));
            }
            t = match hi {
                None => {
                    // still descending: secant on the derivative, else expand
                    let (tl, _, dl) = lo;
                    let (tp, _, dp) = prev_lo;
                    let grow = if dl > dp { tl - dl * (tl - tp) / (dl - dp) } else { 4.0 * tl };
                    grow.clamp(1.5 * tl, 8.0 * tl)
                }
                Some((th, fh, dh)) => {
                    let (tl, fl, dl) = lo;
                    let w = th - tl;
                    let cand = if f.is_finite() && fh.is_finite() && dh.is_finite() && dh > 0.0 {
                        tl - dl * w / (dh - dl)
                    } else if fh.is_finite() {
                        let denom = 2.0 * (fh - fl - dl * w);
                        if denom > 0.0 {
                            tl - dl * w * w / denom
                        } else {
                            tl + self.shrink * w
                        }
                    } else {
                        tl + self.shrink * w
                    };
                    cand.clamp(tl + 0.01 * w, tl + 0.9 * w)
                }
            };
            if !(t > 0.0) || !t.is_finite() {
                break;
            }
        }
        best
    }
}
