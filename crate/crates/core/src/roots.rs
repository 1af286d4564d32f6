//! Bracketed scalar root finding.
//!
//! All inversions in this crate are of monotone functions on a known
//! interval, so a sign-change bracket is always available. The solver keeps
//! the bracket and reports both ends; callers that need a point on a
//! particular side of the root (e.g. the feasible side of a projection) pick
//! the appropriate end instead of the interpolated estimate.

/// Final bracket around a root: `f(neg) ≤ 0 ≤ f(pos)`. `neg` may lie on
/// either side of `pos` depending on whether `f` increases or decreases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub neg: f64,
    pub f_neg: f64,
    pub pos: f64,
    pub f_pos: f64,
    pub evaluations: usize,
}

impl Bracket {
    /// End with the smaller residual magnitude.
    pub fn best(&self) -> f64 {
        if self.f_neg.abs() <= self.f_pos.abs() {
            self.neg
        } else {
            self.pos
        }
    }
}

/// Stopping rule: `|hi - lo| ≤ x_abs + x_rel·|x|` or `|f| ≤ f_abs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub x_abs: f64,
    pub x_rel: f64,
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            x_abs: 0.0,
            x_rel: 1e-12,
            f_abs: 0.0,
            max_iter: 200,
        }
    }
}

/// Brent's method on `[a, b]` given `f(a)` and `f(b)` of opposite sign (or
/// zero). Returns `None` when the values do not bracket a root.
///
/// Non-finite function values are tolerated as long as their sign is
/// meaningful: interpolation steps fall back to bisection.
pub fn brent(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    tol: Tolerance,
) -> Option<Bracket> {
    if fa.is_nan() || fb.is_nan() || fa * fb > 0.0 {
        return None;
    }
    let finish = |x: f64, fx: f64, y: f64, fy: f64, evaluations| {
        let (neg, f_neg, pos, f_pos) = if fx <= 0.0 && fy >= 0.0 {
            (x, fx, y, fy)
        } else {
            (y, fy, x, fx)
        };
        Some(Bracket {
            neg,
            f_neg,
            pos,
            f_pos,
            evaluations,
        })
    };
    if fa == 0.0 {
        return finish(a, fa, a, fa, 0);
    }
    if fb == 0.0 {
        return finish(b, fb, b, fb, 0);
    }

    // Classic zeroin: b is the best estimate, c the contrapoint.
    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut evaluations = 0;
    for _ in 0..tol.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.x_abs + tol.x_rel * b.abs());
        let xm = 0.5 * (c - b);
        if fb == 0.0 {
            return finish(b, fb, b, fb, evaluations);
        }
        if xm.abs() <= tol1 || fb.abs() <= tol.f_abs {
            return finish(b, fb, c, fc, evaluations);
        }
        let interpolate = e.abs() >= tol1 && fa.abs() > fb.abs() && fa.is_finite() && fc.is_finite();
        if interpolate {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        evaluations += 1;
        if fb.is_nan() {
            return None;
        }
    }
    finish(b, fb, c, fc, evaluations)
}

/// Convenience wrapper evaluating both ends first.
pub fn brent_on(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Option<Bracket> {
    let fa = f(a);
    let fb = f(b);
    brent(f, a, fa, b, fb, tol).map(|mut br| {
        br.evaluations += 2;
        br
    })
}

/// Newton's method safeguarded by a sign-change bracket.
///
/// `f` returns the value and derivative. Steps leaving the bracket, or not
/// at least halving the previous step, are replaced by bisection. Once a
/// Newton step drops below the tolerance the iterate is pushed just past the
/// root so that the returned bracket is tight on both sides.
pub fn newton(
    mut f: impl FnMut(f64) -> (f64, f64),
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    x0: f64,
    tol: Tolerance,
) -> Option<Bracket> {
    if fa.is_nan() || fb.is_nan() || fa * fb > 0.0 {
        return None;
    }
    if fa == 0.0 {
        return Some(Bracket { neg: a, f_neg: fa, pos: a, f_pos: fa, evaluations: 0 });
    }
    if fb == 0.0 {
        return Some(Bracket { neg: b, f_neg: fb, pos: b, f_pos: fb, evaluations: 0 });
    }
    let (mut neg, mut f_neg, mut pos, mut f_pos) = if fa < 0.0 { (a, fa, b, fb) } else { (b, fb, a, fa) };
    let inside = |x: f64, p: f64, q: f64| x.is_finite() && (x - p) * (x - q) < 0.0;
    let mut x = if inside(x0, a, b) { x0 } else { 0.5 * (a + b) };
    let mut last_step = (b - a).abs();
    let mut evaluations = 0;
    for _ in 0..tol.max_iter {
        let (fx, dfx) = f(x);
        evaluations += 1;
        if fx.is_nan() {
            return None;
        }
        if fx == 0.0 {
            return Some(Bracket { neg: x, f_neg: fx, pos: x, f_pos: fx, evaluations });
        }
        if fx < 0.0 {
            neg = x;
            f_neg = fx;
        } else {
            pos = x;
            f_pos = fx;
        }
        let t = tol.x_abs + tol.x_rel * x.abs() + 2.0 * f64::EPSILON * x.abs();
        if (pos - neg).abs() <= t || fx.abs() <= tol.f_abs {
            break;
        }
        let mut next = x - fx / dfx;
        if !inside(next, neg, pos) || (next - x).abs() > 0.5 * last_step {
            next = 0.5 * (neg + pos);
        } else if (next - x).abs() <= t {
            // Converged: step past the root to close the bracket.
            let toward = if fx < 0.0 { pos } else { neg };
            next += t.copysign(toward - x);
            if !inside(next, neg, pos) {
                next = 0.5 * (neg + pos);
            }
        }
        last_step = (next - x).abs();
        x = next;
    }
    Some(Bracket { neg, f_neg, pos, f_pos, evaluations })
}
