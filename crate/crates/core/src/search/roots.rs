//! Brent's method for scalar roots.

use crate::error::{Error, Result};

/// Root of `f` on `[lo, hi]`, which must bracket a sign change.
///
/// Stops once the bracket is narrower than `xtol` (plus a relative term of a
/// few ulps) or an exact zero is hit.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    what: &'static str,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootBracketFailure { what, lo, hi });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, or secant when only two
            // distinct points are available.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}

/// Widens `[lo, hi]` geometrically inside `domain` until `f` changes sign,
/// then runs [`brent`].
pub fn bracket_and_solve<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    domain: (f64, f64),
    xtol: f64,
    what: &'static str,
) -> Result<f64> {
    let (mut a, mut b) = (lo.max(domain.0), hi.min(domain.1));
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..60 {
        if fa.signum() != fb.signum() || fa == 0.0 || fb == 0.0 {
            return brent(f, a, b, xtol, what);
        }
        let w = b - a;
        if fa.abs() < fb.abs() {
            a = (a - 0.6 * w).max(domain.0);
            fa = f(a);
        } else {
            b = (b + 0.6 * w).min(domain.1);
            fb = f(b);
        }
        if a == domain.0 && b == domain.1 && fa.signum() == fb.signum() {
            break;
        }
    }
    Err(Error::NoRoot { what })
}
