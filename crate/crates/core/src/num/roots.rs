//! Scalar root finding (Brent) and unimodal maximization (golden section).

/// Find a root of `f` in `[a, b]` with Brent's method.
///
/// `fa` and `fb` are the already-computed endpoint values and must bracket
/// a sign change (`fa * fb <= 0`); returns `None` otherwise. Iteration
/// stops when the bracket shrinks below `xtol + rtol * |x|` or `|f(x)|`
/// drops to `ftol` (pass `0.0` to disable the residual test).
pub fn brent_root(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    rtol: f64,
    ftol: f64,
) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = b - a;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            // b must carry the best (smallest-residual) iterate.
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (xtol + rtol * b.abs());
        let mid = 0.5 * (c - b);
        if mid.abs() <= tol || fb == 0.0 || fb.abs() <= ftol {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // Attempt inverse quadratic interpolation (secant when a == c).
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * mid * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * mid * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * mid * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = mid;
                e = mid;
            }
        } else {
            d = mid;
            e = mid;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol {
            d
        } else if mid > 0.0 {
            tol
        } else {
            -tol
        };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = b - a;
        }
    }
    Some(b)
}

/// Maximize a unimodal `f` on `[a, b]` by golden-section search.
///
/// Returns `(x, f(x))` once the interval shrinks below `xtol`. Ties favor
/// the left (smaller-argument) side.
pub fn golden_max(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
