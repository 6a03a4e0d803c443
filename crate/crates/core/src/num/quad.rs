//! Adaptive Simpson quadrature.

/// Integrate `f` over `[a, b]` with adaptive Simpson's rule.
///
/// Subdivision stops once the Richardson error estimate on a panel drops
/// below its share of `tol` (an absolute tolerance) or the recursion
/// reaches `MAX_DEPTH`. The classic `|S2 - S1| / 15` estimate is used and
/// the returned value includes the Richardson correction term.
pub fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 0)
}

const MAX_DEPTH: usize = 60;

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}
