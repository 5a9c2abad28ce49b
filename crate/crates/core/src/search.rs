//! One-dimensional search primitives shared by the scheme solvers.
//!
//! Every bisection here is capped at [`MAX_BISECTION_ITERS`] iterations and
//! reports [`Error::NoConvergence`] instead of returning a half-converged
//! point.

use crate::error::{Error, Result};

pub const MAX_BISECTION_ITERS: usize = 200;

/// Relative bracket width at which root bisections stop.
pub const ROOT_REL_TOL: f64 = 1e-12;

/// Relative interval width at which golden-section refinement stops.
pub const GOLDEN_REL_WIDTH: f64 = 1e-9;

/// Bisects the boundary of a monotone predicate.
///
/// `pred(fail)` must be false and `pred(pass)` true; the two points may be in
/// either numeric order. Returns the final `(fail, pass)` pair, which
/// brackets the boundary to `rel_tol` relative width (or to adjacent floats,
/// whichever comes first).
pub fn bisect_boundary<P>(
    mut fail: f64,
    mut pass: f64,
    rel_tol: f64,
    what: &'static str,
    mut pred: P,
) -> Result<(f64, f64)>
where
    P: FnMut(f64) -> bool,
{
    for _ in 0..MAX_BISECTION_ITERS {
        let width = (pass - fail).abs();
        if width <= rel_tol * fail.abs().max(pass.abs()) {
            return Ok((fail, pass));
        }
        let mid = 0.5 * (fail + pass);
        if mid == fail || mid == pass {
            return Ok((fail, pass));
        }
        if pred(mid) {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: MAX_BISECTION_ITERS,
    })
}

/// Root of `f` on a sign-change bracket `[a, b]`, returned as the bracket
/// endpoint on the `f <= 0` side.
pub fn bisect_root<F>(a: f64, b: f64, what: &'static str, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    if fa <= 0.0 && fb <= 0.0 {
        return Ok(if fa == 0.0 { a } else { b });
    }
    let (fail, pass) = match (fa <= 0.0, fb <= 0.0) {
        (false, true) => (a, b),
        (true, false) => (b, a),
        _ => return Err(Error::domain(format!("{what}: bracket has no sign change"))),
    };
    let (_, root) = bisect_boundary(fail, pass, ROOT_REL_TOL, what, |x| f(x) <= 0.0)?;
    Ok(root)
}

/// Golden-section minimisation of `f` over `[a, b]`.
///
/// Returns `(x_min, f_min)`. Assumes `f` is unimodal on the interval; on a
/// multimodal interval it still returns a point no worse than the probes it
/// made.
pub fn golden_section_min<F>(mut a: f64, mut b: f64, rel_width: f64, mut f: F) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_BISECTION_ITERS {
        if (b - a).abs() <= rel_width * 0.5 * (a.abs() + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Smallest integer in `[lo, hi]` satisfying a monotone (false..true)
/// predicate.
pub fn smallest_satisfying<P>(lo: u32, hi: u32, mut pred: P) -> Option<u32>
where
    P: FnMut(u32) -> bool,
{
    if lo > hi || !pred(hi) {
        return None;
    }
    let (mut fail, mut pass) = (lo, hi);
    if pred(lo) {
        return Some(lo);
    }
    while pass - fail > 1 {
        let mid = fail + (pass - fail) / 2;
        if pred(mid) {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    Some(pass)
}

/// Evenly spaced grid over `[a, b]` with `n >= 2` points, endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let step = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
    v[n - 1] = b;
    v
}

/// Minimises `f` over `[a, b]`: an `n`-point grid scan, then golden-section
/// refinement between the neighbours of the best grid point.
///
/// Returns `(x, f(x))`; the refined point is kept only if strictly better
/// than the best grid point. A degenerate interval is evaluated once.
pub fn grid_then_golden<F>(a: f64, b: f64, n: usize, rel_width: f64, mut f: F) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    if !(b > a) {
        return (a, f(a));
    }
    let grid = linspace(a, b, n.max(3));
    let mut best = (0usize, f64::INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let fx = f(x);
        if fx < best.1 {
            best = (i, fx);
        }
    }
    let i = best.0;
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (x, fx) = golden_section_min(lo, hi, rel_width, &mut f);
    if fx < best.1 {
        (x, fx)
    } else {
        (grid[i], best.1)
    }
}

/// First index `i < n` with `hit(i)`, skipping index ranges that
/// `may_contain(lo, hi)` (inclusive) rules out.
///
/// Returns the same index a plain left-to-right scan would, provided
/// `may_contain` never rejects a range that holds a hit.
pub fn first_hit<H, M>(n: usize, mut hit: H, mut may_contain: M) -> Option<usize>
where
    H: FnMut(usize) -> bool,
    M: FnMut(usize, usize) -> bool,
{
    const LEAF: usize = 8;
    if n == 0 {
        return None;
    }
    let mut stack = vec![(0usize, n - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if !may_contain(lo, hi) {
            continue;
        }
        if hi - lo < LEAF {
            if let Some(i) = (lo..=hi).find(|&i| hit(i)) {
                return Some(i);
            }
            continue;
        }
        let mid = lo + (hi - lo) / 2;
        // left half is popped first
        stack.push((mid + 1, hi));
        stack.push((lo, mid));
    }
    None
}
