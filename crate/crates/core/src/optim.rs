//! Scalar searches used by the criterion evaluators.

use crate::error::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_ITERS: usize = 500;
const GRID_POINTS: usize = 64;

/// Width below which an interval around `a..b` cannot usefully shrink.
fn resolution(a: f64, b: f64, tol: f64) -> f64 {
    tol.max(4.0 * f64::EPSILON * a.abs().max(b.abs()))
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. `f` may return `+inf` on part of the bracket.
/// When both interior probes are infinite the comparison says nothing, so
/// the bracket is first narrowed around the best point of a coarse grid.
pub(crate) fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    if f1 == f64::INFINITY && f2 == f64::INFINITY {
        let grid: Vec<f64> = (0..=GRID_POINTS)
            .map(|i| a + (b - a) * i as f64 / GRID_POINTS as f64)
            .collect();
        let mut best = (0, f64::INFINITY);
        for (i, &x) in grid.iter().enumerate() {
            let fx = f(x)?;
            if fx < best.1 {
                best = (i, fx);
            }
        }
        if best.1 == f64::INFINITY {
            return Ok((0.5 * (a + b), f64::INFINITY));
        }
        a = grid[best.0.saturating_sub(1)];
        b = grid[(best.0 + 1).min(GRID_POINTS)];
        x1 = b - INV_PHI * (b - a);
        x2 = a + INV_PHI * (b - a);
        f1 = f(x1)?;
        f2 = f(x2)?;
    }
    let mut iters = 0;
    while b - a > resolution(a, b, tol) && iters < MAX_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
        iters += 1;
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Root of a non-decreasing `g` on `[lo, hi]` by bisection.
///
/// Assumes `g(lo) <= 0 <= g(hi)`; returns the midpoint of the final bracket.
pub(crate) fn bisect<G>(mut g: G, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    G: FnMut(f64) -> f64,
{
    let mut iters = 0;
    while hi - lo > resolution(lo, hi, tol) && iters < MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_quadratic_minimum() {
        let (x, fx) = golden_section(|x| Ok((x - 1.3).powi(2) + 2.0), -5.0, 5.0, 1e-10).unwrap();
        // f is flat to machine precision within about 1e-8 of the minimum.
        assert!((x - 1.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn golden_handles_piecewise_linear_and_infinite_ends() {
        let (x, _) = golden_section(|x| Ok((x - 0.25).abs()), 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.25).abs() < 1e-10);
        let f = |x: f64| {
            Ok(if x < -1.0 {
                f64::INFINITY
            } else {
                (x - 3.0).powi(2)
            })
        };
        let (x, _) = golden_section(f, -100.0, 10.0, 1e-10).unwrap();
        assert!((x - 3.0).abs() < 1e-6);
    }

    #[test]
    fn golden_terminates_on_large_magnitudes() {
        let (x, _) = golden_section(|x| Ok((x - 1e9).powi(2)), 0.0, 2e9, 1e-10).unwrap();
        assert!((x - 1e9).abs() < 1.0);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }
}
