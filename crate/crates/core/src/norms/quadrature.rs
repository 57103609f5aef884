//! Composite Simpson quadrature on uniform grids, including sub-intervals
//! that do not start or end on a node.

use crate::exec::pairwise_sum;

/// Simpson's rule on `values` at spacing `h`. An odd number of cells ends
/// with a 3/8 panel; a single cell falls back to the trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let cells = n - 1;
    if cells == 1 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let even = if cells.is_multiple_of(2) { cells } else { cells - 3 };
    let mut terms = Vec::with_capacity(even + 1);
    for (k, &v) in values[..=even].iter().enumerate().filter(|_| even > 0) {
        let w = if k == 0 || k == even {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(w * v);
    }
    let mut total = h / 3.0 * pairwise_sum(&terms);
    if even < cells {
        let v = &values[even..];
        total += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
    }
    total
}

/// `int_{tau0}^{tau1}` (in units of `h`) of the quadratic through
/// `(0, f0), (1, f1), (2, f2)`.
fn quadratic_piece(f: [f64; 3], tau0: f64, tau1: f64) -> f64 {
    let a0 = |t: f64| 0.5 * (t * t * t / 3.0 - 1.5 * t * t + 2.0 * t);
    let a1 = |t: f64| -(t * t * t / 3.0 - t * t);
    let a2 = |t: f64| 0.5 * (t * t * t / 3.0 - 0.5 * t * t);
    f[0] * (a0(tau1) - a0(tau0)) + f[1] * (a1(tau1) - a1(tau0)) + f[2] * (a2(tau1) - a2(tau0))
}

/// Integral over `[lo, hi]` of the function sampled as `values` at
/// `x_k = a + k h`. Whole cells use Simpson, partial end cells a local
/// quadratic interpolant.
pub fn integrate_range(values: &[f64], a: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let n = values.len();
    if n < 2 || hi <= lo {
        return 0.0;
    }
    let last = (n - 1) as f64;
    let pos = |x: f64| ((x - a) / h).clamp(0.0, last);
    let (t0, t1) = (pos(lo), pos(hi));
    if n == 2 {
        let lin = |t: f64| values[0] * (t - 0.5 * t * t) + values[1] * 0.5 * t * t;
        return h * (lin(t1) - lin(t0));
    }
    let snap = 1e-9;
    let i0 = (t0 - snap).ceil().max(0.0) as usize;
    let i1 = (t1 + snap).floor().min(last) as usize;
    let piece = |t_lo: f64, t_hi: f64| {
        if t_hi <= t_lo {
            return 0.0;
        }
        let base = (t_lo.floor() as usize).min(n - 3);
        let f = [values[base], values[base + 1], values[base + 2]];
        h * quadratic_piece(f, t_lo - base as f64, t_hi - base as f64)
    };
    if i1 <= i0 {
        return piece(t0, t1);
    }
    let left = if (i0 as f64 - t0).abs() > snap { piece(t0, i0 as f64) } else { 0.0 };
    let right = if (t1 - i1 as f64).abs() > snap { piece(i1 as f64, t1) } else { 0.0 };
    left + simpson(&values[i0..=i1], h) + right
}

/// Largest `|v|` over `[lo, hi]`: nodes inside plus linearly interpolated
/// end values.
pub fn max_abs_range(values: &[f64], a: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let n = values.len();
    let last = (n - 1) as f64;
    let pos = |x: f64| ((x - a) / h).clamp(0.0, last);
    let interp = |t: f64| {
        let k = (t.floor() as usize).min(n - 2);
        let s = t - k as f64;
        ((1.0 - s) * values[k] + s * values[k + 1]).abs()
    };
    let (t0, t1) = (pos(lo), pos(hi));
    let i0 = (t0 - 1e-9).ceil().max(0.0) as usize;
    let i1 = ((t1 + 1e-9).floor() as usize).min(n - 1);
    let mut m = interp(t0).max(interp(t1));
    if i0 <= i1 {
        m = values[i0..=i1].iter().fold(m, |acc, v| acc.max(v.abs()));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(f: impl Fn(f64) -> f64, a: f64, h: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| f(a + k as f64 * h)).collect()
    }

    #[test]
    fn exact_on_cubics_both_parities() {
        let f = |x: f64| 1.0 - 2.0 * x + 3.0 * x * x * x;
        let exact = 1.0 - 1.0 + 0.75;
        for n in [3, 4, 5, 8, 17, 64] {
            let h = 1.0 / (n - 1) as f64;
            let v = samples(f, 0.0, h, n);
            assert!((simpson(&v, h) - exact).abs() < 1e-13, "n={n}");
        }
        assert_eq!(simpson(&[1.0, 3.0], 2.0), 4.0);
    }

    #[test]
    fn partial_cells_are_exact_for_quadratics() {
        let f = |x: f64| 2.0 + x - 4.0 * x * x;
        let anti = |x: f64| 2.0 * x + 0.5 * x * x - 4.0 * x * x * x / 3.0;
        let h = 0.1;
        let v = samples(f, 0.0, h, 11);
        for (lo, hi) in [(0.0, 1.0), (0.13, 0.77), (0.41, 0.47), (0.05, 0.15), (0.3, 0.6)] {
            let got = integrate_range(&v, 0.0, h, lo, hi);
            assert!((got - (anti(hi) - anti(lo))).abs() < 1e-13, "[{lo},{hi}]: {got}");
        }
    }

    #[test]
    fn max_includes_interpolated_ends() {
        let v = [0.0, 1.0, 4.0, 2.0];
        assert_eq!(max_abs_range(&v, 0.0, 1.0, 0.0, 3.0), 4.0);
        assert_eq!(max_abs_range(&v, 0.0, 1.0, 0.25, 0.75), 0.75);
    }
}
