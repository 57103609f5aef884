//! Nowhere-polynomial perturbations and a grid proxy for the property.

use super::grid::sample;
use super::{AnalyticFunction, Family, Interval};
use crate::error::{Error, Result};

/// `u + eps psi` where `psi` is a scaled bump positive on an interval that
/// contains the support of `u`. The support of `u` must lie inside `(0,1)`.
pub fn perturb_nowhere_polynomial(u: &AnalyticFunction, eps: f64) -> Result<AnalyticFunction> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::parameter("perturbation size must be positive"));
    }
    let s = u.support();
    if !(s.lo > 0.0 && s.hi < 1.0) {
        return Err(Error::domain(format!(
            "support [{}, {}] is not compactly inside (0,1)",
            s.lo, s.hi
        )));
    }
    let psi = AnalyticFunction::scaled_bump(0.5 * s.lo, 0.5 * (1.0 + s.hi))?;
    if u.is_trivially_zero() && eps == 1.0 {
        return Ok(psi);
    }
    AnalyticFunction::combination(vec![(1.0, u.clone()), (eps, psi)])
}

/// For each order `i = 1..=max_order`, the number of grid nodes where
/// `|D^i f| < zero_tol` while `|f| > value_tol`. Small counts indicate that
/// no derivative vanishes on a set of positive measure inside `{f != 0}`.
pub fn nowhere_polynomial_proxy(
    f: &AnalyticFunction,
    interval: Interval,
    n: usize,
    max_order: usize,
    zero_tol: f64,
    value_tol: f64,
) -> Result<Vec<usize>> {
    let g = sample(f, interval, n, max_order)?;
    let u = g.values();
    (1..=max_order)
        .map(|i| {
            let d = g.derivative(i)?;
            Ok(u.iter().zip(d).filter(|(v, d)| v.abs() > value_tol && d.abs() < zero_tol).count())
        })
        .collect()
}

/// Whether `f` is built only from families that are polynomial on an open set
/// by construction (for diagnostics).
pub fn has_polynomial_piece(f: &AnalyticFunction) -> bool {
    match f.family() {
        Family::Polynomial { .. } | Family::PlateauPolynomial { .. } => true,
        Family::Combination(terms) => terms.len() == 1 && has_polynomial_piece(&terms[0].1),
        Family::Dilation { inner, .. } => has_polynomial_piece(inner),
        _ => false,
    }
}
