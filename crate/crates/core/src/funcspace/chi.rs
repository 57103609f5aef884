//! The standard bump `chi(t) = exp(-1/(t(1-t)))` on `(0,1)` and its exact
//! derivatives.
//!
//! Every derivative has the form `D^i chi = R_i chi` with `R_1 = (1-2t)/w^2`,
//! `w = t(1-t)`, and `R_{i+1} = R_i' + R_i R_1`. Writing `R_i = P_i / w^{2i}`
//! the recurrence closes on the numerators:
//!
//! `P_{i+1} = P_i' w^2 - 2i P_i w' w + P_i w'`,  with `w' = 1 - 2t`,
//!
//! so the table is built with exact rational coefficients and no gcd work.

use std::sync::OnceLock;

use num_rational::BigRational;

use super::poly::{Polynomial, RationalFunction};
use crate::error::{Error, Result};

/// Highest derivative order supported by every function family.
pub const MAX_ORDER: usize = 8;

/// Below this exponent `chi` and every `R_i chi` are flushed to zero.
pub(crate) const FLUSH_EXPONENT: f64 = -644.7239; // ln(f64::MIN_POSITIVE) + 64

type Q = BigRational;

fn w_poly() -> Polynomial<Q> {
    Polynomial::from_i64(&[0, 1, -1])
}

fn numerators() -> &'static [Polynomial<Q>] {
    static TABLE: OnceLock<Vec<Polynomial<Q>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let w = w_poly();
        let dw = w.derivative();
        let w2 = &w * &w;
        let wdw = &w * &dw;
        // index 0 unused so that table[i] = P_i
        let mut table = vec![Polynomial::constant(num_traits::One::one()), dw.clone()];
        for i in 1..MAX_ORDER {
            let p = &table[i];
            let two_i = super::poly::q(2 * i as i64);
            let next = &(&(&p.derivative() * &w2) - &(&wdw * &p.scale(&two_i))) + &(p * &dw);
            table.push(next);
        }
        table
    })
}

/// `R_i` with `D^i chi = R_i chi` on `(0,1)`, exact coefficients.
pub fn chi_derivative(order: usize) -> Result<RationalFunction<Q>> {
    if order == 0 || order > MAX_ORDER {
        if order == 0 {
            return Err(Error::parameter("chi_derivative needs order >= 1"));
        }
        return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
    }
    let den = w_poly().pow(2 * order);
    RationalFunction::new(numerators()[order].clone(), den)
}

/// `[chi(t), chi'(t), ..., D^order chi(t)]`.
///
/// With `g = -1/w = -1/t - 1/(1-t)` the stack follows from
/// `D^{n+1} chi = sum_k C(n,k) g^{(k+1)} D^{n-k} chi`, where
/// `g^{(k)} = (-1)^{k+1} k!/t^{k+1} - k!/(1-t)^{k+1}`. This is the same as
/// multiplying `R_n` by `chi` but avoids the cancellation of evaluating the
/// high-degree numerators in the monomial basis. Everything is flushed to
/// zero once the exponent drops below [`FLUSH_EXPONENT`].
pub fn chi_stack(t: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if !(t > 0.0 && t < 1.0) {
        return out;
    }
    let s = 1.0 - t;
    let expo = -1.0 / t - 1.0 / s;
    if expo < FLUSH_EXPONENT {
        return out;
    }
    out[0] = expo.exp();
    // dg[k] = g^{(k+1)}
    let mut dg = Vec::with_capacity(order);
    let mut fact = 1.0;
    for k in 1..=order {
        fact *= k as f64;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        dg.push(sign * fact / t.powi(k as i32 + 1) - fact / s.powi(k as i32 + 1));
    }
    for n in 0..order {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            acc += binom * dg[k] * out[n - k];
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        out[n + 1] = acc;
    }
    out
}
