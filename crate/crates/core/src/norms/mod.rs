//! Lebesgue norms of derivatives, norms of derivative products, and the
//! Gagliardo seminorm, all computed on [`GridFunction`]s.

mod exponent;
pub mod quadrature;

pub use exponent::{parse_rational, Exponent};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::funcspace::{GridFunction, Interval};
use quadrature::{integrate_range, max_abs_range};

/// Relative accuracy targeted by the quadrature on fine grids.
pub const QUADRATURE_RTOL: f64 = 1e-6;

/// `||D^j u||_{L^p(domain)}`. `domain = None` means the whole grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: Exponent,
    pub j: usize,
    #[serde(default)]
    pub domain: Option<Interval>,
}

/// `||D^{k_1} u ... D^{k_kappa} u||_{L^q(domain)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub ks: Vec<usize>,
    pub q: Exponent,
    #[serde(default)]
    pub domain: Option<Interval>,
}

impl NormSpec {
    pub fn new(p: Exponent, j: usize) -> Self {
        Self { p, j, domain: None }
    }

    pub fn on(mut self, domain: Interval) -> Self {
        self.domain = Some(domain);
        self
    }
}

impl ProductSpec {
    pub fn new(ks: Vec<usize>, q: Exponent) -> Result<Self> {
        if ks.is_empty() {
            return Err(Error::parameter("product needs at least one order"));
        }
        if ks.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::parameter("product orders must be sorted ascending"));
        }
        q.check_lebesgue("q")?;
        Ok(Self { ks, q, domain: None })
    }

    pub fn on(mut self, domain: Interval) -> Self {
        self.domain = Some(domain);
        self
    }
}

fn resolve_domain(g: &GridFunction, domain: Option<Interval>) -> Result<Interval> {
    let grid = g.interval();
    match domain {
        None => Ok(grid),
        Some(d) => {
            let slack = 1e-12 * grid.len();
            if d.lo < grid.lo - slack || d.hi > grid.hi + slack {
                return Err(Error::domain(format!(
                    "domain [{}, {}] is not inside the grid [{}, {}]",
                    d.lo, d.hi, grid.lo, grid.hi
                )));
            }
            Ok(d)
        }
    }
}

/// `L^p` norm over `domain` of the function sampled as `values` on `g`'s nodes.
pub fn lp_norm_of(g: &GridFunction, values: &[f64], domain: Interval, p: &Exponent) -> Result<f64> {
    p.check_lebesgue("p")?;
    let (a, h) = (g.interval().lo, g.h());
    let m = max_abs_range(values, a, h, domain.lo, domain.hi);
    if p.is_infinite() {
        return Ok(m);
    }
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Ok(if scale == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let pv = p.value();
    let integrand: Vec<f64> = if pv.fract() == 0.0 && pv <= 64.0 {
        let k = pv as i32;
        values.iter().map(|v| (v.abs() / scale).powi(k)).collect()
    } else {
        values.iter().map(|v| (v.abs() / scale).powf(pv)).collect()
    };
    let integral = integrate_range(&integrand, a, h, domain.lo, domain.hi).max(0.0);
    Ok(scale * integral.powf(1.0 / pv))
}

/// `||D^j u||_{L^p}` by composite Simpson (grid maximum for `p = inf`).
pub fn lebesgue_norm(g: &GridFunction, spec: &NormSpec) -> Result<f64> {
    let domain = resolve_domain(g, spec.domain)?;
    lp_norm_of(g, g.derivative(spec.j)?, domain, &spec.p)
}

/// Pointwise product `prod_i D^{k_i} u` at the grid nodes.
pub fn product_values(g: &GridFunction, ks: &[usize]) -> Result<Vec<f64>> {
    let mut out = vec![1.0; g.len()];
    for &k in ks {
        for (o, v) in out.iter_mut().zip(g.derivative(k)?) {
            *o *= v;
        }
    }
    Ok(out)
}

/// `L^q` norm of the derivative product.
pub fn product_norm(g: &GridFunction, spec: &ProductSpec) -> Result<f64> {
    if spec.ks.is_empty() {
        return Err(Error::parameter("product needs at least one order"));
    }
    let domain = resolve_domain(g, spec.domain)?;
    lp_norm_of(g, &product_values(g, &spec.ks)?, domain, &spec.q)
}

/// Integral of `values` over the whole grid.
pub fn integral(g: &GridFunction, values: &[f64]) -> f64 {
    quadrature::simpson(values, g.h())
}

/// `(int int |u(x) - u(y)|^p / |x - y|^{1 + s p} dx dy)^{1/p}` over the real
/// line, for `u` vanishing outside the grid interval `[a, b]`.
///
/// Inside `[a,b]^2` the double integral is a node sum with weight `h^2`,
/// symmetric pairs counted twice and diagonal cells skipped. Pairs with one
/// point outside the interval are integrated in `y` analytically, giving
/// `(2/(s p)) int |u(x)|^p ((x - a)^{-s p} + (b - x)^{-s p}) dx`.
pub fn gagliardo_seminorm(g: &GridFunction, s: f64, p: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::parameter(format!("fractional order s = {s} is not in (0,1)")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::parameter(format!("seminorm exponent p = {p} must be finite and >= 1")));
    }
    let u = g.values();
    let n = u.len();
    let h = g.h();
    let (a, b) = (g.interval().lo, g.interval().hi);
    let sp = s * p;
    let integer_p = (p.fract() == 0.0 && p <= 64.0).then_some(p as i32);
    let pow = move |v: f64| match integer_p {
        Some(k) => v.powi(k),
        None => v.powf(p),
    };
    let kernel: Vec<f64> = (0..n).map(|d| if d == 0 { 0.0 } else { (d as f64 * h).powf(-1.0 - sp) }).collect();
    let rows = exec::map_range(n, |i| {
        let ui = u[i];
        let terms: Vec<f64> = (i + 1..n).map(|j| pow((ui - u[j]).abs()) * kernel[j - i]).collect();
        exec::pairwise_sum(&terms)
    });
    let interior = 2.0 * h * h * exec::pairwise_sum(&rows);
    let tail_terms: Vec<f64> = (1..n.saturating_sub(1))
        .map(|k| {
            let x = g.node(k);
            pow(u[k].abs()) * ((x - a).powf(-sp) + (b - x).powf(-sp))
        })
        .collect();
    let tail = 2.0 / sp * h * exec::pairwise_sum(&tail_terms);
    Ok((interior + tail).powf(1.0 / p))
}
