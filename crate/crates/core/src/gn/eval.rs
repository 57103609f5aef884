//! Evaluation of the inequalities on sampled functions.

use serde::{Deserialize, Serialize};

use super::params::GNParams;
use crate::error::{Error, Result};
use crate::funcspace::{GridFunction, Interval, Provenance};
use crate::norms::{lebesgue_norm, product_norm, Exponent, NormSpec, ProductSpec};

/// Low-order term and optional localization window of the bounded form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedExtras {
    pub k0: usize,
    pub s: Exponent,
    #[serde(default)]
    pub omega: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: usize,
    pub interval: Interval,
    pub provenance: Provenance,
}

impl GridMeta {
    pub fn of(g: &GridFunction) -> Self {
        Self { n: g.len(), interval: g.interval(), provenance: g.provenance() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub form: String,
    pub lhs: f64,
    pub rhs_factors: Vec<Factor>,
    pub rhs: f64,
    /// `lhs / rhs`; 0 for `0/0`, `None` when `rhs = 0 < lhs`.
    pub ratio: Option<f64>,
    pub degenerate: bool,
    pub violation_candidate: bool,
    pub params: GNParams,
    pub grid: GridMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_ratio: Option<f64>,
}

/// Ratio with the conventions `0/0 = 0` (degenerate) and `x/0 = None`.
pub fn ratio_of(lhs: f64, rhs: f64) -> (Option<f64>, bool) {
    if rhs > 0.0 {
        (Some(lhs / rhs), false)
    } else if lhs == 0.0 {
        (Some(0.0), true)
    } else {
        (None, false)
    }
}

fn report(
    form: &str,
    lhs: f64,
    rhs_factors: Vec<Factor>,
    rhs: f64,
    params: &GNParams,
    g: &GridFunction,
) -> InequalityReport {
    let (ratio, degenerate) = ratio_of(lhs, rhs);
    InequalityReport {
        form: form.to_string(),
        lhs,
        rhs_factors,
        rhs,
        ratio,
        degenerate,
        violation_candidate: ratio.is_none(),
        params: params.clone(),
        grid: GridMeta::of(g),
        classical_rhs: None,
        classical_ratio: None,
    }
}

fn factor(name: &str, value: f64) -> Factor {
    Factor { name: name.to_string(), value }
}

fn main_terms(g: &GridFunction, params: &GNParams, product_domain: Option<Interval>) -> Result<(f64, f64, f64)> {
    let lhs = lebesgue_norm(g, &NormSpec::new(params.p.clone(), params.j))?;
    let top = lebesgue_norm(g, &NormSpec::new(params.r.clone(), params.m))?;
    let mut spec = ProductSpec::new(params.ks.clone(), params.q.clone())?;
    spec.domain = product_domain;
    let prod = product_norm(g, &spec)?;
    Ok((lhs, top, prod))
}

fn check_compact(g: &GridFunction) -> Result<()> {
    let u = g.values();
    let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let ends = u[0].abs().max(u[u.len() - 1].abs());
    if ends > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(
            "function does not vanish at the ends of the grid; sample over its support".into(),
        ));
    }
    Ok(())
}

fn check_unit(g: &GridFunction) -> Result<()> {
    if g.interval() != Interval::UNIT {
        return Err(Error::domain("bounded-domain forms need a grid on [0, 1]"));
    }
    Ok(())
}

/// `||D^j u||_p` against `||D^m u||_r^theta ||prod D^{k_i} u||_q^{(1-theta)/kappa}`.
pub fn evaluate_generalized(g: &GridFunction, params: &GNParams) -> Result<InequalityReport> {
    params.validate_relation()?;
    check_compact(g)?;
    let (lhs, top, prod) = main_terms(g, params, None)?;
    let th = params.theta_f64();
    let a = top.powf(th);
    let b = prod.powf((1.0 - th) / params.kappa() as f64);
    let rhs = a * b;
    let factors = vec![factor("top^theta", a), factor("product^((1-theta)/kappa)", b)];
    Ok(report("generalized", lhs, factors, rhs, params, g))
}

/// Generalized form on `(0,1)` plus the low-order term `||D^{k0} u||_s`.
/// For `kappa = 1` the classical bounded form, with the low-order term
/// taken on `u` itself, is reported as well.
pub fn evaluate_bounded(g: &GridFunction, params: &GNParams, extras: &BoundedExtras) -> Result<InequalityReport> {
    params.validate_relation()?;
    check_unit(g)?;
    if extras.k0 > params.ks[0] {
        return Err(Error::parameter(format!(
            "low order k0 = {} exceeds k_1 = {}",
            extras.k0, params.ks[0]
        )));
    }
    extras.s.check_lebesgue("s")?;
    let (lhs, top, prod) = main_terms(g, params, None)?;
    let th = params.theta_f64();
    let a = top.powf(th);
    let b = prod.powf((1.0 - th) / params.kappa() as f64);
    let low = lebesgue_norm(g, &NormSpec::new(extras.s.clone(), extras.k0))?;
    let rhs = a * b + low;
    let factors = vec![
        factor("top^theta", a),
        factor("product^((1-theta)/kappa)", b),
        factor("low_order", low),
    ];
    let mut rep = report("bounded", lhs, factors, rhs, params, g);
    if params.kappa() == 1 {
        let low0 = lebesgue_norm(g, &NormSpec::new(extras.s.clone(), 0))?;
        let crhs = a * b + low0;
        rep.classical_rhs = Some(crhs);
        rep.classical_ratio = ratio_of(lhs, crhs).0;
    }
    Ok(rep)
}

/// `||D^j u||_{L^p(0,1)}` against `||D^m u||_{L^r(0,1)} + ||prod||_{L^q(omega)}^{1/kappa}`.
pub fn evaluate_localized(g: &GridFunction, params: &GNParams, omega: Interval) -> Result<InequalityReport> {
    params.validate_relation()?;
    check_unit(g)?;
    if !(omega.lo >= 0.0 && omega.hi <= 1.0) {
        return Err(Error::parameter(format!(
            "window ({}, {}) is not a subinterval of (0,1)",
            omega.lo, omega.hi
        )));
    }
    let (lhs, top, prod) = main_terms(g, params, Some(omega))?;
    let b = prod.powf(1.0 / params.kappa() as f64);
    let rhs = top + b;
    let factors = vec![factor("top", top), factor("product_on_window^(1/kappa)", b)];
    Ok(report("localized", lhs, factors, rhs, params, g))
}
