//! Smooth compactly supported function families with exact derivatives.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::chi::{chi_stack, FLUSH_EXPONENT, MAX_ORDER};
use super::jet::{factorial, Jet};
use super::spline::BSpline;
use super::Interval;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `chi(t) = exp(-1/(t(1-t)))` on `[0,1]`.
    BumpChi,
    /// `chi((x-a)/(b-a))` on `[a,b]`.
    ScaledBump { a: f64, b: f64 },
    /// Ascending coefficients, restricted to the support.
    Polynomial { coeffs: Vec<f64> },
    /// `chi(t) sin(2 pi f t)` on `[0,1]`.
    SineBump { frequency: f64 },
    /// `chi(t)^sharpness * S(t)` with `S` a clamped B-spline on `[0,1]`.
    SplineBump { spline: BSpline, sharpness: f64 },
    /// `P(x - c) * phi(x)` where `phi` is a smooth plateau equal to 1 on
    /// `[lo + ramp, hi - ramp]`, vanishing outside `[lo, hi]`, and `c` is
    /// the midpoint.
    PlateauPolynomial { coeffs: Vec<f64>, lo: f64, hi: f64, ramp: f64 },
    /// `sum w_i f_i`.
    Combination(Vec<(f64, AnalyticFunction)>),
    /// `amplitude * f(scale * x + shift)`.
    Dilation { inner: Box<AnalyticFunction>, amplitude: f64, scale: f64, shift: f64 },
}

/// A function of one variable that vanishes outside `support` and whose
/// derivatives up to [`MAX_ORDER`] are evaluated from closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Descriptor", into = "Descriptor")]
pub struct AnalyticFunction {
    family: Family,
    support: Interval,
}

/// JSON form `{ "family": ..., "params": {...}, "support": [a, b] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub family: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Interval>,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(format!("{name} must be finite")))
    }
}

impl AnalyticFunction {
    pub fn bump_chi() -> Self {
        Self { family: Family::BumpChi, support: Interval::UNIT }
    }

    pub fn scaled_bump(a: f64, b: f64) -> Result<Self> {
        let support = Interval::new(a, b)?;
        Ok(Self { family: Family::ScaledBump { a, b }, support })
    }

    pub fn polynomial(coeffs: Vec<f64>, support: Interval) -> Result<Self> {
        for &c in &coeffs {
            check_finite("polynomial coefficient", c)?;
        }
        Ok(Self { family: Family::Polynomial { coeffs }, support })
    }

    pub fn sine_bump(frequency: f64) -> Result<Self> {
        check_finite("frequency", frequency)?;
        Ok(Self { family: Family::SineBump { frequency }, support: Interval::UNIT })
    }

    /// Bernstein (no interior knots) or general clamped spline times `chi^sharpness`.
    pub fn spline_bump(coeffs: &[f64], knots: &[f64], sharpness: f64) -> Result<Self> {
        if !(sharpness > 0.0 && sharpness.is_finite()) {
            return Err(Error::parameter("sharpness must be positive"));
        }
        let spline = BSpline::new(coeffs, knots)?;
        Ok(Self { family: Family::SplineBump { spline, sharpness }, support: Interval::UNIT })
    }

    pub fn plateau_polynomial(coeffs: Vec<f64>, lo: f64, hi: f64, ramp: f64) -> Result<Self> {
        let support = Interval::new(lo, hi)?;
        if !(ramp > 0.0 && 2.0 * ramp <= hi - lo) {
            return Err(Error::parameter("ramp must be positive and at most half the support"));
        }
        for &c in &coeffs {
            check_finite("polynomial coefficient", c)?;
        }
        Ok(Self { family: Family::PlateauPolynomial { coeffs, lo, hi, ramp }, support })
    }

    pub fn combination(terms: Vec<(f64, AnalyticFunction)>) -> Result<Self> {
        let mut it = terms.iter();
        let first = it
            .next()
            .ok_or_else(|| Error::parameter("combination needs at least one term"))?;
        let mut support = first.1.support;
        for (w, f) in &terms {
            check_finite("weight", *w)?;
            support = support.hull(&f.support);
        }
        Ok(Self { family: Family::Combination(terms), support })
    }

    /// `amplitude * inner(scale * x + shift)`.
    pub fn dilation(inner: AnalyticFunction, amplitude: f64, scale: f64, shift: f64) -> Result<Self> {
        check_finite("amplitude", amplitude)?;
        check_finite("shift", shift)?;
        if !(scale.is_finite() && scale != 0.0) {
            return Err(Error::parameter("scale must be finite and non-zero"));
        }
        let a = (inner.support.lo - shift) / scale;
        let b = (inner.support.hi - shift) / scale;
        let support = Interval::new(a.min(b), a.max(b))?;
        Ok(Self {
            family: Family::Dilation { inner: Box::new(inner), amplitude, scale, shift },
            support,
        })
    }

    /// `x -> self(lambda x)` for `lambda > 0`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        Self::dilation(self.clone(), 1.0, lambda, 0.0)
    }

    /// `x -> c self(x)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::dilation(self.clone(), c, 1.0, 0.0)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    /// True when the closed form is the zero function.
    pub fn is_trivially_zero(&self) -> bool {
        match &self.family {
            Family::Polynomial { coeffs } | Family::PlateauPolynomial { coeffs, .. } => {
                coeffs.iter().all(|&c| c == 0.0)
            }
            Family::SplineBump { spline, .. } => spline.coeffs().iter().all(|&c| c == 0.0),
            Family::SineBump { frequency } => *frequency == 0.0,
            Family::Combination(terms) => terms.iter().all(|(w, f)| *w == 0.0 || f.is_trivially_zero()),
            Family::Dilation { inner, amplitude, .. } => *amplitude == 0.0 || inner.is_trivially_zero(),
            _ => false,
        }
    }

    /// `D^i f(x)`.
    pub fn evaluate(&self, order: usize, x: f64) -> Result<f64> {
        Ok(self.derivatives(x, order)?[order])
    }

    /// `[f(x), f'(x), ..., D^order f(x)]`.
    pub fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
        }
        Ok(self.stack(x, order))
    }

    fn stack(&self, x: f64, order: usize) -> Vec<f64> {
        if !self.support.contains(x) {
            return vec![0.0; order + 1];
        }
        match &self.family {
            Family::BumpChi => chi_stack(x, order),
            Family::ScaledBump { a, b } => {
                let len = b - a;
                let mut s = chi_stack((x - a) / len, order);
                let mut f = 1.0;
                for v in s.iter_mut() {
                    *v *= f;
                    f /= len;
                }
                s
            }
            Family::Polynomial { coeffs } => poly_stack(coeffs, x, order),
            Family::SineBump { frequency } => {
                let c = chi_stack(x, order);
                let w = 2.0 * PI * frequency;
                let (sn, cs) = (w * x).sin_cos();
                // D^k sin(wx) = w^k sin(wx + k pi/2)
                let sin_d: Vec<f64> = (0..=order)
                    .map(|k| {
                        let base = match k % 4 {
                            0 => sn,
                            1 => cs,
                            2 => -sn,
                            _ => -cs,
                        };
                        base * w.powi(k as i32)
                    })
                    .collect();
                leibniz(&c, &sin_d)
            }
            Family::SplineBump { spline, sharpness } => {
                let env = chi_power_jet(x, *sharpness, order);
                let s: Vec<f64> = (0..=order).map(|k| spline.eval(k, x)).collect();
                leibniz(&env.derivatives(), &s)
            }
            Family::PlateauPolynomial { coeffs, lo, hi, ramp } => {
                let mid = 0.5 * (lo + hi);
                let p = poly_stack(coeffs, x - mid, order);
                let left = step_jet((x - lo) / ramp, 1.0 / ramp, order);
                let right = step_jet((hi - x) / ramp, -1.0 / ramp, order);
                leibniz(&p, &left.mul(&right).derivatives())
            }
            Family::Combination(terms) => {
                let mut out = vec![0.0; order + 1];
                for (w, f) in terms {
                    for (o, v) in out.iter_mut().zip(f.stack(x, order)) {
                        *o += w * v;
                    }
                }
                out
            }
            Family::Dilation { inner, amplitude, scale, shift } => {
                let mut s = inner.stack(scale * x + shift, order);
                let mut f = *amplitude;
                for v in s.iter_mut() {
                    *v *= f;
                    f *= scale;
                }
                s
            }
        }
    }

    pub fn to_descriptor(&self) -> Descriptor {
        let (family, params, support) = match &self.family {
            Family::BumpChi => ("bumpchi", json!({}), None),
            Family::ScaledBump { a, b } => ("scaled_bump", json!({ "a": a, "b": b }), None),
            Family::Polynomial { coeffs } => ("polynomial", json!({ "coeffs": coeffs }), Some(self.support)),
            Family::SineBump { frequency } => ("sine_bump", json!({ "frequency": frequency }), None),
            Family::SplineBump { spline, sharpness } => (
                "spline_bump",
                json!({ "coeffs": spline.coeffs(), "knots": spline.interior_knots(), "sharpness": sharpness }),
                None,
            ),
            Family::PlateauPolynomial { coeffs, lo, hi, ramp } => (
                "plateau_polynomial",
                json!({ "coeffs": coeffs, "lo": lo, "hi": hi, "ramp": ramp }),
                None,
            ),
            Family::Combination(terms) => {
                let terms: Vec<Value> = terms
                    .iter()
                    .map(|(w, f)| json!({ "weight": w, "function": f.to_descriptor() }))
                    .collect();
                ("combination", json!({ "terms": terms }), None)
            }
            Family::Dilation { inner, amplitude, scale, shift } => (
                "dilation",
                json!({ "inner": inner.to_descriptor(), "amplitude": amplitude, "scale": scale, "shift": shift }),
                None,
            ),
        };
        Descriptor { family: family.to_string(), params, support }
    }

    pub fn from_descriptor(d: &Descriptor) -> Result<Self> {
        let p = &d.params;
        let num = |key: &str| -> Result<f64> {
            p.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::parameter(format!("{} needs numeric param '{key}'", d.family)))
        };
        let num_or = |key: &str, default: f64| -> Result<f64> {
            match p.get(key) {
                None => Ok(default),
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::parameter(format!("param '{key}' must be numeric"))),
            }
        };
        let list = |key: &str| -> Result<Vec<f64>> {
            match p.get(key) {
                None => Ok(Vec::new()),
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|_| Error::parameter(format!("param '{key}' must be a list of numbers"))),
            }
        };
        let f = match d.family.as_str() {
            "bumpchi" => Self::bump_chi(),
            "scaled_bump" => Self::scaled_bump(num("a")?, num("b")?)?,
            "polynomial" => {
                let support = d
                    .support
                    .ok_or_else(|| Error::parameter("polynomial needs an explicit support"))?;
                return Self::polynomial(list("coeffs")?, support);
            }
            "sine_bump" => Self::sine_bump(num("frequency")?)?,
            "spline_bump" => Self::spline_bump(&list("coeffs")?, &list("knots")?, num_or("sharpness", 1.0)?)?,
            "plateau_polynomial" => {
                let lo = num("lo")?;
                let hi = num("hi")?;
                Self::plateau_polynomial(list("coeffs")?, lo, hi, num_or("ramp", 0.25 * (hi - lo))?)?
            }
            "combination" => {
                let terms = p
                    .get("terms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::parameter("combination needs 'terms'"))?;
                let mut out = Vec::with_capacity(terms.len());
                for t in terms {
                    let w = t.get("weight").and_then(Value::as_f64).unwrap_or(1.0);
                    let inner: Descriptor = serde_json::from_value(
                        t.get("function").cloned().ok_or_else(|| Error::parameter("term needs 'function'"))?,
                    )?;
                    out.push((w, Self::from_descriptor(&inner)?));
                }
                Self::combination(out)?
            }
            "dilation" => {
                let inner: Descriptor = serde_json::from_value(
                    p.get("inner").cloned().ok_or_else(|| Error::parameter("dilation needs 'inner'"))?,
                )?;
                Self::dilation(
                    Self::from_descriptor(&inner)?,
                    num_or("amplitude", 1.0)?,
                    num_or("scale", 1.0)?,
                    num_or("shift", 0.0)?,
                )?
            }
            other => return Err(Error::parameter(format!("unknown function family '{other}'"))),
        };
        if let Some(s) = d.support {
            if s != f.support {
                return Err(Error::parameter(format!(
                    "declared support [{}, {}] differs from the family's support [{}, {}]",
                    s.lo, s.hi, f.support.lo, f.support.hi
                )));
            }
        }
        Ok(f)
    }
}

impl TryFrom<Descriptor> for AnalyticFunction {
    type Error = Error;
    fn try_from(d: Descriptor) -> Result<Self> {
        Self::from_descriptor(&d)
    }
}

impl From<AnalyticFunction> for Descriptor {
    fn from(f: AnalyticFunction) -> Self {
        f.to_descriptor()
    }
}

fn poly_stack(coeffs: &[f64], x: f64, order: usize) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    let mut out = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        out.push(c.iter().rev().fold(0.0, |acc, &a| acc * x + a));
        c = c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect();
    }
    out
}

/// Leibniz rule on derivative stacks of equal length.
fn leibniz(f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|k| {
            (0..=k)
                .map(|j| binomial(k, j) * f[j] * g[k - j])
                .sum()
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Jet of `exp(-gamma / (t(1-t)))` at `t` in `(0,1)`.
fn chi_power_jet(t: f64, gamma: f64, order: usize) -> Jet {
    let w = t * (1.0 - t);
    if !(w > 0.0) || -gamma / w < FLUSH_EXPONENT {
        return Jet::zero(order);
    }
    let x = Jet::variable(t, order);
    x.mul(&x.one_minus()).recip().scale(-gamma).exp()
}

/// Jet of `exp(-1/s)` (zero for `s <= 0`) at `s`, with `ds/dx = slope`.
fn flat_jet(s: f64, slope: f64, order: usize) -> Jet {
    if !(s > 0.0) || -1.0 / s < FLUSH_EXPONENT {
        return Jet::zero(order);
    }
    Jet::linear(s, slope, order).recip().scale(-1.0).exp()
}

/// Smooth step `f(s) / (f(s) + f(1-s))` in the variable `x`, where
/// `s = s0 + slope (x - x0)`.
fn step_jet(s: f64, slope: f64, order: usize) -> Jet {
    if s <= 0.0 {
        return Jet::zero(order);
    }
    if s >= 1.0 {
        return Jet::constant(1.0, order);
    }
    let a = flat_jet(s, slope, order);
    let b = flat_jet(1.0 - s, -slope, order);
    a.div(&a.add(&b))
}
