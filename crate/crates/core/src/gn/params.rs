//! Exponent tuples and their exact algebra.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::norms::{parse_rational, Exponent};

/// A rational that serializes as a JSON number when that is exact and as an
/// `"a/b"` string otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn parse(text: &str) -> Result<Self> {
        parse_rational(text).map(Rational)
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if let (true, Some(n)) = (self.0.is_integer(), self.0.numer().to_i64()) {
            return s.serialize_i64(n);
        }
        let v = self.to_f64();
        match parse_rational(&format!("{v:e}")) {
            Ok(back) if back == self.0 => s.serialize_f64(v),
            _ => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Rational;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a number or a fraction string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
                Rational::parse(v).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
                Rational::parse(&v.to_string()).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
                Rational::parse(&v.to_string()).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite rational"));
                }
                Rational::parse(&format!("{v:e}")).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// The tuple `(p, q, r, k_1..k_kappa, j, m, theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GNParams {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub ks: Vec<usize>,
    pub j: usize,
    pub m: usize,
    pub theta: Rational,
}

/// Residuals of the exponent relation; `critical` is present when
/// `theta = theta_star`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub general: Rational,
    pub critical: Option<Rational>,
}

impl Residual {
    pub fn abs_f64(&self) -> f64 {
        self.general.to_f64().abs()
    }
}

/// Tolerance for treating a tuple as satisfying the exponent relation.
pub const RELATION_TOL: f64 = 1e-12;

fn q(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `(sum k_i) / kappa`.
pub fn mean_order(ks: &[usize]) -> Result<BigRational> {
    if ks.is_empty() {
        return Err(Error::parameter("at least one product order is required"));
    }
    Ok(BigRational::new(BigInt::from(ks.iter().sum::<usize>()), BigInt::from(ks.len())))
}

fn check_orders(ks: &[usize], j: usize, m: usize) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::parameter("at least one product order is required"));
    }
    if ks.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::parameter("product orders must be sorted ascending"));
    }
    let top = *ks.last().expect("non-empty");
    if top > j || j >= m {
        return Err(Error::parameter(format!(
            "orders must satisfy k_kappa <= j < m, got k_kappa = {top}, j = {j}, m = {m}"
        )));
    }
    Ok(())
}

/// `(j - kbar) / (m - kbar)`, exact.
pub fn theta_star_of(ks: &[usize], j: usize, m: usize) -> Result<BigRational> {
    check_orders(ks, j, m)?;
    let kbar = mean_order(ks)?;
    Ok((q(j) - kbar.clone()) / (q(m) - kbar))
}

impl GNParams {
    pub fn kappa(&self) -> usize {
        self.ks.len()
    }

    pub fn kbar(&self) -> BigRational {
        mean_order(&self.ks).unwrap_or_else(|_| BigRational::zero())
    }

    pub fn theta_f64(&self) -> f64 {
        self.theta.to_f64()
    }

    pub fn theta_star(&self) -> Result<BigRational> {
        theta_star_of(&self.ks, self.j, self.m)
    }

    /// `(1/p - j) - theta (1/r - m) - (1 - theta)(1/(q kappa) - kbar)`, and at
    /// `theta = theta_star` also `1/p - theta/r - (1 - theta)/(q kappa)`.
    pub fn relation_residual(&self) -> Result<Residual> {
        let th = self.theta.0.clone();
        let one = BigRational::one();
        let kappa = q(self.kappa());
        let kbar = mean_order(&self.ks)?;
        let inv_p = self.p.reciprocal();
        let inv_r = self.r.reciprocal();
        let inv_qk = self.q.reciprocal() / kappa;
        let general = (inv_p.clone() - q(self.j))
            - th.clone() * (inv_r.clone() - q(self.m))
            - (one.clone() - th.clone()) * (inv_qk.clone() - kbar);
        let critical = match self.theta_star() {
            Ok(ts) if ts == th => {
                let c = inv_p - th.clone() * inv_r - (one - th) * inv_qk;
                if c != general {
                    return Err(Error::Violation(format!(
                        "critical residual {c} differs from the general residual {general}"
                    )));
                }
                Some(Rational(c))
            }
            _ => None,
        };
        Ok(Residual { general: Rational(general), critical })
    }

    /// Orders, exponent ranges and `theta in [theta_star, 1]`.
    pub fn validate(&self) -> Result<()> {
        check_orders(&self.ks, self.j, self.m)?;
        self.p.check_lebesgue("p")?;
        self.q.check_lebesgue("q")?;
        self.r.check_lebesgue("r")?;
        let ts = self.theta_star()?;
        let th = &self.theta.0;
        if *th > BigRational::one() || *th < ts {
            return Err(Error::parameter(format!(
                "theta = {} is outside [theta_star, 1] = [{}, 1]",
                self.theta,
                Rational(ts)
            )));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus a vanishing relation residual.
    pub fn validate_relation(&self) -> Result<()> {
        self.validate()?;
        let res = self.relation_residual()?;
        if res.abs_f64() > RELATION_TOL {
            return Err(Error::Precondition(format!(
                "exponent relation does not hold (residual {})",
                res.general
            )));
        }
        Ok(())
    }

    /// Named tuples: `cor7` and `cor6-k1`, `cor6-k2`, `cor6-k3` (any `k >= 1`).
    pub fn preset(name: &str) -> Result<Self> {
        if name == "cor7" {
            return Ok(Self {
                p: Exponent::integer(12),
                q: Exponent::integer(2),
                r: Exponent::Infinite,
                ks: vec![0, 1, 2],
                j: 2,
                m: 3,
                theta: Rational(BigRational::new(1.into(), 2.into())),
            });
        }
        if let Some(k) = name.strip_prefix("cor6-k").and_then(|k| k.parse::<usize>().ok()) {
            if k >= 1 {
                return Ok(Self {
                    p: Exponent::integer(6),
                    q: Exponent::integer(2),
                    r: Exponent::Infinite,
                    ks: vec![0, k],
                    j: k,
                    m: 2 * k,
                    theta: Rational(BigRational::new(1.into(), 3.into())),
                });
            }
        }
        Err(Error::parameter(format!("unknown preset '{name}' (known: cor7, cor6-k<k>)")))
    }

    /// Short stable hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("params serialize");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// A tuple with exactly one of `p`, `q`, `theta` left open.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PartialParams {
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub r: Option<Exponent>,
    pub ks: Vec<usize>,
    pub j: usize,
    pub m: usize,
    pub theta: Option<Rational>,
}

impl From<GNParams> for PartialParams {
    fn from(p: GNParams) -> Self {
        Self { p: Some(p.p), q: Some(p.q), r: Some(p.r), ks: p.ks, j: p.j, m: p.m, theta: Some(p.theta) }
    }
}

impl PartialParams {
    /// The full tuple, solving for the open entry if there is one. A full
    /// tuple must satisfy the relation.
    pub fn complete(&self) -> Result<GNParams> {
        match (&self.p, &self.q, &self.r, &self.theta) {
            (Some(p), Some(q), Some(r), Some(theta)) => {
                let out = GNParams {
                    p: p.clone(),
                    q: q.clone(),
                    r: r.clone(),
                    ks: self.ks.clone(),
                    j: self.j,
                    m: self.m,
                    theta: theta.clone(),
                };
                out.validate_relation()?;
                Ok(out)
            }
            _ => solve_exponent(self),
        }
    }
}

fn exponent_from_reciprocal(inv: BigRational, name: &str) -> Result<Exponent> {
    if inv.is_zero() {
        return Ok(Exponent::Infinite);
    }
    if inv.is_negative() || inv > BigRational::one() {
        return Err(Error::Infeasible(format!(
            "the relation forces 1/{name} = {}, outside [0, 1]",
            Rational(inv)
        )));
    }
    Ok(Exponent::Finite(inv.recip()))
}

/// Complete a tuple by solving the exponent relation for the missing entry.
pub fn solve_exponent(partial: &PartialParams) -> Result<GNParams> {
    check_orders(&partial.ks, partial.j, partial.m)?;
    let r = partial
        .r
        .clone()
        .ok_or_else(|| Error::parameter("r is required"))?;
    let unknowns = [partial.p.is_none(), partial.q.is_none(), partial.theta.is_none()]
        .iter()
        .filter(|&&b| b)
        .count();
    if unknowns != 1 {
        return Err(Error::parameter(format!(
            "exactly one of p, q, theta must be unknown ({unknowns} given)"
        )));
    }
    let one = BigRational::one();
    let kappa = q(partial.ks.len());
    let kbar = mean_order(&partial.ks)?;
    let (j, m) = (q(partial.j), q(partial.m));
    let inv_r = r.reciprocal();
    let mut out = GNParams {
        p: partial.p.clone().unwrap_or(Exponent::Infinite),
        q: partial.q.clone().unwrap_or(Exponent::Infinite),
        r,
        ks: partial.ks.clone(),
        j: partial.j,
        m: partial.m,
        theta: partial.theta.clone().unwrap_or(Rational::integer(0)),
    };
    if partial.p.is_none() {
        let th = out.theta.0.clone();
        let inv_p = j + th.clone() * (inv_r - m) + (one - th) * (out.q.reciprocal() / kappa - kbar);
        out.p = exponent_from_reciprocal(inv_p, "p")?;
    } else if partial.q.is_none() {
        let th = out.theta.0.clone();
        let free = one.clone() - th.clone();
        if free.is_zero() {
            return Err(Error::Infeasible("q does not enter the relation when theta = 1".into()));
        }
        let inv_qk = ((out.p.reciprocal() - j) - th * (inv_r - m)) / free + kbar;
        out.q = exponent_from_reciprocal(inv_qk * kappa, "q")?;
    } else {
        let inv_qk = out.q.reciprocal() / kappa;
        let low = inv_qk - kbar;
        let coeff = (inv_r - m) - low.clone();
        if coeff.is_zero() {
            return Err(Error::Infeasible("theta does not enter the relation for these orders".into()));
        }
        let th = (out.p.reciprocal() - j - low) / coeff;
        out.theta = Rational(th);
    }
    match out.validate() {
        Ok(()) => Ok(out),
        Err(Error::Parameter(msg)) => Err(Error::Infeasible(msg)),
        Err(e) => Err(e),
    }
}
