//! Integration-by-parts identities, the two provable constants, the
//! fractional ratio, and the open-problem probe.

use serde::{Deserialize, Serialize};

use super::eval::ratio_of;
use super::params::mean_order;
use crate::error::{Error, Result};
use crate::exec;
use crate::funcspace::{sample, AnalyticFunction, GridFunction};
use crate::norms::{gagliardo_seminorm, integral, lebesgue_norm, product_norm, Exponent, NormSpec, ProductSpec};

/// Resolution used for the seminorm double sum (its cost is quadratic).
pub const SEMINORM_N: usize = 4097;

/// Ceiling of `||u'||_4 / ||u u''||_2^{1/2}`.
pub fn ceiling_l4() -> f64 {
    3f64.sqrt()
}

/// Ceiling of `||u'||_6 / ||u u' u''||_2^{1/3}`.
pub fn ceiling_l6() -> f64 {
    5f64.powf(1.0 / 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    L4,
    L6,
}

/// `(int (u')^4 + 3 int u (u')^2 u'') / int (u')^4`, or the `L6` analogue
/// `(int (u')^6 + 5 int u (u')^4 u'') / int (u')^6`. Zero when `u' = 0`.
pub fn ibp_residual(g: &GridFunction, which: Identity) -> Result<f64> {
    let u = g.derivative(0)?;
    let d1 = g.derivative(1)?;
    let d2 = g.derivative(2)?;
    let (power, c) = match which {
        Identity::L4 => (4, 3.0),
        Identity::L6 => (6, 5.0),
    };
    let pos: Vec<f64> = d1.iter().map(|v| v.powi(power)).collect();
    let mixed: Vec<f64> = (0..u.len()).map(|k| u[k] * d1[k].powi(power - 2) * d2[k]).collect();
    let a = integral(g, &pos);
    let b = integral(g, &mixed);
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok((a + c * b) / a)
}

/// Both residuals `(L4, L6)`.
pub fn ibp_identities(g: &GridFunction) -> Result<(f64, f64)> {
    Ok((ibp_residual(g, Identity::L4)?, ibp_residual(g, Identity::L6)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialRow {
    pub id: String,
    /// `||u'||_4 / ||u u''||_2^{1/2}`
    pub ratio_l4: Option<f64>,
    /// `||u'||_6 / ||u u' u''||_2^{1/3}`
    pub ratio_l6: Option<f64>,
    /// `|u|_{W^{1/2,4}} / ||u u'||_2^{1/2}`
    pub ratio_fractional: Option<f64>,
    pub note: Option<String>,
}

fn skip_zero(x: (Option<f64>, bool)) -> Option<f64> {
    match x {
        (Some(v), false) => Some(v),
        _ => None,
    }
}

/// The two integer-order ratios on a grid carrying two derivatives.
pub fn special_ratios(g: &GridFunction) -> Result<(Option<f64>, Option<f64>)> {
    let two = Exponent::integer(2);
    let d4 = lebesgue_norm(g, &NormSpec::new(Exponent::integer(4), 1))?;
    let d6 = lebesgue_norm(g, &NormSpec::new(Exponent::integer(6), 1))?;
    let p02 = product_norm(g, &ProductSpec::new(vec![0, 2], two.clone())?)?;
    let p012 = product_norm(g, &ProductSpec::new(vec![0, 1, 2], two)?)?;
    Ok((skip_zero(ratio_of(d4, p02.sqrt())), skip_zero(ratio_of(d6, p012.cbrt()))))
}

/// `|u|_{W^{1/2,4}} / ||u u'||_2^{1/2}` with `u` sampled on its support.
pub fn fractional_ratio(f: &AnalyticFunction, n: usize) -> Result<Option<f64>> {
    let g = sample(f, f.support(), n.min(SEMINORM_N), 1)?;
    let num = gagliardo_seminorm(&g, 0.5, 4.0)?;
    let den = product_norm(&g, &ProductSpec::new(vec![0, 1], Exponent::integer(2))?)?;
    Ok(skip_zero(ratio_of(num, den.sqrt())))
}

/// Ratios for each corpus member, sampled on its support at `n` nodes
/// (the seminorm at most [`SEMINORM_N`]).
pub fn special_constants(corpus: &[(String, AnalyticFunction)], n: usize) -> Result<Vec<SpecialRow>> {
    exec::map_slice(corpus, |(id, f)| {
        let g = sample(f, f.support(), n, 2)?;
        let (ratio_l4, ratio_l6) = special_ratios(&g)?;
        let ratio_fractional = fractional_ratio(f, n)?;
        let note = (ratio_l4.is_none() || ratio_l6.is_none() || ratio_fractional.is_none())
            .then(|| "zero denominator, ratio skipped".to_string());
        Ok(SpecialRow { id: id.clone(), ratio_l4, ratio_l6, ratio_fractional, note })
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub id: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: Option<f64>,
    pub note: Option<String>,
}

/// `||D^{kbar} u||_{q kappa} / ||prod D^{k_i} u||_q^{1/kappa}` over a corpus.
/// Orders may exceed each other freely. A non-integer mean order is only
/// supported for `ks = (0, 1)`, through the `W^{1/2, 2q}` seminorm.
pub fn open_problem_probe(
    corpus: &[(String, AnalyticFunction)],
    q: &Exponent,
    ks: &[usize],
    n: usize,
) -> Result<Vec<ProbeRow>> {
    q.check_lebesgue("q")?;
    if q.is_infinite() {
        return Err(Error::Unsupported("the probe needs a finite q".into()));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    let kbar = mean_order(&ks)?;
    let kappa = ks.len();
    let qk = q.value() * kappa as f64;
    let fractional = !kbar.is_integer();
    if fractional && ks != [0, 1] {
        return Err(Error::Unsupported(format!(
            "mean order {}/{} is not an integer and the orders are not (0, 1)",
            kbar.numer(),
            kbar.denom()
        )));
    }
    let top = *ks.last().expect("non-empty");
    let kbar_int = if fractional { 0 } else { num_traits::ToPrimitive::to_usize(&kbar.to_integer()).unwrap_or(0) };
    let spec = ProductSpec::new(ks.clone(), q.clone())?;
    exec::map_slice(corpus, |(id, f)| {
        let g = sample(f, f.support(), n, top.max(kbar_int))?;
        let numerator = if fractional {
            let gs = sample(f, f.support(), n.min(SEMINORM_N), 0)?;
            gagliardo_seminorm(&gs, 0.5, qk)?
        } else {
            lebesgue_norm(&g, &NormSpec::new(Exponent::from_f64(qk)?, kbar_int))?
        };
        let denominator = product_norm(&g, &spec)?.powf(1.0 / kappa as f64);
        let (ratio, degenerate) = ratio_of(numerator, denominator);
        let note = if degenerate {
            Some("zero function, skipped".to_string())
        } else if ratio.is_none() {
            Some("zero denominator".to_string())
        } else {
            None
        };
        Ok(ProbeRow { id: id.clone(), numerator, denominator, ratio: if degenerate { None } else { ratio }, note })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{standard_corpus, Interval};

    #[test]
    fn zero_function() {
        let zero = AnalyticFunction::polynomial(vec![], Interval::UNIT).unwrap();
        let g = sample(&zero, Interval::UNIT, 65, 2).unwrap();
        assert_eq!(ibp_identities(&g).unwrap(), (0.0, 0.0));
        let rows = special_constants(&[("zero".into(), zero.clone())], 65).unwrap();
        assert!(rows[0].ratio_l4.is_none() && rows[0].note.is_some());
        let rows = open_problem_probe(&[("zero".into(), zero)], &Exponent::integer(2), &[0, 2], 65).unwrap();
        assert!(rows[0].ratio.is_none());
    }

    #[test]
    fn ibp_on_chi_converges() {
        let chi = AnalyticFunction::bump_chi();
        let res: Vec<(f64, f64)> = [17, 33, 65, 4097]
            .iter()
            .map(|&n| ibp_identities(&sample(&chi, Interval::UNIT, n, 2).unwrap()).unwrap())
            .collect();
        // each halving of h gains at least a factor 4 until round-off
        for w in res[..3].windows(2) {
            assert!(w[1].0.abs() * 4.0 <= w[0].0.abs() && w[1].1.abs() * 4.0 <= w[0].1.abs(), "{res:?}");
        }
        assert!(res[3].0.abs() < 1e-12 && res[3].1.abs() < 1e-12, "{res:?}");
    }

    #[test]
    fn probe_reproduces_l4_ratio() {
        let corpus = standard_corpus();
        let rows = open_problem_probe(&corpus[..2], &Exponent::integer(2), &[0, 2], 2049).unwrap();
        let sp = special_constants(&corpus[..2], 2049).unwrap();
        for (r, s) in rows.iter().zip(&sp) {
            let a = r.ratio.unwrap();
            let b = s.ratio_l4.unwrap();
            assert!((a - b).abs() < 1e-12 * b, "{a} {b}");
            assert!(a <= ceiling_l4());
        }
    }

    #[test]
    fn probe_fractional_matches_special() {
        let corpus = standard_corpus();
        let rows = open_problem_probe(&corpus[..1], &Exponent::integer(2), &[1, 0], 1025).unwrap();
        let direct = fractional_ratio(&corpus[0].1, 1025).unwrap().unwrap();
        assert!((rows[0].ratio.unwrap() - direct).abs() < 1e-12 * direct);
        assert!(matches!(
            open_problem_probe(&corpus[..1], &Exponent::integer(2), &[0, 0, 1], 65),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            open_problem_probe(&corpus[..1], &Exponent::integer(2), &[0, 3], 65),
            Err(Error::Unsupported(_))
        ));
    }
}
