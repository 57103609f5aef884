//! The standard corpus of compactly supported smooth test functions.

use super::perturb::perturb_nowhere_polynomial;
use super::AnalyticFunction;
use crate::error::{Error, Result};

pub const CORPUS_IDS: [&str; 7] = [
    "bumpchi",
    "sine1",
    "sine3",
    "sine7",
    "spline",
    "plateau_perturbed",
    "sine3_perturbed",
];

const SPLINE_COEFFS: [f64; 8] = [1.0, 0.5, 2.0, -1.0, 0.3, 1.5, 0.8, 1.0];

/// One corpus member by id.
pub fn corpus_function(id: &str) -> Result<AnalyticFunction> {
    match id {
        "bumpchi" => Ok(AnalyticFunction::bump_chi()),
        "sine1" => AnalyticFunction::sine_bump(1.0),
        "sine3" => AnalyticFunction::sine_bump(3.0),
        "sine7" => AnalyticFunction::sine_bump(7.0),
        "spline" => AnalyticFunction::spline_bump(&SPLINE_COEFFS, &[], 1.0),
        "plateau_perturbed" => {
            let u = AnalyticFunction::plateau_polynomial(vec![1.0, 0.0, 2.0], 0.2, 0.8, 0.15)?;
            perturb_nowhere_polynomial(&u, 1e-2)
        }
        "sine3_perturbed" => {
            let u = AnalyticFunction::dilation(AnalyticFunction::sine_bump(3.0)?, 1.0, 2.0, -0.5)?;
            perturb_nowhere_polynomial(&u, 1e-3)
        }
        other => Err(Error::parameter(format!(
            "unknown corpus function '{other}' (known: {})",
            CORPUS_IDS.join(", ")
        ))),
    }
}

/// All corpus members with their ids, in a fixed order.
pub fn standard_corpus() -> Vec<(String, AnalyticFunction)> {
    CORPUS_IDS
        .iter()
        .map(|id| (id.to_string(), corpus_function(id).expect("corpus members are valid")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Interval;

    #[test]
    fn seven_members_supported_in_unit_interval() {
        let c = standard_corpus();
        assert_eq!(c.len(), 7);
        for (id, f) in &c {
            assert!(Interval::UNIT.contains_interval(&f.support()), "{id}");
            assert!(!f.is_trivially_zero());
        }
        assert!(corpus_function("nope").is_err());
    }
}
