//! Smooth compactly supported test functions, their exact derivatives and
//! uniform samplings.

pub mod chi;
pub mod corpus;
pub mod family;
pub mod grid;
pub mod jet;
pub mod perturb;
pub mod poly;
pub mod spline;

pub use chi::{chi_derivative, chi_stack, MAX_ORDER};
pub use corpus::{corpus_function, standard_corpus, CORPUS_IDS};
pub use family::{AnalyticFunction, Descriptor, Family};
pub use grid::{sample, GridFunction, Provenance};
pub use perturb::{nowhere_polynomial_proxy, perturb_nowhere_polynomial};
pub use poly::{Polynomial, RationalFunction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo < hi`. Serialized as `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::parameter(format!("invalid interval [{lo}, {hi}]")))
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}
