//! Uniform samplings carrying derivative stacks.

use serde::{Deserialize, Serialize};

use super::chi::MAX_ORDER;
use super::{AnalyticFunction, Interval};
use crate::error::{Error, Result};
use crate::exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    FiniteDifference,
}

/// Values and derivatives `D^0 u .. D^m u` at `n` uniform nodes of a closed
/// interval, both endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    interval: Interval,
    stack: Vec<Vec<f64>>,
    provenance: Provenance,
}

/// Sample `f` and its first `m` derivatives at `n` uniform nodes.
pub fn sample(f: &AnalyticFunction, interval: Interval, n: usize, m: usize) -> Result<GridFunction> {
    if n < 2 {
        return Err(Error::parameter("a grid needs at least two nodes"));
    }
    if m > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order: m, max: MAX_ORDER });
    }
    let rows = exec::map_range(n, |k| {
        f.derivatives(node(interval, n, k), m).expect("order checked above")
    });
    let mut stack = vec![Vec::with_capacity(n); m + 1];
    for row in rows {
        for (col, v) in stack.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Ok(GridFunction { interval, stack, provenance: Provenance::Exact })
}

fn node(interval: Interval, n: usize, k: usize) -> f64 {
    if k + 1 == n {
        interval.hi
    } else {
        interval.lo + interval.len() * k as f64 / (n - 1) as f64
    }
}

/// Second-order differences: central inside, one-sided at both ends.
fn differentiate(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    if n == 2 {
        let d = (v[1] - v[0]) / h;
        return vec![d, d];
    }
    let mut out = vec![0.0; n];
    for k in 1..n - 1 {
        out[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
    }
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    out
}

impl GridFunction {
    /// Grid from raw values; derivatives up to `m` are finite differences.
    pub fn from_values(interval: Interval, values: Vec<f64>, m: usize) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::parameter("a grid needs at least two nodes"));
        }
        let h = interval.len() / (values.len() - 1) as f64;
        let mut stack = vec![values];
        for i in 0..m {
            let next = differentiate(&stack[i], h);
            stack.push(next);
        }
        Ok(Self { interval, stack, provenance: Provenance::FiniteDifference })
    }

    /// Grid from a full stack of equal-length arrays, taken as exact.
    pub fn from_stack(interval: Interval, stack: Vec<Vec<f64>>) -> Result<Self> {
        let n = stack.first().map_or(0, Vec::len);
        if n < 2 || stack.iter().any(|c| c.len() != n) {
            return Err(Error::parameter("stack arrays must share a length of at least two"));
        }
        Ok(Self { interval, stack, provenance: Provenance::Exact })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.stack[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.interval.len() / (self.len() - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        node(self.interval, self.len(), k)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    pub fn max_order(&self) -> usize {
        self.stack.len() - 1
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn values(&self) -> &[f64] {
        &self.stack[0]
    }

    pub fn derivative(&self, order: usize) -> Result<&[f64]> {
        self.stack.get(order).map(Vec::as_slice).ok_or_else(|| {
            Error::parameter(format!(
                "derivative of order {order} requested but the grid carries only {}",
                self.max_order()
            ))
        })
    }

    /// Central difference of `D^order u`, at interior nodes `1..n-1`.
    pub fn central_difference(&self, order: usize) -> Result<Vec<f64>> {
        let v = self.derivative(order)?;
        let h = self.h();
        Ok(v.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)).collect())
    }

    /// Every array multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let stack = self.stack.iter().map(|col| col.iter().map(|v| c * v).collect()).collect();
        Self { interval: self.interval, stack, provenance: self.provenance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_node_chi() {
        let g = sample(&AnalyticFunction::bump_chi(), Interval::UNIT, 3, 0).unwrap();
        assert_eq!(g.values(), &[0.0, (-4.0f64).exp(), 0.0]);
        assert_eq!(g.provenance(), Provenance::Exact);
    }

    #[test]
    fn two_nodes_are_endpoints() {
        let f = AnalyticFunction::polynomial(vec![1.0, 2.0], Interval::new(-1.0, 3.0).unwrap()).unwrap();
        let g = sample(&f, Interval::new(-1.0, 3.0).unwrap(), 2, 1).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, 3.0]);
        assert_eq!(g.values(), &[-1.0, 7.0]);
        assert_eq!(g.derivative(1).unwrap(), &[2.0, 2.0]);
    }

    #[test]
    fn errors() {
        let f = AnalyticFunction::bump_chi();
        assert!(sample(&f, Interval::UNIT, 1, 0).is_err());
        assert!(sample(&f, Interval::UNIT, 5, MAX_ORDER + 1).is_err());
        let g = sample(&f, Interval::UNIT, 5, 2).unwrap();
        assert!(g.derivative(3).is_err());
    }

    #[test]
    fn exact_stack_is_pointwise_evaluation() {
        let f = AnalyticFunction::sine_bump(3.0).unwrap();
        let g = sample(&f, Interval::UNIT, 65, 4).unwrap();
        for k in [0, 10, 32, 64] {
            for i in 0..=4 {
                assert_eq!(g.derivative(i).unwrap()[k], f.evaluate(i, g.node(k)).unwrap());
            }
        }
    }

    #[test]
    fn finite_difference_grid() {
        let i = Interval::new(0.0, 2.0).unwrap();
        let v: Vec<f64> = (0..41).map(|k| (k as f64 * 0.05).powi(2)).collect();
        let g = GridFunction::from_values(i, v, 2).unwrap();
        assert_eq!(g.provenance(), Provenance::FiniteDifference);
        for (k, d) in g.derivative(1).unwrap().iter().enumerate() {
            assert!((d - 2.0 * g.node(k)).abs() < 1e-12);
        }
    }
}
