//! Clamped B-splines on `[0,1]` with exact derivatives.
//!
//! With no interior knots the basis is the Bernstein basis and the spline is a
//! single polynomial, hence C-infinity.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BSpline {
    degree: usize,
    knots: Vec<f64>,
    /// `layers[i]` holds the coefficients of the i-th derivative spline.
    layers: Vec<Vec<f64>>,
}

impl BSpline {
    /// `coeffs.len() - interior.len() - 1` is the degree. Interior knots must
    /// be strictly increasing inside `(0,1)`.
    pub fn new(coeffs: &[f64], interior: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::parameter("spline needs at least one coefficient"));
        }
        if coeffs.len() < interior.len() + 1 {
            return Err(Error::parameter(format!(
                "{} coefficients cannot carry {} interior knots",
                coeffs.len(),
                interior.len()
            )));
        }
        let mut prev = 0.0;
        for &k in interior {
            if !(k > prev && k < 1.0) {
                return Err(Error::parameter("interior knots must increase strictly inside (0,1)"));
            }
            prev = k;
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::parameter("spline coefficients must be finite"));
        }
        let degree = coeffs.len() - interior.len() - 1;
        let mut knots = vec![0.0; degree + 1];
        knots.extend_from_slice(interior);
        knots.extend(std::iter::repeat_n(1.0, degree + 1));

        let mut layers = vec![coeffs.to_vec()];
        for d in 1..=degree {
            let prev = &layers[d - 1];
            let k = (degree + 1 - d) as f64;
            let next = (0..prev.len() - 1)
                .map(|i| k * (prev[i + 1] - prev[i]) / (knots[i + degree + 1] - knots[i + d]))
                .collect();
            layers.push(next);
        }
        Ok(Self { degree, knots, layers })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.layers[0]
    }

    pub fn interior_knots(&self) -> &[f64] {
        &self.knots[self.degree + 1..self.knots.len() - self.degree - 1]
    }

    /// Value of the `order`-th derivative at `t`, with `t` clamped to `[0,1]`.
    pub fn eval(&self, order: usize, t: f64) -> f64 {
        if order > self.degree {
            return 0.0;
        }
        let p = self.degree - order;
        let c = &self.layers[order];
        let knots = &self.knots[order..self.knots.len() - order];
        let t = t.clamp(0.0, 1.0);
        // knot span with knots[s] <= t < knots[s+1], last span closed on the right
        let n = c.len();
        let mut s = p;
        while s + 1 < n && knots[s + 1] <= t {
            s += 1;
        }
        let mut d: Vec<f64> = (0..=p).map(|j| c[j + s - p]).collect();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let i = j + s - p;
                let denom = knots[i + p + 1 - r] - knots[i];
                let alpha = if denom > 0.0 { (t - knots[i]) / denom } else { 0.0 };
                d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
            }
        }
        d[p]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernstein_reproduces_polynomial() {
        // Bernstein coefficients of t^2 at degree 2 are (0, 0, 1).
        let s = BSpline::new(&[0.0, 0.0, 1.0], &[]).unwrap();
        for &t in &[0.0, 0.3, 0.7, 1.0] {
            assert!((s.eval(0, t) - t * t).abs() < 1e-15);
            assert!((s.eval(1, t) - 2.0 * t).abs() < 1e-14);
            assert!((s.eval(2, t) - 2.0).abs() < 1e-14);
            assert_eq!(s.eval(3, t), 0.0);
        }
    }

    #[test]
    fn partition_of_unity() {
        let s = BSpline::new(&[1.0; 7], &[0.25, 0.5, 0.75]).unwrap();
        assert_eq!(s.degree(), 3);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!((s.eval(0, t) - 1.0).abs() < 1e-14);
            assert!(s.eval(1, t).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_difference() {
        let s = BSpline::new(&[0.3, -1.0, 2.0, 0.5, 1.5, -0.2], &[0.4, 0.6]).unwrap();
        let h = 1e-6;
        for &t in &[0.1, 0.35, 0.5, 0.9] {
            let fd = (s.eval(0, t + h) - s.eval(0, t - h)) / (2.0 * h);
            assert!((fd - s.eval(1, t)).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(BSpline::new(&[1.0, 2.0], &[0.5, 0.4]).is_err());
        assert!(BSpline::new(&[1.0, 2.0, 3.0], &[1.0]).is_err());
        assert!(BSpline::new(&[], &[]).is_err());
        assert!(BSpline::new(&[1.0], &[0.5]).is_err());
    }
}
