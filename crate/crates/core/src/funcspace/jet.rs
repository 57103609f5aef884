//! Truncated Taylor series ("jets") for exact derivatives of composite
//! closed-form expressions.
//!
//! A jet stores normalised Taylor coefficients `c_k = f^(k)(x0) / k!`.

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Self { c }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(0.0, order)
    }

    /// The identity map expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        Self::linear(x0, 1.0, order)
    }

    /// `value + slope (x - x0)` expanded at `x0`.
    pub fn linear(value: f64, slope: f64, order: usize) -> Self {
        let mut j = Self::constant(value, order);
        if order >= 1 {
            j.c[1] = slope;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `f^(i)(x0)`.
    pub fn derivative(&self, i: usize) -> f64 {
        self.c.get(i).map_or(0.0, |&c| c * factorial(i))
    }

    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|i| self.derivative(i)).collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn offset(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Self {
        self.scale(-1.0).offset(1.0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.c.len();
        let c = (0..n)
            .map(|k| (0..=k).map(|j| self.c[j] * o.c[k - j]).sum())
            .collect();
        Self { c }
    }

    pub fn recip(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.c[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Self { c: b }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Self { c: b }
    }

    /// `(sin self, cos self)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..n {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let a = j as f64 * self.c[j];
                ds += a * c[k - j];
                dc -= a * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (Self { c: s }, Self { c })
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable() {
        let j = Jet::variable(0.3, 5).exp();
        for i in 0..=5 {
            assert!((j.derivative(i) - 0.3f64.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        // d^k/dx^k 1/x = (-1)^k k! / x^{k+1}
        let x = 1.7;
        let j = Jet::variable(x, 6).recip();
        for k in 0..=6 {
            let expected = (-1f64).powi(k as i32) * factorial(k) / x.powi(k as i32 + 1);
            assert!((j.derivative(k) - expected).abs() < 1e-12 * expected.abs());
        }
    }

    #[test]
    fn sine_cycle() {
        let (s, c) = Jet::variable(0.4, 4).scale(2.0).sin_cos();
        // d/dx sin(2x) = 2 cos(2x)
        assert!((s.derivative(1) - 2.0 * 0.8f64.cos()).abs() < 1e-14);
        assert!((c.derivative(2) + 4.0 * 0.8f64.cos()).abs() < 1e-13);
        assert!((s.derivative(4) - 16.0 * 0.8f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn product_rule() {
        let x = Jet::variable(2.0, 3);
        let p = x.mul(&x).mul(&x); // x^3
        assert_eq!(p.derivatives(), vec![8.0, 12.0, 12.0, 6.0]);
    }
}
