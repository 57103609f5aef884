//! Nelder-Mead minimization with a fixed evaluation budget.

/// Outcome of one run: best point, its value, and the best-so-far value after
/// every evaluation.
#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub trace: Vec<f64>,
}

struct Counter<'a, F> {
    f: &'a F,
    budget: usize,
    trace: Vec<f64>,
    best: f64,
    best_x: Vec<f64>,
}

impl<F: Fn(&[f64]) -> f64> Counter<'_, F> {
    fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        let mut v = (self.f)(x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        if v < self.best {
            self.best = v;
            self.best_x = x.to_vec();
        }
        self.trace.push(self.best);
        v
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimize `f` from `x0` with initial simplex edge `step`. Stops after
/// `budget` evaluations or once the spread of simplex values drops below
/// `ftol`.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, budget: usize, ftol: f64) -> Minimum {
    let n = x0.len();
    let mut c = Counter { f, budget: budget.max(1), trace: Vec::new(), best: f64::INFINITY, best_x: x0.to_vec() };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = c.eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        if c.exhausted() {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let v = c.eval(&x);
        simplex.push((x, v));
    }
    while !c.exhausted() && simplex.len() == n + 1 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[n].1);
        if hi.is_finite() && (hi - lo).abs() <= ftol * (lo.abs() + hi.abs()).max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|p| p.0[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].0.clone();
        let xr = lerp(&centroid, &worst, -1.0);
        let fr = c.eval(&xr);
        if fr < simplex[0].1 {
            if c.exhausted() {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = lerp(&centroid, &worst, -2.0);
            let fe = c.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            if c.exhausted() {
                break;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let x = lerp(&centroid, &xr, 0.5);
                let v = c.eval(&x);
                (x, v)
            } else {
                let x = lerp(&centroid, &worst, 0.5);
                let v = c.eval(&x);
                (x, v)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    if c.exhausted() {
                        break;
                    }
                    let x = lerp(&best, &p.0, 0.5);
                    let v = c.eval(&x);
                    *p = (x, v);
                }
            }
        }
    }
    Minimum { x: c.best_x, value: c.best, trace: c.trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(&f, &[-1.2, 1.0], 0.5, 4000, 1e-16);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.trace.len() <= 4000);
    }

    #[test]
    fn budget_of_one() {
        let f = |x: &[f64]| x[0] * x[0];
        let m = minimize(&f, &[3.0], 1.0, 1, 0.0);
        assert_eq!(m.trace, vec![9.0]);
        assert_eq!(m.x, vec![3.0]);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] > 2.0 { f64::NAN } else { (x[0] - 1.0).powi(2) };
        let m = minimize(&f, &[0.0], 0.7, 200, 1e-14);
        assert!((m.x[0] - 1.0).abs() < 1e-5);
    }
}
