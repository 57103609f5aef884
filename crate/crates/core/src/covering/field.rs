//! Window norms `||f||_{L^p(x-h, x+h)}` from a fine sampling.
//!
//! For finite `p` the cumulative integral of `|f|^p` is the cubic Hermite
//! interpolant of the trapezoid prefix sums, so window masses are continuous
//! in the end points. Short windows are summed directly and long ones use
//! whichever of the prefix or suffix sums is smaller there, which keeps the
//! relative accuracy when the mass is tiny compared to the total. For
//! `p = inf` a sparse table gives range maxima.

use crate::funcspace::Interval;

#[derive(Clone, Debug)]
pub(crate) enum WindowNorm {
    Finite {
        p: f64,
        /// `|f|^p` at the nodes
        density: Vec<f64>,
        /// trapezoid integral over each cell
        cells: Vec<f64>,
        /// `prefix[k]` = sum of the cells left of node `k`
        prefix: Vec<f64>,
        /// `suffix[k]` = sum of the cells right of node `k`
        suffix: Vec<f64>,
    },
    Sup {
        abs: Vec<f64>,
        table: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct Sampled {
    pub grid: Interval,
    pub h: f64,
    pub norm: WindowNorm,
}

impl Sampled {
    pub fn new(grid: Interval, values: &[f64], p: f64) -> Self {
        let n = values.len();
        let h = grid.len() / (n - 1) as f64;
        let norm = if p.is_infinite() {
            let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
            let mut table = vec![abs.clone()];
            let mut width = 1;
            while 2 * width <= n {
                let prev = table.last().expect("non-empty");
                let next: Vec<f64> = (0..=n - 2 * width).map(|i| prev[i].max(prev[i + width])).collect();
                table.push(next);
                width *= 2;
            }
            WindowNorm::Sup { abs, table }
        } else {
            let density: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
            let cells: Vec<f64> = density.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).collect();
            let mut prefix = vec![0.0; n];
            for k in 1..n {
                prefix[k] = prefix[k - 1] + cells[k - 1];
            }
            let mut suffix = vec![0.0; n];
            for k in (0..n - 1).rev() {
                suffix[k] = suffix[k + 1] + cells[k];
            }
            WindowNorm::Finite { p, density, cells, prefix, suffix }
        };
        Self { grid, h, norm }
    }

    fn position(&self, x: f64) -> f64 {
        ((x - self.grid.lo) / self.h).clamp(0.0, (self.len() - 1) as f64)
    }

    fn len(&self) -> usize {
        match &self.norm {
            WindowNorm::Finite { density, .. } => density.len(),
            WindowNorm::Sup { abs, .. } => abs.len(),
        }
    }

    /// Cell index and offset of `x`, with the last node mapped into the last cell.
    fn locate(&self, x: f64) -> (usize, f64) {
        let t = self.position(x);
        let k = (t.floor() as usize).min(self.len() - 2);
        (k, t - k as f64)
    }

    /// Hermite cumulative integral from node `k` to offset `s` within cell `k`.
    fn piece(&self, k: usize, s: f64) -> f64 {
        let WindowNorm::Finite { density, cells, .. } = &self.norm else {
            unreachable!("cumulative integral of a sup-norm field")
        };
        let (s2, s3) = (s * s, s * s * s);
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h01 * cells[k] + h10 * self.h * density[k] + h11 * self.h * density[k + 1]
    }

    /// Sum of cells `k0..k1`.
    fn cell_sum(&self, k0: usize, k1: usize) -> f64 {
        const DIRECT: usize = 256;
        let WindowNorm::Finite { cells, prefix, suffix, .. } = &self.norm else {
            unreachable!("cumulative integral of a sup-norm field")
        };
        if k1 <= k0 {
            return 0.0;
        }
        if k1 - k0 <= DIRECT {
            return cells[k0..k1].iter().sum();
        }
        if prefix[k1] <= suffix[k0] {
            prefix[k1] - prefix[k0]
        } else {
            suffix[k0] - suffix[k1]
        }
    }

    fn mass(&self, lo: f64, hi: f64) -> f64 {
        let (k0, s0) = self.locate(lo);
        let (k1, s1) = self.locate(hi);
        (self.cell_sum(k0, k1) + self.piece(k1, s1) - self.piece(k0, s0)).max(0.0)
    }

    fn interp_abs(abs: &[f64], t: f64) -> f64 {
        let k = (t.floor() as usize).min(abs.len() - 2);
        let s = t - k as f64;
        (1.0 - s) * abs[k] + s * abs[k + 1]
    }

    /// `L^p` norm over `[lo, hi]`; zero outside the sampled interval.
    pub fn window(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(self.grid.lo);
        let hi = hi.min(self.grid.hi);
        if hi <= lo {
            return 0.0;
        }
        match &self.norm {
            WindowNorm::Finite { p, .. } => {
                self.mass(lo, hi).powf(1.0 / p)
            }
            WindowNorm::Sup { abs, table } => {
                let (t0, t1) = (self.position(lo), self.position(hi));
                let mut m = Self::interp_abs(abs, t0).max(Self::interp_abs(abs, t1));
                let i0 = t0.ceil() as usize;
                let i1 = (t1.floor() as usize).min(abs.len() - 1);
                if i0 <= i1 {
                    let len = i1 - i0 + 1;
                    let level = (usize::BITS - 1 - len.leading_zeros()) as usize;
                    let row = &table[level];
                    m = m.max(row[i0]).max(row[i1 + 1 - (1 << level)]);
                }
                m
            }
        }
    }
}
