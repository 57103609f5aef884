//! Subdivision of the support into balanced intervals: balance functions,
//! critical radii, 1D Besicovitch selection and checks of the resulting
//! cover.

mod field;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::funcspace::{sample, AnalyticFunction, Interval, MAX_ORDER};
use crate::gn::{mean_order, GNParams};
use crate::norms::Exponent;
use field::Sampled;

pub const BALANCE_TOL: f64 = 1e-6;
pub const SCAN_FACTOR: f64 = 1.05;
pub const BISECTION_STEPS: usize = 60;
pub const OVERLAP_BOUND: usize = 4;
pub const PROBE_COUNT: usize = 10_000;
/// Nodes of the fine sampling behind the window norms.
pub const FIELD_N: usize = (1 << 16) + 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainMode {
    /// Windows `(x - h, x + h)` on the line, weighted by `h`.
    RealLine,
    /// Windows clipped to `(0,1)`, weighted by their length.
    Bounded,
}

/// `alpha_x(h) = L^{kbar - 1/(q kappa)} ||v||_{L^q(W)}^{1/kappa}` and
/// `beta_x(h) = L^{m - 1/r} ||D^m u||_{L^r(W)}` with `v = prod D^{k_i} u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceSpec {
    pub ks: Vec<usize>,
    pub q: Exponent,
    pub m: usize,
    pub r: Exponent,
    pub mode: DomainMode,
}

impl BalanceSpec {
    pub fn from_params(params: &GNParams, mode: DomainMode) -> Self {
        Self { ks: params.ks.clone(), q: params.q.clone(), m: params.m, r: params.r.clone(), mode }
    }

    pub fn kbar(&self) -> f64 {
        let k = mean_order(&self.ks).unwrap_or_default();
        num_traits::ToPrimitive::to_f64(&k).unwrap_or(f64::NAN)
    }

    fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.ks.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::parameter("orders must be non-empty and sorted ascending"));
        }
        if self.ks.last().copied().unwrap_or(0) >= self.m || self.m > MAX_ORDER {
            return Err(Error::parameter("orders must satisfy k_kappa < m <= MAX_ORDER"));
        }
        self.q.check_lebesgue("q")?;
        self.r.check_lebesgue("r")?;
        if self.mode == DomainMode::RealLine && self.kbar() >= self.m as f64 - 1.0 {
            return Err(Error::Unsupported(format!(
                "real-line subdivision needs kbar < m - 1 (kbar = {}, m = {})",
                self.kbar(),
                self.m
            )));
        }
        Ok(())
    }
}

/// Fine samplings of `v` and `D^m u` over the working domain.
#[derive(Clone, Debug)]
pub struct BalanceField {
    spec: BalanceSpec,
    domain: Interval,
    v: Sampled,
    top: Sampled,
    kappa: f64,
    kbar: f64,
    inv_q: f64,
    inv_r: f64,
}

impl BalanceField {
    /// The domain is the support of `u` on the line, `[0,1]` in bounded mode.
    pub fn new(u: &AnalyticFunction, spec: &BalanceSpec, fine_n: usize) -> Result<Self> {
        spec.validate()?;
        let domain = match spec.mode {
            DomainMode::RealLine => u.support(),
            DomainMode::Bounded => Interval::UNIT,
        };
        let g = sample(u, domain, fine_n.max(3), spec.m)?;
        let mut v = vec![1.0; g.len()];
        for &k in &spec.ks {
            for (o, d) in v.iter_mut().zip(g.derivative(k)?) {
                *o *= d;
            }
        }
        Ok(Self {
            spec: spec.clone(),
            domain,
            v: Sampled::new(domain, &v, spec.q.value()),
            top: Sampled::new(domain, g.derivative(spec.m)?, spec.r.value()),
            kappa: spec.ks.len() as f64,
            kbar: spec.kbar(),
            inv_q: spec.q.reciprocal_f64(),
            inv_r: spec.r.reciprocal_f64(),
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn spec(&self) -> &BalanceSpec {
        &self.spec
    }

    fn window(&self, x: f64, h: f64) -> (f64, f64, f64) {
        match self.spec.mode {
            DomainMode::RealLine => (x - h, x + h, h),
            DomainMode::Bounded => {
                let (lo, hi) = ((x - h).max(0.0), (x + h).min(1.0));
                (lo, hi, (hi - lo).max(0.0))
            }
        }
    }

    pub fn alpha(&self, x: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::parameter(format!("window radius h = {h} must be positive")));
        }
        let (lo, hi, len) = self.window(x, h);
        let norm = self.v.window(lo, hi);
        if norm == 0.0 {
            return Ok(0.0);
        }
        Ok(len.powf(self.kbar - self.inv_q / self.kappa) * norm.powf(1.0 / self.kappa))
    }

    pub fn beta(&self, x: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::parameter(format!("window radius h = {h} must be positive")));
        }
        let (lo, hi, len) = self.window(x, h);
        let norm = self.top.window(lo, hi);
        if norm == 0.0 {
            return Ok(0.0);
        }
        Ok(len.powf(self.spec.m as f64 - self.inv_r) * norm)
    }

    fn gap(&self, x: f64, h: f64) -> f64 {
        self.alpha(x, h).expect("positive radius") - self.beta(x, h).expect("positive radius")
    }

    /// `inf { h > 0 : alpha_x(h) <= beta_x(h) }`, located by a geometric scan
    /// from `h0` (downwards first if the inequality already holds at `h0`)
    /// and refined by bisection.
    pub fn critical_radius(&self, x: f64, h0: f64) -> Result<f64> {
        let h_max = 10.0 * self.domain.len();
        let h_min = 1e-12 * self.domain.len();
        let mut h = h0.min(h_max);
        let (mut lo, mut hi);
        if self.gap(x, h) <= 0.0 {
            // walk down until alpha > beta again
            hi = h;
            loop {
                let next = hi / SCAN_FACTOR;
                if next < h_min {
                    return Ok(hi);
                }
                if self.gap(x, next) > 0.0 {
                    lo = next;
                    break;
                }
                hi = next;
            }
        } else {
            loop {
                let next = h * SCAN_FACTOR;
                if next > h_max {
                    return Err(Error::NoCrossing { x, h_max });
                }
                if self.gap(x, next) <= 0.0 {
                    lo = h;
                    hi = next;
                    break;
                }
                h = next;
            }
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.gap(x, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// `|alpha - beta| / max(alpha, beta)` at radius `h`.
    pub fn residual(&self, x: f64, h: f64) -> Result<(f64, f64, f64)> {
        let a = self.alpha(x, h)?;
        let b = self.beta(x, h)?;
        let m = a.max(b);
        Ok((a, b, if m > 0.0 { (a - b).abs() / m } else { 0.0 }))
    }
}

/// `alpha_x(h)` for a one-off evaluation.
pub fn balance_alpha(u: &AnalyticFunction, x: f64, h: f64, spec: &BalanceSpec) -> Result<f64> {
    BalanceField::new(u, spec, FIELD_N)?.alpha(x, h)
}

/// `beta_x(h)` for a one-off evaluation.
pub fn balance_beta(u: &AnalyticFunction, x: f64, h: f64, spec: &BalanceSpec) -> Result<f64> {
    BalanceField::new(u, spec, FIELD_N)?.beta(x, h)
}

/// Relative thresholds defining the discrete set `E`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverOptions {
    pub eps_u: f64,
    pub eps_v: f64,
    pub fine_n: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self { eps_u: 1e-9, eps_v: 1e-9, fine_n: FIELD_N }
    }
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Membership in `E = {|u| > eps_u ||u||_inf, |v| > eps_v ||v||_inf}`.
#[derive(Clone, Debug)]
pub struct ESet {
    ks: Vec<usize>,
    u_cut: f64,
    v_cut: f64,
}

impl ESet {
    pub fn new(u: &AnalyticFunction, ks: &[usize], domain: Interval, n: usize, opts: &CoverOptions) -> Result<Self> {
        let top = ks.iter().copied().max().unwrap_or(0);
        let g = sample(u, domain, n, top)?;
        let mut v = vec![1.0; g.len()];
        for &k in ks {
            for (o, d) in v.iter_mut().zip(g.derivative(k)?) {
                *o *= d;
            }
        }
        Ok(Self { ks: ks.to_vec(), u_cut: opts.eps_u * sup(g.values()), v_cut: opts.eps_v * sup(&v) })
    }

    pub fn contains(&self, u: &AnalyticFunction, x: f64) -> bool {
        let top = self.ks.iter().copied().max().unwrap_or(0);
        let d = u.derivatives(x, top).expect("order checked at construction");
        let v: f64 = self.ks.iter().map(|&k| d[k]).product();
        self.u_cut > 0.0 && d[0].abs() > self.u_cut && v.abs() > self.v_cut
    }
}

/// Critical radius at `x`, which must lie in `E`.
pub fn critical_radius(u: &AnalyticFunction, x: f64, spec: &BalanceSpec) -> Result<f64> {
    let field = BalanceField::new(u, spec, FIELD_N)?;
    let e = ESet::new(u, &spec.ks, field.domain(), 8193, &CoverOptions::default())?;
    if !e.contains(u, x) {
        return Err(Error::domain(format!("x = {x} is not in E (u or v vanishes there)")));
    }
    field.critical_radius(x, 2.0 * field.domain().len() / 8192.0)
}

/// Intervals `(c - r, c + r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }
}

/// Greedy selection by decreasing radius, skipping balls whose center is
/// already covered, followed by a sweep adding any ball whose center is
/// still uncovered. Returns indices into `balls`.
pub fn besicovitch_select(balls: &[Ball]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        balls[b]
            .radius
            .total_cmp(&balls[a].radius)
            .then(balls[a].center.total_cmp(&balls[b].center))
    });
    let mut chosen: Vec<usize> = Vec::new();
    for &i in &order {
        if !chosen.iter().any(|&c| balls[c].contains(balls[i].center)) {
            chosen.push(i);
        }
    }
    for i in 0..balls.len() {
        if !chosen.iter().any(|&c| balls[c].contains(balls[i].center)) {
            chosen.push(i);
        }
    }
    chosen
}

/// Number of balls containing each (sorted) probe point.
pub fn overlap_counts(balls: &[Ball], probes: &[f64]) -> Vec<usize> {
    let mut diff = vec![0i64; probes.len() + 1];
    for b in balls {
        let lo = probes.partition_point(|&p| p <= b.center - b.radius);
        let hi = probes.partition_point(|&p| p < b.center + b.radius);
        if lo < hi {
            diff[lo] += 1;
            diff[hi] -= 1;
        }
    }
    let mut run = 0i64;
    diff[..probes.len()]
        .iter()
        .map(|d| {
            run += d;
            run as usize
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverInterval {
    pub center: f64,
    pub radius: f64,
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub spec: BalanceSpec,
    pub domain: Interval,
    pub n: usize,
    pub options: CoverOptions,
    pub e_points: usize,
    pub intervals: Vec<CoverInterval>,
    pub max_overlap: usize,
    /// `overlap_profile[c]` = number of probes covered exactly `c` times.
    pub overlap_profile: Vec<usize>,
    pub max_residual: f64,
    /// Uncovered measure of `E`, in units of the `E`-grid spacing.
    pub deficit_cells: f64,
    pub deficit_measure: f64,
}

impl CoverReport {
    /// Overlap, balance and coverage bounds.
    pub fn check(&self, max_deficit_cells: f64) -> Result<()> {
        if self.max_overlap > OVERLAP_BOUND {
            return Err(Error::Violation(format!("overlap {} exceeds {OVERLAP_BOUND}", self.max_overlap)));
        }
        if self.max_residual > BALANCE_TOL {
            return Err(Error::Violation(format!("balance residual {:e} exceeds {BALANCE_TOL:e}", self.max_residual)));
        }
        if self.deficit_cells > max_deficit_cells {
            return Err(Error::Violation(format!(
                "coverage deficit {} cells exceeds {max_deficit_cells}",
                self.deficit_cells
            )));
        }
        Ok(())
    }
}

/// Discretize `E` on `n` nodes, compute all critical radii, select a
/// Besicovitch subfamily and measure overlap, balance and coverage.
pub fn build_cover(u: &AnalyticFunction, spec: &BalanceSpec, n: usize, opts: &CoverOptions) -> Result<CoverReport> {
    if n < 3 {
        return Err(Error::parameter("the E-grid needs at least three nodes"));
    }
    let field = BalanceField::new(u, spec, opts.fine_n)?;
    let domain = field.domain();
    let spacing = domain.len() / (n - 1) as f64;
    let e = ESet::new(u, &spec.ks, domain, n, opts)?;
    let nodes: Vec<f64> = (0..n).map(|k| domain.lo + k as f64 * spacing).collect();
    let centers: Vec<f64> = nodes.iter().copied().filter(|&x| e.contains(u, x)).collect();
    let h0 = 2.0 * spacing;
    let radii: Vec<Result<f64>> = exec::map_slice(&centers, |&x| field.critical_radius(x, h0));
    let mut balls = Vec::with_capacity(centers.len());
    for (&c, r) in centers.iter().zip(radii) {
        balls.push(Ball { center: c, radius: r? });
    }
    let chosen = besicovitch_select(&balls);
    let selected: Vec<Ball> = chosen.iter().map(|&i| balls[i]).collect();

    let mut intervals = Vec::with_capacity(selected.len());
    let mut max_residual: f64 = 0.0;
    for b in &selected {
        let (alpha, beta, residual) = field.residual(b.center, b.radius)?;
        max_residual = max_residual.max(residual);
        intervals.push(CoverInterval { center: b.center, radius: b.radius, alpha, beta, residual });
    }

    let hull = selected
        .iter()
        .fold(domain, |acc, b| acc.hull(&Interval { lo: b.center - b.radius, hi: b.center + b.radius }));
    let probes: Vec<f64> = (0..PROBE_COUNT)
        .map(|k| hull.lo + hull.len() * k as f64 / (PROBE_COUNT - 1) as f64)
        .collect();
    let counts = overlap_counts(&selected, &probes);
    let max_overlap = counts.iter().copied().max().unwrap_or(0);
    let mut overlap_profile = vec![0; max_overlap + 1];
    for c in counts {
        overlap_profile[c] += 1;
    }

    let fine = 4 * (n - 1) + 1;
    let fine_step = domain.len() / (fine - 1) as f64;
    let fine_nodes: Vec<f64> = (0..fine).map(|k| domain.lo + k as f64 * fine_step).collect();
    let in_e: Vec<bool> = exec::map_slice(&fine_nodes, |&x| e.contains(u, x));
    let covered = overlap_counts(&selected, &fine_nodes);
    let missed = in_e.iter().zip(&covered).filter(|(&inside, &c)| inside && c == 0).count();
    let deficit_measure = missed as f64 * fine_step;

    Ok(CoverReport {
        spec: spec.clone(),
        domain,
        n,
        options: *opts,
        e_points: centers.len(),
        intervals,
        max_overlap,
        overlap_profile,
        max_residual,
        deficit_cells: deficit_measure / spacing,
        deficit_measure,
    })
}
