//! The 4-state control-affine system
//! `x1' = w, x2' = x1, x3' = x2, x4' = x1^2 x2^2 x3^2 - x1^p`
//! started from the origin, with the experiments around its terminal value
//! `x4(T) = int (u u' u'')^2 - int (u'')^p`, `u = x3`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::funcspace::AnalyticFunction;
use crate::norms::quadrature::simpson;

/// Tolerance on `x1(T), x2(T), x3(T)`, relative to the sup of each component.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Normalized lower bound accepted for `x4(T)` in the obstruction regime.
pub const OBSTRUCTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSystem {
    pub p: u32,
    pub horizon: f64,
}

impl ControlSystem {
    pub fn new(p: u32, horizon: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::parameter("p must be at least 1"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::parameter(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { p, horizon })
    }

    fn rhs(&self, x: &[f64; 4], w: f64) -> [f64; 4] {
        let prod = x[0] * x[1] * x[2];
        [w, x[0], x[1], prod * prod - x[0].powi(self.p as i32)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum ControlLaw {
    Zero,
    /// `w(t) = eps * base'''(t eps^-a)`.
    ScaledBumpTriple { base: AnalyticFunction, eps: f64, a: f64 },
    /// Samples on a uniform grid over `[0, T]`, linearly interpolated.
    GridSamples { values: Vec<f64> },
}

impl ControlLaw {
    pub fn bump_triple(base: AnalyticFunction, eps: f64, a: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite() && a.is_finite()) {
            return Err(Error::parameter(format!("need eps > 0 and finite a, got eps = {eps}, a = {a}")));
        }
        if base.support().lo < 0.0 {
            return Err(Error::domain("base must vanish near t = 0"));
        }
        if !eps.powf(-a).is_finite() {
            return Err(Error::parameter("eps^-a overflows"));
        }
        Ok(ControlLaw::ScaledBumpTriple { base, eps, a })
    }

    pub fn grid(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parameter("grid control needs at least two finite samples"));
        }
        Ok(ControlLaw::GridSamples { values })
    }

    /// End of the support in time, if compact.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            ControlLaw::Zero => Some(0.0),
            ControlLaw::ScaledBumpTriple { base, eps, a } => Some(base.support().hi * eps.powf(*a)),
            ControlLaw::GridSamples { .. } => None,
        }
    }

    pub fn value(&self, t: f64, horizon: f64) -> Result<f64> {
        match self {
            ControlLaw::Zero => Ok(0.0),
            ControlLaw::ScaledBumpTriple { base, eps, a } => Ok(eps * base.evaluate(3, t * eps.powf(-a))?),
            ControlLaw::GridSamples { values } => {
                let cells = (values.len() - 1) as f64;
                let s = (t / horizon * cells).clamp(0.0, cells);
                let i = (s.floor() as usize).min(values.len() - 2);
                let f = s - i as f64;
                Ok(values[i] + f * (values[i + 1] - values[i]))
            }
        }
    }

    /// Exact `(x1, x2, x3)` for the scaled bump family.
    pub fn exact_chain(&self, t: f64) -> Result<Option<[f64; 3]>> {
        match self {
            ControlLaw::Zero => Ok(Some([0.0; 3])),
            ControlLaw::ScaledBumpTriple { base, eps, a } => {
                let s = t * eps.powf(-a);
                let d = base.derivatives(s, 2)?;
                Ok(Some([
                    eps.powf(1.0 + a) * d[2],
                    eps.powf(1.0 + 2.0 * a) * d[1],
                    eps.powf(1.0 + 3.0 * a) * d[0],
                ]))
            }
            ControlLaw::GridSamples { .. } => Ok(None),
        }
    }

    fn scaled(&self, c: f64) -> Result<Self> {
        match self {
            ControlLaw::Zero => Ok(ControlLaw::Zero),
            ControlLaw::ScaledBumpTriple { base, eps, a } => {
                Ok(ControlLaw::ScaledBumpTriple { base: base.scaled(c)?, eps: *eps, a: *a })
            }
            ControlLaw::GridSamples { values } => Ok(ControlLaw::GridSamples { values: values.iter().map(|v| c * v).collect() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 4]>,
    /// Control at every node.
    pub controls: Vec<f64>,
    pub terminal: [f64; 4],
}

impl Trajectory {
    fn h(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    fn sup(&self, i: usize) -> f64 {
        self.states.iter().fold(0.0, |m, x| m.max(x[i].abs()))
    }

    /// Largest `|x_i(T)| / sup|x_i|` over `i = 1, 2, 3`.
    pub fn constraint_defect(&self) -> f64 {
        (0..3)
            .map(|i| {
                let s = self.sup(i);
                if s == 0.0 { 0.0 } else { self.terminal[i].abs() / s }
            })
            .fold(0.0, f64::max)
    }
}

/// Classical fixed-step RK4 from `x(0) = 0` over `[0, T]`.
pub fn integrate(sys: &ControlSystem, law: &ControlLaw, steps: usize) -> Result<Trajectory> {
    if steps < 2 {
        return Err(Error::parameter(format!("need at least 2 steps, got {steps}")));
    }
    let t_end = sys.horizon;
    let h = t_end / steps as f64;
    let w = (0..=2 * steps).map(|k| law.value(0.5 * h * k as f64, t_end)).collect::<Result<Vec<_>>>()?;
    let mut x = [0.0; 4];
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x);
    for n in 0..steps {
        let (w0, wm, w1) = (w[2 * n], w[2 * n + 1], w[2 * n + 2]);
        let k1 = sys.rhs(&x, w0);
        let k2 = sys.rhs(&axpy(&x, 0.5 * h, &k1), wm);
        let k3 = sys.rhs(&axpy(&x, 0.5 * h, &k2), wm);
        let k4 = sys.rhs(&axpy(&x, h, &k3), w1);
        for i in 0..4 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: n + 1 });
        }
        states.push(x);
    }
    Ok(Trajectory {
        times: (0..=steps).map(|n| n as f64 * h).collect(),
        controls: w.iter().step_by(2).copied().collect(),
        terminal: x,
        states,
    })
}

fn axpy(x: &[f64; 4], a: f64, k: &[f64; 4]) -> [f64; 4] {
    [x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2], x[3] + a * k[3]]
}

/// Largest deviation of `(x1, x2, x3)` from the exact chain over all nodes.
pub fn chain_error(sys: &ControlSystem, law: &ControlLaw, steps: usize) -> Result<f64> {
    let traj = integrate(sys, law, steps)?;
    let mut err: f64 = 0.0;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let exact = law
            .exact_chain(*t)?
            .ok_or_else(|| Error::Unsupported("no exact chain for sampled controls".into()))?;
        for i in 0..3 {
            err = err.max((x[i] - exact[i]).abs());
        }
    }
    Ok(err)
}

/// The two integrals of the terminal formula on the trajectory grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalTerms {
    pub positive: f64,
    pub power: f64,
}

pub fn terminal_terms(sys: &ControlSystem, traj: &Trajectory) -> TerminalTerms {
    let h = traj.h();
    let sq: Vec<f64> = traj.states.iter().map(|x| (x[0] * x[1] * x[2]).powi(2)).collect();
    let pw: Vec<f64> = traj.states.iter().map(|x| x[0].powi(sys.p as i32)).collect();
    TerminalTerms { positive: simpson(&sq, h), power: simpson(&pw, h) }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub x4: f64,
    pub terms: TerminalTerms,
    pub formula: f64,
    pub residual: f64,
    pub constraint_defect: f64,
    pub steps: usize,
}

/// Compares `x4(T)` with the terminal formula evaluated by quadrature.
pub fn terminal_formula_check(sys: &ControlSystem, law: &ControlLaw, steps: usize) -> Result<FormulaCheck> {
    let traj = integrate(sys, law, steps)?;
    let defect = traj.constraint_defect();
    if defect > CONSTRAINT_TOL {
        return Err(Error::Precondition(format!(
            "terminal constraints x1 = x2 = x3 = 0 violated (relative defect {defect:.3e})"
        )));
    }
    let terms = terminal_terms(sys, &traj);
    let formula = terms.positive - terms.power;
    let x4 = traj.terminal[3];
    Ok(FormulaCheck {
        x4,
        terms,
        formula,
        residual: (x4 - formula).abs() / x4.abs().max(1e-30),
        constraint_defect: defect,
        steps,
    })
}

/// `count` geometric points from `start` to `end`.
pub fn geometric(start: f64, end: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > 0.0 && start.is_finite() && end.is_finite()) || count == 0 {
        return Err(Error::parameter("geometric range needs positive finite ends and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (l0, l1) = (start.ln(), end.ln());
    Ok((0..count).map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub x4: f64,
    pub sign: i8,
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub p: u32,
    pub a: f64,
    pub steps: usize,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `log|x4|` against `log eps`.
    pub slope: Option<f64>,
    /// `min(6 + 13a, p(1+a) + a)`: exponents of the two terms under this law.
    pub predicted_slope: f64,
    /// Sign of the term with the smaller exponent.
    pub predicted_sign: i8,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Integrates `w = eps base'''(t eps^-a)` for each `eps`. The state is
/// constant once the scaled support ends, so each run stops there and uses
/// all `steps` on the support.
pub fn scaling_experiment(p: u32, a: f64, eps: &[f64], base: &AnalyticFunction, horizon: f64, steps: usize) -> Result<ScalingReport> {
    ControlSystem::new(p, horizon)?;
    let rows: Vec<Result<ScalingRow>> = exec::map_slice(eps, |&e| {
        let law = ControlLaw::bump_triple(base.clone(), e, a)?;
        let end = law.support_end().unwrap_or(horizon);
        if end > horizon {
            return Err(Error::Precondition(format!(
                "scaled support [0, {end:.4}] does not fit in [0, {horizon}] for eps = {e}"
            )));
        }
        let sys = ControlSystem::new(p, end)?;
        let x4 = integrate(&sys, &law, steps)?.terminal[3];
        Ok(ScalingRow { eps: e, x4, sign: sign_of(x4), horizon: end })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.x4 != 0.0).map(|r| (r.eps.ln(), r.x4.abs().ln())).collect();
    let slope = (pts.len() >= 2 && pts.iter().any(|q| q.0 != pts[0].0)).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let e_pos = 6.0 + 13.0 * a;
    let e_pow = p as f64 * (1.0 + a) + a;
    let predicted_sign = if e_pos < e_pow {
        1
    } else {
        // -(u'')^p with u'' = eps^{1+a} base''
        let law = ControlLaw::bump_triple(base.clone(), 1.0, 0.0)?;
        let sys = ControlSystem::new(p, base.support().hi)?;
        let traj = integrate(&sys, &law, steps)?;
        -sign_of(terminal_terms(&sys, &traj).power)
    };
    Ok(ScalingReport { p, a, steps, rows, slope, predicted_slope: e_pos.min(e_pow), predicted_sign })
}

/// Random controls for the obstruction and monotonicity experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub trials: usize,
    pub seed: u64,
    pub steps: usize,
    /// Width of the Gaussian smoothing kernel as a fraction of `T`.
    pub filter: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { trials: 100, seed: 7, steps: 2048, filter: 1.0 / 128.0 }
    }
}

fn filtered_noise(rng: &mut ChaCha8Rng, len: usize, sigma: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    if sigma <= 0.0 {
        return raw;
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius).map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp()).collect();
    (0..len as isize)
        .map(|i| {
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (j, kv) in kernel.iter().enumerate() {
                let idx = i + j as isize - radius;
                if idx >= 0 && (idx as usize) < len {
                    acc += kv * raw[idx as usize];
                    wsum += kv;
                }
            }
            acc / wsum
        })
        .collect()
}

/// `(x1, x2, x3)(T)` of the discrete linear chain driven by samples `w`.
fn linear_terminal(w: &[f64], h: f64) -> [f64; 3] {
    let sys = ControlSystem { p: 1, horizon: 1.0 };
    let mut x = [0.0; 4];
    for n in 0..(w.len() - 1) / 2 {
        let (w0, wm, w1) = (w[2 * n], w[2 * n + 1], w[2 * n + 2]);
        let k1 = sys.rhs(&x, w0);
        let k2 = sys.rhs(&axpy(&x, 0.5 * h, &k1), wm);
        let k3 = sys.rhs(&axpy(&x, 0.5 * h, &k2), wm);
        let k4 = sys.rhs(&axpy(&x, h, &k3), w1);
        for i in 0..3 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    [x[0], x[1], x[2]]
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *slot = det(&mc) / d;
    }
    Some(out)
}

/// Removes the quadratic control `c0 + c1 t + c2 t^2` that makes the discrete
/// map hit `x1 = x2 = x3 = 0` at `T`, then rescales to sup norm `eta`.
pub fn project_constraints(w: &[f64], horizon: f64, eta: f64) -> Result<Vec<f64>> {
    let h = 2.0 * horizon / (w.len() - 1) as f64;
    let t: Vec<f64> = (0..w.len()).map(|k| 0.5 * h * k as f64 / horizon).collect();
    let basis: Vec<Vec<f64>> = (0..3).map(|d| t.iter().map(|s| s.powi(d)).collect()).collect();
    let cols: Vec<[f64; 3]> = basis.iter().map(|b| linear_terminal(b, h)).collect();
    let m = [[cols[0][0], cols[1][0], cols[2][0]], [cols[0][1], cols[1][1], cols[2][1]], [cols[0][2], cols[1][2], cols[2][2]]];
    let c = solve3(m, linear_terminal(w, h)).ok_or_else(|| Error::Precondition("singular constraint system".into()))?;
    let out: Vec<f64> = (0..w.len()).map(|k| w[k] - c[0] * basis[0][k] - c[1] * basis[1][k] - c[2] * basis[2][k]).collect();
    let sup = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(sup > 0.0 && sup.is_finite()) {
        return Err(Error::Precondition("projected control vanishes".into()));
    }
    Ok(out.iter().map(|v| v * eta / sup).collect())
}

/// Seeded random controls on `[0, T]` with `x1(T) = x2(T) = x3(T) = 0` and
/// `|w| <= eta`; trial `i` uses the stream `(seed, i)`. Failed projections
/// come back as errors in their slot.
pub fn random_controls(horizon: f64, eta: f64, noise: &NoiseConfig) -> Vec<Result<ControlLaw>> {
    let len = 2 * noise.steps + 1;
    let sigma = noise.filter * (len - 1) as f64;
    exec::map_range(noise.trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        rng.set_stream(i as u64);
        let w = filtered_noise(&mut rng, len, sigma);
        ControlLaw::grid(project_constraints(&w, horizon, eta)?)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionTrial {
    pub trial: usize,
    pub x4: Option<f64>,
    pub normalized: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub p: u32,
    pub horizon: f64,
    pub eta: f64,
    pub noise: NoiseConfig,
    pub trials: Vec<ObstructionTrial>,
    pub skipped: usize,
    /// Smallest `x4(T) / (int (u u' u'')^2 + int |u''|^p)`.
    pub worst_normalized: Option<f64>,
    pub pass: bool,
}

/// Checks `x4(T) >= 0` on random constrained controls when
/// `T^(p-12) eta^(p-6) <= 1`.
pub fn obstruction_check(p: u32, horizon: f64, eta: f64, noise: &NoiseConfig) -> Result<ObstructionReport> {
    let sys = ControlSystem::new(p, horizon)?;
    if p < 12 {
        return Err(Error::Precondition(format!("obstruction regime needs p >= 12, got {p}")));
    }
    if !(eta > 0.0) || noise.steps < 2 {
        return Err(Error::parameter("need eta > 0 and at least 2 steps"));
    }
    let budget = horizon.powi(p as i32 - 12) * eta.powi(p as i32 - 6);
    if budget > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("T^(p-12) eta^(p-6) = {budget:.6} exceeds 1")));
    }
    let laws = random_controls(horizon, eta, noise);
    let trials: Vec<ObstructionTrial> = exec::map_range(laws.len(), |i| {
        let law = match &laws[i] {
            Ok(l) => l,
            Err(e) => return ObstructionTrial { trial: i, x4: None, normalized: None, note: Some(e.to_string()) },
        };
        match integrate(&sys, law, noise.steps) {
            Ok(traj) => {
                let x4 = traj.terminal[3];
                let h = traj.h();
                let pos: Vec<f64> = traj.states.iter().map(|x| (x[0] * x[1] * x[2]).powi(2)).collect();
                let pw: Vec<f64> = traj.states.iter().map(|x| x[0].abs().powi(p as i32)).collect();
                let norm = simpson(&pos, h) + simpson(&pw, h);
                let normalized = if norm > 0.0 { x4 / norm } else { 0.0 };
                ObstructionTrial { trial: i, x4: Some(x4), normalized: Some(normalized), note: None }
            }
            Err(e) => ObstructionTrial { trial: i, x4: None, normalized: None, note: Some(e.to_string()) },
        }
    });
    let skipped = trials.iter().filter(|t| t.x4.is_none()).count();
    let worst_normalized = trials.iter().filter_map(|t| t.normalized).reduce(f64::min);
    let pass = worst_normalized.is_none_or(|w| w >= -OBSTRUCTION_TOL);
    Ok(ObstructionReport { p, horizon, eta, noise: noise.clone(), trials, skipped, worst_normalized, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneRow {
    pub law: usize,
    /// Most negative step change of `x2 + x4` beyond round-off.
    pub worst_drop: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub horizon: f64,
    pub steps: usize,
    pub rows: Vec<MonotoneRow>,
    pub pass: bool,
}

/// For `p = 1`, `(x2 + x4)' = (x1 x2 x3)^2`, so `x2 + x4` must never drop
/// by more than round-off between steps.
pub fn monotone_check_p1(horizon: f64, laws: &[ControlLaw], steps: usize) -> Result<MonotoneReport> {
    let sys = ControlSystem::new(1, horizon)?;
    let rows: Vec<Result<MonotoneRow>> = exec::map_range(laws.len(), |i| {
        let traj = integrate(&sys, &laws[i], steps)?;
        let h = traj.h();
        let mut worst: f64 = 0.0;
        for n in 1..traj.states.len() {
            let (a, b) = (&traj.states[n - 1], &traj.states[n]);
            let drop = (b[1] + b[3]) - (a[1] + a[3]);
            let scale = a[1].abs() + a[3].abs() + b[1].abs() + b[3].abs() + h * (a[0].abs() + b[0].abs());
            let tol = 16.0 * f64::EPSILON * scale;
            if drop < -tol {
                worst = worst.min(drop);
            }
        }
        Ok(MonotoneRow { law: i, worst_drop: worst, pass: worst == 0.0 })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(MonotoneReport { horizon, steps, rows, pass })
}

/// Bases used by the scaling demonstrations: `sign * chi` dilated to
/// `[0, len]`.
pub fn bump_base(sign: f64, len: f64) -> Result<AnalyticFunction> {
    AnalyticFunction::dilation(AnalyticFunction::bump_chi(), sign, 1.0 / len, 0.0)
}

/// `integrate(c w)` for the chain components, used by linearity checks.
pub fn scaled_law(law: &ControlLaw, c: f64) -> Result<ControlLaw> {
    law.scaled(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi_law(eps: f64, a: f64) -> ControlLaw {
        ControlLaw::bump_triple(AnalyticFunction::bump_chi(), eps, a).unwrap()
    }

    #[test]
    fn zero_control_stays_at_origin() {
        let sys = ControlSystem::new(5, 1.0).unwrap();
        let traj = integrate(&sys, &ControlLaw::Zero, 16).unwrap();
        assert_eq!(traj.terminal, [0.0; 4]);
        let chk = terminal_formula_check(&sys, &ControlLaw::Zero, 16).unwrap();
        assert_eq!(chk.residual, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ControlSystem::new(0, 1.0).is_err());
        assert!(ControlSystem::new(1, 0.0).is_err());
        let sys = ControlSystem::new(1, 1.0).unwrap();
        assert!(integrate(&sys, &ControlLaw::Zero, 1).is_err());
        assert!(ControlLaw::bump_triple(AnalyticFunction::bump_chi(), 0.0, 0.0).is_err());
        assert!(geometric(1e-2, 1e-4, 0).is_err());
    }

    #[test]
    fn divergence_reports_step() {
        let sys = ControlSystem::new(1, 1.0).unwrap();
        let law = ControlLaw::grid(vec![1e300; 5]).unwrap();
        assert!(matches!(integrate(&sys, &law, 4), Err(Error::Divergence { .. })));
    }

    #[test]
    fn chain_matches_exact_derivatives() {
        let sys = ControlSystem::new(3, 1.0).unwrap();
        let law = chi_law(1e-2, 0.0);
        assert!(chain_error(&sys, &law, 4096).unwrap() < 1e-8);
        let traj = integrate(&sys, &law, 4096).unwrap();
        for i in 0..3 {
            assert!(traj.terminal[i].abs() < 1e-8);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let sys = ControlSystem::new(3, 1.0).unwrap();
        let law = chi_law(1.0, 0.0);
        let e: Vec<f64> = [64, 128, 256].iter().map(|&n| chain_error(&sys, &law, n).unwrap()).collect();
        assert!(e[0] / e[1] >= 12.0 && e[1] / e[2] >= 12.0, "{e:?}");
    }

    #[test]
    fn terminal_formula_residual() {
        for p in [3, 12] {
            let sys = ControlSystem::new(p, 1.0).unwrap();
            let chk = terminal_formula_check(&sys, &chi_law(1e-2, 0.0), 1 << 14).unwrap();
            assert!(chk.residual <= 1e-4, "p = {p}: {chk:?}");
        }
    }

    #[test]
    fn formula_check_needs_constraints() {
        let sys = ControlSystem::new(3, 1.0).unwrap();
        let law = ControlLaw::grid(vec![1.0; 9]).unwrap();
        assert!(matches!(terminal_formula_check(&sys, &law, 8), Err(Error::Precondition(_))));
    }

    #[test]
    fn geometric_points() {
        let g = geometric(1e-2, 1e-4, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1e-3).abs() < 1e-15);
        assert_eq!(geometric(0.5, 0.1, 1).unwrap(), vec![0.5]);
    }

    #[test]
    fn scaling_single_point_has_no_slope() {
        let r = scaling_experiment(7, 0.0, &[1e-2], &AnalyticFunction::bump_chi(), 1.0, 512).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.slope.is_none());
    }

    #[test]
    fn scaling_small_a_is_sixth_order() {
        let base = bump_base(1.0, 4.0).unwrap();
        let eps = geometric(1e-2, 1e-4, 3).unwrap();
        let r = scaling_experiment(7, 0.0, &eps, &base, 4.0, 2048).unwrap();
        assert!((r.slope.unwrap() - 6.0).abs() < 0.05, "{r:?}");
        assert!(r.rows.iter().all(|row| row.sign == 1));
        assert_eq!(r.predicted_slope, 6.0);
    }

    #[test]
    fn projection_enforces_constraints() {
        let noise = NoiseConfig { trials: 3, steps: 512, ..Default::default() };
        let sys = ControlSystem::new(12, 1.0).unwrap();
        for law in random_controls(1.0, 0.5, &noise) {
            let law = law.unwrap();
            if let ControlLaw::GridSamples { values } = &law {
                let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((sup - 0.5).abs() < 1e-15);
            }
            let traj = integrate(&sys, &law, 512).unwrap();
            assert!(traj.terminal[..3].iter().all(|v| v.abs() < 1e-12), "{:?}", traj.terminal);
        }
    }

    #[test]
    fn obstruction_small_run() {
        let noise = NoiseConfig { trials: 8, steps: 512, ..Default::default() };
        let r = obstruction_check(12, 1.0, 1.0, &noise).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.skipped, 0);
        assert!(matches!(obstruction_check(11, 1.0, 1.0, &noise), Err(Error::Precondition(_))));
        assert!(matches!(obstruction_check(13, 2.0, 1.0, &noise), Err(Error::Precondition(_))));
    }

    #[test]
    fn p1_monotone() {
        let noise = NoiseConfig { trials: 4, steps: 512, ..Default::default() };
        let mut laws: Vec<ControlLaw> = random_controls(1.0, 1.0, &noise).into_iter().map(|l| l.unwrap()).collect();
        laws.push(ControlLaw::Zero);
        laws.push(chi_law(1e-2, 0.0));
        let r = monotone_check_p1(1.0, &laws, 512).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn chain_is_linear_in_control() {
        let sys = ControlSystem::new(4, 1.0).unwrap();
        let law = chi_law(1e-1, 0.0);
        let a = integrate(&sys, &law, 256).unwrap();
        let b = integrate(&sys, &scaled_law(&law, -3.0).unwrap(), 256).unwrap();
        for i in 0..3 {
            let tol = 1e2 * f64::EPSILON * 3.0 * a.sup(i);
            assert!(a.states.iter().zip(&b.states).all(|(x, y)| (y[i] + 3.0 * x[i]).abs() <= tol));
        }
    }
}
