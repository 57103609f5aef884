//! Command-line front end: argument parsing, dispatch and artifact writing.
//!
//! Exit codes: 0 on success, 1 when a checked bound is violated, 2 on
//! usage, parameter or precondition errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::control::{
    self, bump_base, geometric, monotone_check_p1, obstruction_check, random_controls, scaling_experiment,
    terminal_formula_check, ControlLaw, ControlSystem, NoiseConfig,
};
use crate::covering::{build_cover, BalanceSpec, CoverOptions, DomainMode, FIELD_N};
use crate::error::{Error, Result};
use crate::exec;
use crate::extremal::{estimate_constant, random_search, sweep, SearchConfig, SweepSource, Target};
use crate::funcspace::{corpus_function, sample, standard_corpus, AnalyticFunction, Descriptor, Interval, CORPUS_IDS};
use crate::gn::{
    ceiling_l4, ceiling_l6, evaluate_bounded, evaluate_generalized, evaluate_localized, ibp_identities,
    open_problem_probe, special_constants, BoundedExtras, GNParams, PartialParams, Rational, RELATION_TOL,
};
use crate::norms::Exponent;

#[derive(Parser, Debug, Serialize)]
#[command(name = "gnlab", version, about = "Numerical laboratory for interpolation inequalities with derivative products")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "GNLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Directory for report.json and CSV artifacts.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Worker cap; 1 runs everything on the calling thread.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,
    /// Omit timestamps so identical runs give identical bytes.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub deterministic: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// theta_star, relation residual, or solve for one open exponent.
    Params(TupleArgs),
    /// Evaluate an inequality on a function.
    Check {
        #[command(subcommand)]
        which: CheckCmd,
    },
    /// Balance-function covering of the set where u and the product do not vanish.
    Cover(CoverArgs),
    /// Empirical best constants, single target or a sweep over tuples.
    Estimate(EstimateArgs),
    /// The 4-state control system.
    Control {
        #[command(subcommand)]
        which: ControlCmd,
    },
    /// The built-in test functions.
    Corpus {
        #[command(subcommand)]
        which: CorpusCmd,
    },
}

#[derive(Args, Debug, Serialize, Default)]
pub struct TupleArgs {
    /// Named tuple: cor7, cor6-k<k>.
    #[arg(long)]
    pub preset: Option<String>,
    /// Tuple as JSON text, or @path to a JSON file.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub theta: Option<String>,
}

impl TupleArgs {
    fn given(&self) -> bool {
        self.preset.is_some() || self.params.is_some() || !self.ks.is_empty()
    }

    fn partial(&self) -> Result<PartialParams> {
        if let Some(name) = &self.preset {
            return Ok(GNParams::preset(name)?.into());
        }
        if let Some(text) = &self.params {
            return Ok(serde_json::from_str(&read_text(text)?)?);
        }
        if self.ks.is_empty() {
            return Err(Error::parameter("give --preset, --params or --ks/--j/--m with exponents"));
        }
        let exp = |v: &Option<String>| v.as_deref().map(Exponent::parse).transpose();
        Ok(PartialParams {
            p: exp(&self.p)?,
            q: exp(&self.q)?,
            r: exp(&self.r)?,
            ks: self.ks.clone(),
            j: self.j.ok_or_else(|| Error::parameter("--j is required"))?,
            m: self.m.ok_or_else(|| Error::parameter("--m is required"))?,
            theta: self.theta.as_deref().map(Rational::parse).transpose()?,
        })
    }

    fn resolve(&self) -> Result<GNParams> {
        self.partial()?.complete()
    }
}

#[derive(Args, Debug, Serialize)]
pub struct FunctionArgs {
    /// Corpus id, descriptor JSON, or @path to a descriptor file.
    #[arg(long, default_value = "bumpchi")]
    pub function: String,
    /// Grid nodes.
    #[arg(long = "N", default_value_t = 4097)]
    pub n: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckCmd {
    /// Homogeneous inequality on the function's support.
    Generalized {
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        tuple: TupleArgs,
    },
    /// Form on (0,1) with a low-order term.
    Bounded {
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long, default_value_t = 0)]
        k0: usize,
        #[arg(long, default_value = "2")]
        s: String,
        /// Localization window lo,hi.
        #[arg(long, value_delimiter = ',')]
        omega: Vec<f64>,
    },
    /// Localized form on a window.
    Localized {
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        omega: Vec<f64>,
    },
    /// Integration-by-parts identities and the three special ratios over the corpus.
    Special {
        #[arg(long = "N", default_value_t = (1 << 16) + 1)]
        n: usize,
        /// Allowed excess over the proof constants.
        #[arg(long, default_value_t = 1e-3)]
        ceiling_slack: f64,
        #[arg(long, default_value_t = 1e-6)]
        ibp_tol: f64,
    },
    /// ||D^kbar u||_{q kappa} / ||prod D^{k_i} u||_q^{1/kappa} over the corpus.
    OpenProblem {
        #[arg(long)]
        q: String,
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<usize>,
        #[arg(long = "N", default_value_t = 4097)]
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    RealLine,
    Bounded,
}

#[derive(Args, Debug, Serialize)]
pub struct CoverArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub tuple: TupleArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::RealLine)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-9)]
    pub eps_u: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub eps_v: f64,
    /// Nodes of the fine field behind the balance functions.
    #[arg(long, default_value_t = FIELD_N)]
    pub fine_n: usize,
    /// Allowed coverage deficit in grid cells.
    #[arg(long, default_value_t = 2.0)]
    pub max_deficit: f64,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    Corpus,
    Search,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    /// l4, l6 or a preset name.
    #[arg(long)]
    pub target: Option<String>,
    #[command(flatten)]
    pub tuple: TupleArgs,
    /// JSON array of tuples (open entries allowed) for a sweep; writes sweep.csv.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t = SourceArg::Corpus)]
    pub source: SourceArg,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 400)]
    pub budget: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 4097)]
    pub n_search: usize,
    /// Nodes for the reported ratio.
    #[arg(long = "N", default_value_t = (1 << 16) + 1)]
    pub n: usize,
    /// Envelope exponent range min,max.
    #[arg(long, value_delimiter = ',', default_values_t = [0.02, 1.0])]
    pub sharpness: Vec<f64>,
    /// Additional independent random candidates to evaluate.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct LawArgs {
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    /// Length of the base bump's support [0, len].
    #[arg(long, default_value_t = 1.0)]
    pub base_len: f64,
    /// Sign of the base bump.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sign: f64,
}

impl LawArgs {
    fn law(&self) -> Result<ControlLaw> {
        ControlLaw::bump_triple(bump_base(self.sign, self.base_len)?, self.eps, self.a)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 2048)]
    pub steps: usize,
    /// Gaussian smoothing width as a fraction of T.
    #[arg(long, default_value_t = 1.0 / 128.0)]
    pub filter: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

impl NoiseArgs {
    fn config(&self, seed: u64) -> NoiseConfig {
        NoiseConfig { trials: self.trials, seed, steps: self.steps, filter: self.filter }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Zero,
    Bump,
    Noise,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlCmd {
    /// Integrate one control law.
    Integrate {
        #[arg(long)]
        p: u32,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 4096)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = LawKind::Bump)]
        law: LawKind,
        #[command(flatten)]
        bump: LawArgs,
        /// Sup norm of a noise control.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Include the full state path.
        #[arg(long)]
        trajectory: bool,
    },
    /// Compare x4(T) with its integral formula.
    Formula {
        #[arg(long)]
        p: u32,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1 << 14)]
        steps: usize,
        #[command(flatten)]
        bump: LawArgs,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Log-slope of |x4(T)| against eps for w = eps chi'''(t eps^-a).
    Scaling {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        a: f64,
        /// start:end:count (geometric) or a comma list.
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 1.0)]
        base_len: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sign: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 4096)]
        steps: usize,
    },
    /// Sign of x4(T) on random constrained controls for p >= 12.
    Obstruction {
        #[arg(long, default_value_t = 12)]
        p: u32,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Monotonicity of x2 + x4 for p = 1.
    P1 {
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        noise: NoiseArgs,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusCmd {
    /// Ids and descriptors.
    List,
    /// One descriptor, with samples when --N is given.
    Emit {
        #[arg(long)]
        function: String,
        #[arg(long = "N")]
        n: Option<usize>,
    },
}

struct Outcome {
    result: Value,
    n: Option<usize>,
    tolerances: Value,
    csv: Vec<(&'static str, String)>,
    violation: Option<String>,
}

impl Outcome {
    fn new(result: impl Serialize) -> Result<Self> {
        Ok(Self { result: serde_json::to_value(result)?, n: None, tolerances: json!({}), csv: Vec::new(), violation: None })
    }

    fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    fn tolerances(mut self, t: Value) -> Self {
        self.tolerances = t;
        self
    }
}

fn read_text(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path)?),
        None => Ok(arg.to_string()),
    }
}

/// Corpus id, descriptor JSON, or `@file` holding a descriptor.
pub fn load_function(arg: &str) -> Result<AnalyticFunction> {
    if arg.starts_with('{') || arg.starts_with('@') {
        let d: Descriptor = serde_json::from_str(&read_text(arg)?)?;
        return AnalyticFunction::from_descriptor(&d);
    }
    corpus_function(arg)
}

fn window(v: &[f64]) -> Result<Option<Interval>> {
    match v {
        [] => Ok(None),
        [lo, hi] => Ok(Some(Interval::new(*lo, *hi)?)),
        _ => Err(Error::parameter("a window is given as lo,hi")),
    }
}

/// `start:end:count` as geometric points, or a comma-separated list.
pub fn parse_eps_range(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::parameter(format!("malformed eps range '{text}' (want start:end:count or a,b,c)"));
    let eps = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [s, e, c] = parts.as_slice() else { return Err(bad()) };
        let s: f64 = s.trim().parse().map_err(|_| bad())?;
        let e: f64 = e.trim().parse().map_err(|_| bad())?;
        let c: usize = c.trim().parse().map_err(|_| bad())?;
        geometric(s, e, c).map_err(|_| bad())?
    } else {
        text.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?
    };
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(bad());
    }
    Ok(eps)
}

fn csv_text<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if !header.is_empty() {
        w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Params(t) => params_cmd(t),
        Command::Check { which } => check_cmd(which),
        Command::Cover(a) => cover_cmd(a),
        Command::Estimate(a) => estimate_cmd(a, seed),
        Command::Control { which } => control_cmd(which, seed),
        Command::Corpus { which } => corpus_cmd(which),
    }
}

fn params_cmd(t: &TupleArgs) -> Result<Outcome> {
    let partial = t.partial()?;
    let (params, solved) = match (&partial.p, &partial.q, &partial.r, &partial.theta) {
        (Some(p), Some(q), Some(r), Some(theta)) => {
            let out = GNParams {
                p: p.clone(),
                q: q.clone(),
                r: r.clone(),
                ks: partial.ks.clone(),
                j: partial.j,
                m: partial.m,
                theta: theta.clone(),
            };
            out.validate()?;
            (out, false)
        }
        _ => (partial.complete()?, true),
    };
    let residual = params.relation_residual()?;
    let holds = residual.abs_f64() <= RELATION_TOL;
    Ok(Outcome::new(json!({
        "params": params,
        "solved": solved,
        "hash": params.hash(),
        "kappa": params.kappa(),
        "kbar": Rational(params.kbar()),
        "theta_star": Rational(params.theta_star()?),
        "residual": residual,
        "relation_holds": holds,
    }))?
    .tolerances(json!({ "relation": RELATION_TOL })))
}

fn check_cmd(which: &CheckCmd) -> Result<Outcome> {
    match which {
        CheckCmd::Generalized { function, tuple } => {
            let params = tuple.resolve()?;
            let f = load_function(&function.function)?;
            let g = sample(&f, f.support(), function.n, params.m)?;
            let rep = evaluate_generalized(&g, &params)?;
            let violation = rep.violation_candidate.then(|| "right-hand side vanishes while the left does not".to_string());
            let mut out = Outcome::new(json!({ "function": f, "report": rep }))?.n(function.n);
            out.violation = violation;
            Ok(out)
        }
        CheckCmd::Bounded { function, tuple, k0, s, omega } => {
            let params = tuple.resolve()?;
            let f = load_function(&function.function)?;
            let extras = BoundedExtras { k0: *k0, s: Exponent::parse(s)?, omega: window(omega)? };
            let g = sample(&f, Interval::UNIT, function.n, params.m)?;
            let rep = evaluate_bounded(&g, &params, &extras)?;
            let violation = rep.violation_candidate.then(|| "right-hand side vanishes while the left does not".to_string());
            let mut out = Outcome::new(json!({ "function": f, "extras": extras, "report": rep }))?.n(function.n);
            out.violation = violation;
            Ok(out)
        }
        CheckCmd::Localized { function, tuple, omega } => {
            let params = tuple.resolve()?;
            let f = load_function(&function.function)?;
            let omega = window(omega)?.ok_or_else(|| Error::parameter("--omega is required"))?;
            let g = sample(&f, f.support().hull(&omega), function.n, params.m)?;
            let rep = evaluate_localized(&g, &params, omega)?;
            let violation = rep.violation_candidate.then(|| "right-hand side vanishes while the left does not".to_string());
            let mut out = Outcome::new(json!({ "function": f, "omega": omega, "report": rep }))?.n(function.n);
            out.violation = violation;
            Ok(out)
        }
        CheckCmd::Special { n, ceiling_slack, ibp_tol } => {
            let corpus = standard_corpus();
            let ibp = exec::map_slice(&corpus, |(id, f)| -> Result<Value> {
                let g = sample(f, f.support(), *n, 2)?;
                let (l4, l6) = ibp_identities(&g)?;
                Ok(json!({ "id": id, "l4": l4, "l6": l6 }))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let rows = special_constants(&corpus, *n)?;
            let mut problems = Vec::new();
            for r in &ibp {
                for key in ["l4", "l6"] {
                    let v = r[key].as_f64().unwrap_or(f64::INFINITY);
                    if v > *ibp_tol {
                        problems.push(format!("{} identity residual {v:e} for {}", key, r["id"]));
                    }
                }
            }
            for r in &rows {
                if r.ratio_l4.is_some_and(|v| v > ceiling_l4() + ceiling_slack) {
                    problems.push(format!("L4 ratio above its ceiling for {}", r.id));
                }
                if r.ratio_l6.is_some_and(|v| v > ceiling_l6() + ceiling_slack) {
                    problems.push(format!("L6 ratio above its ceiling for {}", r.id));
                }
            }
            let mut out = Outcome::new(json!({
                "ibp_residuals": ibp,
                "ratios": rows,
                "ceilings": { "l4": ceiling_l4(), "l6": ceiling_l6() },
            }))?
            .n(*n)
            .tolerances(json!({ "ceiling_slack": ceiling_slack, "ibp": ibp_tol }));
            out.violation = (!problems.is_empty()).then(|| problems.join("; "));
            Ok(out)
        }
        CheckCmd::OpenProblem { q, ks, n } => {
            let rows = open_problem_probe(&standard_corpus(), &Exponent::parse(q)?, ks, *n)?;
            Ok(Outcome::new(json!({ "q": Exponent::parse(q)?, "ks": ks, "rows": rows }))?.n(*n))
        }
    }
}

fn cover_cmd(a: &CoverArgs) -> Result<Outcome> {
    let params = if a.tuple.given() { a.tuple.resolve()? } else { GNParams::preset("cor7")? };
    let f = load_function(&a.function.function)?;
    let mode = match a.mode {
        ModeArg::RealLine => DomainMode::RealLine,
        ModeArg::Bounded => DomainMode::Bounded,
    };
    let spec = BalanceSpec::from_params(&params, mode);
    let opts = CoverOptions { eps_u: a.eps_u, eps_v: a.eps_v, fine_n: a.fine_n };
    let rep = build_cover(&f, &spec, a.function.n, &opts)?;
    let violation = rep.check(a.max_deficit).err().map(|e| e.to_string());
    let csv = csv_text(&["center", "radius", "alpha", "beta", "residual"], &rep.intervals)?;
    let mut out = Outcome::new(json!({ "function": f, "params": params, "report": rep }))?
        .n(a.function.n)
        .tolerances(json!({
            "balance": crate::covering::BALANCE_TOL,
            "max_overlap": crate::covering::OVERLAP_BOUND,
            "max_deficit_cells": a.max_deficit,
        }));
    out.csv.push(("cover.csv", csv));
    out.violation = violation;
    Ok(out)
}

fn estimate_cmd(a: &EstimateArgs, seed: u64) -> Result<Outcome> {
    let [lo, hi] = a.sharpness.as_slice() else {
        return Err(Error::parameter("--sharpness takes min,max"));
    };
    let config = SearchConfig {
        restarts: a.restarts,
        budget: a.budget,
        tol: a.tol,
        seed,
        dim: a.dim,
        n_search: a.n_search,
        n_report: a.n,
        sharpness: [*lo, *hi],
    };
    let tolerances = json!({ "search_tol": a.tol });
    if let Some(grid) = &a.grid {
        let tuples: Vec<PartialParams> = serde_json::from_str(&read_text(grid)?)?;
        let source = match a.source {
            SourceArg::Corpus => SweepSource::Corpus,
            SourceArg::Search => SweepSource::Search(config.clone()),
        };
        let rows = sweep(&tuples, &source, a.n);
        let header = [
            "params_hash", "params", "function_id", "status", "lhs", "rhs_top", "rhs_product", "rhs", "ratio", "n", "seed",
        ];
        let csv = csv_text(&header, &rows)?;
        let mut out = Outcome::new(json!({ "source": a.source, "config": config, "rows": rows }))?
            .n(a.n)
            .tolerances(tolerances);
        out.csv.push(("sweep.csv", csv));
        return Ok(out);
    }
    let target = match (&a.target, a.tuple.given()) {
        (Some(name), _) => Target::parse(name)?,
        (None, true) => Target::Generalized(a.tuple.resolve()?),
        (None, false) => return Err(Error::parameter("give --target, a tuple, or --grid")),
    };
    let report = estimate_constant(&target, &config)?;
    let random = if a.random > 0 { Some(random_search(&target, &config, a.random, a.n_search)?) } else { None };
    Ok(Outcome::new(json!({ "estimate": report, "random_search": random }))?.n(a.n).tolerances(tolerances))
}

fn control_cmd(which: &ControlCmd, seed: u64) -> Result<Outcome> {
    match which {
        ControlCmd::Integrate { p, t, steps, law, bump, eta, trajectory } => {
            let sys = ControlSystem::new(*p, *t)?;
            let law = match law {
                LawKind::Zero => ControlLaw::Zero,
                LawKind::Bump => bump.law()?,
                LawKind::Noise => {
                    let noise = NoiseConfig { trials: 1, seed, steps: *steps, filter: 1.0 / 128.0 };
                    random_controls(*t, *eta, &noise).remove(0)?
                }
            };
            let traj = control::integrate(&sys, &law, *steps)?;
            let chain_error = match law {
                ControlLaw::GridSamples { .. } => None,
                _ => Some(control::chain_error(&sys, &law, *steps)?),
            };
            let law_echo = match &law {
                ControlLaw::GridSamples { .. } => json!("noise"),
                other => serde_json::to_value(other)?,
            };
            Ok(Outcome::new(json!({
                "system": sys,
                "law": law_echo,
                "steps": steps,
                "terminal": traj.terminal,
                "constraint_defect": traj.constraint_defect(),
                "chain_error": chain_error,
                "trajectory": if *trajectory { Some(&traj) } else { None },
            }))?
            .n(*steps))
        }
        ControlCmd::Formula { p, t, steps, bump, tol } => {
            let sys = ControlSystem::new(*p, *t)?;
            let chk = terminal_formula_check(&sys, &bump.law()?, *steps)?;
            let mut out = Outcome::new(json!({ "system": sys, "check": chk }))?
                .n(*steps)
                .tolerances(json!({ "residual": tol, "constraint": control::CONSTRAINT_TOL }));
            if chk.residual > *tol {
                out.violation = Some(format!("terminal formula residual {:e} exceeds {tol:e}", chk.residual));
            }
            Ok(out)
        }
        ControlCmd::Scaling { p, a, eps, base_len, sign, t, steps } => {
            let eps = parse_eps_range(eps)?;
            let rep = scaling_experiment(*p, *a, &eps, &bump_base(*sign, *base_len)?, *t, *steps)?;
            let csv = csv_text(&["eps", "x4", "sign"], &rep.rows.iter().map(|r| (r.eps, r.x4, r.sign)).collect::<Vec<_>>())?;
            let mut out = Outcome::new(&rep)?.n(*steps);
            out.csv.push(("scaling.csv", csv));
            Ok(out)
        }
        ControlCmd::Obstruction { p, t, noise } => {
            let rep = obstruction_check(*p, *t, noise.eta, &noise.config(seed))?;
            let mut out = Outcome::new(&rep)?.n(noise.steps).tolerances(json!({ "normalized": control::OBSTRUCTION_TOL }));
            if !rep.pass {
                out.violation = Some(format!("x4(T) negative beyond tolerance: worst {:?}", rep.worst_normalized));
            }
            Ok(out)
        }
        ControlCmd::P1 { t, noise } => {
            let mut laws = vec![ControlLaw::Zero, ControlLaw::bump_triple(bump_base(1.0, *t)?, 1e-2, 0.0)?];
            for law in random_controls(*t, noise.eta, &noise.config(seed)) {
                laws.push(law?);
            }
            let rep = monotone_check_p1(*t, &laws, noise.steps)?;
            let mut out = Outcome::new(&rep)?.n(noise.steps);
            if !rep.pass {
                out.violation = Some("x2 + x4 decreased along a trajectory".into());
            }
            Ok(out)
        }
    }
}

fn corpus_cmd(which: &CorpusCmd) -> Result<Outcome> {
    match which {
        CorpusCmd::List => {
            let rows: Vec<Value> = standard_corpus().into_iter().map(|(id, f)| json!({ "id": id, "function": f })).collect();
            Ok(Outcome::new(json!({ "ids": CORPUS_IDS, "functions": rows }))?)
        }
        CorpusCmd::Emit { function, n } => {
            let f = load_function(function)?;
            let samples = match n {
                Some(n) => {
                    let g = sample(&f, f.support(), *n, 0)?;
                    Some(json!({ "x": g.nodes(), "u": g.values() }))
                }
                None => None,
            };
            let mut out = Outcome::new(json!({ "function": f, "samples": samples }))?;
            out.n = *n;
            Ok(out)
        }
    }
}

fn envelope(cli: &Cli, out: &Outcome) -> Result<Value> {
    let mut report = json!({
        "tool": "gnlab",
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(&cli.command)?,
        "seed": cli.global.seed,
        "n": out.n,
        "tolerances": out.tolerances,
        "parallel": cfg!(feature = "parallel"),
        "result": out.result,
    });
    if !cli.global.deterministic {
        let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        report["generated_at_unix"] = json!(now);
    }
    Ok(report)
}

fn write_artifacts(dir: &Path, report: &str, csv: &[(&str, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report)?;
    for (name, text) in csv {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

/// Parse `args` (including the program name), run, print the report to
/// stdout, write artifacts, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = exec::with_jobs(cli.global.jobs, || execute(&cli));
    let outcome = match outcome {
        Ok(o) => o,
        Err(Error::Violation(msg)) => {
            eprintln!("violation: {msg}");
            return 1;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = match envelope(&cli, &outcome).and_then(|v| Ok(serde_json::to_string_pretty(&v)?)) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    print!("{text}");
    if let Some(dir) = &cli.global.out {
        if let Err(e) = write_artifacts(dir, &text, &outcome.csv) {
            eprintln!("error: {e}");
            return 2;
        }
    }
    match outcome.violation {
        Some(msg) => {
            eprintln!("violation: {msg}");
            1
        }
        None => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_ranges() {
        assert_eq!(parse_eps_range("1e-2:1e-4:3").unwrap().len(), 3);
        assert_eq!(parse_eps_range("0.1,0.01").unwrap(), vec![0.1, 0.01]);
        for bad in ["1e-2:1e-4", "1e-2:x:5", "1e-2:1e-4:0", "-1,2", "", "1e-2:1e-4:5:7"] {
            assert!(parse_eps_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tuple_from_flags_solves_p() {
        let t = TupleArgs {
            q: Some("2".into()),
            r: Some("inf".into()),
            ks: vec![0, 1, 2],
            j: Some(2),
            m: Some(3),
            theta: Some("0.5".into()),
            ..Default::default()
        };
        assert_eq!(t.resolve().unwrap(), GNParams::preset("cor7").unwrap());
    }

    #[test]
    fn functions_by_id_and_descriptor() {
        assert!(load_function("bumpchi").is_ok());
        assert!(load_function(r#"{"family":"scaled_bump","params":{"a":0.2,"b":0.6}}"#).is_ok());
        assert!(load_function("nope").is_err());
    }

    #[test]
    fn csv_uses_lf() {
        let t = csv_text(&["a", "b"], &[(1.5, -2.0), (0.25, 3.0)]).unwrap();
        assert_eq!(t, "a,b\n1.5,-2.0\n0.25,3.0\n");
        let empty: [(f64, f64); 0] = [];
        assert_eq!(csv_text(&["a", "b"], &empty).unwrap(), "a,b\n");
    }
}
