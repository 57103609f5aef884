//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test --test acceptance`; exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use gnlab::control::{
    bump_base, chain_error, geometric, monotone_check_p1, obstruction_check, random_controls, scaling_experiment,
    ControlLaw, ControlSystem, NoiseConfig,
};
use gnlab::covering::{build_cover, BalanceSpec, CoverOptions, DomainMode, BALANCE_TOL, OVERLAP_BOUND};
use gnlab::extremal::{estimate_constant, random_search, SearchConfig, Target};
use gnlab::funcspace::{sample, standard_corpus, AnalyticFunction, GridFunction, Interval};
use gnlab::gn::{
    ceiling_l4, ceiling_l6, evaluate_generalized, ibp_identities, solve_exponent, special_ratios, GNParams,
    PartialParams, Rational,
};
use gnlab::norms::Exponent;

struct Verdict {
    pass: bool,
    detail: String,
}

fn frac(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn exponent_algebra() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for k in 1..=4 {
        let p = GNParams::preset(&format!("cor6-k{k}")).unwrap();
        let ts = p.theta_star().unwrap();
        let res = p.relation_residual().unwrap();
        let crit = res.critical.as_ref().map(|c| c.to_f64().abs());
        pass &= ts == frac(1, 3) && res.abs_f64() < 1e-12 && crit.is_some_and(|c| c < 1e-12);
        notes.push(format!("cor6 k={k}: theta*={}", Rational(ts)));
    }
    let p7 = GNParams::preset("cor7").unwrap();
    let solved = solve_exponent(&PartialParams {
        p: None,
        q: Some(Exponent::integer(2)),
        r: Some(Exponent::Infinite),
        ks: vec![0, 1, 2],
        j: 2,
        m: 3,
        theta: Some(Rational(frac(1, 2))),
    })
    .unwrap();
    let res = p7.relation_residual().unwrap();
    pass &= p7.theta_star().unwrap() == frac(1, 2)
        && solved.p == Exponent::integer(12)
        && res.abs_f64() < 1e-12
        && res.critical.is_some_and(|c| c.to_f64().abs() < 1e-12);
    notes.push(format!("cor7: theta*={}, solved p={}", Rational(p7.theta_star().unwrap()), solved.p));
    Verdict { pass, detail: notes.join("; ") }
}

fn ibp() -> Verdict {
    let n = (1 << 16) + 1;
    let mut worst: f64 = 0.0;
    for (_, f) in standard_corpus() {
        let g = sample(&f, f.support(), n, 2).unwrap();
        let (a, b) = ibp_identities(&g).unwrap();
        worst = worst.max(a).max(b);
    }
    Verdict { pass: worst <= 1e-6, detail: format!("worst normalized residual {worst:.3e} at N={n}") }
}

fn ceilings() -> Verdict {
    let (c4, c6) = (ceiling_l4() + 1e-3, ceiling_l6() + 1e-3);
    let mut corpus4: f64 = 0.0;
    let mut corpus6: f64 = 0.0;
    for (_, f) in standard_corpus() {
        let g = sample(&f, f.support(), (1 << 16) + 1, 2).unwrap();
        let (a, b) = special_ratios(&g).unwrap();
        corpus4 = corpus4.max(a.unwrap_or(0.0));
        corpus6 = corpus6.max(b.unwrap_or(0.0));
    }
    let cfg = SearchConfig { seed: 1, ..Default::default() };
    let r4 = random_search(&Target::L4, &cfg, 10_000, 1025).unwrap();
    let r6 = random_search(&Target::L6, &cfg, 10_000, 1025).unwrap();
    let opt = estimate_constant(&Target::L4, &cfg).unwrap();
    let pass = corpus4 <= c4 && corpus6 <= c6 && r4.max_ratio <= c4 && r6.max_ratio <= c6 && opt.best_ratio >= 1.2;
    Verdict {
        pass,
        detail: format!(
            "corpus L4 {corpus4:.4} L6 {corpus6:.4}; random L4 {:.4} L6 {:.4}; optimizer L4 {:.4} (ceilings {:.4}, {:.4})",
            r4.max_ratio,
            r6.max_ratio,
            opt.best_ratio,
            ceiling_l4(),
            ceiling_l6()
        ),
    }
}

fn invariance() -> Verdict {
    let p = GNParams::preset("cor7").unwrap();
    let n = 4097;
    let ratio = |f: &AnalyticFunction| {
        let g = sample(f, f.support(), n, p.m).unwrap();
        evaluate_generalized(&g, &p).unwrap().ratio.unwrap()
    };
    let mut dil: f64 = 0.0;
    let mut hom: f64 = 0.0;
    for (_, f) in standard_corpus() {
        let base = ratio(&f);
        for lambda in [0.25, 0.5, 2.0, 4.0] {
            dil = dil.max((ratio(&f.dilate(lambda).unwrap()) / base - 1.0).abs());
        }
        let g = sample(&f, f.support(), n, p.m).unwrap();
        for c in [-3.0, 0.01, 250.0] {
            let r = evaluate_generalized(&g.scaled(c), &p).unwrap().ratio.unwrap();
            hom = hom.max((r / base - 1.0).abs());
        }
    }
    Verdict {
        pass: dil <= 0.01 && hom <= 1e-12,
        detail: format!("max relative change: dilation {dil:.2e}, scaling {hom:.2e}"),
    }
}

fn covering() -> Verdict {
    let spec = BalanceSpec::from_params(&GNParams::preset("cor7").unwrap(), DomainMode::RealLine);
    let opts = CoverOptions::default();
    let mut pass = true;
    let (mut overlap, mut residual, mut deficit_fine): (usize, f64, f64) = (0, 0.0, 0.0);
    let mut notes = Vec::new();
    for (id, f) in standard_corpus() {
        let deficits: Vec<f64> = [2049, 4097, 8193]
            .iter()
            .map(|&n| {
                let rep = build_cover(&f, &spec, n, &opts).unwrap();
                overlap = overlap.max(rep.max_overlap);
                residual = residual.max(rep.max_residual);
                rep.deficit_cells
            })
            .collect();
        deficit_fine = deficit_fine.max(deficits[2]);
        if !deficits.windows(2).all(|w| w[1] <= w[0]) {
            pass = false;
            notes.push(format!("{id}: deficit not decreasing {deficits:?}"));
        }
    }
    pass &= overlap <= OVERLAP_BOUND && residual <= BALANCE_TOL && deficit_fine <= 2.0;
    notes.insert(0, format!("max overlap {overlap}, max residual {residual:.2e}, deficit at N=8193 {deficit_fine} cells"));
    Verdict { pass, detail: notes.join("; ") }
}

fn control_scaling() -> Verdict {
    let eps = geometric(1e-2, 1e-4, 5).unwrap();
    let a3 = scaling_experiment(7, 0.3, &eps, &bump_base(-1.0, 1.0).unwrap(), 1.0, 4096).unwrap();
    let s3 = a3.slope.unwrap();
    let neg = a3.rows.iter().all(|r| r.sign < 0);
    let ok3 = (s3 - 10.1).abs() <= 0.05 && neg;
    let a0 = scaling_experiment(7, 0.0, &eps, &bump_base(1.0, 4.0).unwrap(), 4.0, 4096).unwrap();
    let s0 = a0.slope.unwrap();
    let pos = a0.rows.iter().all(|r| r.sign > 0);
    let ok0 = (s0 - 6.0).abs() <= 0.05 && pos;
    Verdict {
        pass: ok3 && ok0,
        detail: format!(
            "p=7 a=0.3: slope {s3:.4} (target 10.1, exponent of the integrated terms {:.2}), negative {neg}; a=0: slope {s0:.4} (target 6), positive {pos}",
            a3.predicted_slope
        ),
    }
}

fn obstruction() -> Verdict {
    let noise = NoiseConfig { trials: 100, seed: 7, ..Default::default() };
    let rep = obstruction_check(12, 1.0, 1.0, &noise).unwrap();
    let mut laws: Vec<ControlLaw> = random_controls(1.0, 1.0, &noise).into_iter().map(|l| l.unwrap()).collect();
    laws.push(ControlLaw::Zero);
    laws.push(ControlLaw::bump_triple(AnalyticFunction::bump_chi(), 1e-2, 0.0).unwrap());
    let mono = monotone_check_p1(1.0, &laws, noise.steps).unwrap();
    Verdict {
        pass: rep.pass && rep.skipped == 0 && mono.pass,
        detail: format!(
            "p=12: worst normalized x4 {:.3e} over {} trials ({} skipped); p=1 monotone on {} trajectories: {}",
            rep.worst_normalized.unwrap_or(f64::NAN),
            rep.trials.len(),
            rep.skipped,
            mono.rows.len(),
            mono.pass
        ),
    }
}

fn fd_order() -> f64 {
    let f = AnalyticFunction::bump_chi();
    let err = |n: usize| {
        let exact = sample(&f, Interval::UNIT, n, 2).unwrap();
        let fd = GridFunction::from_values(Interval::UNIT, exact.values().to_vec(), 2).unwrap();
        (1..=2)
            .map(|o| {
                let (a, b) = (exact.derivative(o).unwrap(), fd.derivative(o).unwrap());
                a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            })
            .fold(0.0f64, f64::max)
    };
    let e: Vec<f64> = [257, 513, 1025].iter().map(|&n| err(n)).collect();
    e.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min)
}

fn hygiene() -> Verdict {
    let order = fd_order();
    let sys = ControlSystem::new(3, 1.0).unwrap();
    let law = ControlLaw::bump_triple(AnalyticFunction::bump_chi(), 1.0, 0.0).unwrap();
    let e: Vec<f64> = [64, 128, 256].iter().map(|&n| chain_error(&sys, &law, n).unwrap()).collect();
    let reduction = (e[0] / e[1]).min(e[1] / e[2]);
    Verdict {
        pass: order >= 1.9 && reduction >= 12.0,
        detail: format!("finite-difference order {order:.3}; integrator error reduction per halving {reduction:.2}x"),
    }
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_gnlab");
    let commands: [&[&str]; 6] = [
        &["params", "--j", "2", "--m", "3", "--ks", "0,1,2", "--q", "2", "--r", "inf", "--theta", "0.5"],
        &["check", "generalized", "--function", "sine3", "--preset", "cor7", "--N", "2049"],
        &["cover", "--function", "bumpchi", "--preset", "cor7", "--N", "1025", "--fine-n", "8193"],
        &["estimate", "--target", "l4", "--restarts", "2", "--budget", "20", "--n-search", "513", "--N", "1025", "--seed", "5"],
        &["control", "obstruction", "--trials", "8", "--steps", "512", "--seed", "3"],
        &["control", "scaling", "--p", "7", "--a", "0.3", "--eps", "1e-2:1e-3:3", "--sign", "-1", "--steps", "512"],
    ];
    let mut mismatched = Vec::new();
    for args in commands {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let status = Command::new(bin)
                    .args(args)
                    .arg("--deterministic")
                    .arg("--out")
                    .arg(dir.path())
                    .output()
                    .unwrap()
                    .status;
                assert!(status.success(), "{args:?} exited with {status}");
                std::fs::read(dir.path().join("report.json")).unwrap()
            })
            .collect();
        if outputs[0] != outputs[1] {
            mismatched.push(args[0..2].join(" "));
        }
    }
    Verdict {
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!("{} commands byte-identical", commands.len())
        } else {
            format!("differing reports: {}", mismatched.join(", "))
        },
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("exponent algebra", exponent_algebra),
        ("integration-by-parts identities", ibp),
        ("proof-constant ceilings", ceilings),
        ("scale and dilation invariance", invariance),
        ("covering guarantees", covering),
        ("control scaling exponents", control_scaling),
        ("obstruction and p=1 monotonicity", obstruction),
        ("numerics hygiene", hygiene),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!("{tag} {}. {name}: {} [{:.1}s]", i + 1, v.detail, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
