use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gnlab::control::{obstruction_check, NoiseConfig};
use gnlab::covering::{build_cover, BalanceSpec, CoverOptions, DomainMode};
use gnlab::exec;
use gnlab::funcspace::{corpus_function, sample, AnalyticFunction, Interval};
use gnlab::gn::GNParams;
use gnlab::norms::gagliardo_seminorm;

fn modes<F: Fn()>(c: &mut Criterion, name: &str, f: F) {
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", ""), |b| b.iter(&f));
    g.bench_function(BenchmarkId::new("sequential", ""), |b| b.iter(|| exec::sequential(&f)));
    g.finish();
}

fn benches(c: &mut Criterion) {
    let f = corpus_function("sine3").unwrap();
    modes(c, "sample_65537_order3", || {
        sample(&f, Interval::UNIT, (1 << 16) + 1, 3).unwrap();
    });

    let g = sample(&AnalyticFunction::bump_chi(), Interval::UNIT, 2049, 1).unwrap();
    modes(c, "seminorm_2049", || {
        gagliardo_seminorm(&g, 0.5, 4.0).unwrap();
    });

    let noise = NoiseConfig { trials: 16, steps: 1024, ..Default::default() };
    modes(c, "obstruction_16_trials", || {
        obstruction_check(12, 1.0, 1.0, &noise).unwrap();
    });

    let spec = BalanceSpec::from_params(&GNParams::preset("cor7").unwrap(), DomainMode::RealLine);
    let opts = CoverOptions { fine_n: 8193, ..Default::default() };
    let bump = AnalyticFunction::bump_chi();
    modes(c, "cover_1025", || {
        build_cover(&bump, &spec, 1025, &opts).unwrap();
    });
}

criterion_group!(parallel_vs_sequential, benches);
criterion_main!(parallel_vs_sequential);
