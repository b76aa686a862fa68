use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use filtrations::bricks::{family_by_name, verify_family, GlueMode, GluedChain, Mode, DEFAULT_BUDGET};
use filtrations::coupling::{run_coupling, verify_marginals, PairScope, StartMode, Strategy};
use filtrations::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn family_check(c: &mut Criterion) {
    let family = family_by_name("quartic", 5, Mode::Materialized).unwrap();
    let mut g = c.benchmark_group("verify_family/quartic_q5");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_family(&family, DEFAULT_BUDGET, 7, exec))
        });
    }
    g.finish();
}

fn coupling(c: &mut Criterion) {
    let chain =
        GluedChain::build("quartic", 5, 1, GlueMode::ConstantQ, Mode::Materialized, DEFAULT_BUDGET, Execution::Parallel)
            .unwrap();
    let scope = PairScope::Auto { budget: 1 << 12, sample: 256, seed: 7 };

    let mut g = c.benchmark_group("verify_marginals/greedy_q5");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_marginals(&chain, &Strategy::GreedyMaximal, scope, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("run_coupling/greedy_q5_20k");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                run_coupling(
                    &chain,
                    &Strategy::GreedyMaximal,
                    StartMode::Independent { depth: None },
                    20_000,
                    7,
                    scope,
                    exec,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, family_check, coupling);
criterion_main!(benches);
