use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use budinf::generate::{self, GnpParams, TriggerKind};
use budinf::offline;
use budinf::online::{self, OnlineConfig};
use budinf::{Exec, InfluenceOracle, ValueOracle};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn mc_value(c: &mut Criterion) {
    let params = GnpParams { n: 60, p: 0.08, support: 3, budget: 10, capacity: Some(3), kind: TriggerKind::EdgeCategorical };
    let inst = generate::gnp(&params, 1).unwrap();
    let b: Vec<u32> = (0..inst.n()).map(|v| (v % 4 == 0) as u32).collect();
    let mut group = c.benchmark_group("mc_value");
    for (name, exec) in POLICIES {
        let o = InfluenceOracle::monte_carlo(&inst, 20_000, 3).with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |bench| bench.iter(|| o.value(black_box(&b))));
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let params = GnpParams { n: 6, p: 0.4, support: 2, budget: 3, capacity: None, kind: TriggerKind::NodeMixture };
    let inst = generate::gnp(&params, 2).unwrap();
    let o = InfluenceOracle::exact(&inst, 1 << 20).unwrap().with_exec(Exec::Sequential);
    let mut group = c.benchmark_group("competitive_trials");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let cfg = OnlineConfig { exec, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| online::competitive_trials(&o, inst.constraints(), 500, 7, &cfg).unwrap())
        });
    }
    group.finish();
}

fn brute_force(c: &mut Criterion) {
    let params = GnpParams { n: 7, p: 0.3, support: 2, budget: 4, capacity: Some(3), kind: TriggerKind::NodeMixture };
    let inst = generate::gnp(&params, 3).unwrap();
    let o = InfluenceOracle::exact(&inst, 1 << 20).unwrap().with_exec(Exec::Sequential);
    let mut group = c.benchmark_group("brute_force");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| offline::brute_force_opt(&o, inst.constraints(), 1 << 24, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, mc_value, trials, brute_force);
criterion_main!(benches);
