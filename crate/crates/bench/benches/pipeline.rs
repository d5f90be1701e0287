use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fourth_moment::chargroup::CharacterGroup;
use fourth_moment::config::PipelineConfig;
use fourth_moment::kernel::Kernel;
use fourth_moment::lfunc::SmoothedWeights;
use fourth_moment::spectra::{fourth_moment, GroupTransform, Predicate, WeightTables};
use fourth_moment_bench::BENCH_MODULI;

fn kernel_table(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let kernel = Kernel::new(cfg.kernel).unwrap();
    let mut group = c.benchmark_group("kernel_table");
    for q in BENCH_MODULI {
        group.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| {
            b.iter(|| kernel.scaled_table(0, q, cfg.cutoff(q)).unwrap())
        });
    }
    group.finish();
}

fn weight_tables(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let kernel = Kernel::new(cfg.kernel).unwrap();
    let mut group = c.benchmark_group("weight_tables");
    group.sample_size(10);
    for q in BENCH_MODULI {
        let g = CharacterGroup::new(q).unwrap();
        let weights = SmoothedWeights::new(q, &kernel, &cfg).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, _| {
            b.iter(|| WeightTables::build(&g, &weights, &cfg).unwrap())
        });
    }
    group.finish();
}

fn group_transform(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let kernel = Kernel::new(cfg.kernel).unwrap();
    let mut group = c.benchmark_group("group_transform");
    for q in BENCH_MODULI {
        let g = CharacterGroup::new(q).unwrap();
        let weights = SmoothedWeights::new(q, &kernel, &cfg).unwrap();
        let values = WeightTables::build(&g, &weights, &cfg)
            .unwrap()
            .raw(0, Predicate::B);
        let transform = GroupTransform::new(&g);
        group.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, _| {
            b.iter(|| transform.forward_real(black_box(&values)))
        });
    }
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let mut group = c.benchmark_group("fourth_moment");
    group.sample_size(10);
    for q in BENCH_MODULI {
        group.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| {
            b.iter(|| fourth_moment(q, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    kernel_table,
    weight_tables,
    group_transform,
    end_to_end
);
criterion_main!(benches);
