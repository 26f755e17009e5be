use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvf_core::{eval_measure, lut_eval, MeasureId, MeasureTables, Rgb, WindowSize};

fn pairs(n: usize) -> Vec<(Rgb, Rgb)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..n)
        .map(|_| (Rgb(rng.random()), Rgb(rng.random())))
        .collect()
}

fn direct_vs_table(c: &mut Criterion) {
    let data = pairs(4096);
    let mut group = c.benchmark_group("measure_4096_pairs");
    for id in MeasureId::ALL {
        if id == MeasureId::Cfs {
            continue;
        }
        let spec = id.default_spec();
        group.bench_with_input(BenchmarkId::new("direct", id.name()), &data, |b, data| {
            b.iter(|| {
                data.iter()
                    .map(|(x, y)| eval_measure(&spec, *x, *y).unwrap())
                    .sum::<f64>()
            })
        });
        let tables = MeasureTables::build(&spec, WindowSize::DEFAULT);
        if tables.has_tables() {
            group.bench_with_input(BenchmarkId::new("table", id.name()), &data, |b, data| {
                b.iter(|| {
                    data.iter()
                        .map(|(x, y)| lut_eval(&spec, &tables, *x, *y).unwrap())
                        .sum::<f64>()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, direct_vs_table);
criterion_main!(benches);
