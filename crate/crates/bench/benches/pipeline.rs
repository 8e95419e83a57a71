use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mgids::attack::{AttackMode, AttackSpec};
use mgids::gbdt::{build_bins, train_table, FeatureMatrix, GbdtParams};
use mgids::sim::run_scenario;
use mgids_bench::{dataset, short_sim};

fn simulate(c: &mut Criterion) {
    let cfg = short_sim(0.1);
    let spec = AttackSpec::new(AttackMode::Sinusoid, 0.05);
    c.bench_function("simulate_0.1s_sinusoid", |b| {
        b.iter(|| run_scenario(black_box(&cfg), black_box(&spec)).unwrap())
    });
}

fn training(c: &mut Criterion) {
    let data = dataset(0.4);
    let x = FeatureMatrix::from_rows(&data.train.features());
    c.bench_function("build_bins", |b| b.iter(|| build_bins(black_box(&x), 255)));

    let mut params = GbdtParams::student(7);
    params.num_iterations = 10;
    let mut g = c.benchmark_group("train");
    g.sample_size(10);
    g.bench_function("student_10_iterations", |b| {
        b.iter(|| train_table(&params, black_box(&data.train), None).unwrap())
    });
    g.finish();
}

fn prediction(c: &mut Criterion) {
    let data = dataset(0.4);
    let mut teacher_params = GbdtParams::multiclass(7);
    teacher_params.num_iterations = 60;
    let teacher = train_table(&teacher_params, &data.train, None)
        .unwrap()
        .model;
    let student = train_table(&GbdtParams::student(7), &data.train, None)
        .unwrap()
        .model;
    let rows = data.test.features();
    let batch: Vec<Vec<f64>> = rows.iter().cycle().take(1000).cloned().collect();
    let mut scratch = vec![0.0; 7];
    for (name, model) in [("teacher", &teacher), ("student", &student)] {
        c.bench_function(&format!("predict_1000_{name}"), |b| {
            b.iter(|| {
                let mut acc = 0usize;
                for r in &batch {
                    acc += model.predict_class_unchecked(black_box(r), &mut scratch);
                }
                acc
            })
        });
    }
}

criterion_group!(benches, simulate, training, prediction);
criterion_main!(benches);
