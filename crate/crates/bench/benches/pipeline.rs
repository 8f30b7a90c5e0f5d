use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use seakeep_bench::{bimodal_sea, field, frigate, network};
use seakeep_core::hull::ExcitationScales;
use seakeep_core::lstm::{bptt_gradients, network_forward};
use seakeep_core::rng::{purpose, StreamKey};
use seakeep_core::seaway::{field_for_stream, Discretization};
use seakeep_core::sim::{simulate_lofi, SimConfig};
use seakeep_core::voyage::{gaussian_kde, great_circle_route, Bandwidth, BERGEN, KDE_GRID_POINTS, NORFOLK};

fn seaway(c: &mut Criterion) {
    let sea = bimodal_sea();
    c.bench_function("discretize 2x100 components", |b| {
        b.iter(|| {
            field_for_stream(&sea, 100, Discretization::EqualEnergy, 120.0, StreamKey::new(1, purpose::WAVES, 0))
                .unwrap()
        })
    });
    let f = field(0);
    c.bench_function("elevation and slopes", |b| {
        b.iter(|| f.elevation_and_slopes(black_box(12.0), black_box(-3.0), black_box(400.0)))
    });
}

fn hull(c: &mut Criterion) {
    let v = frigate();
    let f = field(0);
    let pose = v.equilibrium.pose();
    c.bench_function("volume-method forces", |b| {
        b.iter(|| v.table.forces(&f, black_box(&pose), 300.0, ExcitationScales::default()).unwrap())
    });
}

fn sim(c: &mut Criterion) {
    let v = frigate();
    let f = field(1);
    let cfg = SimConfig {
        duration: 60.0,
        ramp: 20.0,
        ..SimConfig::default()
    };
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.bench_function("lofi 60 s", |b| b.iter(|| simulate_lofi(&v, &f, &cfg).unwrap()));
    g.finish();
}

fn lstm(c: &mut Criterion) {
    let mut g = c.benchmark_group("lstm");
    g.sample_size(10);
    for steps in [250usize, 1000] {
        let (net, x, y) = network(6, &[32, 32, 32], 3, steps);
        g.bench_with_input(BenchmarkId::new("forward", steps), &steps, |b, _| {
            b.iter(|| network_forward(&net, &x).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("bptt", steps), &steps, |b, _| {
            b.iter(|| bptt_gradients(&net, &x, &y).unwrap())
        });
    }
    g.finish();
}

fn voyage(c: &mut Criterion) {
    c.bench_function("great-circle route", |b| {
        b.iter(|| great_circle_route(black_box(NORFOLK), black_box(BERGEN)).unwrap())
    });
    let samples: Vec<f64> = (0..19_200).map(|i| (0.37 * i as f64).sin() + 0.1 * (0.011 * i as f64).cos()).collect();
    c.bench_function("kde 19200 samples", |b| {
        b.iter(|| gaussian_kde(&samples, Bandwidth::Silverman, KDE_GRID_POINTS).unwrap())
    });
}

criterion_group!(benches, seaway, hull, sim, lstm, voyage);
criterion_main!(benches);
