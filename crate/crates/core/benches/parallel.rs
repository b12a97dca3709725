use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qvort_core::correlation::{point_correlation_2d, Bins};
use qvort_core::flow::{flow_spectra, fluid_variables};
use qvort_core::par;
use qvort_core::vortex::{detect_vortices_2d, face_windings};
use qvort_core::{propagate, random_phase_ic, GridSpec, InitialConditionParams, WaveField};

fn turbulent(dims: usize, n: usize) -> WaveField {
    let g = GridSpec::new(dims, n, 1.0).unwrap();
    let f = random_phase_ic(g, &InitialConditionParams { dk: 2.0, s_rms: 3.0, k_center: 0.0, seed: 1 }).unwrap();
    propagate(&f, 0.03)
}

const MODES: [(&str, bool); 2] = [("parallel", false), ("sequential", true)];

fn bench_propagate(c: &mut Criterion) {
    let mut group = c.benchmark_group("propagate");
    for (dims, n) in [(2, 512), (3, 64)] {
        let f = turbulent(dims, n);
        for (name, seq) in MODES {
            par::set_sequential(seq);
            group.bench_with_input(BenchmarkId::new(name, format!("{dims}d-{n}")), &f, |b, f| b.iter(|| propagate(black_box(f), 0.01)));
        }
    }
    par::set_sequential(false);
    group.finish();
}

fn bench_flow(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_spectra");
    let f = turbulent(2, 512);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        group.bench_function(name, |b| b.iter(|| flow_spectra(&fluid_variables(black_box(&f), None).v, f.grid)));
    }
    par::set_sequential(false);
    group.finish();
}

fn bench_windings(c: &mut Criterion) {
    let mut group = c.benchmark_group("face_windings");
    let f = turbulent(3, 64);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        group.bench_function(name, |b| b.iter(|| face_windings(black_box(&f)).unwrap()));
    }
    par::set_sequential(false);
    group.finish();
}

fn bench_pairs(c: &mut Criterion) {
    let mut group = c.benchmark_group("point_correlation");
    let f = turbulent(2, 512);
    let v = detect_vortices_2d(&f).unwrap();
    let bins = Bins::default_for(&f.grid);
    for (name, seq) in MODES {
        par::set_sequential(seq);
        group.bench_function(name, |b| b.iter(|| point_correlation_2d(black_box(&v), &f.grid, &bins, true).unwrap()));
    }
    par::set_sequential(false);
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_propagate, bench_flow, bench_windings, bench_pairs
}
criterion_main!(benches);
