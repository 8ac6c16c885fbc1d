use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vectorial::batch;
use vectorial::integrator::{simulate, Method, TimeGrid};
use vectorial::model::{
    Model, ModelParameters, ScenarioPreset, SeasonalForcing, Variant, DEFAULT_INITIAL_STATE,
};
use vectorial::optimal_control::{cost, forward_states, ControlSignal, ControlWeights};

fn control_family(levels: usize) -> Vec<f64> {
    (0..levels)
        .map(|k| k as f64 / (levels - 1) as f64)
        .collect()
}

fn family_cost(p: &ModelParameters, grid: &TimeGrid, level: f64) -> f64 {
    let w = ControlWeights::new(1.0, 1.0).unwrap();
    let u = ControlSignal::constant(level, grid).unwrap();
    let states = forward_states(p, DEFAULT_INITIAL_STATE, &u, grid).unwrap();
    cost(&states, &u, &w).unwrap()
}

fn constant_controls(c: &mut Criterion) {
    let p = ScenarioPreset::get(2).unwrap().params;
    let grid = TimeGrid::with_max_step(0.0, 365.0, 0.1).unwrap();
    let mut group = c.benchmark_group("constant_control_family");
    group.sample_size(20);
    for levels in [4, 16, 64] {
        let family = control_family(levels);
        group.bench_with_input(BenchmarkId::new("sequential", levels), &family, |b, f| {
            b.iter(|| batch::map_sequential(f, |&u| family_cost(&p, &grid, black_box(u))))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", levels), &family, |b, f| {
            b.iter(|| batch::map_parallel(f, |&u| family_cost(&p, &grid, black_box(u))))
        });
    }
    group.finish();
}

fn seasonal_sweep(c: &mut Criterion) {
    let runs: Vec<(ModelParameters, f64)> = ScenarioPreset::all()
        .iter()
        .flat_map(|s| (1..=8).map(move |k| (s.params, 0.1 * k as f64)))
        .collect();
    let simulate_one = |&(p, alpha): &(ModelParameters, f64)| {
        let model = Model::new(
            p,
            Variant::Seasonal(SeasonalForcing::annual(alpha).unwrap()),
        )
        .unwrap();
        simulate(&model, DEFAULT_INITIAL_STATE, 0.0, 365.0, Method::default())
            .unwrap()
            .peak(1)
    };
    let mut group = c.benchmark_group("seasonal_amplitude_sweep");
    group.sample_size(20);
    group.bench_function("sequential", |b| {
        b.iter(|| batch::map_sequential(black_box(&runs), simulate_one))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| batch::map_parallel(black_box(&runs), simulate_one))
    });
    group.finish();
}

criterion_group!(benches, constant_controls, seasonal_sweep);
criterion_main!(benches);
