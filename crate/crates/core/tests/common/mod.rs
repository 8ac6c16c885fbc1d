#![allow(dead_code)]

use vectorial::integrator::{integrate_dp45, integrate_rk4, TimeGrid, Tolerances};
use vectorial::model::{Model, ModelParameters, ScenarioPreset, StateVector};

pub fn preset(id: u8) -> ScenarioPreset {
    ScenarioPreset::get(id).unwrap()
}

pub fn params(id: u8) -> ModelParameters {
    preset(id).params
}

fn rhs(model: &Model) -> impl FnMut(f64, &[f64; 5]) -> vectorial::Result<[f64; 5]> + '_ {
    move |t, y| {
        model
            .rhs(t, &StateVector::from_array(*y))
            .map(StateVector::to_array)
    }
}

/// DP45 restarted at every whole day, so each day is an exact output node.
pub fn dp45_daily(model: &Model, y0: StateVector, days: usize, tol: Tolerances) -> Vec<[f64; 5]> {
    let mut out = vec![y0.to_array()];
    for d in 0..days {
        let start = *out.last().unwrap();
        let seg = integrate_dp45(rhs(model), start, d as f64, (d + 1) as f64, tol).unwrap();
        out.push(*seg.last());
    }
    out
}

/// RK4 on a grid of `steps_per_day` steps per day, read at whole days.
pub fn rk4_daily(
    model: &Model,
    y0: StateVector,
    days: usize,
    steps_per_day: usize,
) -> Vec<[f64; 5]> {
    let grid = TimeGrid::new(0.0, days as f64, days * steps_per_day).unwrap();
    let traj = integrate_rk4(rhs(model), y0.to_array(), &grid).unwrap();
    traj.states.iter().step_by(steps_per_day).copied().collect()
}

/// Largest per-sample relative max-norm difference.
pub fn max_relative_difference(a: &[[f64; 5]], b: &[[f64; 5]]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let diff = x
                .iter()
                .zip(y)
                .fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
            let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            diff / scale
        })
        .fold(0.0, f64::max)
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
