//! Time integration: fixed-step classical RK4 on a uniform grid and an
//! adaptive Dormand-Prince 5(4) pair with step-size control.
//!
//! Both work on fixed-size arrays so the same code drives the five
//! compartments, the five costates of the control problem and scalar
//! test problems.

use crate::error::{Error, Result};
use crate::model::{Model, ModelParameters, StateVector};

/// Uniform grid `t0, t0 + h, ..., tf` with `h = (tf - t0) / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    tf: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite() && tf > t0) {
            return Err(Error::InvalidParameter {
                name: "tf",
                value: tf,
                reason: "final time must be finite and exceed the initial time",
            });
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                value: 0.0,
                reason: "grid needs at least one step",
            });
        }
        Ok(Self { t0, tf, n_steps })
    }

    /// Grid on `[t0, tf]` whose step is the largest not exceeding `max_step`.
    pub fn with_max_step(t0: f64, tf: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0 && max_step.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "grid_step",
                value: max_step,
                reason: "must be positive and finite",
            });
        }
        let n = ((tf - t0) / max_step - 1e-9).ceil().max(1.0);
        Self::new(t0, tf, n as usize)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        (self.tf - self.t0) / self.n_steps as f64
    }

    /// Node `k`; the last node is `tf` exactly.
    pub fn time(&self, k: usize) -> f64 {
        if k >= self.n_steps {
            self.tf
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }
}

/// Counters collected while integrating.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest scaled error estimate among accepted steps (adaptive only).
    /// A value at most one means every accepted step met its tolerance.
    pub max_accepted_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMeta {
    pub variant: String,
    pub params_hash: Option<u64>,
    pub stats: StepStats,
}

/// Sampled solution: strictly increasing times with one state per time and
/// an optional control value per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize = 5> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub controls: Option<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn tf(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn last(&self) -> &[f64; N] {
        &self.states[self.states.len() - 1]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// `(time, value)` of the largest sample of component `i`.
    pub fn peak(&self, i: usize) -> (f64, f64) {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| (t, s[i]))
            .fold((f64::NAN, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            })
    }

    /// Linear interpolation between the bracketing samples; exact at nodes.
    pub fn sample(&self, t: f64) -> Result<[f64; N]> {
        sample(self, t)
    }

    /// Samples onto new times, carrying controls along when present.
    pub fn resample(&self, times: &[f64]) -> Result<Self> {
        let states = times
            .iter()
            .map(|&t| self.sample(t))
            .collect::<Result<Vec<_>>>()?;
        let controls = match &self.controls {
            Some(u) => Some(
                times
                    .iter()
                    .map(|&t| interpolate_scalar(&self.times, u, t))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        Ok(Self {
            times: times.to_vec(),
            states,
            controls,
            meta: self.meta.clone(),
        })
    }
}

impl Trajectory<5> {
    pub fn state(&self, k: usize) -> StateVector {
        StateVector::from_array(self.states[k])
    }

    pub fn state_at(&self, t: f64) -> Result<StateVector> {
        self.sample(t).map(StateVector::from_array)
    }

    pub fn infected_humans(&self) -> Vec<f64> {
        self.column(1)
    }
}

fn locate(times: &[f64], t: f64) -> Result<(usize, f64)> {
    let (t0, tf) = (times[0], times[times.len() - 1]);
    if !(t >= t0 && t <= tf) {
        return Err(Error::OutOfRange { t, t0, tf });
    }
    // first index with times[i] > t
    let upper = times.partition_point(|&x| x <= t);
    if upper == 0 {
        return Ok((0, 0.0));
    }
    let i = upper - 1;
    if times[i] == t || i + 1 == times.len() {
        return Ok((i, 0.0));
    }
    Ok((i, (t - times[i]) / (times[i + 1] - times[i])))
}

fn interpolate_scalar(times: &[f64], values: &[f64], t: f64) -> Result<f64> {
    let (i, w) = locate(times, t)?;
    if w == 0.0 {
        return Ok(values[i]);
    }
    Ok(values[i] + w * (values[i + 1] - values[i]))
}

/// Linear interpolation of a trajectory at `t`, exact at sample times.
pub fn sample<const N: usize>(traj: &Trajectory<N>, t: f64) -> Result<[f64; N]> {
    let (i, w) = locate(&traj.times, t)?;
    if w == 0.0 {
        return Ok(traj.states[i]);
    }
    let (a, b) = (&traj.states[i], &traj.states[i + 1]);
    Ok(std::array::from_fn(|j| a[j] + w * (b[j] - a[j])))
}

/// Control value by linear interpolation on a time grid.
pub fn sample_control(times: &[f64], controls: &[f64], t: f64) -> Result<f64> {
    interpolate_scalar(times, controls, t)
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn check_state<const N: usize>(y: &[f64; N], t: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::IntegrationFailure {
            t,
            reason: "non-finite state".into(),
        })
    }
}

/// One classical RK4 step of size `h` (negative `h` steps backwards).
pub fn rk4_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], h: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k1 = rhs(t, y)?;
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = rhs(t + h, &axpy(y, h, &k3))?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Classical fourth-order Runge-Kutta on every node of `grid`.
pub fn integrate_rk4<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    grid: &TimeGrid,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    check_state(&y0, grid.t0())?;
    let n = grid.n_steps();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(grid.t0());
    states.push(y0);
    let mut y = y0;
    for k in 0..n {
        let (t, t_next) = (grid.time(k), grid.time(k + 1));
        y = rk4_step(&mut rhs, t, &y, t_next - t).map_err(|e| into_failure(e, t))?;
        check_state(&y, t_next)?;
        times.push(t_next);
        states.push(y);
    }
    Ok(Trajectory {
        times,
        states,
        controls: None,
        meta: TrajectoryMeta {
            stats: StepStats {
                accepted: n,
                evaluations: 4 * n,
                ..StepStats::default()
            },
            ..TrajectoryMeta::default()
        },
    })
}

fn into_failure(e: Error, t: f64) -> Error {
    match e {
        Error::NonFinite { component } => Error::IntegrationFailure {
            t,
            reason: format!("non-finite component {component}"),
        },
        other => other,
    }
}

/// Relative and absolute tolerances of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-8,
            abs: 1e-8,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the fifth- and fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 10_000_000;

fn lincomb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Adaptive Dormand-Prince 5(4) integration from `t0` to `tf`, recording
/// every accepted step.
///
/// A step is accepted when every component of the embedded error estimate
/// is within `max(rel * |y|, abs)`, with `|y|` the larger magnitude of the
/// start and end values. The next step is `h * clamp(0.9 * err^(-1/5), 0.2, 5)`.
pub fn integrate_dp45<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    t0: f64,
    tf: f64,
    tol: Tolerances,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(tol.rel > 0.0 && tol.abs > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            value: tol.rel.min(tol.abs),
            reason: "tolerances must be positive",
        });
    }
    if !(t0.is_finite() && tf.is_finite() && tf > t0) {
        return Err(Error::InvalidParameter {
            name: "tf",
            value: tf,
            reason: "final time must be finite and exceed the initial time",
        });
    }
    check_state(&y0, t0)?;

    let span = tf - t0;
    let h_min = 1e-10 * span;
    let mut stats = StepStats::default();
    let mut eval = |t: f64, y: &[f64; N], stats: &mut StepStats| {
        stats.evaluations += 1;
        rhs(t, y).map_err(|e| into_failure(e, t))
    };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = eval(t, &y, &mut stats)?;
    let mut h = initial_step(&y, &k1, tol, span);

    let mut times = vec![t0];
    let mut states = vec![y0];
    let mut rejected_last = false;

    while t < tf {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(Error::IntegrationFailure {
                t,
                reason: "maximum number of steps exceeded".into(),
            });
        }
        let last = t + h >= tf;
        if last {
            h = tf - t;
        }

        let k2 = eval(t + C2 * h, &lincomb(&y, h, &[(A21, &k1)]), &mut stats)?;
        let k3 = eval(
            t + C3 * h,
            &lincomb(&y, h, &[(A31, &k1), (A32, &k2)]),
            &mut stats,
        )?;
        let k4 = eval(
            t + C4 * h,
            &lincomb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            &mut stats,
        )?;
        let k5 = eval(
            t + C5 * h,
            &lincomb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            &mut stats,
        )?;
        let k6 = eval(
            t + h,
            &lincomb(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
            &mut stats,
        )?;
        let y_new = lincomb(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let t_new = if last { tf } else { t + h };
        let k7 = if y_new.iter().all(|v| v.is_finite()) {
            eval(t_new, &y_new, &mut stats)?
        } else {
            [f64::NAN; N]
        };

        let mut err = 0.0_f64;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = (tol.rel * y[i].abs().max(y_new[i].abs())).max(tol.abs);
            let ratio = e.abs() / scale;
            // f64::max would drop a NaN ratio
            err = if ratio.is_nan() {
                f64::INFINITY
            } else {
                err.max(ratio)
            };
        }

        if err <= 1.0 {
            stats.accepted += 1;
            stats.max_accepted_error = stats.max_accepted_error.max(err);
            t = t_new;
            y = y_new;
            k1 = k7;
            times.push(t);
            states.push(y);
            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if rejected_last {
                factor = factor.min(1.0);
            }
            rejected_last = false;
            h *= factor;
        } else {
            stats.rejected += 1;
            rejected_last = true;
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h *= factor;
            if h < h_min {
                return Err(Error::StepSizeUnderflow { t, h, h_min });
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        controls: None,
        meta: TrajectoryMeta {
            stats,
            ..TrajectoryMeta::default()
        },
    })
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], tol: Tolerances, span: f64) -> f64 {
    let mut d0 = 0.0_f64;
    let mut d1 = 0.0_f64;
    for i in 0..N {
        let sc = tol.abs + tol.rel * y[i].abs();
        d0 = d0.max((y[i] / sc).abs());
        d1 = d1.max((f[i] / sc).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(1e-10 * span)
}

/// Integration method used to simulate a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Fixed-step RK4 with the largest step not exceeding `max_step`.
    Rk4 {
        max_step: f64,
    },
    Dp45(Tolerances),
}

impl Default for Method {
    fn default() -> Self {
        Method::Dp45(Tolerances::default())
    }
}

fn params_hash(p: &ModelParameters) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in [
        p.humans,
        p.mosquitoes_per_human,
        p.biting_rate,
        p.transmission_mh,
        p.transmission_hm,
        p.human_mortality,
        p.recovery_rate,
        p.mosquito_mortality,
    ] {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Integrates a model over `[t0, tf]`. Round-off negativity is clamped to
/// zero; larger negative values are reported as errors.
pub fn simulate(
    model: &Model,
    y0: StateVector,
    t0: f64,
    tf: f64,
    method: Method,
) -> Result<Trajectory> {
    let n_h = model.params().humans;
    let mut y0 = y0;
    y0.enforce_nonnegative(n_h, t0)?;
    let rhs = |t: f64, y: &[f64; 5]| {
        model
            .rhs(t, &StateVector::from_array(*y))
            .map(StateVector::to_array)
    };
    let mut traj = match method {
        Method::Rk4 { max_step } => {
            let grid = TimeGrid::with_max_step(t0, tf, max_step)?;
            integrate_rk4(rhs, y0.to_array(), &grid)?
        }
        Method::Dp45(tol) => integrate_dp45(rhs, y0.to_array(), t0, tf, tol)?,
    };
    for (t, s) in traj.times.iter().zip(traj.states.iter_mut()) {
        let mut v = StateVector::from_array(*s);
        v.enforce_nonnegative(n_h, *t)?;
        *s = v.to_array();
    }
    if let crate::model::Variant::Controlled(u) = model.variant() {
        traj.controls = Some(vec![u; traj.len()]);
    }
    traj.meta.variant = model.variant().name().to_string();
    traj.meta.params_hash = Some(params_hash(model.params()));
    Ok(traj)
}

/// Uniform output times `t0, t0 + 1, ...` ending exactly at `tf`.
pub fn daily_times(t0: f64, tf: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t = t0 + k as f64;
        if t >= tf - 1e-9 {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(tf);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
        Ok([-y[0]])
    }

    #[test]
    fn grid_nodes() {
        let g = TimeGrid::new(0.0, 365.0, 3650).unwrap();
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(3650), 365.0);
        assert!((g.step() - 0.1).abs() < 1e-15);
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert_eq!(
            TimeGrid::with_max_step(0.0, 365.0, 0.1).unwrap().n_steps(),
            3650
        );
    }

    #[test]
    fn rk4_exponential() {
        let g = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let tr = integrate_rk4(decay, [1.0], &g).unwrap();
        assert_eq!(tr.len(), 101);
        assert!((tr.last()[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rk4_halving_ratio() {
        let err = |n| {
            let g = TimeGrid::new(0.0, 1.0, n).unwrap();
            (integrate_rk4(decay, [1.0], &g).unwrap().last()[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(10) / err(20);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_reports_failure_time() {
        let g = TimeGrid::new(0.0, 10.0, 10).unwrap();
        let blowup = |t: f64, y: &[f64; 1]| Ok([if t > 4.5 { f64::INFINITY } else { y[0] }]);
        match integrate_rk4(blowup, [1.0], &g) {
            Err(Error::IntegrationFailure { t, .. }) => assert!((4.0..=5.0).contains(&t)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dp45_exponential() {
        let tol = Tolerances {
            rel: 1e-8,
            abs: 1e-8,
        };
        let tr = integrate_dp45(decay, [1.0], 0.0, 1.0, tol).unwrap();
        assert_eq!(tr.t0(), 0.0);
        assert_eq!(tr.tf(), 1.0);
        assert!((tr.last()[0] - (-1.0f64).exp()).abs() < 1e-7);
        assert!(tr.meta.stats.max_accepted_error <= 1.0);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dp45_rejects_bad_tolerances() {
        let tol = Tolerances {
            rel: 0.0,
            abs: 1e-8,
        };
        assert!(integrate_dp45(decay, [1.0], 0.0, 1.0, tol).is_err());
        assert!(integrate_dp45(decay, [1.0], 1.0, 0.0, Tolerances::default()).is_err());
    }

    #[test]
    fn dp45_step_underflow() {
        // finite-time blowup at t = 1
        let f = |_t: f64, y: &[f64; 1]| Ok([y[0] * y[0]]);
        let r = integrate_dp45(f, [1.0], 0.0, 2.0, Tolerances::default());
        assert!(matches!(
            r,
            Err(Error::StepSizeUnderflow { .. }) | Err(Error::IntegrationFailure { .. })
        ));
    }

    fn line() -> Trajectory<2> {
        Trajectory {
            times: vec![0.0, 1.0, 3.0],
            states: vec![[0.0, 5.0], [2.0, 5.0], [6.0, 5.0]],
            controls: None,
            meta: TrajectoryMeta::default(),
        }
    }

    #[test]
    fn sample_nodes_and_midpoints() {
        let tr = line();
        assert_eq!(sample(&tr, 1.0).unwrap(), [2.0, 5.0]);
        assert_eq!(sample(&tr, 3.0).unwrap(), [6.0, 5.0]);
        assert_eq!(sample(&tr, 2.0).unwrap(), [4.0, 5.0]);
        assert_eq!(sample(&tr, 0.5).unwrap(), [1.0, 5.0]);
        assert!(matches!(sample(&tr, 3.5), Err(Error::OutOfRange { .. })));
        assert!(sample(&tr, -0.1).is_err());
    }

    #[test]
    fn daily_output_times() {
        let t = daily_times(0.0, 365.0);
        assert_eq!(t.len(), 366);
        assert_eq!(t[365], 365.0);
        let t = daily_times(0.0, 2.5);
        assert_eq!(t, vec![0.0, 1.0, 2.0, 2.5]);
    }
}
