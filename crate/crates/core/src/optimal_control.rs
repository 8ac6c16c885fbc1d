//! Insecticide optimal control by the forward-backward sweep method.
//!
//! The problem minimizes
//!
//! ```text
//! C(u) = integral over [0, tf] of  gamma_D I_h(t) + gamma_S u(t)^2  dt
//! ```
//!
//! over controls `0 <= u(t) <= 1` subject to the controlled dynamics
//! ([`rhs_controlled`]). The Hamiltonian is the running cost plus the
//! costate-weighted vector field. Costates satisfy `lambda' = -dH/dx` with
//! `lambda(tf) = 0`, and the pointwise minimizer of `H` over `[0, 1]` is
//!
//! ```text
//! u* = min(max(0, (lambda_4 S_m + lambda_5 I_m) / (2 gamma_S)), 1)
//! ```
//!
//! The costate equations in [`adjoint_rhs`] are the exact negative gradient
//! of [`hamiltonian`]: the `I_h` row carries `-gamma_D` and `-lambda_3 eta_h`,
//! every contact term keeps its `1/N_h`, and the `S_h` row decays with `mu_h`.

use crate::batch;
use crate::error::{Error, Result};
use crate::integrator::{
    integrate_rk4, rk4_step, sample_control, TimeGrid, Trajectory, TrajectoryMeta,
};
use crate::model::{check_control, rhs_controlled, ModelParameters, StateVector};

/// Cost weights for infected person-days (`gamma_D`) and squared spraying
/// effort (`gamma_S`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlWeights {
    infection: f64,
    spraying: f64,
}

impl ControlWeights {
    pub fn new(infection: f64, spraying: f64) -> Result<Self> {
        for (name, value) in [("gamma_D", infection), ("gamma_S", spraying)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "cost weight must be finite and nonnegative",
                });
            }
        }
        if infection == 0.0 && spraying == 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma_S",
                value: spraying,
                reason: "at least one cost weight must be positive",
            });
        }
        Ok(Self {
            infection,
            spraying,
        })
    }

    pub fn infection(&self) -> f64 {
        self.infection
    }

    pub fn spraying(&self) -> f64 {
        self.spraying
    }

    /// Running cost `gamma_D I_h + gamma_S u^2`.
    pub fn running_cost(&self, infected: f64, u: f64) -> f64 {
        self.infection * infected + self.spraying * u * u
    }
}

/// Costates paired with `(S_h, I_h, R_h, S_m, I_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdjointVector(pub [f64; 5]);

impl AdjointVector {
    pub const ZERO: AdjointVector = AdjointVector([0.0; 5]);

    fn dot(&self, d: &StateVector) -> f64 {
        self.0.iter().zip(d.to_array()).map(|(l, f)| l * f).sum()
    }
}

/// Control values on the nodes of a time grid, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    values: Vec<f64>,
}

impl ControlSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &u in &values {
            check_control(u)?;
        }
        Ok(Self { values })
    }

    pub fn constant(level: f64, grid: &TimeGrid) -> Result<Self> {
        Self::new(vec![level; grid.n_steps() + 1])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Trapezoidal quadrature of the running cost over the trajectory's samples.
pub fn cost(states: &Trajectory, u: &ControlSignal, w: &ControlWeights) -> Result<f64> {
    if states.len() != u.len() {
        return Err(Error::ShapeMismatch(format!(
            "trajectory has {} samples but control has {}",
            states.len(),
            u.len()
        )));
    }
    let integrand: Vec<f64> = states
        .states
        .iter()
        .zip(u.values())
        .map(|(s, &v)| w.running_cost(s[1], v))
        .collect();
    Ok(states
        .times
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum())
}

pub fn hamiltonian(
    y: &StateVector,
    adj: &AdjointVector,
    u: f64,
    w: &ControlWeights,
    p: &ModelParameters,
) -> Result<f64> {
    let field = rhs_controlled(y, p, u, 0.0)?;
    Ok(w.running_cost(y.i_h, u) + adj.dot(&field))
}

/// Costate derivative `-dH/dx`.
pub fn adjoint_rhs(
    y: &StateVector,
    adj: &AdjointVector,
    u: f64,
    w: &ControlWeights,
    p: &ModelParameters,
) -> Result<AdjointVector> {
    check_control(u)?;
    y.check_finite()?;
    let [l1, l2, l3, l4, l5] = adj.0;
    let n_h = p.humans;
    let bite_mh = p.biting_rate * p.transmission_mh / n_h;
    let bite_hm = p.biting_rate * p.transmission_hm / n_h;
    let mu_h = p.human_mortality;
    let eta_h = p.recovery_rate;
    let mosquito_exit = p.mosquito_mortality + u;
    Ok(AdjointVector([
        (l1 - l2) * bite_mh * y.i_m + l1 * mu_h,
        -w.infection() + (l4 - l5) * bite_hm * y.s_m + l2 * (eta_h + mu_h) - l3 * eta_h,
        l3 * mu_h,
        (l4 - l5) * bite_hm * y.i_h + l4 * mosquito_exit,
        (l1 - l2) * bite_mh * y.s_h + l5 * mosquito_exit,
    ]))
}

/// Pointwise minimizer of the Hamiltonian over `[0, 1]`.
///
/// With `gamma_S = 0` the Hamiltonian is linear in `u` and the minimizer is
/// bang-bang: full spraying when `lambda_4 S_m + lambda_5 I_m > 0`, none
/// otherwise (including the tie).
pub fn characterize_control(y: &StateVector, adj: &AdjointVector, spraying_weight: f64) -> f64 {
    let switching = adj.0[3] * y.s_m + adj.0[4] * y.i_m;
    if spraying_weight > 0.0 {
        (switching / (2.0 * spraying_weight)).clamp(0.0, 1.0)
    } else if switching > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbsmOptions {
    /// Weight `omega` of the new characterization in the control update
    /// `u <- (1 - omega) u + omega u_char`.
    pub relaxation: f64,
    /// Relative sup-norm change of the control that counts as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub grid: TimeGrid,
}

impl FbsmOptions {
    // Larger relaxation weights fall into a period-3 cycle on the
    // scenario-2 problem.
    pub const DEFAULT_RELAXATION: f64 = 0.05;
    pub const DEFAULT_TOLERANCE: f64 = 1e-4;
    pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
    pub const DEFAULT_STEP: f64 = 0.1;

    /// Default options on `[0, tf]` with step 0.1 day.
    pub fn with_horizon(tf: f64) -> Result<Self> {
        Ok(Self {
            relaxation: Self::DEFAULT_RELAXATION,
            tolerance: Self::DEFAULT_TOLERANCE,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            grid: TimeGrid::with_max_step(0.0, tf, Self::DEFAULT_STEP)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "relaxation",
                value: self.relaxation,
                reason: "must lie in (0, 1]",
            });
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                value: self.tolerance,
                reason: "must be positive",
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                value: 0.0,
                reason: "at least one iteration is required",
            });
        }
        if self.grid.t0() != 0.0 {
            return Err(Error::InvalidParameter {
                name: "t0",
                value: self.grid.t0(),
                reason: "control horizon starts at t = 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbsmResult {
    /// Pointwise Hamiltonian minimizer evaluated on the stored state and
    /// costate trajectories.
    pub control: ControlSignal,
    pub states: Trajectory,
    pub adjoint: Trajectory,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm control change of every iteration.
    pub updates: Vec<f64>,
}

/// Forward RK4 pass of the controlled system, with the control linearly
/// interpolated between grid nodes.
pub fn forward_states(
    p: &ModelParameters,
    y0: StateVector,
    u: &ControlSignal,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    if u.len() != grid.n_steps() + 1 {
        return Err(Error::ShapeMismatch(format!(
            "control has {} values for a grid of {} nodes",
            u.len(),
            grid.n_steps() + 1
        )));
    }
    let times = grid.times();
    let rhs = |t: f64, y: &[f64; 5]| {
        let level = sample_control(&times, u.values(), t)?;
        rhs_controlled(&StateVector::from_array(*y), p, level, t).map(StateVector::to_array)
    };
    let mut traj = integrate_rk4(rhs, y0.to_array(), grid)?;
    for (t, s) in traj.times.iter().zip(traj.states.iter_mut()) {
        let mut v = StateVector::from_array(*s);
        v.enforce_nonnegative(p.humans, *t)?;
        *s = v.to_array();
    }
    traj.controls = Some(u.values().to_vec());
    traj.meta.variant = "controlled".into();
    Ok(traj)
}

/// Backward RK4 pass of the costates from `lambda(tf) = 0`, reading states
/// and control by linear interpolation.
pub fn backward_adjoint(
    p: &ModelParameters,
    states: &Trajectory,
    u: &ControlSignal,
    w: &ControlWeights,
) -> Result<Trajectory> {
    let times = &states.times;
    let n = times.len() - 1;
    let mut rhs = |t: f64, l: &[f64; 5]| -> Result<[f64; 5]> {
        let y = states.state_at(t)?;
        let level = sample_control(times, u.values(), t)?;
        adjoint_rhs(&y, &AdjointVector(*l), level, w, p).map(|a| a.0)
    };
    let mut lambdas = vec![[0.0; 5]; n + 1];
    for k in (1..=n).rev() {
        let h = times[k - 1] - times[k];
        let next = rk4_step(&mut rhs, times[k], &lambdas[k], h)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure {
                t: times[k - 1],
                reason: "non-finite costate".into(),
            });
        }
        lambdas[k - 1] = next;
    }
    Ok(Trajectory {
        times: times.clone(),
        states: lambdas,
        controls: None,
        meta: TrajectoryMeta {
            variant: "adjoint".into(),
            ..TrajectoryMeta::default()
        },
    })
}

fn characterize_all(states: &Trajectory, adjoint: &Trajectory, w: &ControlWeights) -> Vec<f64> {
    states
        .states
        .iter()
        .zip(&adjoint.states)
        .map(|(s, l)| {
            characterize_control(
                &StateVector::from_array(*s),
                &AdjointVector(*l),
                w.spraying(),
            )
        })
        .collect()
}

/// Forward-backward sweep: integrate states forward under the current
/// control, costates backward, then relax the control towards the
/// Hamiltonian minimizer until the update is within tolerance.
///
/// The initial guess is `u = 0`. Non-convergence within the iteration
/// budget is reported through [`FbsmResult::converged`], not as an error.
pub fn fbsm_solve(
    p: &ModelParameters,
    y0: StateVector,
    w: &ControlWeights,
    opts: &FbsmOptions,
) -> Result<FbsmResult> {
    p.validate()?;
    opts.validate()?;
    let nodes = opts.grid.n_steps() + 1;
    let omega = opts.relaxation;
    let mut u = ControlSignal::constant(0.0, &opts.grid)?;
    let mut updates = Vec::new();

    for iteration in 1..=opts.max_iterations {
        let diverged = |e: Error| Error::Divergence {
            iteration,
            reason: e.to_string(),
        };
        let states = forward_states(p, y0, &u, &opts.grid).map_err(diverged)?;
        let adjoint = backward_adjoint(p, &states, &u, w).map_err(diverged)?;
        let target = characterize_all(&states, &adjoint, w);

        let relaxed: Vec<f64> = u
            .values()
            .iter()
            .zip(&target)
            .map(|(&old, &new)| ((1.0 - omega) * old + omega * new).clamp(0.0, 1.0))
            .collect();
        let change = u
            .values()
            .iter()
            .zip(&relaxed)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = relaxed.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        updates.push(change);
        log::debug!("sweep {iteration}: control change {change:.3e}");

        let converged = change <= opts.tolerance * scale;
        if converged || iteration == opts.max_iterations {
            debug_assert_eq!(target.len(), nodes);
            let control = ControlSignal::new(target)?;
            let cost = cost(&states, &control, w)?;
            return Ok(FbsmResult {
                control,
                states,
                adjoint,
                cost,
                iterations: iteration,
                converged,
                updates,
            });
        }
        u = ControlSignal::new(relaxed)?;
    }
    unreachable!("max_iterations validated to be at least one")
}

/// Cost of each constant control level, evaluated as a batch.
pub fn constant_control_costs(
    p: &ModelParameters,
    y0: StateVector,
    w: &ControlWeights,
    grid: &TimeGrid,
    levels: &[f64],
) -> Result<Vec<f64>> {
    batch::map(levels, |&level| {
        let u = ControlSignal::constant(level, grid)?;
        let states = forward_states(p, y0, &u, grid)?;
        cost(&states, &u, w)
    })
    .into_iter()
    .collect()
}

/// Solves the problem for several weightings as a batch.
pub fn solve_weightings(
    p: &ModelParameters,
    y0: StateVector,
    weightings: &[ControlWeights],
    opts: &FbsmOptions,
) -> Vec<Result<FbsmResult>> {
    batch::map(weightings, |w| fbsm_solve(p, y0, w, opts))
}
