//! Closed-form analysis: reproduction number, equilibria, threshold
//! classification and normalized forward sensitivity indices.
//!
//! The reproduction number is
//!
//! ```text
//! R0 = sqrt( B^2 beta_hm beta_mh N_m / ((eta_h + mu_h) mu_m N_h) )
//! ```
//!
//! and the sensitivity index of `R0` with respect to a rate `p` is
//! `(dR0/dp) (p / R0)`. Because `R0` is a product of powers, most indices
//! are constants: `+1` for `B`, `+1/2` for both transmission
//! probabilities, `-1/2` for `mu_m`. The two human rates share the
//! denominator `eta_h + mu_h`:
//!
//! ```text
//! index(mu_h)  = -mu_h  / (2 (eta_h + mu_h))
//! index(eta_h) = -eta_h / (2 (eta_h + mu_h))
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{rhs_constant, ModelParameters, Parameter, ScenarioPreset, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproductionMetrics {
    pub r0: f64,
    /// The radicand of `r0`. Scenario reference figures are stated for this value.
    pub r0_squared: f64,
}

/// Reproduction number of the constant-population model.
///
/// Evaluated directly from the rates, without validation, so a zero
/// transmission probability yields `r0 = 0`.
pub fn reproduction_metrics(p: &ModelParameters) -> ReproductionMetrics {
    let r0_squared =
        p.biting_rate * p.biting_rate * p.transmission_hm * p.transmission_mh * p.mosquitoes()
            / ((p.recovery_rate + p.human_mortality) * p.mosquito_mortality * p.humans);
    ReproductionMetrics {
        r0: r0_squared.sqrt(),
        r0_squared,
    }
}

/// Normalized sensitivity index of `r0` for each rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityTable {
    pub biting_rate: f64,
    pub transmission_mh: f64,
    pub transmission_hm: f64,
    pub human_mortality: f64,
    pub recovery_rate: f64,
    pub mosquito_mortality: f64,
}

impl SensitivityTable {
    pub fn get(&self, which: Parameter) -> f64 {
        match which {
            Parameter::BitingRate => self.biting_rate,
            Parameter::TransmissionMh => self.transmission_mh,
            Parameter::TransmissionHm => self.transmission_hm,
            Parameter::HumanMortality => self.human_mortality,
            Parameter::RecoveryRate => self.recovery_rate,
            Parameter::MosquitoMortality => self.mosquito_mortality,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Parameter, f64)> + '_ {
        Parameter::ALL.into_iter().map(|p| (p, self.get(p)))
    }
}

/// Analytic sensitivity indices.
pub fn sensitivity_indices(p: &ModelParameters) -> Result<SensitivityTable> {
    if reproduction_metrics(p).r0 == 0.0 {
        return Err(Error::UndefinedIndex);
    }
    p.validate()?;
    let human_exit = 2.0 * (p.recovery_rate + p.human_mortality);
    Ok(SensitivityTable {
        biting_rate: 1.0,
        transmission_mh: 0.5,
        transmission_hm: 0.5,
        human_mortality: -p.human_mortality / human_exit,
        recovery_rate: -p.recovery_rate / human_exit,
        mosquito_mortality: -0.5,
    })
}

pub const DEFAULT_REL_STEP: f64 = 1e-6;

/// Central finite-difference estimate of the sensitivity index,
/// `(r0(p (1 + h)) - r0(p (1 - h))) / (2 h r0(p))`.
pub fn sensitivity_index_fd(p: &ModelParameters, which: Parameter, rel_step: f64) -> Result<f64> {
    if !(rel_step > 0.0 && rel_step <= 1e-2) {
        return Err(Error::InvalidParameter {
            name: "rel_step",
            value: rel_step,
            reason: "relative step must lie in (0, 1e-2]",
        });
    }
    let base = reproduction_metrics(p).r0;
    if base == 0.0 {
        return Err(Error::UndefinedIndex);
    }
    p.validate()?;
    let value = p.get(which);
    let up = p.with(which, value * (1.0 + rel_step));
    let down = p.with(which, value * (1.0 - rel_step));
    up.validate()?;
    down.validate()?;
    let diff = reproduction_metrics(&up).r0 - reproduction_metrics(&down).r0;
    Ok(diff / (2.0 * rel_step * base))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSet {
    pub disease_free: StateVector,
    pub endemic: StateVector,
    /// True when every endemic component is strictly positive.
    pub endemic_feasible: bool,
}

/// Disease-free and endemic equilibria of the constant-population model.
pub fn equilibria(p: &ModelParameters) -> EquilibriumSet {
    let n_h = p.humans;
    let n_m = p.mosquitoes();
    let b = p.biting_rate;
    let (bmh, bhm) = (p.transmission_mh, p.transmission_hm);
    let (mu_h, eta_h, mu_m) = (p.human_mortality, p.recovery_rate, p.mosquito_mortality);

    let human_exit = eta_h + mu_h;
    // mosquito-side and human-side bracket terms of the closed forms
    let infect_h = b * bmh * n_m + mu_h * n_h;
    let infect_m = b * bhm * mu_h + mu_m * human_exit;
    // negative exactly when r0 > 1
    let threshold = mu_m * n_h * human_exit - b * b * bhm * bmh * n_m;

    let endemic = StateVector {
        s_h: n_h * n_h * infect_m / (b * bhm * infect_h),
        i_h: -mu_h * n_h * threshold / (b * bhm * human_exit * infect_h),
        r_h: -eta_h * n_h * threshold / (b * bhm * human_exit * infect_h),
        s_m: mu_m * human_exit * infect_h / (b * bmh * infect_m),
        i_m: -mu_h * threshold / (b * bmh * infect_m),
    };
    let endemic_feasible = endemic.to_array().iter().all(|&v| v > 0.0);
    EquilibriumSet {
        disease_free: p.disease_free_state(),
        endemic,
        endemic_feasible,
    }
}

/// Max-norm of the constant-population vector field at `y`.
pub fn residual(p: &ModelParameters, y: &StateVector) -> Result<f64> {
    Ok(rhs_constant(y, p, 0.0)?.max_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    DiesOut,
    Endemic,
    /// `r0` equal to one within round-off.
    Critical,
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Threshold::DiesOut => "dies_out",
            Threshold::Endemic => "endemic",
            Threshold::Critical => "critical",
        })
    }
}

/// Relative distance of `r0^2` from one treated as the critical case.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

pub fn classify_threshold(p: &ModelParameters) -> Threshold {
    let r2 = reproduction_metrics(p).r0_squared;
    if (r2 - 1.0).abs() <= CRITICAL_TOLERANCE {
        Threshold::Critical
    } else if r2 < 1.0 {
        Threshold::DiesOut
    } else {
        Threshold::Endemic
    }
}

/// Mismatch between a preset's computed `r0^2` and its stored reference
/// figure, compared at four decimal places.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceDiscrepancy {
    pub scenario: u8,
    pub computed: f64,
    pub reference: f64,
}

impl fmt::Display for ReferenceDiscrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "warning: scenario {} r0_squared = {:.4} does not reproduce the reference value {:.4}",
            self.scenario, self.computed, self.reference
        )
    }
}

pub fn reference_discrepancy(preset: &ScenarioPreset) -> Option<ReferenceDiscrepancy> {
    let reference = preset.reference_r0_squared?;
    let computed = reproduction_metrics(&preset.params).r0_squared;
    (format!("{computed:.4}") != format!("{reference:.4}")).then_some(ReferenceDiscrepancy {
        scenario: preset.id,
        computed,
        reference,
    })
}
