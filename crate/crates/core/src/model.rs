//! Human-mosquito dengue transmission model.
//!
//! Humans move through susceptible, infected and resistant classes
//! (`S_h`, `I_h`, `R_h`); female mosquitoes are susceptible or infected
//! (`S_m`, `I_m`). Three vector fields are provided:
//!
//! - [`rhs_constant`]: constant human and mosquito populations.
//! - [`rhs_seasonal`]: mosquito recruitment modulated by a cosine season.
//! - [`rhs_controlled`]: insecticide removes mosquitoes at per-capita rate `u`.
//!
//! All rates are per day. Every right-hand side takes `t` so the three
//! variants share one integrator interface, even when it is unused.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Epidemiological rates and population sizes.
///
/// The mosquito population is not stored directly; it is derived as
/// `mosquitoes_per_human * humans`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParameters {
    /// Total human population `N_h`.
    pub humans: f64,
    /// Mosquitoes per human `kappa`.
    pub mosquitoes_per_human: f64,
    /// Average daily biting rate `B`.
    pub biting_rate: f64,
    /// Transmission probability per bite, infected mosquito to human (`beta_mh`).
    pub transmission_mh: f64,
    /// Transmission probability per bite, infected human to mosquito (`beta_hm`).
    pub transmission_hm: f64,
    /// Human per-capita birth and death rate `mu_h`.
    pub human_mortality: f64,
    /// Human recovery rate `eta_h`.
    pub recovery_rate: f64,
    /// Mosquito per-capita birth and death rate `mu_m`.
    pub mosquito_mortality: f64,
}

impl ModelParameters {
    pub const HUMAN_LIFESPAN_DAYS: f64 = 79.0 * 365.0;

    /// Checks positivity of every field and that both transmission
    /// probabilities are at most one.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("N_h", self.humans),
            ("kappa", self.mosquitoes_per_human),
            ("B", self.biting_rate),
            ("beta_mh", self.transmission_mh),
            ("beta_hm", self.transmission_hm),
            ("mu_h", self.human_mortality),
            ("eta_h", self.recovery_rate),
            ("mu_m", self.mosquito_mortality),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
            if value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be strictly positive",
                });
            }
        }
        for (name, value) in [
            ("beta_mh", self.transmission_mh),
            ("beta_hm", self.transmission_hm),
        ] {
            if value > 1.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "probability must not exceed 1",
                });
            }
        }
        Ok(())
    }

    /// Total mosquito population `N_m = kappa * N_h`.
    pub fn mosquitoes(&self) -> f64 {
        self.mosquitoes_per_human * self.humans
    }

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

    /// Returns a copy with one rate replaced. The result is not validated.
    pub fn with(&self, which: Parameter, value: f64) -> Self {
        let mut p = *self;
        match which {
            Parameter::BitingRate => p.biting_rate = value,
            Parameter::TransmissionMh => p.transmission_mh = value,
            Parameter::TransmissionHm => p.transmission_hm = value,
            Parameter::HumanMortality => p.human_mortality = value,
            Parameter::RecoveryRate => p.recovery_rate = value,
            Parameter::MosquitoMortality => p.mosquito_mortality = value,
        }
        p
    }

    /// Disease-free state `(N_h, 0, 0, N_m, 0)`.
    pub fn disease_free_state(&self) -> StateVector {
        StateVector::new(self.humans, 0.0, 0.0, self.mosquitoes(), 0.0)
    }
}

/// The rates entering the reproduction number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    BitingRate,
    TransmissionMh,
    TransmissionHm,
    HumanMortality,
    RecoveryRate,
    MosquitoMortality,
}

impl Parameter {
    pub const ALL: [Parameter; 6] = [
        Parameter::BitingRate,
        Parameter::TransmissionMh,
        Parameter::TransmissionHm,
        Parameter::HumanMortality,
        Parameter::RecoveryRate,
        Parameter::MosquitoMortality,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Parameter::BitingRate => "B",
            Parameter::TransmissionMh => "beta_mh",
            Parameter::TransmissionHm => "beta_hm",
            Parameter::HumanMortality => "mu_h",
            Parameter::RecoveryRate => "eta_h",
            Parameter::MosquitoMortality => "mu_m",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Head counts of the five compartments at one instant. Also used for
/// their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub s_h: f64,
    pub i_h: f64,
    pub r_h: f64,
    pub s_m: f64,
    pub i_m: f64,
}

impl StateVector {
    pub const COMPONENTS: [&'static str; 5] = ["S_h", "I_h", "R_h", "S_m", "I_m"];

    pub const fn new(s_h: f64, i_h: f64, r_h: f64, s_m: f64, i_m: f64) -> Self {
        Self {
            s_h,
            i_h,
            r_h,
            s_m,
            i_m,
        }
    }

    pub const fn from_array(a: [f64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub const fn to_array(self) -> [f64; 5] {
        [self.s_h, self.i_h, self.r_h, self.s_m, self.i_m]
    }

    pub fn humans(&self) -> f64 {
        self.s_h + self.i_h + self.r_h
    }

    pub fn mosquitoes(&self) -> f64 {
        self.s_m + self.i_m
    }

    /// Errors on the first non-finite component.
    pub fn check_finite(&self) -> Result<()> {
        for (name, v) in Self::COMPONENTS.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(Error::NonFinite { component: name });
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Clamps round-off negativity down to `-1e-9 * n_h` to zero; anything
    /// more negative is an error.
    pub fn enforce_nonnegative(&mut self, n_h: f64, t: f64) -> Result<()> {
        let floor = -NEGATIVITY_TOLERANCE * n_h;
        let mut a = self.to_array();
        for (name, v) in Self::COMPONENTS.iter().zip(a.iter_mut()) {
            if *v < floor {
                return Err(Error::NegativeState {
                    component: name,
                    value: *v,
                    t,
                });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        *self = Self::from_array(a);
        Ok(())
    }
}

/// Relative negativity (per human) tolerated as round-off.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-9;

/// Cosine modulation of the mosquito birth rate,
/// `mu_m * (1 + amplitude * cos(2 pi t / period))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalForcing {
    amplitude: f64,
    period: f64,
}

impl SeasonalForcing {
    pub const DEFAULT_PERIOD: f64 = 365.0;

    /// `amplitude` must lie strictly inside (0, 1).
    pub fn new(amplitude: f64, period: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude < 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: amplitude,
                reason: "seasonal amplitude must lie in (0, 1)",
            });
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "period",
                value: period,
                reason: "must be positive and finite",
            });
        }
        Ok(Self { amplitude, period })
    }

    pub fn annual(amplitude: f64) -> Result<Self> {
        Self::new(amplitude, Self::DEFAULT_PERIOD)
    }

    /// Degenerate forcing with zero amplitude. Useful for checking that the
    /// seasonal field reduces to the constant one; not constructible
    /// through [`SeasonalForcing::new`].
    pub fn unforced(period: f64) -> Self {
        Self {
            amplitude: 0.0,
            period,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn factor(&self, t: f64) -> f64 {
        1.0 + self.amplitude * (2.0 * PI * t / self.period).cos()
    }

    /// Effective per-capita mosquito birth rate at time `t`.
    pub fn birth_rate(&self, mosquito_mortality: f64, t: f64) -> f64 {
        mosquito_mortality * self.factor(t)
    }

    /// Time within the first period where the birth rate is lowest.
    pub fn minimum_time(&self) -> f64 {
        self.period / 2.0
    }
}

#[inline]
fn field(
    y: &StateVector,
    p: &ModelParameters,
    mosquito_recruitment: f64,
    insecticide: f64,
) -> StateVector {
    let n_h = p.humans;
    let bite_mh = p.biting_rate * p.transmission_mh;
    let bite_hm = p.biting_rate * p.transmission_hm;
    let mu_h = p.human_mortality;
    let eta_h = p.recovery_rate;
    let mu_m = p.mosquito_mortality;

    StateVector {
        s_h: mu_h * n_h - (bite_mh * y.i_m / n_h + mu_h) * y.s_h,
        i_h: bite_mh * y.i_m / n_h * y.s_h - (eta_h + mu_h) * y.i_h,
        r_h: eta_h * y.i_h - mu_h * y.r_h,
        s_m: mosquito_recruitment - (bite_hm * y.i_h / n_h + mu_m + insecticide) * y.s_m,
        i_m: bite_hm * y.i_h / n_h * y.s_m - (mu_m + insecticide) * y.i_m,
    }
}

/// Vector field with constant human and mosquito populations.
pub fn rhs_constant(y: &StateVector, p: &ModelParameters, _t: f64) -> Result<StateVector> {
    y.check_finite()?;
    Ok(field(y, p, p.mosquito_mortality * p.mosquitoes(), 0.0))
}

/// Vector field with seasonal mosquito recruitment proportional to the
/// live mosquito population.
pub fn rhs_seasonal(
    y: &StateVector,
    p: &ModelParameters,
    forcing: &SeasonalForcing,
    t: f64,
) -> Result<StateVector> {
    y.check_finite()?;
    let recruitment = forcing.birth_rate(p.mosquito_mortality, t) * (y.s_m + y.i_m);
    Ok(field(y, p, recruitment, 0.0))
}

/// Vector field with insecticide applied at per-capita rate `u` to both
/// mosquito classes. Recruitment stays at `mu_m * N_m`.
pub fn rhs_controlled(
    y: &StateVector,
    p: &ModelParameters,
    u: f64,
    _t: f64,
) -> Result<StateVector> {
    check_control(u)?;
    y.check_finite()?;
    Ok(field(y, p, p.mosquito_mortality * p.mosquitoes(), u))
}

pub fn check_control(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::ControlOutOfRange(u))
    }
}

/// Model variant selecting which vector field drives the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    Constant,
    Seasonal(SeasonalForcing),
    /// Constant insecticide level applied for the whole horizon.
    Controlled(f64),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Constant => "constant",
            Variant::Seasonal(_) => "seasonal",
            Variant::Controlled(_) => "controlled",
        }
    }
}

/// A validated parameter set paired with a variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    params: ModelParameters,
    variant: Variant,
}

impl Model {
    pub fn new(params: ModelParameters, variant: Variant) -> Result<Self> {
        params.validate()?;
        if let Variant::Controlled(u) = variant {
            check_control(u)?;
        }
        Ok(Self { params, variant })
    }

    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn rhs(&self, t: f64, y: &StateVector) -> Result<StateVector> {
        match &self.variant {
            Variant::Constant => rhs_constant(y, &self.params, t),
            Variant::Seasonal(f) => rhs_seasonal(y, &self.params, f, t),
            Variant::Controlled(u) => rhs_controlled(y, &self.params, *u, t),
        }
    }
}

/// Table of the three temperature scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub id: u8,
    pub label: &'static str,
    pub params: ModelParameters,
    pub initial_state: StateVector,
    /// Reference value of `r0^2` recorded for this scenario.
    pub reference_r0_squared: Option<f64>,
}

/// `(111991, 9, 0, 335000, 1000)`: nine infected humans and a thousand
/// infected mosquitoes.
pub const DEFAULT_INITIAL_STATE: StateVector =
    StateVector::new(111_991.0, 9.0, 0.0, 335_000.0, 1_000.0);

fn scenario_params(
    transmission_mh: f64,
    transmission_hm: f64,
    mosquito_mortality: f64,
) -> ModelParameters {
    ModelParameters {
        humans: 112_000.0,
        mosquitoes_per_human: 3.0,
        biting_rate: 1.0 / 3.0,
        transmission_mh,
        transmission_hm,
        human_mortality: 1.0 / ModelParameters::HUMAN_LIFESPAN_DAYS,
        recovery_rate: 1.0 / 7.0,
        mosquito_mortality,
    }
}

impl ScenarioPreset {
    pub fn get(id: u8) -> Result<Self> {
        let (label, params, reference) = match id {
            1 => (
                "cool region, mean temperature 14 C",
                scenario_params(0.12, 0.11, 0.04),
                Some(0.7698),
            ),
            2 => (
                "warm region, mean temperature 26 C",
                scenario_params(0.99, 0.95, 0.03),
                Some(73.1322),
            ),
            3 => (
                "mild climate, mean temperature 18-24 C",
                scenario_params(0.2, 0.2, 1.0 / 15.0),
                Some(0.6221),
            ),
            _ => {
                return Err(Error::InvalidParameter {
                    name: "scenario",
                    value: f64::from(id),
                    reason: "scenario id must be 1, 2 or 3",
                })
            }
        };
        Ok(Self {
            id,
            label,
            params,
            initial_state: DEFAULT_INITIAL_STATE,
            reference_r0_squared: reference,
        })
    }

    pub fn all() -> [ScenarioPreset; 3] {
        [1, 2, 3].map(|id| Self::get(id).expect("preset ids are valid"))
    }
}
