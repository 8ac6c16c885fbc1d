use std::path::{Path, PathBuf};

use super::args::{Command, IntegratorKind, RunArgs, VariantKind};
use super::CliError;
use crate::integrator::{Method, TimeGrid, Tolerances};
use crate::model::{ModelParameters, ScenarioPreset, SeasonalForcing, StateVector, Variant};
use crate::optimal_control::{ControlWeights, FbsmOptions};

/// Fully resolved settings of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: u8,
    pub params: ModelParameters,
    pub initial_state: StateVector,
    pub variant: VariantKind,
    pub alpha: f64,
    pub t_f: f64,
    pub integrator: IntegratorKind,
    pub tolerances: Tolerances,
    pub grid_step: f64,
    pub control_level: f64,
    pub gamma_d: f64,
    pub gamma_s: f64,
    pub relaxation: f64,
    pub fbsm_tolerance: f64,
    pub max_iterations: usize,
    pub out: Option<PathBuf>,
    pub plot_script: Option<PathBuf>,
    pub sweep: bool,
}

impl RunConfig {
    /// Defaults for a preset: constant variant, 365 days, DP45.
    pub fn for_scenario(id: u8) -> Result<Self, CliError> {
        let preset = ScenarioPreset::get(id).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            scenario: id,
            params: preset.params,
            initial_state: preset.initial_state,
            variant: VariantKind::Constant,
            alpha: 0.3,
            t_f: 365.0,
            integrator: IntegratorKind::Dp45,
            tolerances: Tolerances::default(),
            grid_step: FbsmOptions::DEFAULT_STEP,
            control_level: 0.0,
            gamma_d: 1.0,
            gamma_s: 1.0,
            relaxation: FbsmOptions::DEFAULT_RELAXATION,
            fbsm_tolerance: FbsmOptions::DEFAULT_TOLERANCE,
            max_iterations: FbsmOptions::DEFAULT_MAX_ITERATIONS,
            out: None,
            plot_script: None,
            sweep: false,
        })
    }

    /// Preset, then config file, then command-line flags. `optimize`
    /// defaults to scenario 2 and the controlled variant.
    pub fn from_args(command: &Command, args: &RunArgs) -> Result<Self, CliError> {
        let optimize = matches!(command, Command::Optimize(_));
        let default_scenario = if optimize { 2 } else { 1 };
        let mut cfg = Self::for_scenario(args.scenario.unwrap_or(default_scenario))?;
        if optimize {
            cfg.variant = VariantKind::Controlled;
        }
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (key, value) in parse_config_text(&text)? {
                cfg.set(&key, value)?;
            }
        }
        cfg.apply_flags(args);
        cfg.validate(optimize)?;
        Ok(cfg)
    }

    fn apply_flags(&mut self, a: &RunArgs) {
        macro_rules! take {
            ($($field:ident <- $flag:ident),* $(,)?) => {
                $(if let Some(v) = a.$flag { self.$field = v; })*
            };
        }
        take!(
            variant <- variant,
            alpha <- alpha,
            t_f <- tf,
            gamma_d <- gamma_d,
            gamma_s <- gamma_s,
            grid_step <- grid_step,
            integrator <- integrator,
            control_level <- control,
            relaxation <- relaxation,
            fbsm_tolerance <- tolerance,
            max_iterations <- max_iterations,
        );
        if let Some(v) = a.rtol {
            self.tolerances.rel = v;
        }
        if let Some(v) = a.atol {
            self.tolerances.abs = v;
        }
        if a.out.is_some() {
            self.out.clone_from(&a.out);
        }
        if a.plot_script.is_some() {
            self.plot_script.clone_from(&a.plot_script);
        }
        self.sweep |= a.sweep;
    }

    /// Applies one config-file key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), CliError> {
        let p = &mut self.params;
        let y = &mut self.initial_state;
        match key {
            "N_h" => p.humans = value,
            "kappa" => p.mosquitoes_per_human = value,
            "B" => p.biting_rate = value,
            "beta_mh" => p.transmission_mh = value,
            "beta_hm" => p.transmission_hm = value,
            "mu_h" => p.human_mortality = value,
            "eta_h" => p.recovery_rate = value,
            "mu_m" => p.mosquito_mortality = value,
            "alpha" => self.alpha = value,
            "gamma_D" => self.gamma_d = value,
            "gamma_S" => self.gamma_s = value,
            "t_f" => self.t_f = value,
            "S_h0" => y.s_h = value,
            "I_h0" => y.i_h = value,
            "R_h0" => y.r_h = value,
            "S_m0" => y.s_m = value,
            "I_m0" => y.i_m = value,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn validate(&self, optimize: bool) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return bad(format!("t_f = {} must be positive and finite", self.t_f));
        }
        for (name, v) in StateVector::COMPONENTS
            .iter()
            .zip(self.initial_state.to_array())
        {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name}0 = {v} must be finite and nonnegative"));
            }
        }
        if self.variant == VariantKind::Seasonal {
            SeasonalForcing::annual(self.alpha).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if !(self.tolerances.rel > 0.0 && self.tolerances.abs > 0.0) {
            return bad("rtol and atol must be positive".into());
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return bad(format!("grid-step = {} must be positive", self.grid_step));
        }
        if !(0.0..=1.0).contains(&self.control_level) {
            return bad(format!(
                "control = {} must lie in [0, 1]",
                self.control_level
            ));
        }
        if optimize {
            if self.variant != VariantKind::Controlled {
                return bad("optimize requires --variant controlled".into());
            }
            self.weights()?;
            self.fbsm_options()?;
        }
        Ok(())
    }

    pub fn model_variant(&self) -> Result<Variant, CliError> {
        Ok(match self.variant {
            VariantKind::Constant => Variant::Constant,
            VariantKind::Seasonal => Variant::Seasonal(
                SeasonalForcing::annual(self.alpha).map_err(|e| CliError::Config(e.to_string()))?,
            ),
            VariantKind::Controlled => Variant::Controlled(self.control_level),
        })
    }

    pub fn method(&self) -> Method {
        match self.integrator {
            IntegratorKind::Dp45 => Method::Dp45(self.tolerances),
            IntegratorKind::Rk4 => Method::Rk4 {
                max_step: self.grid_step,
            },
        }
    }

    pub fn weights(&self) -> Result<ControlWeights, CliError> {
        ControlWeights::new(self.gamma_d, self.gamma_s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn fbsm_options(&self) -> Result<FbsmOptions, CliError> {
        let opts = FbsmOptions {
            relaxation: self.relaxation,
            tolerance: self.fbsm_tolerance,
            max_iterations: self.max_iterations,
            grid: TimeGrid::with_max_step(0.0, self.t_f, self.grid_step)
                .map_err(|e| CliError::Config(e.to_string()))?,
        };
        opts.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(opts)
    }
}

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// skipped; values must be decimal floating-point literals.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let parsed: f64 = value.parse().map_err(|_| {
            CliError::Config(format!(
                "line {}: `{key}` has non-numeric value `{value}`",
                n + 1
            ))
        })?;
        out.push((key.to_string(), parsed));
    }
    Ok(out)
}

pub(crate) fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}
