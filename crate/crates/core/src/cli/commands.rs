use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::args::{Cli, Command, VariantKind};
use super::config::{with_suffix, RunConfig};
use super::csv_io::write_trajectory_csv;
use super::plot::plot_script;
use super::CliError;
use crate::analysis::{
    classify_threshold, equilibria, reference_discrepancy, reproduction_metrics, residual,
    sensitivity_index_fd, sensitivity_indices, DEFAULT_REL_STEP,
};
use crate::batch;
use crate::integrator::{daily_times, simulate, Trajectory};
use crate::model::{Model, ScenarioPreset, StateVector};
use crate::optimal_control::{
    constant_control_costs, forward_states, solve_weightings, ControlSignal, ControlWeights,
    FbsmResult,
};

/// Default CSV path of `optimize` when `--out` is not given.
pub const DEFAULT_OPTIMIZE_OUT: &str = "optimal_control.csv";

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        c @ Command::Simulate(a) => cmd_simulate(&RunConfig::from_args(c, a)?, stdout),
        c @ Command::Analyze(a) => cmd_analyze(&RunConfig::from_args(c, a)?, stdout),
        c @ Command::Optimize(a) => cmd_optimize(&RunConfig::from_args(c, a)?, stdout),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| CliError::io(path, e))
}

fn scenario_configs(cfg: &RunConfig) -> Result<Vec<RunConfig>, CliError> {
    (1..=3)
        .map(|id| {
            let preset = ScenarioPreset::get(id).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(RunConfig {
                scenario: id,
                params: preset.params,
                initial_state: preset.initial_state,
                ..cfg.clone()
            })
        })
        .collect()
}

/// Simulates one configuration and resamples onto a daily grid.
pub fn simulate_config(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let model = Model::new(cfg.params, cfg.model_variant()?)?;
    let traj = simulate(&model, cfg.initial_state, 0.0, cfg.t_f, cfg.method())?;
    log::info!(
        "scenario {} {}: {} accepted steps, {} rejected",
        cfg.scenario,
        model.variant().name(),
        traj.meta.stats.accepted,
        traj.meta.stats.rejected
    );
    Ok(traj.resample(&daily_times(0.0, cfg.t_f))?)
}

fn emit_csv(traj: &Trajectory, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let f = create(path)?;
            write_trajectory_csv(f, traj).map_err(|e| match e {
                CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
                other => other,
            })
        }
        None => write_trajectory_csv(stdout, traj),
    }
}

fn emit_plot(cfg: &RunConfig, csv: Option<&Path>, with_control: bool) -> Result<(), CliError> {
    if let Some(script) = &cfg.plot_script {
        let csv = csv
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("-"));
        write_text(script, &plot_script(&csv, with_control, cfg.params.humans))?;
    }
    Ok(())
}

/// Writes the trajectory CSV (one row per day).
pub fn cmd_simulate(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let with_control = cfg.variant == VariantKind::Controlled;
    if !cfg.sweep {
        let traj = simulate_config(cfg)?;
        emit_csv(&traj, cfg.out.as_deref(), stdout)?;
        return emit_plot(cfg, cfg.out.as_deref(), with_control);
    }
    let out = cfg
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("--sweep requires --out".into()))?;
    let configs = scenario_configs(cfg)?;
    let runs = batch::map(&configs, simulate_config);
    for (c, traj) in configs.iter().zip(runs) {
        let path = with_suffix(out, &format!("s{}", c.scenario));
        emit_csv(&traj?, Some(&path), stdout)?;
        if let Some(script) = &cfg.plot_script {
            let script = with_suffix(script, &format!("s{}", c.scenario));
            write_text(&script, &plot_script(&path, with_control, c.params.humans))?;
        }
    }
    Ok(())
}

/// Text report of the closed-form analysis of one configuration.
pub fn analysis_report(cfg: &RunConfig) -> Result<String, CliError> {
    let p = &cfg.params;
    let mut s = String::new();
    let preset = ScenarioPreset::get(cfg.scenario).map_err(|e| CliError::Config(e.to_string()))?;
    let is_preset = preset.params == *p;
    if is_preset {
        let _ = writeln!(s, "scenario {}: {}", cfg.scenario, preset.label);
    } else {
        let _ = writeln!(s, "scenario {} with parameter overrides", cfg.scenario);
    }

    let _ = writeln!(s, "\nparameters");
    let rows = [
        ("N_h", p.humans),
        ("kappa", p.mosquitoes_per_human),
        ("N_m", p.mosquitoes()),
        ("B", p.biting_rate),
        ("beta_mh", p.transmission_mh),
        ("beta_hm", p.transmission_hm),
        ("mu_h", p.human_mortality),
        ("eta_h", p.recovery_rate),
        ("mu_m", p.mosquito_mortality),
    ];
    for (name, v) in rows {
        let _ = writeln!(s, "  {name:<8} {v}");
    }

    let m = reproduction_metrics(p);
    let _ = writeln!(s, "\nreproduction number");
    let _ = writeln!(s, "  r0          {:.4}", m.r0);
    let _ = writeln!(s, "  r0_squared  {:.4}", m.r0_squared);
    if is_preset {
        if let Some(d) = reference_discrepancy(&preset) {
            let _ = writeln!(s, "  {d}");
        }
    }
    let _ = writeln!(s, "  threshold   {}", classify_threshold(p));

    let _ = writeln!(s, "\nsensitivity indices of r0");
    let _ = writeln!(
        s,
        "  {:<8} {:>10} {:>18}",
        "param", "analytic", "finite-difference"
    );
    match sensitivity_indices(p) {
        Ok(table) => {
            for (which, analytic) in table.iter() {
                let fd = sensitivity_index_fd(p, which, DEFAULT_REL_STEP);
                let fd = fd
                    .map(|v| format!("{v:+.5}"))
                    .unwrap_or_else(|e| format!("({e})"));
                let _ = writeln!(s, "  {:<8} {:>+10.5} {:>18}", which.symbol(), analytic, fd);
            }
        }
        Err(e) => {
            let _ = writeln!(s, "  {e}");
        }
    }

    let eq = equilibria(p);
    let _ = writeln!(s, "\nequilibria");
    let state = |y: &StateVector| {
        StateVector::COMPONENTS
            .iter()
            .zip(y.to_array())
            .map(|(n, v)| format!("{n}={v:.6}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(
        s,
        "  disease-free  {}  residual={:e}",
        state(&eq.disease_free),
        residual(p, &eq.disease_free)?
    );
    let _ = writeln!(
        s,
        "  endemic       {}  residual={:e}  feasible={}",
        state(&eq.endemic),
        residual(p, &eq.endemic)?,
        eq.endemic_feasible
    );
    Ok(s)
}

/// Prints the analysis report (or writes it to `--out`).
pub fn cmd_analyze(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = if cfg.sweep {
        let configs = scenario_configs(cfg)?;
        batch::map(&configs, analysis_report)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?
            .join("\n")
    } else {
        analysis_report(cfg)?
    };
    match &cfg.out {
        Some(path) => write_text(path, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn summary(cfg: &RunConfig, w: &ControlWeights, r: &FbsmResult) -> Result<String, CliError> {
    let p = &cfg.params;
    let n_h = p.humans;
    let grid = cfg.fbsm_options()?.grid;
    let costs = constant_control_costs(p, cfg.initial_state, w, &grid, &[0.0, 1.0])?;
    let uncontrolled = forward_states(
        p,
        cfg.initial_state,
        &ControlSignal::constant(0.0, &grid)?,
        &grid,
    )?;

    let mut s = String::new();
    let _ = writeln!(s, "gamma_D = {}", w.infection());
    let _ = writeln!(s, "gamma_S = {}", w.spraying());
    let _ = writeln!(s, "cost = {}", r.cost);
    let _ = writeln!(s, "iterations = {}", r.iterations);
    let _ = writeln!(s, "converged = {}", r.converged);
    let _ = writeln!(s, "control_sup = {}", r.control.sup_norm());
    if cfg.t_f >= 150.0 {
        let _ = writeln!(
            s,
            "infected_fraction_t150 = {}",
            r.states.state_at(150.0)?.i_h / n_h
        );
    }
    let _ = writeln!(s, "infected_fraction_tf = {}", r.states.last()[1] / n_h);
    let _ = writeln!(
        s,
        "uncontrolled_infected_fraction_tf = {}",
        uncontrolled.last()[1] / n_h
    );
    let _ = writeln!(s, "cost_u0 = {}", costs[0]);
    let _ = writeln!(s, "cost_u1 = {}", costs[1]);
    Ok(s)
}

fn controlled_output(r: &FbsmResult) -> Trajectory {
    let mut traj = r.states.clone();
    traj.controls = Some(r.control.values().to_vec());
    traj
}

/// Solves the optimal-control problem, writes states and control as CSV and
/// prints a `key = value` summary.
pub fn cmd_optimize(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let opts = cfg.fbsm_options()?;
    let weightings = if cfg.sweep {
        vec![
            ControlWeights::new(1.0, 1.0)?,
            ControlWeights::new(1.0, 0.0)?,
            ControlWeights::new(0.0, 1.0)?,
        ]
    } else {
        vec![cfg.weights()?]
    };
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OPTIMIZE_OUT));

    let results = solve_weightings(&cfg.params, cfg.initial_state, &weightings, &opts);
    let mut unconverged = Vec::new();
    for (k, (w, r)) in weightings.iter().zip(results).enumerate() {
        let r = r?;
        let path = if cfg.sweep {
            with_suffix(&out, &format!("w{}", k + 1))
        } else {
            out.clone()
        };
        emit_csv(&controlled_output(&r), Some(&path), stdout)?;
        if let Some(script) = &cfg.plot_script {
            let script = if cfg.sweep {
                with_suffix(script, &format!("w{}", k + 1))
            } else {
                script.clone()
            };
            write_text(&script, &plot_script(&path, true, cfg.params.humans))?;
        }
        let text = summary(cfg, w, &r)?;
        let _ = writeln!(stdout, "[{}]", path.display());
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?;
        if !r.converged {
            unconverged.push(format!(
                "gamma_D={} gamma_S={} after {} iterations",
                w.infection(),
                w.spraying(),
                r.iterations
            ));
        }
    }
    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(unconverged.join("; ")))
    }
}
