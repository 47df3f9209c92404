//! Fixed-step closed-loop simulation of a scenario.

use thiserror::Error;

use super::gust::GustProcess;
use super::log::LogRow;
use super::metrics::{compute_metrics, CycleMetrics};
use super::scenario::Scenario;
use crate::control::actuator::ActuatorState;
use crate::control::supervisor::{supervisor_step, ControlError, Phase, Supervisor};
use crate::dynamics::{DynamicsError, Plant, PlantState, Winch};
use crate::geometry::WindField;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("simulation failed at t = {t:.3} s: {source}")]
    Dynamics { t: f64, source: DynamicsError },
    #[error("wing hit the ground at t = {t:.3} s")]
    GroundContact { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSwitch {
    pub t: f64,
    pub from: Phase,
    pub to: Phase,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub log: Vec<LogRow>,
    pub switches: Vec<PhaseSwitch>,
    /// Times at which the figure-eight target point changed.
    pub target_switches: Vec<f64>,
    pub metrics: Vec<CycleMetrics>,
    /// Energy per completed cycle integrated at the step size [J].
    pub step_energy: Vec<f64>,
    pub supervisor: Supervisor,
    pub final_time: f64,
}

impl SimOutput {
    pub fn switch_times(&self, to: Phase) -> Vec<f64> {
        self.switches.iter().filter(|s| s.to == to).map(|s| s.t).collect()
    }
}

fn log_row(
    t: f64,
    x: &PlantState,
    plant: &Plant,
    cmd: &crate::control::supervisor::Command,
    phase: Phase,
) -> LogRow {
    let f_c = cmd.torque.line_force(x.kin.r_dot).max(0.0);
    LogRow {
        t,
        phi: x.kin.phi,
        theta: x.kin.theta,
        r: x.kin.r,
        phi_dot: x.kin.phi_dot,
        theta_dot: x.kin.theta_dot,
        r_dot: x.kin.r_dot,
        gamma: cmd.gamma,
        gamma_reg: cmd.gamma_reg,
        delta: plant.actuator.output(&x.act),
        delta_ref: cmd.delta_ref,
        f_c,
        t_m: f_c * cmd.torque.drum_radius(),
        power: f_c * x.kin.r_dot,
        phase,
    }
}

/// Runs a scenario; a failure mid-run is an error.
pub fn run_simulation(sc: &Scenario) -> Result<SimOutput, SimError> {
    match run_simulation_partial(sc)? {
        (out, None) => Ok(out),
        (_, Some(e)) => Err(e),
    }
}

/// Runs a scenario and keeps the log up to a mid-run failure. Only
/// configuration problems are returned as `Err`.
pub fn run_simulation_partial(sc: &Scenario) -> Result<(SimOutput, Option<SimError>), SimError> {
    sc.validate().map_err(SimError::Validation)?;
    let base_wind = sc.wind.field();
    let sup = Supervisor::new(sc.controller, sc.plant, sc.actuator, &base_wind)?;
    let plant = Plant::new(sc.plant, sc.actuator);
    let dt = sc.sim.dt;
    let n_steps = (sc.sim.duration / dt).round() as usize;
    let decimation = sc.sim.decimation();
    let mut gust = sc.wind.gust.map(|g| GustProcess::new(&g, dt, sc.sim.seed));

    let mut x = PlantState {
        kin: sc.initial_state(),
        act: ActuatorState::default(),
    };
    let mut ps = sup.initial_state(sc.sim.initial_phase, 0.0);
    let mut log = Vec::with_capacity(n_steps / decimation + 2);
    let mut switches = Vec::new();
    let mut target_switches = Vec::new();
    let mut step_energy = Vec::new();
    let mut cycle_energy = 0.0;
    let mut t = 0.0;
    let mut failure = None;

    for k in 0..=n_steps {
        t = k as f64 * dt;
        let wind = match gust.as_mut() {
            Some(g) => WindField {
                w0: base_wind.w0 * (1.0 + g.next()).max(0.0),
                ..base_wind
            },
            None => base_wind,
        };
        let (next_ps, cmd) = supervisor_step(&sup, ps, t, &x.kin, &wind);
        if next_ps.phase != ps.phase {
            switches.push(PhaseSwitch {
                t,
                from: ps.phase,
                to: next_ps.phase,
            });
        }
        if next_ps.target != ps.target && next_ps.phase == Phase::TractionFig8 && ps.phase == Phase::TractionFig8 {
            target_switches.push(t);
        }
        let cycle_done = next_ps.completed_cycles > ps.completed_cycles;
        if cycle_done {
            step_energy.push(cycle_energy);
            cycle_energy = 0.0;
        }
        ps = next_ps;
        let stop = sc.sim.max_cycles.is_some_and(|n| ps.completed_cycles >= n);
        if k % decimation == 0 || stop || k == n_steps {
            log.push(log_row(t, &x, &plant, &cmd, ps.phase));
        }
        if stop || k == n_steps {
            break;
        }
        let winch = Winch::Torque(cmd.torque);
        let p0 = cmd.torque.line_force(x.kin.r_dot).max(0.0) * x.kin.r_dot;
        x = match plant.integrate_step(&x, &wind, cmd.delta_ref, &winch, dt) {
            Ok(next) => next,
            Err(source) => {
                failure = Some(SimError::Dynamics { t, source });
                break;
            }
        };
        if x.kin.altitude() < 0.0 {
            failure = Some(SimError::GroundContact { t: t + dt });
            break;
        }
        let p1 = cmd.torque.line_force(x.kin.r_dot).max(0.0) * x.kin.r_dot;
        cycle_energy += 0.5 * (p0 + p1) * dt;
    }

    let metrics = compute_metrics(&log, sc.controller.theta_ref);
    let out = SimOutput {
        log,
        switches,
        target_switches,
        metrics,
        step_energy,
        supervisor: sup,
        final_time: t,
    };
    Ok((out, failure))
}
