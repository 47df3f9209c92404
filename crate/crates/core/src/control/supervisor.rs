//! Power-cycle state machine: figure-eight traction, transition to the
//! window border, retraction, transition back.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::laws::{elevation_state_feedback, retraction_gamma_reference, velocity_angle_control};
use crate::control::reeling::TorqueLaw;
use crate::control::traction::{traction_controller, TargetPoint, TurnSense};
use crate::control::{ControllerConfig, RetractionLaw};
use crate::control::actuator::{ActuatorParams, ActuatorState};
use crate::dynamics::{find_equilibrium_input, Equilibrium, EquilibriumOptions, Plant, PlantParams, PlantState, Winch};
use crate::geometry::{regularized_velocity_angle, velocity_angle, wrap_angle, KinematicState, WindField};
use crate::reduced::{traction_coefficient, turn_rate_model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    TractionFig8,
    TransitionToBorder,
    Retraction,
    TransitionToTraction,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::TractionFig8,
        Phase::TransitionToBorder,
        Phase::Retraction,
        Phase::TransitionToTraction,
    ];

    /// Successor on the cycle graph.
    pub fn next(self) -> Phase {
        match self {
            Phase::TractionFig8 => Phase::TransitionToBorder,
            Phase::TransitionToBorder => Phase::Retraction,
            Phase::Retraction => Phase::TransitionToTraction,
            Phase::TransitionToTraction => Phase::TractionFig8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::TractionFig8 => "traction_fig8",
            Phase::TransitionToBorder => "transition_to_border",
            Phase::Retraction => "retraction",
            Phase::TransitionToTraction => "transition_to_traction",
        }
    }

    pub fn from_name(s: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Phases in which the winch generates.
    pub fn is_traction(self) -> bool {
        !matches!(self, Phase::Retraction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub phase: Phase,
    pub law: RetractionLaw,
    pub target: TargetPoint,
    /// Last defined velocity angle, held while the wing is static.
    pub last_gamma: Option<f64>,
    pub phase_entered: f64,
    pub last_target_switch: f64,
    pub completed_cycles: usize,
}

/// Output of one supervisor step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub delta_ref: f64,
    pub torque: TorqueLaw,
    pub gamma: Option<f64>,
    pub gamma_reg: Option<f64>,
    pub gamma_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid controller configuration: {0}")]
    Config(String),
    #[error("no retraction torque up to {max_torque} N m reaches {speed} m/s mean reel-in")]
    RetractionSizing { speed: f64, max_torque: f64 },
}

/// Controller constants derived once per scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supervisor {
    pub config: ControllerConfig,
    pub plant: PlantParams,
    pub actuator: ActuatorParams,
    /// Border equilibrium at `theta_ref`, mid tether length and the
    /// configured reel-in speed, if one exists.
    pub equilibrium: Option<Equilibrium>,
    /// Steering feedforward of the retraction laws [m].
    pub delta_eq: f64,
    pub retraction_torque: f64,
    pub c_f: f64,
}

/// Step of the sizing simulations [s].
const SIZING_DT: f64 = 2e-3;

impl Supervisor {
    /// Derives the steering feedforward from the border equilibrium (zero
    /// when there is none) and, unless configured, sizes the retraction
    /// torque by simulation.
    pub fn new(
        config: ControllerConfig,
        plant: PlantParams,
        actuator: ActuatorParams,
        wind: &WindField,
    ) -> Result<Self, ControlError> {
        config.validate().map_err(ControlError::Config)?;
        plant.validate().map_err(ControlError::Config)?;
        actuator.validate().map_err(ControlError::Config)?;
        let r_mid = 0.5 * (config.r_min + config.r_max);
        let equilibrium = find_equilibrium_input(
            config.theta_ref,
            wind,
            &plant,
            r_mid,
            -config.reel_in_speed,
            config.side,
            &EquilibriumOptions::default(),
        )
        .ok();
        let delta_eq = match equilibrium {
            Some(e) if config.retraction_feedforward => e.delta,
            _ => 0.0,
        };
        let mut sup = Self {
            config,
            plant,
            actuator,
            equilibrium,
            delta_eq,
            retraction_torque: config.retraction_torque.unwrap_or(0.0),
            c_f: traction_coefficient(&plant.wing, &plant.env),
        };
        if config.retraction_torque.is_none() {
            sup.retraction_torque = sup.size_retraction_torque(wind)?;
        }
        Ok(sup)
    }

    /// Mean reel-in speed of an elevation-feedback retraction from the
    /// border at `r_max` down to `r_min` under constant `torque`; zero if
    /// the wing does not get there.
    pub fn retraction_mean_speed(&self, torque: f64, wind: &WindField) -> f64 {
        let cfg = &self.config;
        let plant = Plant::new(self.plant, self.actuator);
        let winch = Winch::Torque(TorqueLaw::Constant {
            torque,
            drum_radius: cfg.drum_radius,
        });
        let mut x = PlantState {
            kin: KinematicState {
                r_dot: -cfg.reel_in_speed,
                ..KinematicState::at_rest(cfg.side.border_azimuth(wind.phi_w), cfg.theta_ref, cfg.r_max)
            },
            act: ActuatorState::default(),
        };
        let stroke = cfg.r_max - cfg.r_min;
        let horizon = 4.0 * stroke / cfg.reel_in_speed.max(0.5);
        let n = (horizon / SIZING_DT).ceil() as usize;
        for k in 0..n {
            if x.kin.r <= cfg.r_min {
                return stroke / (k as f64 * SIZING_DT);
            }
            let gamma_reg = regularized_velocity_angle(&x.kin, wind, cfg.regularization).ok();
            let (delta, _) = self.retraction_command(RetractionLaw::ElevationSf, &x.kin, gamma_reg);
            let limit = 0.99 * self.plant.wing.span;
            x = match plant.integrate_step(&x, wind, delta.clamp(-limit, limit), &winch, SIZING_DT) {
                Ok(next) if next.kin.altitude() > 0.0 => next,
                _ => return 0.0,
            };
        }
        0.0
    }

    /// Smallest constant torque whose border retraction reaches the
    /// configured mean reel-in speed: fine geometric search upwards, then
    /// bisection. The speed is not monotonic in the torque; past a point
    /// the wing leaves the border regime, so coarse steps can skip the
    /// first crossing.
    fn size_retraction_torque(&self, wind: &WindField) -> Result<f64, ControlError> {
        let cfg = &self.config;
        let target = cfg.reel_in_speed;
        let t_max = cfg.torque_max;
        let mut lo = 0.0;
        let mut hi = self
            .equilibrium
            .map(|e| e.line_force * cfg.drum_radius)
            .unwrap_or(cfg.torque_min)
            .clamp(1.0, t_max);
        while self.retraction_mean_speed(hi, wind) < target {
            if hi >= t_max {
                return Err(ControlError::RetractionSizing {
                    speed: target,
                    max_torque: t_max,
                });
            }
            lo = hi;
            hi = (1.05 * hi).min(t_max);
        }
        for _ in 0..10 {
            let mid = 0.5 * (lo + hi);
            if self.retraction_mean_speed(mid, wind) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    pub fn initial_state(&self, phase: Phase, t0: f64) -> PhaseState {
        PhaseState {
            phase,
            law: self.config.retraction_law,
            target: TargetPoint::Plus,
            last_gamma: None,
            phase_entered: t0,
            last_target_switch: t0,
            completed_cycles: 0,
        }
    }

    pub fn traction_torque(&self) -> TorqueLaw {
        TorqueLaw::Optimal {
            c_f: self.c_f,
            drum_radius: self.config.drum_radius,
            t_min: self.config.torque_min,
            t_max: self.config.torque_max,
        }
    }

    /// Traction law without the lower torque bound, so the winch stops
    /// pulling in once the wing has left the border.
    pub fn recovery_torque(&self) -> TorqueLaw {
        TorqueLaw::Optimal {
            c_f: self.c_f,
            drum_radius: self.config.drum_radius,
            t_min: 0.0,
            t_max: self.config.torque_max,
        }
    }

    pub fn retraction_torque_law(&self) -> TorqueLaw {
        TorqueLaw::Constant {
            torque: self.retraction_torque,
            drum_radius: self.config.drum_radius,
        }
    }

    /// Winch law of the transition to the border: the retraction torque
    /// plus feedback towards the reel-in speed.
    pub fn transition_torque_law(&self) -> TorqueLaw {
        let cfg = &self.config;
        TorqueLaw::SpeedTracking {
            torque: self.retraction_torque,
            gain: cfg.transition_speed_gain,
            speed: -cfg.reel_in_speed,
            drum_radius: cfg.drum_radius,
            t_min: 0.0,
            t_max: cfg.torque_max,
        }
    }

    fn turn_feedforward(&self, state: &KinematicState, wind: &WindField) -> f64 {
        if !self.config.turn_rate_feedforward {
            return 0.0;
        }
        match turn_rate_model(state, wind, &self.plant, self.config.velocity_angle_epsilon) {
            Ok(m) if m.gain > 0.0 => -m.bias / m.gain,
            _ => 0.0,
        }
    }

    /// Steering input of the active retraction law.
    pub fn retraction_command(
        &self,
        law: RetractionLaw,
        state: &KinematicState,
        gamma_reg: Option<f64>,
    ) -> (f64, f64) {
        let cfg = &self.config;
        let s = cfg.side.sign();
        match law {
            RetractionLaw::RegularizedGamma => {
                let gamma_ref = retraction_gamma_reference(
                    state.theta,
                    cfg.theta_ref,
                    cfg.k_theta,
                    (cfg.gamma_min, cfg.gamma_max),
                );
                // mirrored for the right border
                let fb = gamma_reg
                    .map(|g| velocity_angle_control(s * g, gamma_ref, cfg.k_c_retraction))
                    .unwrap_or(0.0);
                (self.delta_eq + s * fb, s * gamma_ref)
            }
            RetractionLaw::ElevationSf => {
                let fb = elevation_state_feedback(state.theta - cfg.theta_ref, state.theta_dot, cfg.k1, cfg.k2);
                (self.delta_eq + s * fb, f64::NAN)
            }
        }
    }
}

fn at_border(cfg: &ControllerConfig, state: &KinematicState, wind: &WindField) -> bool {
    wrap_angle(state.phi - cfg.side.border_azimuth(wind.phi_w)).abs() < cfg.border_tolerance
}

fn enter(mut ps: PhaseState, phase: Phase, t: f64) -> PhaseState {
    debug_assert_eq!(ps.phase.next(), phase);
    ps.phase = phase;
    ps.phase_entered = t;
    ps
}

/// Checks phase transitions, then evaluates the control law of the (new)
/// phase.
pub fn supervisor_step(
    sup: &Supervisor,
    mut ps: PhaseState,
    t: f64,
    state: &KinematicState,
    wind: &WindField,
) -> (PhaseState, Command) {
    let cfg = &sup.config;
    let side = cfg.side.sign();
    let phi_rel = wrap_angle(state.phi - wind.phi_w);

    ps = match ps.phase {
        Phase::TractionFig8 if state.r >= cfg.r_max => enter(ps, Phase::TransitionToBorder, t),
        Phase::TransitionToBorder if at_border(cfg, state, wind) => enter(ps, Phase::Retraction, t),
        Phase::Retraction if state.r <= cfg.r_min => {
            ps.completed_cycles += 1;
            // head for the target point on the far side of the window
            ps.target = if side > 0.0 { TargetPoint::Minus } else { TargetPoint::Plus };
            enter(ps, Phase::TransitionToTraction, t)
        }
        Phase::TransitionToTraction if phi_rel.abs() < cfg.fig8.delta_phi => enter(ps, Phase::TractionFig8, t),
        _ => ps,
    };

    let gamma = velocity_angle(state, cfg.velocity_angle_epsilon).ok();
    if gamma.is_some() {
        ps.last_gamma = gamma;
    }
    let gamma_reg = regularized_velocity_angle(state, wind, cfg.regularization).ok();
    let gamma_held = ps.last_gamma.or(gamma_reg).unwrap_or(0.0);

    let (delta_ref, gamma_ref, torque) = match ps.phase {
        Phase::TractionFig8 => {
            if cfg.fig8.passed(ps.target, state, wind.phi_w) {
                ps.target = ps.target.other();
                ps.last_target_switch = t;
            }
            let target = cfg.fig8.position(ps.target, wind.phi_w);
            let cmd = traction_controller(
                state,
                gamma_held,
                target,
                cfg.k_c_traction,
                TurnSense::Upward,
                sup.turn_feedforward(state, wind),
            );
            (cmd.delta_ref, cmd.gamma_ref, sup.traction_torque())
        }
        Phase::TransitionToBorder => {
            let target = (cfg.side.border_azimuth(wind.phi_w), cfg.theta_ref);
            let cmd = traction_controller(
                state,
                gamma_reg.unwrap_or(gamma_held),
                target,
                cfg.k_c_traction,
                TurnSense::Shortest,
                sup.turn_feedforward(state, wind),
            );
            (cmd.delta_ref, cmd.gamma_ref, sup.transition_torque_law())
        }
        Phase::Retraction => {
            let (d, g) = sup.retraction_command(ps.law, state, gamma_reg);
            (d, g, sup.retraction_torque_law())
        }
        Phase::TransitionToTraction => {
            let target = cfg.fig8.position(ps.target, wind.phi_w);
            let cmd = traction_controller(
                state,
                gamma_reg.unwrap_or(gamma_held),
                target,
                cfg.k_c_retraction,
                TurnSense::Shortest,
                sup.turn_feedforward(state, wind),
            );
            (cmd.delta_ref, cmd.gamma_ref, sup.recovery_torque())
        }
    };
    let limit = 0.99 * sup.plant.wing.span;
    let command = Command {
        delta_ref: delta_ref.clamp(-limit, limit),
        torque,
        gamma,
        gamma_reg,
        gamma_ref,
    };
    (ps, command)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn setup() -> (Supervisor, WindField) {
        let wind = WindField::uniform(5.0, 0.0);
        let cfg = ControllerConfig {
            retraction_torque: Some(28.0),
            ..Default::default()
        };
        let sup = Supervisor::new(cfg, PlantParams::default(), ActuatorParams::default(), &wind).unwrap();
        (sup, wind)
    }

    #[test]
    fn feedforward_from_the_border_equilibrium() {
        let (sup, _) = setup();
        let eq = sup.equilibrium.expect("equilibrium at 2.5 m/s");
        assert_eq!(sup.delta_eq, eq.delta);
        assert!(sup.delta_eq < 0.0 && sup.delta_eq > -0.5, "{}", sup.delta_eq);
        assert!(eq.state.phi > FRAC_PI_2, "{}", eq.state.phi);
    }

    #[test]
    fn sized_torque_meets_the_reel_in_speed() {
        let wind = WindField::uniform(5.0, 0.0);
        let sup = Supervisor::new(
            ControllerConfig::default(),
            PlantParams::default(),
            ActuatorParams::default(),
            &wind,
        )
        .unwrap();
        let t = sup.retraction_torque;
        assert!(sup.retraction_mean_speed(t, &wind) >= 2.5);
        // bisection brackets the smallest such torque to well under 1 N m
        assert!(sup.retraction_mean_speed(t - 1.0, &wind) < 2.5, "{t}");
        let f = t / sup.config.drum_radius;
        assert!(f > 40.0 && f < 400.0, "{f}");
    }

    #[test]
    fn missing_equilibrium_drops_the_feedforward() {
        let wind = WindField::uniform(4.0, 0.0);
        let cfg = ControllerConfig {
            retraction_torque: Some(28.0),
            ..Default::default()
        };
        let sup = Supervisor::new(cfg, PlantParams::default(), ActuatorParams::default(), &wind).unwrap();
        assert!(sup.equilibrium.is_none());
        assert_eq!(sup.delta_eq, 0.0);
    }

    #[test]
    fn tether_length_limits_switch_phases() {
        let (sup, wind) = setup();
        let ps = sup.initial_state(Phase::TractionFig8, 0.0);
        let mut s = KinematicState::at_rest(0.1, 0.4, 149.0);
        s.phi_dot = 0.1;
        s.r_dot = 1.5;
        let (ps, _) = supervisor_step(&sup, ps, 1.0, &s, &wind);
        assert_eq!(ps.phase, Phase::TractionFig8);
        s.r = 150.01;
        let (ps, cmd) = supervisor_step(&sup, ps, 2.0, &s, &wind);
        assert_eq!(ps.phase, Phase::TransitionToBorder);
        assert!(matches!(cmd.torque, TorqueLaw::SpeedTracking { .. }));
        // reeling out faster than the reel-in target pulls harder
        assert!(cmd.torque.torque(1.5) > sup.retraction_torque);

        // not at the border yet
        let (ps, _) = supervisor_step(&sup, ps, 3.0, &s, &wind);
        assert_eq!(ps.phase, Phase::TransitionToBorder);
        let b = KinematicState::at_rest(1.52, 1.0, 120.0);
        let (ps, cmd) = supervisor_step(&sup, ps, 4.0, &b, &wind);
        assert_eq!(ps.phase, Phase::Retraction);
        assert!(matches!(cmd.torque, TorqueLaw::Constant { .. }));

        let mut b = b;
        b.r = 49.9;
        let (ps, _) = supervisor_step(&sup, ps, 40.0, &b, &wind);
        assert_eq!(ps.phase, Phase::TransitionToTraction);
        assert_eq!(ps.completed_cycles, 1);
        assert_eq!(ps.target, TargetPoint::Minus);

        let mut d = KinematicState::at_rest(0.3, 0.5, 51.0);
        d.phi_dot = -0.2;
        let (ps, _) = supervisor_step(&sup, ps, 50.0, &d, &wind);
        assert_eq!(ps.phase, Phase::TractionFig8);
        assert_eq!(ps.phase_entered, 50.0);
    }

    #[test]
    fn phase_graph_is_a_cycle() {
        for p in Phase::ALL {
            let mut q = p;
            for _ in 0..4 {
                q = q.next();
            }
            assert_eq!(p, q);
            assert_eq!(Phase::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn retraction_laws_push_toward_theta_ref() {
        let (sup, _) = setup();
        let low = KinematicState::at_rest(1.57, 0.8, 100.0);
        let high = KinematicState::at_rest(1.57, 1.2, 100.0);
        for law in [RetractionLaw::ElevationSf, RetractionLaw::RegularizedGamma] {
            let wind = WindField::uniform(5.0, 0.0);
            let gl = regularized_velocity_angle(&low, &wind, 0.05).ok();
            let gh = regularized_velocity_angle(&high, &wind, 0.05).ok();
            let (dl, _) = sup.retraction_command(law, &low, gl);
            let (dh, _) = sup.retraction_command(law, &high, gh);
            // positive delta pulls the wing down at the left border
            assert!(dh > dl, "{law:?}: {dl} {dh}");
        }
    }

    #[test]
    fn steering_reference_stays_below_span() {
        let (sup, wind) = setup();
        let mut ps = sup.initial_state(Phase::TractionFig8, 0.0);
        ps.phase = Phase::Retraction;
        let mut s = KinematicState::at_rest(1.57, 0.1, 100.0);
        s.theta_dot = -3.0;
        let (_, cmd) = supervisor_step(&sup, ps, 0.0, &s, &wind);
        assert!(cmd.delta_ref.abs() < sup.plant.wing.span);
    }
}
