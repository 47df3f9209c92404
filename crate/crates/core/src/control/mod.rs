//! Feedback laws, steering actuator, winch torque laws and the power-cycle
//! supervisor.

pub mod actuator;
pub mod laws;
pub mod lq;
pub mod reeling;
pub mod supervisor;
pub mod traction;

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::dynamics::BorderSide;
use crate::geometry::DEFAULT_VELOCITY_ANGLE_EPSILON;
use traction::Fig8Geometry;

/// Retraction controller in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetractionLaw {
    /// Proportional control of the regularized velocity angle towards an
    /// elevation-dependent reference.
    RegularizedGamma,
    /// State feedback on the elevation error and rate.
    ElevationSf,
}

impl RetractionLaw {
    pub fn name(self) -> &'static str {
        match self {
            RetractionLaw::RegularizedGamma => "regularized_gamma",
            RetractionLaw::ElevationSf => "elevation_sf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    /// Velocity-angle gain during traction [m/rad].
    pub k_c_traction: f64,
    /// Velocity-angle gain during retraction [m/rad].
    pub k_c_retraction: f64,
    pub k_theta: f64,
    /// Elevation state feedback gains [m/rad], [m s/rad].
    pub k1: f64,
    pub k2: f64,
    pub theta_ref: f64,
    /// Saturation of the retraction velocity-angle reference [rad].
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Regularization weight of the velocity angle [rad/s].
    pub regularization: f64,
    /// Bounds of the traction torque law [N m].
    pub torque_min: f64,
    pub torque_max: f64,
    pub drum_radius: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Azimuth tolerance for reaching the window border [rad].
    pub border_tolerance: f64,
    /// Speed feedback of the winch while flying to the border
    /// [N m s/m].
    pub transition_speed_gain: f64,
    pub fig8: Fig8Geometry,
    pub retraction_law: RetractionLaw,
    pub side: BorderSide,
    /// Reel-in speed the retraction torque, steering feedforward and
    /// transition winch are sized for [m/s].
    pub reel_in_speed: f64,
    /// Explicit retraction torque [N m]; sized by simulation when absent.
    pub retraction_torque: Option<f64>,
    /// Add the equilibrium steering input to the retraction laws.
    pub retraction_feedforward: bool,
    /// Cancel the turn-rate bias during traction.
    pub turn_rate_feedforward: bool,
    pub velocity_angle_epsilon: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            k_c_traction: 0.2,
            k_c_retraction: 0.28,
            k_theta: -2.5,
            k1: -1.4,
            k2: -4.6,
            theta_ref: 1.0,
            gamma_min: FRAC_PI_2 - 0.6,
            gamma_max: FRAC_PI_2 + 0.6,
            regularization: 0.05,
            torque_min: 20.0,
            torque_max: 400.0,
            drum_radius: 0.2,
            r_min: 50.0,
            r_max: 150.0,
            border_tolerance: 0.1,
            transition_speed_gain: 40.0,
            fig8: Fig8Geometry::default(),
            retraction_law: RetractionLaw::ElevationSf,
            side: BorderSide::Left,
            reel_in_speed: 2.5,
            retraction_torque: None,
            retraction_feedforward: true,
            turn_rate_feedforward: true,
            velocity_angle_epsilon: DEFAULT_VELOCITY_ANGLE_EPSILON,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            self.k_c_traction,
            self.k_c_retraction,
            self.k_theta,
            self.k1,
            self.k2,
            self.theta_ref,
            self.gamma_min,
            self.gamma_max,
            self.regularization,
            self.torque_min,
            self.torque_max,
            self.drum_radius,
            self.r_min,
            self.r_max,
            self.border_tolerance,
            self.transition_speed_gain,
            self.reel_in_speed,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err("controller parameters must be finite".into());
        }
        if !(self.k_theta < 0.0) {
            return Err("controller.k_theta < 0".into());
        }
        if !(self.gamma_min < FRAC_PI_2 && FRAC_PI_2 < self.gamma_max) {
            return Err("controller.gamma_min < pi/2 < controller.gamma_max".into());
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return Err("0 < controller.r_min < controller.r_max".into());
        }
        if !(self.regularization >= 0.0) {
            return Err("controller.regularization >= 0".into());
        }
        if !(self.drum_radius > 0.0) {
            return Err("controller.drum_radius > 0".into());
        }
        if !(0.0 <= self.torque_min && self.torque_min <= self.torque_max) {
            return Err("0 <= controller.torque_min <= controller.torque_max".into());
        }
        if !(self.theta_ref > 0.0 && self.theta_ref < FRAC_PI_2) {
            return Err("0 < controller.theta_ref < pi/2".into());
        }
        if !(self.border_tolerance > 0.0) {
            return Err("controller.border_tolerance > 0".into());
        }
        if !(self.transition_speed_gain >= 0.0) {
            return Err("controller.transition_speed_gain >= 0".into());
        }
        if !(self.fig8.delta_phi > 0.0 && self.fig8.delta_phi < FRAC_PI_2) {
            return Err("0 < controller.fig8.delta_phi < pi/2".into());
        }
        if !(self.fig8.theta > 0.0 && self.fig8.theta < FRAC_PI_2) {
            return Err("0 < controller.fig8.theta < pi/2".into());
        }
        if !(self.reel_in_speed >= 0.0) {
            return Err("controller.reel_in_speed >= 0".into());
        }
        if let Some(t) = self.retraction_torque {
            if !(t >= 0.0 && t.is_finite()) {
                return Err("controller.retraction_torque >= 0".into());
            }
        }
        if !(self.velocity_angle_epsilon > 0.0) {
            return Err("controller.velocity_angle_epsilon > 0".into());
        }
        Ok(())
    }
}
