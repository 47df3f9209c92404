//! Target-point guidance for crosswind figure-eight flight.

use serde::{Deserialize, Serialize};

use crate::control::laws::velocity_angle_control;
use crate::geometry::{wrap_angle, KinematicState};
use std::f64::consts::{FRAC_PI_2, PI};

/// Which of the two figure-eight target points is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPoint {
    /// `phi_w - delta_phi`.
    Minus,
    /// `phi_w + delta_phi`.
    Plus,
}

impl TargetPoint {
    pub fn other(self) -> Self {
        match self {
            TargetPoint::Minus => TargetPoint::Plus,
            TargetPoint::Plus => TargetPoint::Minus,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            TargetPoint::Minus => -1.0,
            TargetPoint::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig8Geometry {
    /// Azimuth offset of the target points from the wind direction [rad].
    pub delta_phi: f64,
    /// Elevation of the target points [rad].
    pub theta: f64,
}

impl Default for Fig8Geometry {
    fn default() -> Self {
        Self {
            delta_phi: 0.35,
            theta: 0.35,
        }
    }
}

impl Fig8Geometry {
    pub fn position(&self, target: TargetPoint, phi_w: f64) -> (f64, f64) {
        (phi_w + target.sign() * self.delta_phi, self.theta)
    }

    /// The wing has passed the active target in azimuth and should head for
    /// the other one. Switching only past the target gives the hysteresis.
    pub fn passed(&self, target: TargetPoint, state: &KinematicState, phi_w: f64) -> bool {
        let rel = wrap_angle(state.phi - phi_w);
        match target {
            TargetPoint::Plus => rel > self.delta_phi,
            TargetPoint::Minus => rel < -self.delta_phi,
        }
    }
}

/// Direction of the velocity angle that points from the wing towards
/// `(phi_t, theta_t)` on the tangent plane.
pub fn gamma_towards(state: &KinematicState, phi_t: f64, theta_t: f64) -> f64 {
    let east = state.theta.cos() * wrap_angle(phi_t - state.phi);
    let north = theta_t - state.theta;
    east.atan2(north)
}

/// Turning sense imposed on large heading errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnSense {
    /// Shortest way round.
    Shortest,
    /// Errors beyond a quarter turn are taken through local north, so turns
    /// at the sides of a figure eight go upward.
    Upward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractionCommand {
    pub gamma_ref: f64,
    /// Heading error actually fed to the proportional law.
    pub error: f64,
    pub delta_ref: f64,
}

/// Proportional heading control towards a target point plus an optional
/// feedforward (e.g. turn-rate compensation).
pub fn traction_controller(
    state: &KinematicState,
    gamma: f64,
    target: (f64, f64),
    k_c: f64,
    sense: TurnSense,
    feedforward: f64,
) -> TractionCommand {
    let gamma_ref = gamma_towards(state, target.0, target.1);
    let mut error = wrap_angle(gamma_ref - gamma);
    if sense == TurnSense::Upward {
        // heading east means the target is west: turn counterclockwise through north, and vice versa
        let heading_east = gamma > 0.0;
        let target_west = wrap_angle(target.0 - state.phi) < 0.0;
        let target_east = !target_west;
        if heading_east && target_west && error > FRAC_PI_2 {
            error -= 2.0 * PI;
        } else if !heading_east && target_east && error < -FRAC_PI_2 {
            error += 2.0 * PI;
        }
    }
    let delta_ref = if sense == TurnSense::Shortest {
        velocity_angle_control(gamma, gamma_ref, k_c)
    } else {
        k_c * error
    } + feedforward;
    TractionCommand {
        gamma_ref,
        error,
        delta_ref,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn heading_to_a_target_due_east() {
        let s = KinematicState::at_rest(-0.35, 0.35, 100.0);
        let g = gamma_towards(&s, 0.35, 0.35);
        assert_abs_diff_eq!(g, FRAC_PI_2, epsilon = 1e-12);
        let up = gamma_towards(&s, -0.35, 0.6);
        assert_abs_diff_eq!(up, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn switching_needs_passing_the_target() {
        let geo = Fig8Geometry::default();
        let s = KinematicState::at_rest(0.2, 0.3, 100.0);
        assert!(!geo.passed(TargetPoint::Plus, &s, 0.0));
        let s = KinematicState::at_rest(0.36, 0.3, 100.0);
        assert!(geo.passed(TargetPoint::Plus, &s, 0.0));
        assert!(!geo.passed(TargetPoint::Minus, &s, 0.0));
    }

    #[test]
    fn upward_turns_at_the_sides() {
        // heading east (left as seen from the ground unit) past P+, new target P-
        let s = KinematicState::at_rest(0.4, 0.3, 100.0);
        let gamma = 1.9;
        let cmd = traction_controller(&s, gamma, (-0.35, 0.35), 0.056, TurnSense::Upward, 0.0);
        // target is west and slightly up: gamma_ref near -pi/2
        assert!(cmd.gamma_ref < 0.0);
        assert!(cmd.error < 0.0, "{cmd:?}");
        assert!(cmd.delta_ref < 0.0);
        // mirrored
        let s = KinematicState::at_rest(-0.4, 0.3, 100.0);
        let cmd = traction_controller(&s, -1.9, (0.35, 0.35), 0.056, TurnSense::Upward, 0.0);
        assert!(cmd.error > 0.0);
        // small errors are left alone
        let cmd = traction_controller(&s, 0.5, (0.35, 0.35), 0.056, TurnSense::Upward, 0.01);
        assert_abs_diff_eq!(cmd.error, wrap_angle(cmd.gamma_ref - 0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(cmd.delta_ref, 0.056 * cmd.error + 0.01, epsilon = 1e-12);
    }
}
