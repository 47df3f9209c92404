//! Winch torque laws.

use serde::{Deserialize, Serialize};

/// Torque reference of the ground-unit motor. The line force is the torque
/// divided by the drum radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorqueLaw {
    /// `4 c_f r_d r_dot^2`, clamped to `[t_min, t_max]`. Its steady state is
    /// a third of the wind speed along the tether.
    Optimal {
        c_f: f64,
        drum_radius: f64,
        t_min: f64,
        t_max: f64,
    },
    Constant { torque: f64, drum_radius: f64 },
    /// `torque + gain (r_dot - speed)`, clamped to `[t_min, t_max]`.
    SpeedTracking {
        torque: f64,
        gain: f64,
        speed: f64,
        drum_radius: f64,
        t_min: f64,
        t_max: f64,
    },
}

impl TorqueLaw {
    pub fn torque(&self, r_dot: f64) -> f64 {
        match *self {
            TorqueLaw::Optimal {
                c_f,
                drum_radius,
                t_min,
                t_max,
            } => {
                let v = r_dot.max(0.0);
                (4.0 * c_f * drum_radius * v * v).clamp(t_min, t_max)
            }
            TorqueLaw::Constant { torque, .. } => torque,
            TorqueLaw::SpeedTracking {
                torque,
                gain,
                speed,
                t_min,
                t_max,
                ..
            } => (torque + gain * (r_dot - speed)).clamp(t_min, t_max),
        }
    }

    pub fn drum_radius(&self) -> f64 {
        match *self {
            TorqueLaw::Optimal { drum_radius, .. }
            | TorqueLaw::Constant { drum_radius, .. }
            | TorqueLaw::SpeedTracking { drum_radius, .. } => drum_radius,
        }
    }

    pub fn line_force(&self, r_dot: f64) -> f64 {
        self.torque(r_dot) / self.drum_radius()
    }

    /// True if the clamp is active at `r_dot`.
    pub fn saturated(&self, r_dot: f64) -> bool {
        match *self {
            TorqueLaw::Optimal {
                c_f,
                drum_radius,
                t_min,
                t_max,
            } => {
                let v = r_dot.max(0.0);
                let raw = 4.0 * c_f * drum_radius * v * v;
                raw < t_min || raw > t_max
            }
            TorqueLaw::Constant { .. } => false,
            TorqueLaw::SpeedTracking {
                torque,
                gain,
                speed,
                t_min,
                t_max,
                ..
            } => {
                let raw = torque + gain * (r_dot - speed);
                raw < t_min || raw > t_max
            }
        }
    }
}
