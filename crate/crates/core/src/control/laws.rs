//! Static feedback laws used by the retraction and traction controllers.

use std::f64::consts::FRAC_PI_2;

use crate::geometry::wrap_angle;

/// Proportional velocity-angle controller.
pub fn velocity_angle_control(gamma_r: f64, gamma_r_ref: f64, k_c: f64) -> f64 {
    k_c * wrap_angle(gamma_r_ref - gamma_r)
}

/// Velocity-angle reference that steers the wing back to `theta_ref` at the
/// left window border, saturated to `bounds`.
pub fn retraction_gamma_reference(theta: f64, theta_ref: f64, k_theta: f64, bounds: (f64, f64)) -> f64 {
    (k_theta * (theta_ref - theta) + FRAC_PI_2).clamp(bounds.0, bounds.1)
}

/// Two-state feedback `-(k1 * e + k2 * e_dot)`.
pub fn elevation_state_feedback(e: f64, e_dot: f64, k1: f64, k2: f64) -> f64 {
    -(k1 * e + k2 * e_dot)
}
