//! Control-oriented reduced models: turn rate, elevation dynamics at the
//! window border and the crosswind traction force.

use thiserror::Error;

use crate::dynamics::{effective_mass, EnvParams, PlantParams, WingParams};
use crate::geometry::{apparent_wind, velocity_angle, GeometryError, KinematicState, WindField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReducedModelError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("apparent wind speed {0} m/s too small")]
    NoApparentWind(f64),
}

/// Turn-rate model `gamma_dot = K delta + T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnRateModel {
    pub gain: f64,
    pub bias: f64,
}

impl TurnRateModel {
    pub fn predict(&self, delta: f64) -> f64 {
        self.gain * delta + self.bias
    }
}

fn efficiency_factor(e_eq: f64) -> f64 {
    1.0 + 1.0 / (e_eq * e_eq)
}

/// `K` for a given apparent wind speed and mass.
pub fn turn_rate_gain_at(speed: f64, mass: f64, wing: &WingParams, env: &EnvParams) -> f64 {
    env.rho * wing.c_l * wing.area * speed / (2.0 * mass * wing.span) * efficiency_factor(wing.e_eq).powi(2)
}

/// `K` at the current state, using the effective mass at the current tether
/// length.
pub fn turn_rate_gain(state: &KinematicState, wind: &WindField, params: &PlantParams) -> f64 {
    let speed = apparent_wind(state, wind).norm();
    let m = effective_mass(&params.wing, &params.tether, state.r);
    turn_rate_gain_at(speed, m, &params.wing, &params.env)
}

/// Gravity and apparent-force term `T`.
pub fn turn_rate_bias(
    state: &KinematicState,
    wind: &WindField,
    env: &EnvParams,
    epsilon: f64,
) -> Result<f64, ReducedModelError> {
    let speed = apparent_wind(state, wind).norm();
    if !(speed > epsilon) {
        return Err(ReducedModelError::NoApparentWind(speed));
    }
    let gamma = velocity_angle(state, epsilon)?;
    Ok(env.g * state.theta.cos() * gamma.sin() / speed + state.theta.sin() * state.phi_dot)
}

pub fn turn_rate_model(
    state: &KinematicState,
    wind: &WindField,
    params: &PlantParams,
    epsilon: f64,
) -> Result<TurnRateModel, ReducedModelError> {
    Ok(TurnRateModel {
        gain: turn_rate_gain(state, wind, params),
        bias: turn_rate_bias(state, wind, &params.env, epsilon)?,
    })
}

/// Steering gain of the elevation dynamics at the window border, with the
/// azimuth measured from the wind direction.
pub fn elevation_gain(state: &KinematicState, wind: &WindField, params: &PlantParams) -> f64 {
    let wing = &params.wing;
    let m = effective_mass(wing, &params.tether, state.r);
    let speed = apparent_wind(state, wind).norm();
    let w0 = wind.speed_at(state);
    params.env.rho * wing.area * wing.c_l / (2.0 * state.r * m * wing.span)
        * efficiency_factor(wing.e_eq)
        * w0
        * (state.phi - wind.phi_w).sin()
        * speed
}

/// `theta_ddot = -C delta - (g cos(theta) + 2 theta_dot r_dot) / r`.
pub fn elevation_accel(state: &KinematicState, delta: f64, c_gain: f64, g: f64) -> f64 {
    -c_gain * delta - (g * state.theta.cos() + 2.0 * state.theta_dot * state.r_dot) / state.r
}

/// Elevation dynamics obtained from the turn-rate model at constant apparent
/// wind; no reeling term.
pub fn simplified_theta_accel(
    state: &KinematicState,
    delta: f64,
    wind: &WindField,
    params: &PlantParams,
) -> f64 {
    let wing = &params.wing;
    let m = effective_mass(wing, &params.tether, state.r);
    let speed = apparent_wind(state, wind).norm();
    -params.env.rho * wing.area * wing.c_l / (2.0 * state.r * m * wing.span)
        * efficiency_factor(wing.e_eq)
        * speed
        * speed
        * delta
        - params.env.g * state.theta.cos() / state.r
}

/// Coefficient of the crosswind traction-force model [N s^2/m^2].
pub fn traction_coefficient(wing: &WingParams, env: &EnvParams) -> f64 {
    0.5 * env.rho * wing.area * wing.c_l * wing.e_eq * wing.e_eq * efficiency_factor(wing.e_eq).powf(1.5)
}

/// Line force predicted by the crosswind model for wind `w_r` along the
/// tether and reeling speed `r_dot`.
pub fn traction_force_model(w_r: f64, r_dot: f64, wing: &WingParams, env: &EnvParams) -> f64 {
    traction_coefficient(wing, env) * (w_r - r_dot).powi(2)
}

/// Power delivered to the winch, positive when reeling out under tension.
pub fn mechanical_power(line_force: f64, r_dot: f64) -> f64 {
    line_force * r_dot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{find_equilibrium_input, state_derivative, BorderSide, EquilibriumOptions};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn params() -> PlantParams {
        PlantParams::default()
    }

    #[test]
    fn turn_rate_gain_reference_value() {
        let p = params();
        // 1.2 * 0.8 * 9 * 10 / (2 * 2.45 * 2.7) * (1 + 1/13.69)^2
        let k = turn_rate_gain_at(10.0, 2.45, &p.wing, &p.env);
        let oracle = 86.4 / 13.23 * (14.69_f64 / 13.69).powi(2);
        assert_abs_diff_eq!(k, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(k, 7.52, epsilon = 5e-3);
        assert_eq!(turn_rate_gain_at(0.0, 2.45, &p.wing, &p.env), 0.0);
        let mut w2 = p.wing;
        w2.area *= 2.0;
        assert_abs_diff_eq!(turn_rate_gain_at(10.0, 2.45, &w2, &p.env), 2.0 * k, epsilon = 1e-12);
    }

    #[test]
    fn turn_rate_bias_cases() {
        let env = EnvParams::default();
        let calm = WindField::uniform(0.0, 0.0);
        // moving straight up at theta 0.5, no azimuth rate
        let s = KinematicState {
            theta_dot: 0.1,
            ..KinematicState::at_rest(0.0, 0.5, 100.0)
        };
        assert_abs_diff_eq!(turn_rate_bias(&s, &calm, &env, 1e-9).unwrap(), 0.0, epsilon = 1e-15);
        // theta = 0, moving east at 9.81 m/s in still air
        let s = KinematicState {
            phi_dot: 9.81 / 100.0,
            ..KinematicState::at_rest(0.0, 0.0, 100.0)
        };
        assert_abs_diff_eq!(turn_rate_bias(&s, &calm, &env, 1e-9).unwrap(), 1.0, epsilon = 1e-12);
        let still = KinematicState::at_rest(0.0, 0.5, 100.0);
        assert!(turn_rate_bias(&still, &calm, &env, 1e-9).is_err());
    }

    #[test]
    fn elevation_gain_values() {
        let p = params();
        let wind = WindField::uniform(5.0, 0.0);
        let downwind = KinematicState::at_rest(0.0, 0.5, 100.0);
        assert_abs_diff_eq!(elevation_gain(&downwind, &wind, &p), 0.0, epsilon = 1e-15);
        let border = KinematicState::at_rest(FRAC_PI_2, 0.5, 100.0);
        let m = effective_mass(&p.wing, &p.tether, 100.0);
        // |W_a| = 5 for a static wing at the border
        let oracle = 1.2 * 9.0 * 0.8 / (2.0 * 100.0 * m * 2.7) * (14.69 / 13.69) * 5.0 * 5.0;
        assert_abs_diff_eq!(elevation_gain(&border, &wind, &p), oracle, epsilon = 1e-12);
        let right = KinematicState::at_rest(-FRAC_PI_2, 0.5, 100.0);
        assert!(elevation_gain(&right, &wind, &p) < 0.0);
    }

    #[test]
    fn elevation_gain_scales_inverse_with_length() {
        let mut p = params();
        p.tether.mass_fraction = 0.0;
        let wind = WindField::uniform(5.0, 0.0);
        let a = elevation_gain(&KinematicState::at_rest(FRAC_PI_2, 0.8, 50.0), &wind, &p);
        let b = elevation_gain(&KinematicState::at_rest(FRAC_PI_2, 0.8, 100.0), &wind, &p);
        assert_abs_diff_eq!(a, 2.0 * b, epsilon = 1e-12);
    }

    #[test]
    fn elevation_accel_cases() {
        let s = KinematicState::at_rest(0.0, FRAC_PI_2 - 1e-12, 100.0);
        assert_abs_diff_eq!(elevation_accel(&s, 0.0, 0.5, 9.81), 0.0, epsilon = 1e-12);
        let s = KinematicState::at_rest(0.0, 0.0, 100.0);
        assert_abs_diff_eq!(elevation_accel(&s, 0.0, 0.5, 9.81), -0.0981, epsilon = 1e-12);
    }

    #[test]
    fn simplified_model_relations() {
        let p = params();
        let wind = WindField::uniform(5.0, 0.0);
        let s = KinematicState {
            theta_dot: 0.03,
            r_dot: -2.0,
            ..KinematicState::at_rest(FRAC_PI_2, 0.9, 100.0)
        };
        let c = elevation_gain(&s, &wind, &p);
        let diff = simplified_theta_accel(&s, 0.0, &wind, &p) - elevation_accel(&s, 0.0, c, p.env.g);
        assert_abs_diff_eq!(diff, 2.0 * s.theta_dot * s.r_dot / s.r, epsilon = 1e-15);

        // static border, no reeling: apparent wind equals the wind, gains agree
        let s = KinematicState::at_rest(FRAC_PI_2, 0.9, 100.0);
        let c = elevation_gain(&s, &wind, &p);
        let a1 = elevation_accel(&s, 0.1, c, p.env.g);
        let a2 = simplified_theta_accel(&s, 0.1, &wind, &p);
        assert!((a1 - a2).abs() <= 0.1 * a1.abs());
    }

    #[test]
    fn model_matches_full_dynamics_at_border_equilibrium() {
        // reel-in speed at which the static point sits on the window border
        let p = params();
        let wind = WindField::uniform(5.0, 0.0);
        let eq = find_equilibrium_input(
            1.0,
            &wind,
            &p,
            100.0,
            -1.25,
            BorderSide::Left,
            &EquilibriumOptions::default(),
        )
        .unwrap();
        assert!((eq.state.phi - FRAC_PI_2).abs() < 0.1);
        let c = elevation_gain(&eq.state, &wind, &p);
        let model = elevation_accel(&eq.state, eq.delta, c, p.env.g);
        assert!(model.abs() < 5e-3, "{model}");
        let full = state_derivative(&eq.state, &wind, eq.delta, eq.line_force, &p).unwrap();
        assert!(full.rates[4].abs() < 1e-8);
    }

    #[test]
    fn model_offset_grows_away_from_the_border() {
        // without reeling the static point lies well inside the window
        let p = params();
        let wind = WindField::uniform(5.0, 0.0);
        let opts = EquilibriumOptions::default();
        let eq = find_equilibrium_input(1.0, &wind, &p, 100.0, 0.0, BorderSide::Left, &opts).unwrap();
        assert!(eq.state.phi < 1.0);
        let c = elevation_gain(&eq.state, &wind, &p);
        let model = elevation_accel(&eq.state, eq.delta, c, p.env.g);
        assert!(model.abs() > 5e-3 && model.abs() < 0.05, "{model}");
    }

    #[test]
    fn traction_model_values() {
        let p = params();
        let cf = traction_coefficient(&p.wing, &p.env);
        let oracle = 0.5 * 1.2 * 9.0 * 0.8 * 13.69 * (14.69_f64 / 13.69).powf(1.5);
        assert_abs_diff_eq!(cf, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(cf, 65.7, epsilon = 0.05);
        let f = traction_force_model(5.0, 5.0 / 3.0, &p.wing, &p.env);
        assert_abs_diff_eq!(f, cf * (10.0_f64 / 3.0).powi(2), epsilon = 1e-9);
        assert!((f - 730.0).abs() < 1.0);
        assert_eq!(traction_force_model(5.0, 5.0, &p.wing, &p.env), 0.0);
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let v = -2.0 + 0.1 * i as f64;
            let fv = traction_force_model(5.0, v, &p.wing, &p.env);
            assert!(fv < last);
            last = fv;
        }
    }

    #[test]
    fn power_sign() {
        let p = mechanical_power(730.0, 5.0 / 3.0);
        assert_abs_diff_eq!(p, 1216.67, epsilon = 0.01);
        assert_eq!(mechanical_power(730.0, 0.0), 0.0);
        assert!(mechanical_power(300.0, -2.5) < 0.0);
    }
}
