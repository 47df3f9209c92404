//! Closed-loop steering actuator: a second-order lag from reference to line
//! length difference.

use serde::{Deserialize, Serialize};

use crate::ode::rk4_step;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorParams {
    /// Natural frequency [rad/s].
    pub omega_cl: f64,
    /// Damping ratio.
    pub zeta_cl: f64,
    /// Gain from actuator position to steering input.
    pub k_delta: f64,
    /// Position limit [m].
    pub position_limit: f64,
    /// Rate limit [m/s].
    pub rate_limit: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self {
            omega_cl: 78.0,
            zeta_cl: 0.7,
            k_delta: 1.0,
            position_limit: 1.0,
            rate_limit: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorState {
    pub delta_m: f64,
    pub delta_m_dot: f64,
}

impl ActuatorParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.omega_cl > 0.0) {
            return Err("actuator.omega_cl > 0".into());
        }
        if !(self.zeta_cl > 0.0) {
            return Err("actuator.zeta_cl > 0".into());
        }
        if !(self.k_delta != 0.0 && self.k_delta.is_finite()) {
            return Err("actuator.k_delta nonzero".into());
        }
        if !(self.position_limit > 0.0 && self.rate_limit > 0.0) {
            return Err("actuator limits > 0".into());
        }
        Ok(())
    }

    /// Steering input produced by the actuator.
    pub fn output(&self, s: &ActuatorState) -> f64 {
        self.k_delta * s.delta_m
    }

    pub fn derivative(&self, s: &ActuatorState, delta_ref: f64) -> [f64; 2] {
        let w2 = self.omega_cl * self.omega_cl;
        [
            s.delta_m_dot,
            w2 * delta_ref - 2.0 * self.zeta_cl * self.omega_cl * s.delta_m_dot - w2 * s.delta_m,
        ]
    }

    pub fn saturate(&self, s: ActuatorState) -> ActuatorState {
        let delta_m = s.delta_m.clamp(-self.position_limit, self.position_limit);
        let mut delta_m_dot = s.delta_m_dot.clamp(-self.rate_limit, self.rate_limit);
        // at a stop the actuator cannot keep moving outward
        if delta_m.abs() >= self.position_limit && delta_m_dot * delta_m > 0.0 {
            delta_m_dot = 0.0;
        }
        ActuatorState {
            delta_m,
            delta_m_dot,
        }
    }
}

/// Advances the actuator by `dt` with the reference held constant.
pub fn actuator_step(
    params: &ActuatorParams,
    state: &ActuatorState,
    delta_ref: f64,
    dt: f64,
) -> ActuatorState {
    assert!(dt > 0.0, "time step must be positive");
    let x = [state.delta_m, state.delta_m_dot];
    let next = rk4_step(&x, dt, |y| {
        Ok::<_, std::convert::Infallible>(params.derivative(
            &ActuatorState {
                delta_m: y[0],
                delta_m_dot: y[1],
            },
            delta_ref,
        ))
    })
    .unwrap_or_else(|e| match e {});
    params.saturate(ActuatorState {
        delta_m: next[0],
        delta_m_dot: next[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_response(params: &ActuatorParams, step: f64, t_end: f64, dt: f64) -> Vec<f64> {
        let mut s = ActuatorState::default();
        let n = (t_end / dt).round() as usize;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            s = actuator_step(params, &s, step, dt);
            out.push(s.delta_m);
        }
        out
    }

    #[test]
    fn unit_dc_gain() {
        let p = ActuatorParams::default();
        let y = step_response(&p, 0.2, 1.0, 1e-3);
        assert!((y.last().unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn overshoot_matches_second_order_formula() {
        let p = ActuatorParams::default();
        let step = 0.1;
        let y = step_response(&p, step, 0.5, 1e-4);
        let peak = y.iter().cloned().fold(f64::MIN, f64::max);
        let z = p.zeta_cl;
        let expected = (-std::f64::consts::PI * z / (1.0 - z * z).sqrt()).exp();
        assert!((expected - 0.046).abs() < 1e-3);
        let measured = (peak - step) / step;
        assert!((measured - expected).abs() < 1e-3, "{measured} vs {expected}");
    }

    #[test]
    fn settling_time_near_four_over_zeta_omega() {
        let p = ActuatorParams::default();
        let dt = 1e-4;
        let step = 0.1;
        let y = step_response(&p, step, 0.5, dt);
        let last_out = y
            .iter()
            .rposition(|v| (v - step).abs() > 0.02 * step)
            .unwrap();
        let ts = (last_out + 1) as f64 * dt;
        let approx = 4.0 / (p.zeta_cl * p.omega_cl);
        assert!((approx - 0.0733).abs() < 1e-3);
        assert!((ts - approx).abs() < 0.1 * approx, "{ts}");
    }

    #[test]
    fn limits_are_enforced() {
        let p = ActuatorParams {
            position_limit: 0.3,
            rate_limit: 2.0,
            ..Default::default()
        };
        let mut s = ActuatorState::default();
        for _ in 0..2000 {
            s = actuator_step(&p, &s, 5.0, 1e-3);
            assert!(s.delta_m.abs() <= 0.3);
            assert!(s.delta_m_dot.abs() <= 2.0);
        }
        assert_eq!(s.delta_m, 0.3);
        assert_eq!(p.output(&s), 0.3);
    }
}
