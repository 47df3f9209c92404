//! Point-mass tethered-wing dynamics in spherical coordinates.
//!
//! The wing is a point whose mass includes a share of the tether mass. Tether
//! drag is folded into the equivalent efficiency `e_eq`. The aerodynamic force
//! is lift plus drag, with the wing heading aligned to the apparent wind and
//! the lift vector rolled by the steering input.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::actuator::{ActuatorParams, ActuatorState};
use crate::control::reeling::TorqueLaw;
use crate::geometry::{
    apparent_wind, elevation_in_domain, wrap_angle, GeometryError, KinematicState, Local, Vec3,
    WindField,
};
use crate::ode::rk4_step;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WingParams {
    /// Effective area [m^2].
    pub area: f64,
    /// Span [m].
    pub span: f64,
    /// Wing mass [kg].
    pub mass: f64,
    /// Lift coefficient.
    pub c_l: f64,
    /// Equivalent efficiency `C_L / C_D,eq` of wing and lines together.
    pub e_eq: f64,
}

impl Default for WingParams {
    fn default() -> Self {
        Self {
            area: 9.0,
            span: 2.7,
            mass: 2.45,
            c_l: 0.8,
            e_eq: 3.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TetherParams {
    /// Diameter [m].
    pub diameter: f64,
    /// Material density [kg/m^3].
    pub density: f64,
    /// Fraction of the tether mass that moves with the wing.
    pub mass_fraction: f64,
}

impl Default for TetherParams {
    fn default() -> Self {
        Self {
            diameter: 0.003,
            density: 970.0,
            mass_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvParams {
    /// Air density [kg/m^3].
    pub rho: f64,
    /// Gravitational acceleration [m/s^2].
    pub g: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self { rho: 1.2, g: 9.81 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantParams {
    pub wing: WingParams,
    pub tether: TetherParams,
    pub env: EnvParams,
    /// Apparent wind speed below which the aerodynamic model is flagged as
    /// stalled [m/s].
    pub stall_speed: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            wing: WingParams::default(),
            tether: TetherParams::default(),
            env: EnvParams::default(),
            stall_speed: 1.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), String> {
        let w = &self.wing;
        let checks = [
            (w.area > 0.0, "wing.area > 0"),
            (w.span > 0.0, "wing.span > 0"),
            (w.mass > 0.0, "wing.mass > 0"),
            (w.c_l > 0.0, "wing.c_l > 0"),
            (w.e_eq > 0.0, "wing.e_eq > 0"),
            (self.tether.diameter > 0.0, "tether.diameter > 0"),
            (self.tether.density > 0.0, "tether.density > 0"),
            (
                (0.0..=1.0).contains(&self.tether.mass_fraction),
                "tether.mass_fraction in [0, 1]",
            ),
            (self.env.rho > 0.0, "env.rho > 0"),
            (self.env.g > 0.0, "env.g > 0"),
            (self.stall_speed >= 0.0, "stall_speed >= 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, what)) => Err(format!("violated invariant: {what}")),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("steering input {delta} m exceeds wing span {span} m")]
    RollOutOfRange { delta: f64, span: f64 },
    #[error("elevation {theta} rad outside the model domain")]
    ElevationOutOfDomain { theta: f64 },
    #[error("tether length must be positive, got {r}")]
    NonPositiveTether { r: f64 },
    #[error("line force must be non-negative, got {0}")]
    NegativeLineForce(f64),
    #[error("state became non-finite")]
    NumericBlowup,
    #[error("equilibrium search did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no equilibrium found (residual {residual:e})")]
    NoEquilibrium { residual: f64 },
}

/// Wing mass plus the co-moving share of the tether mass.
pub fn effective_mass(wing: &WingParams, tether: &TetherParams, r: f64) -> f64 {
    let section = PI * tether.diameter * tether.diameter / 4.0;
    wing.mass + tether.mass_fraction * tether.density * section * r
}

/// Equivalent drag coefficient of wing and lines, `C_L / E_eq`.
pub fn equivalent_drag_coefficient(wing: &WingParams) -> f64 {
    wing.c_l / wing.e_eq
}

/// Drag-coefficient increment of a straight tether lumped at the wing,
/// `c_d_tether * d_t * r / (4 A)`. Informational; the simulator takes `e_eq`
/// as given.
pub fn tether_drag_increment(wing: &WingParams, tether: &TetherParams, r: f64, c_d_tether: f64) -> f64 {
    c_d_tether * tether.diameter * r / (4.0 * wing.area)
}

/// Angle between the apparent wind and the tangent plane when the lift and
/// drag components along the heading balance.
pub fn steady_state_delta_alpha(e_eq: f64) -> f64 {
    (1.0 / e_eq).atan()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroAngles {
    /// Roll angle from the steering input.
    pub psi: f64,
    pub eta: f64,
    /// Heading of the wing.
    pub xi: f64,
    /// Angle between apparent wind and tangent plane.
    pub delta_alpha: f64,
}

pub fn roll_angle(delta: f64, span: f64) -> Result<f64, DynamicsError> {
    if !(delta.abs() < span) {
        return Err(DynamicsError::RollOutOfRange { delta, span });
    }
    Ok((delta / span).asin())
}

fn angles_from_apparent(wa: &Vec3<Local>, psi: f64) -> AeroAngles {
    let tangent = wa.north().hypot(wa.east());
    let delta_alpha = (-wa.down()).atan2(tangent);
    let xi = (-wa.east()).atan2(-wa.north());
    let eta = (delta_alpha.tan() * psi.tan()).clamp(-1.0, 1.0).asin();
    AeroAngles {
        psi,
        eta,
        xi,
        delta_alpha,
    }
}

pub fn aero_angles(
    state: &KinematicState,
    wind: &WindField,
    delta: f64,
    wing: &WingParams,
) -> Result<AeroAngles, DynamicsError> {
    let psi = roll_angle(delta, wing.span)?;
    Ok(angles_from_apparent(&apparent_wind(state, wind), psi))
}

/// Unit lift and drag directions in the local frame.
pub fn lift_drag_directions(a: &AeroAngles) -> (Vec3<Local>, Vec3<Local>) {
    let (sx, cx) = a.xi.sin_cos();
    let (sa, ca) = a.delta_alpha.sin_cos();
    let (sp, cp) = a.psi.sin_cos();
    let (se, ce) = a.eta.sin_cos();
    let rot = |v: [f64; 3]| Vec3::new(cx * v[0] - sx * v[1], sx * v[0] + cx * v[1], v[2]);
    let e_l = rot([cp * ce * sa, cp * se * sa + sp * ca, -cp * ce * ca]);
    let e_w = rot([-ca, 0.0, -sa]);
    (e_l, e_w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroForce {
    pub force: Vec3<Local>,
    pub angles: AeroAngles,
    pub apparent_speed: f64,
    /// Apparent wind below the configured stall speed.
    pub stalled: bool,
}

pub fn aero_force(
    state: &KinematicState,
    wind: &WindField,
    delta: f64,
    params: &PlantParams,
) -> Result<AeroForce, DynamicsError> {
    let wing = &params.wing;
    let psi = roll_angle(delta, wing.span)?;
    let wa = apparent_wind(state, wind);
    let speed = wa.norm();
    let angles = angles_from_apparent(&wa, psi);
    let stalled = speed < params.stall_speed;
    if speed == 0.0 {
        return Ok(AeroForce {
            force: Vec3::zeros(),
            angles,
            apparent_speed: 0.0,
            stalled,
        });
    }
    let q = 0.5 * params.env.rho * wing.area * speed * speed;
    let (e_l, e_w) = lift_drag_directions(&angles);
    let force = e_l * (q * wing.c_l) + e_w * (q * equivalent_drag_coefficient(wing));
    Ok(AeroForce {
        force,
        angles,
        apparent_speed: speed,
        stalled,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceBreakdown {
    pub gravity: Vec3<Local>,
    pub aero: Vec3<Local>,
    /// Line force magnitude, acting along local down.
    pub line_force: f64,
    pub total: Vec3<Local>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    /// `(phi_dot, theta_dot, r_dot, phi_ddot, theta_ddot, r_ddot)`.
    pub rates: [f64; 6],
    pub forces: ForceBreakdown,
    pub mass: f64,
    pub aero: AeroForce,
}

fn check_state(state: &KinematicState) -> Result<(), DynamicsError> {
    if !state.is_finite() {
        return Err(DynamicsError::NumericBlowup);
    }
    if !(state.r > 0.0) {
        return Err(DynamicsError::NonPositiveTether { r: state.r });
    }
    if !elevation_in_domain(state.theta) {
        return Err(DynamicsError::ElevationOutOfDomain { theta: state.theta });
    }
    Ok(())
}

fn gravity_local(state: &KinematicState, mass: f64, g: f64) -> Vec3<Local> {
    let (st, ct) = state.theta.sin_cos();
    Vec3::new(-mass * g * ct, 0.0, mass * g * st)
}

/// Rates of the six kinematic states under steering input `delta` and line
/// force `line_force`.
pub fn state_derivative(
    state: &KinematicState,
    wind: &WindField,
    delta: f64,
    line_force: f64,
    params: &PlantParams,
) -> Result<StateDerivative, DynamicsError> {
    check_state(state)?;
    if !(line_force >= 0.0) {
        return Err(DynamicsError::NegativeLineForce(line_force));
    }
    let mass = effective_mass(&params.wing, &params.tether, state.r);
    let aero = aero_force(state, wind, delta, params)?;
    let gravity = gravity_local(state, mass, params.env.g);
    let total = gravity + aero.force + Vec3::new(0.0, 0.0, line_force);

    let KinematicState {
        theta,
        r,
        phi_dot,
        theta_dot,
        r_dot,
        ..
    } = *state;
    let (st, ct) = theta.sin_cos();
    let theta_ddot =
        total.north() / (r * mass) - st * ct * phi_dot * phi_dot - 2.0 / r * theta_dot * r_dot;
    let phi_ddot = total.east() / (r * mass * ct) + 2.0 * st / ct * theta_dot * phi_dot
        - 2.0 / r * phi_dot * r_dot;
    let r_ddot = -total.down() / mass + r * theta_dot * theta_dot + r * ct * ct * phi_dot * phi_dot;

    Ok(StateDerivative {
        rates: [phi_dot, theta_dot, r_dot, phi_ddot, theta_ddot, r_ddot],
        forces: ForceBreakdown {
            gravity,
            aero: aero.force,
            line_force,
            total,
        },
        mass,
        aero,
    })
}

/// Line force that keeps the reeling speed constant (`r_ddot = 0`). Negative
/// values mean the line would have to push.
pub fn holding_line_force(
    state: &KinematicState,
    wind: &WindField,
    delta: f64,
    params: &PlantParams,
) -> Result<f64, DynamicsError> {
    check_state(state)?;
    let mass = effective_mass(&params.wing, &params.tether, state.r);
    let aero = aero_force(state, wind, delta, params)?;
    let gravity = gravity_local(state, mass, params.env.g);
    let ct = state.theta.cos();
    let centripetal = mass
        * state.r
        * (state.theta_dot * state.theta_dot + ct * ct * state.phi_dot * state.phi_dot);
    Ok(centripetal - (gravity + aero.force).down())
}

/// How the ground unit sets the line force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Winch {
    /// Prescribed line force [N].
    Force(f64),
    /// Motor torque from a reeling law, divided by the drum radius.
    Torque(TorqueLaw),
    /// Line force solved so the reeling speed stays constant.
    HoldSpeed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineForceSample {
    pub line_force: f64,
    /// The balance asked for a negative force; the line went slack.
    pub slack: bool,
}

impl Winch {
    pub fn line_force(
        &self,
        state: &KinematicState,
        wind: &WindField,
        delta: f64,
        params: &PlantParams,
    ) -> Result<LineForceSample, DynamicsError> {
        let f = match self {
            Winch::Force(f) => *f,
            Winch::Torque(law) => law.line_force(state.r_dot),
            Winch::HoldSpeed => holding_line_force(state, wind, delta, params)?,
        };
        Ok(LineForceSample {
            line_force: f.max(0.0),
            slack: f < 0.0,
        })
    }
}

/// Wing plus steering actuator: everything needed to advance the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant {
    pub params: PlantParams,
    pub actuator: ActuatorParams,
}

/// Combined plant state: kinematics and steering actuator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub kin: KinematicState,
    pub act: ActuatorState,
}

impl PlantState {
    pub fn to_array(self) -> [f64; 8] {
        let k = self.kin.to_array();
        [
            k[0],
            k[1],
            k[2],
            k[3],
            k[4],
            k[5],
            self.act.delta_m,
            self.act.delta_m_dot,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            kin: KinematicState::from_array([a[0], a[1], a[2], a[3], a[4], a[5]]),
            act: ActuatorState {
                delta_m: a[6],
                delta_m_dot: a[7],
            },
        }
    }
}

impl Plant {
    pub fn new(params: PlantParams, actuator: ActuatorParams) -> Self {
        Self { params, actuator }
    }

    /// Time derivative of the combined state. Inputs are held over the call.
    pub fn derivative(
        &self,
        x: &PlantState,
        wind: &WindField,
        delta_ref: f64,
        winch: &Winch,
    ) -> Result<[f64; 8], DynamicsError> {
        let delta = self.actuator.output(&x.act);
        let line = winch.line_force(&x.kin, wind, delta, &self.params)?;
        let d = state_derivative(&x.kin, wind, delta, line.line_force, &self.params)?;
        let act = self.actuator.derivative(&x.act, delta_ref);
        let r = d.rates;
        Ok([r[0], r[1], r[2], r[3], r[4], r[5], act[0], act[1]])
    }

    /// One RK4 step of the eight-state plant with zero-order-hold inputs.
    /// Actuator saturation is applied after the step.
    pub fn integrate_step(
        &self,
        x: &PlantState,
        wind: &WindField,
        delta_ref: f64,
        winch: &Winch,
        dt: f64,
    ) -> Result<PlantState, DynamicsError> {
        assert!(dt > 0.0, "time step must be positive");
        let next = rk4_step(&x.to_array(), dt, |y| {
            self.derivative(&PlantState::from_array(*y), wind, delta_ref, winch)
        })?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NumericBlowup);
        }
        let mut out = PlantState::from_array(next);
        out.act = self.actuator.saturate(out.act);
        check_state(&out.kin)?;
        Ok(out)
    }
}

/// Side of the wind window relative to the wind direction, as seen from the
/// ground unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorderSide {
    /// `phi - phi_w = +pi/2`.
    Left,
    /// `phi - phi_w = -pi/2`.
    Right,
}

impl BorderSide {
    pub fn sign(self) -> f64 {
        match self {
            BorderSide::Left => 1.0,
            BorderSide::Right => -1.0,
        }
    }

    pub fn border_azimuth(self, phi_w: f64) -> f64 {
        phi_w + self.sign() * FRAC_PI_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub state: KinematicState,
    pub delta: f64,
    /// Line force that holds the reeling speed constant.
    pub line_force: f64,
    /// Max-norm of `(theta_ddot, phi_ddot)` at the solution.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    pub initial_theta: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Simulated time for the constant-input fallback [s].
    pub fallback_horizon: f64,
    pub fallback_dt: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            initial_theta: 1.0,
            max_iterations: 100,
            tolerance: 1e-8,
            fallback_horizon: 120.0,
            fallback_dt: 1e-3,
        }
    }
}

#[allow(clippy::too_many_arguments)]
/// Angular accelerations of a static wing with frozen `r`, `r_dot`.
fn static_residual(
    phi: f64,
    theta: f64,
    delta: f64,
    r: f64,
    r_dot: f64,
    wind: &WindField,
    params: &PlantParams,
) -> Result<[f64; 2], DynamicsError> {
    let s = KinematicState {
        r_dot,
        ..KinematicState::at_rest(phi, theta, r)
    };
    let f = holding_line_force(&s, wind, delta, params)?;
    let d = state_derivative(&s, wind, delta, f.max(0.0), params)?;
    Ok([d.rates[4], d.rates[3]])
}

fn max_abs(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Damped Newton on a 2x2 system with a central-difference Jacobian.
fn newton2(
    mut x: [f64; 2],
    opts: &EquilibriumOptions,
    steps: [f64; 2],
    mut f: impl FnMut([f64; 2]) -> Result<[f64; 2], DynamicsError>,
) -> Result<([f64; 2], f64), DynamicsError> {
    let mut fx = f(x)?;
    for _ in 0..opts.max_iterations {
        let res = max_abs(fx);
        if res < opts.tolerance {
            return Ok((x, res));
        }
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fp = f(xp)?;
            let fm = f(xm)?;
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 || !det.is_finite() {
            return Err(DynamicsError::NoEquilibrium { residual: res });
        }
        let dx = [
            (jac[1][1] * fx[0] - jac[0][1] * fx[1]) / det,
            (-jac[1][0] * fx[0] + jac[0][0] * fx[1]) / det,
        ];
        // limit the step, then backtrack on the residual
        let scale = (steps[0] / dx[0].abs()).min(steps[1] / dx[1].abs()).min(1.0);
        let mut lambda = scale;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [x[0] - lambda * dx[0], x[1] - lambda * dx[1]];
            if let Ok(ft) = f(trial) {
                if max_abs(ft) < res || max_abs(ft) < opts.tolerance {
                    x = trial;
                    fx = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(DynamicsError::NoEquilibrium { residual: res });
        }
    }
    let res = max_abs(fx);
    if res < opts.tolerance {
        Ok((x, res))
    } else {
        Err(DynamicsError::NoConvergence {
            iterations: opts.max_iterations,
            residual: res,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn equilibrium_at(
    phi: f64,
    theta: f64,
    delta: f64,
    r: f64,
    r_dot: f64,
    wind: &WindField,
    params: &PlantParams,
    residual: f64,
) -> Result<Equilibrium, DynamicsError> {
    let state = KinematicState {
        r_dot,
        ..KinematicState::at_rest(phi, theta, r)
    };
    let line_force = holding_line_force(&state, wind, delta, params)?;
    // below the ground unit or with a pushing line the point is not admissible
    if !(theta > 0.0) || line_force < 0.0 {
        return Err(DynamicsError::NoEquilibrium { residual });
    }
    Ok(Equilibrium {
        state,
        delta,
        line_force,
        residual,
    })
}

/// Static wing position at the window border for a constant steering input,
/// tether length and reeling speed. Newton first; forward simulation with
/// constant input if Newton fails.
pub fn find_equilibrium(
    delta: f64,
    wind: &WindField,
    params: &PlantParams,
    r: f64,
    r_dot: f64,
    side: BorderSide,
    opts: &EquilibriumOptions,
) -> Result<Equilibrium, DynamicsError> {
    if !(wind.w0 > 0.0) {
        return Err(DynamicsError::NoEquilibrium {
            residual: f64::INFINITY,
        });
    }
    let start = [side.border_azimuth(wind.phi_w), opts.initial_theta];
    let newton = newton2(start, opts, [0.2, 0.2], |x| {
        static_residual(x[0], x[1], delta, r, r_dot, wind, params)
    });
    if let Ok((x, res)) = newton {
        return equilibrium_at(x[0], x[1], delta, r, r_dot, wind, params, res);
    }
    if let Some(eq) = bracket_by_elevation(delta, wind, params, r, r_dot, side, opts) {
        return Ok(eq);
    }
    equilibrium_by_simulation(delta, wind, params, r, r_dot, side, opts)
}

/// Walks the elevation range with the inverse query and refines the first
/// sign change of `delta(theta) - delta`.
fn bracket_by_elevation(
    delta: f64,
    wind: &WindField,
    params: &PlantParams,
    r: f64,
    r_dot: f64,
    side: BorderSide,
    opts: &EquilibriumOptions,
) -> Option<Equilibrium> {
    let n = 56;
    let mut prev: Option<(f64, f64, f64)> = None;
    for i in 1..n {
        let theta = 1.45 * i as f64 / n as f64;
        let Ok(eq) = find_equilibrium_input(theta, wind, params, r, r_dot, side, opts) else {
            prev = None;
            continue;
        };
        let g = eq.delta - delta;
        if let Some((t0, g0, phi0)) = prev {
            if g0 * g <= 0.0 {
                let w = if g0 == g { 0.5 } else { g0 / (g0 - g) };
                let start = [phi0 + w * (eq.state.phi - phi0), t0 + w * (theta - t0)];
                let (x, res) = newton2(start, opts, [0.05, 0.05], |x| {
                    static_residual(x[0], x[1], delta, r, r_dot, wind, params)
                })
                .ok()?;
                return equilibrium_at(x[0], x[1], delta, r, r_dot, wind, params, res).ok();
            }
        }
        prev = Some((theta, g, eq.state.phi));
    }
    None
}

/// Inverse query: steering input and azimuth that hold the wing static at
/// elevation `theta`.
pub fn find_equilibrium_input(
    theta: f64,
    wind: &WindField,
    params: &PlantParams,
    r: f64,
    r_dot: f64,
    side: BorderSide,
    opts: &EquilibriumOptions,
) -> Result<Equilibrium, DynamicsError> {
    if !(wind.w0 > 0.0) {
        return Err(DynamicsError::NoEquilibrium {
            residual: f64::INFINITY,
        });
    }
    let border = side.border_azimuth(wind.phi_w);
    let mut last = Err(DynamicsError::NoEquilibrium {
        residual: f64::INFINITY,
    });
    // the equilibrium moves upwind with reel-in speed; try a few azimuths
    for offset in [0.0, 0.5, -0.5, 1.0] {
        let start = [border + side.sign() * offset, 0.0];
        match newton2(start, opts, [0.2, 0.1], |x| {
            static_residual(x[0], theta, x[1], r, r_dot, wind, params)
        }) {
            Ok((x, res)) => return equilibrium_at(x[0], theta, x[1], r, r_dot, wind, params, res),
            Err(e) => last = Err(e),
        }
    }
    last
}

/// Constant-input simulation of the wing with frozen `r` and `r_dot`, started
/// at the window border, until the angular rates die out.
pub fn equilibrium_by_simulation(
    delta: f64,
    wind: &WindField,
    params: &PlantParams,
    r: f64,
    r_dot: f64,
    side: BorderSide,
    opts: &EquilibriumOptions,
) -> Result<Equilibrium, DynamicsError> {
    let mut x = [side.border_azimuth(wind.phi_w), opts.initial_theta, 0.0, 0.0];
    let rhs = |y: &[f64; 4]| -> Result<[f64; 4], DynamicsError> {
        let s = KinematicState {
            phi: y[0],
            theta: y[1],
            r,
            phi_dot: y[2],
            theta_dot: y[3],
            r_dot,
        };
        let f = holding_line_force(&s, wind, delta, params)?;
        let d = state_derivative(&s, wind, delta, f.max(0.0), params)?;
        Ok([y[2], y[3], d.rates[3], d.rates[4]])
    };
    let steps = (opts.fallback_horizon / opts.fallback_dt).ceil() as usize;
    for _ in 0..steps {
        x = rk4_step(&x, opts.fallback_dt, rhs)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NumericBlowup);
        }
    }
    let res = max_abs(static_residual(x[0], x[1], delta, r, r_dot, wind, params)?);
    let rates = x[2].abs().max(x[3].abs());
    if rates > 1e-6 || res > 1e-5 {
        return Err(DynamicsError::NoConvergence {
            iterations: steps,
            residual: res.max(rates),
        });
    }
    // polish: the simulated point is inside Newton's basin
    let polished = newton2([x[0], x[1]], opts, [0.05, 0.05], |y| {
        static_residual(y[0], y[1], delta, r, r_dot, wind, params)
    });
    let (p, res) = polished.unwrap_or(([x[0], x[1]], res));
    equilibrium_at(wrap_angle(p[0]), p[1], delta, r, r_dot, wind, params, res)
}
