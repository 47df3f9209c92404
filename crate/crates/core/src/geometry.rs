//! Frames, kinematics and angle definitions for a wing flying on a sphere
//! centred at the ground unit.
//!
//! Two frames are used throughout:
//!
//! - [`Ground`]: inertial, `x` along the ground-unit symmetry plane, `z` up.
//! - [`Local`]: north / east / down at the wing. North is tangent to the
//!   sphere and points towards its zenith, down points at the ground unit.
//!
//! Vectors carry their frame as a type parameter, so mixing frames does not
//! compile.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inertial frame centred at the ground unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ground;

/// Non-inertial north/east/down frame at the wing position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Local;

pub trait Frame: Copy + fmt::Debug {
    const NAME: &'static str;
}

impl Frame for Ground {
    const NAME: &'static str = "G";
}

impl Frame for Local {
    const NAME: &'static str = "L";
}

/// A 3-vector expressed in frame `F`.
#[derive(Clone, Copy, PartialEq)]
pub struct Vec3<F: Frame> {
    inner: Vector3<f64>,
    frame: PhantomData<F>,
}

impl<F: Frame> fmt::Debug for Vec3<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}, {}, {})",
            F::NAME,
            self.inner.x,
            self.inner.y,
            self.inner.z
        )
    }
}

impl<F: Frame> Vec3<F> {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self::from_raw(Vector3::new(x, y, z))
    }

    pub fn zeros() -> Self {
        Self::from_raw(Vector3::zeros())
    }

    pub(crate) fn from_raw(inner: Vector3<f64>) -> Self {
        Self {
            inner,
            frame: PhantomData,
        }
    }

    pub fn raw(&self) -> &Vector3<f64> {
        &self.inner
    }

    pub fn x(&self) -> f64 {
        self.inner.x
    }

    pub fn y(&self) -> f64 {
        self.inner.y
    }

    pub fn z(&self) -> f64 {
        self.inner.z
    }

    pub fn norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.inner.dot(&other.inner)
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::from_raw(self.inner.cross(&other.inner))
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|c| c.is_finite())
    }
}

impl Vec3<Local> {
    /// Component along local north.
    pub fn north(&self) -> f64 {
        self.inner.x
    }

    /// Component along local east.
    pub fn east(&self) -> f64 {
        self.inner.y
    }

    /// Component along local down (towards the ground unit).
    pub fn down(&self) -> f64 {
        self.inner.z
    }
}

impl<F: Frame> Add for Vec3<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_raw(self.inner + rhs.inner)
    }
}

impl<F: Frame> Sub for Vec3<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_raw(self.inner - rhs.inner)
    }
}

impl<F: Frame> Neg for Vec3<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_raw(-self.inner)
    }
}

impl<F: Frame> Mul<f64> for Vec3<F> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::from_raw(self.inner * rhs)
    }
}

/// Rotation taking ground-frame components to local-frame components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    matrix: Matrix3<f64>,
}

impl Rotation {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: Vec3<Ground>) -> Vec3<Local> {
        Vec3::from_raw(self.matrix * v.inner)
    }

    pub fn apply_inverse(&self, v: Vec3<Local>) -> Vec3<Ground> {
        Vec3::from_raw(self.matrix.transpose() * v.inner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("velocity angle undefined: tangent-plane speed {speed:e} below {epsilon:e}")]
    UndefinedVelocityAngle { speed: f64, epsilon: f64 },
    #[error("wing orientation undefined (0/0 in arctangent)")]
    UndefinedOrientation,
    #[error("regularized velocity angle undefined (0/0 in arctangent)")]
    UndefinedRegularizedAngle,
    #[error("regularization gain must be positive, got {0}")]
    NonPositiveRegularization(f64),
}

/// Spherical position and rates of the wing: the six model states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicState {
    /// Azimuth [rad].
    pub phi: f64,
    /// Elevation [rad].
    pub theta: f64,
    /// Tether length [m].
    pub r: f64,
    #[serde(default)]
    pub phi_dot: f64,
    #[serde(default)]
    pub theta_dot: f64,
    #[serde(default)]
    pub r_dot: f64,
}

impl KinematicState {
    pub fn at_rest(phi: f64, theta: f64, r: f64) -> Self {
        Self {
            phi,
            theta,
            r,
            phi_dot: 0.0,
            theta_dot: 0.0,
            r_dot: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.phi,
            self.theta,
            self.r,
            self.phi_dot,
            self.theta_dot,
            self.r_dot,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            phi: a[0],
            theta: a[1],
            r: a[2],
            phi_dot: a[3],
            theta_dot: a[4],
            r_dot: a[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Speed of the wing in the tangent plane [m/s].
    pub fn tangent_speed(&self) -> f64 {
        self.r * self.theta_dot.hypot(self.theta.cos() * self.phi_dot)
    }

    /// Height above ground [m].
    pub fn altitude(&self) -> f64 {
        self.r * self.theta.sin()
    }
}

/// Altitude dependence of the nominal wind speed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindShear {
    #[default]
    Uniform,
    /// `w0 * (h / reference_height)^exponent`, floored at `h = 1 m`.
    PowerLaw {
        reference_height: f64,
        exponent: f64,
    },
}

impl WindShear {
    pub fn factor(&self, altitude: f64) -> f64 {
        match *self {
            WindShear::Uniform => 1.0,
            WindShear::PowerLaw {
                reference_height,
                exponent,
            } => (altitude.max(1.0) / reference_height).powf(exponent),
        }
    }
}

/// Horizontal wind field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindField {
    /// Nominal wind speed [m/s].
    pub w0: f64,
    /// Direction the wind blows towards, as an azimuth [rad].
    #[serde(default)]
    pub phi_w: f64,
    #[serde(default)]
    pub shear: WindShear,
}

impl WindField {
    pub fn uniform(w0: f64, phi_w: f64) -> Self {
        Self {
            w0,
            phi_w,
            shear: WindShear::Uniform,
        }
    }

    /// Wind speed seen at the wing.
    pub fn speed_at(&self, state: &KinematicState) -> f64 {
        self.w0 * self.shear.factor(state.altitude())
    }

    /// Wind component along the tether, pointing away from the ground unit.
    pub fn along_tether(&self, state: &KinematicState) -> f64 {
        self.speed_at(state) * state.theta.cos() * (state.phi - self.phi_w).cos()
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Wing position in the ground frame.
pub fn wing_position(state: &KinematicState) -> Vec3<Ground> {
    let (sp, cp) = state.phi.sin_cos();
    let (st, ct) = state.theta.sin_cos();
    Vec3::new(state.r * cp * ct, state.r * sp * ct, state.r * st)
}

/// Rotation from the ground frame to the local north/east/down frame.
pub fn rotation_lg(phi: f64, theta: f64) -> Rotation {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    #[rustfmt::skip]
    let matrix = Matrix3::new(
        -cp * st, -sp * st,  ct,
        -sp,       cp,       0.0,
        -cp * ct, -sp * ct, -st,
    );
    Rotation { matrix }
}

/// Wing velocity relative to the ground unit, in local components.
pub fn local_velocity(state: &KinematicState) -> Vec3<Local> {
    Vec3::new(
        state.r * state.theta_dot,
        state.r * state.theta.cos() * state.phi_dot,
        -state.r_dot,
    )
}

/// Incoming wind in local components, scaled by the shear profile at the
/// wing's altitude.
pub fn wind_local(state: &KinematicState, wind: &WindField) -> Vec3<Local> {
    let w = wind.speed_at(state);
    let (sd, cd) = (state.phi - wind.phi_w).sin_cos();
    let (st, ct) = state.theta.sin_cos();
    Vec3::new(-w * cd * st, -w * sd, -w * cd * ct)
}

pub fn apparent_wind(state: &KinematicState, wind: &WindField) -> Vec3<Local> {
    wind_local(state, wind) - local_velocity(state)
}

/// Default tangent-plane angular speed below which the velocity angle is
/// treated as undefined [rad/s].
pub const DEFAULT_VELOCITY_ANGLE_EPSILON: f64 = 1e-9;

/// Direction of motion in the tangent plane, measured from local north
/// towards local east.
pub fn velocity_angle(state: &KinematicState, epsilon: f64) -> Result<f64, GeometryError> {
    let east = state.theta.cos() * state.phi_dot;
    let north = state.theta_dot;
    let speed = east.hypot(north);
    if speed < epsilon {
        return Err(GeometryError::UndefinedVelocityAngle { speed, epsilon });
    }
    Ok(east.atan2(north))
}

/// Orientation of a wing aligned with the wind projected on the tangent plane.
pub fn wing_orientation_beta(state: &KinematicState, wind: &WindField) -> Result<f64, GeometryError> {
    let d = state.phi - wind.phi_w;
    let num = d.sin();
    let den = state.theta.sin() * d.cos();
    if num == 0.0 && den == 0.0 {
        return Err(GeometryError::UndefinedOrientation);
    }
    Ok(num.atan2(den))
}

/// Velocity angle blended with the wind-aligned orientation so that it stays
/// defined when the wing is (nearly) static.
pub fn regularized_velocity_angle(
    state: &KinematicState,
    wind: &WindField,
    c: f64,
) -> Result<f64, GeometryError> {
    if c < 0.0 || c.is_nan() {
        return Err(GeometryError::NonPositiveRegularization(c));
    }
    let d = state.phi - wind.phi_w;
    let num = state.theta.cos() * state.phi_dot + c * d.sin();
    let den = state.theta_dot + c * state.theta.sin() * d.cos();
    if num == 0.0 && den == 0.0 {
        return Err(GeometryError::UndefinedRegularizedAngle);
    }
    Ok(num.atan2(den))
}

/// Elevation margin kept away from the zenith singularity of the equations
/// of motion.
pub const ZENITH_GUARD: f64 = 1e-3;

pub(crate) fn elevation_in_domain(theta: f64) -> bool {
    theta.abs() < FRAC_PI_2 - ZENITH_GUARD
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn position_axis_cases() {
        let p = wing_position(&KinematicState::at_rest(0.0, 0.0, 100.0));
        assert_abs_diff_eq!(p.x(), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.z(), 0.0, epsilon = 1e-12);

        let p = wing_position(&KinematicState::at_rest(0.0, FRAC_PI_2, 50.0));
        assert_abs_diff_eq!(p.x(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.z(), 50.0, epsilon = 1e-12);
    }

    #[test]
    fn position_general_case() {
        let (phi, theta, r) = (PI / 3.0, 0.4_f64, 120.0);
        // 0.5 * cos(0.4), sqrt(3)/2 * cos(0.4), sin(0.4)
        let expected = [
            r * 0.5 * 0.921_060_994_002_885_1,
            r * 0.866_025_403_784_438_6 * 0.921_060_994_002_885_1,
            r * 0.389_418_342_308_650_5,
        ];
        let p = wing_position(&KinematicState::at_rest(phi, theta, r));
        assert_abs_diff_eq!(p.x(), expected[0], epsilon = 1e-9);
        assert_abs_diff_eq!(p.y(), expected[1], epsilon = 1e-9);
        assert_abs_diff_eq!(p.z(), expected[2], epsilon = 1e-9);
        assert_abs_diff_eq!(p.norm(), 120.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_at_origin() {
        let a = rotation_lg(0.0, 0.0);
        let expected = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        assert_abs_diff_eq!(*a.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn down_axis_points_at_ground_unit() {
        let s = KinematicState::at_rest(0.3, 0.7, 80.0);
        let lp = rotation_lg(s.phi, s.theta).apply(wing_position(&s));
        assert_abs_diff_eq!(lp.north(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lp.east(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lp.down(), -80.0, epsilon = 1e-12);
    }

    #[test]
    fn local_velocity_substitution() {
        let s = KinematicState {
            theta_dot: 0.1,
            r_dot: 2.0,
            ..KinematicState::at_rest(0.0, 0.0, 100.0)
        };
        let v = local_velocity(&s);
        assert_abs_diff_eq!(v.north(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.east(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.down(), -2.0, epsilon = 1e-12);
        assert_eq!(
            local_velocity(&KinematicState::at_rest(0.4, 0.5, 30.0)),
            Vec3::zeros()
        );
    }

    #[test]
    fn local_velocity_matches_finite_difference() {
        // smooth trajectory: phi, theta, r as analytic functions of time
        let traj = |t: f64| KinematicState {
            phi: 0.2 + 0.3 * (0.5 * t).sin(),
            theta: 0.6 + 0.1 * (0.3 * t).cos(),
            r: 100.0 + 2.0 * t,
            phi_dot: 0.15 * (0.5 * t).cos(),
            theta_dot: -0.03 * (0.3 * t).sin(),
            r_dot: 2.0,
        };
        for &t in &[0.0, 1.3, 4.7] {
            let h = 1e-5;
            let dp = (wing_position(&traj(t + h)) - wing_position(&traj(t - h))) * (0.5 / h);
            let s = traj(t);
            let fd = rotation_lg(s.phi, s.theta).apply(dp);
            let v = local_velocity(&s);
            assert!((fd - v).norm() < 1e-6, "t={t}: {fd:?} vs {v:?}");
        }
    }

    #[test]
    fn wind_cases() {
        let wind = WindField::uniform(5.0, 0.2);
        let w = wind_local(&KinematicState::at_rest(0.2, 0.0, 100.0), &wind);
        assert_abs_diff_eq!(w.raw(), &Vector3::new(0.0, 0.0, -5.0), epsilon = 1e-12);
        let w = wind_local(&KinematicState::at_rest(0.2 + FRAC_PI_2, 0.0, 100.0), &wind);
        assert_abs_diff_eq!(w.raw(), &Vector3::new(0.0, -5.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn apparent_wind_cases() {
        let wind = WindField::uniform(5.0, 0.0);
        let s = KinematicState::at_rest(0.4, 0.8, 90.0);
        assert_eq!(apparent_wind(&s, &wind), wind_local(&s, &wind));

        // reel-in under zero wind: the wing moves towards the ground unit
        // (+down), so the apparent wind blows outward along -down
        let calm = WindField::uniform(0.0, 0.0);
        let s = KinematicState {
            r_dot: -2.0,
            ..KinematicState::at_rest(0.4, 0.8, 90.0)
        };
        let wa = apparent_wind(&s, &calm);
        assert_abs_diff_eq!(wa.raw(), &Vector3::new(0.0, 0.0, -2.0), epsilon = 1e-12);

        // crosswind: 20 m/s wing speed, 5 m/s wind
        let s = KinematicState {
            phi_dot: 20.0 / (100.0 * 0.3_f64.cos()),
            ..KinematicState::at_rest(0.1, 0.3, 100.0)
        };
        let n = apparent_wind(&s, &wind).norm();
        assert!((15.0..=25.0).contains(&n), "{n}");
    }

    #[test]
    fn velocity_angle_quadrants() {
        let mut s = KinematicState::at_rest(0.0, 0.0, 100.0);
        s.theta_dot = 1.0;
        assert_abs_diff_eq!(velocity_angle(&s, 1e-9).unwrap(), 0.0);
        s.theta_dot = 0.0;
        s.phi_dot = 1.0;
        assert_abs_diff_eq!(velocity_angle(&s, 1e-9).unwrap(), FRAC_PI_2);
        s.phi_dot = 0.0;
        s.theta_dot = -1.0;
        assert_abs_diff_eq!(velocity_angle(&s, 1e-9).unwrap(), PI);
        s.theta_dot = 0.0;
        assert!(matches!(
            velocity_angle(&s, 1e-9),
            Err(GeometryError::UndefinedVelocityAngle { .. })
        ));
    }

    #[test]
    fn beta_cases() {
        let wind = WindField::uniform(5.0, 0.3);
        let b = |dphi: f64| {
            wing_orientation_beta(&KinematicState::at_rest(0.3 + dphi, 0.5, 100.0), &wind).unwrap()
        };
        assert_abs_diff_eq!(b(0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b(FRAC_PI_2), FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(b(-FRAC_PI_2), -FRAC_PI_2, epsilon = 1e-12);
        assert_eq!(
            wing_orientation_beta(&KinematicState::at_rest(0.3, 0.0, 100.0), &wind),
            Err(GeometryError::UndefinedOrientation)
        );
    }

    #[test]
    fn regularized_angle_static_border() {
        let wind = WindField::uniform(5.0, 0.0);
        let s = KinematicState::at_rest(FRAC_PI_2, 0.9, 100.0);
        let g = regularized_velocity_angle(&s, &wind, 0.05).unwrap();
        assert_abs_diff_eq!(g, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn regularized_angle_zero_gain_is_velocity_angle() {
        let wind = WindField::uniform(5.0, 0.0);
        let s = KinematicState {
            phi_dot: 0.12,
            theta_dot: -0.05,
            ..KinematicState::at_rest(0.2, 0.4, 100.0)
        };
        assert_eq!(
            regularized_velocity_angle(&s, &wind, 0.0).unwrap(),
            velocity_angle(&s, 1e-9).unwrap()
        );
    }

    #[test]
    fn regularized_angle_crosswind_limit() {
        // tangent-plane speed 100x c*r: direction differs by at most ~1/100 rad
        let wind = WindField::uniform(5.0, 0.0);
        let c = 0.05;
        let r = 100.0;
        for k in 0..16 {
            let dir = -PI + k as f64 * PI / 8.0;
            let speed = 100.0 * c; // angular, times r gives 100 c r
            let s = KinematicState {
                theta_dot: speed * dir.cos(),
                phi_dot: speed * dir.sin() / 0.4_f64.cos(),
                ..KinematicState::at_rest(0.25, 0.4, r)
            };
            let g = velocity_angle(&s, 1e-9).unwrap();
            let gr = regularized_velocity_angle(&s, &wind, c).unwrap();
            assert!(wrap_angle(g - gr).abs() < 0.02, "dir {dir}: {g} vs {gr}");
        }
    }

    #[test]
    fn wrap_examples() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-2.0 * PI - 0.1), -0.1, epsilon = 1e-12);
    }

    #[test]
    fn power_law_shear() {
        let shear = WindShear::PowerLaw {
            reference_height: 10.0,
            exponent: 0.2,
        };
        assert_abs_diff_eq!(shear.factor(10.0), 1.0);
        assert!(shear.factor(100.0) > 1.5);
    }

    proptest! {
        #[test]
        fn rotation_is_proper_orthonormal(phi in -PI..PI, theta in -1.5..1.5f64) {
            let a = *rotation_lg(phi, theta).matrix();
            let err = (a * a.transpose() - Matrix3::identity()).abs().max();
            prop_assert!(err < 1e-12);
            prop_assert!((a.determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rotated_position_is_straight_down(phi in -PI..PI, theta in -1.5..1.5f64, r in 1.0..300.0f64) {
            let s = KinematicState::at_rest(phi, theta, r);
            let lp = rotation_lg(phi, theta).apply(wing_position(&s));
            prop_assert!(lp.north().abs() < 1e-9 && lp.east().abs() < 1e-9);
            prop_assert!((lp.down() + r).abs() < 1e-9);
        }

        #[test]
        fn wind_norm_preserved(phi in -PI..PI, theta in -1.5..1.5f64, w0 in 0.0..20.0f64, phi_w in -PI..PI) {
            let s = KinematicState::at_rest(phi, theta, 100.0);
            let w = wind_local(&s, &WindField::uniform(w0, phi_w));
            prop_assert!((w.norm() - w0).abs() < 1e-12);
        }

        #[test]
        fn angles_bounded(phi in -PI..PI, theta in 0.05..1.5f64, pd in -1.0..1.0f64, td in -1.0..1.0f64) {
            let wind = WindField::uniform(5.0, 0.1);
            let s = KinematicState { phi_dot: pd, theta_dot: td, ..KinematicState::at_rest(phi, theta, 100.0) };
            for a in [
                velocity_angle(&s, 1e-12).ok(),
                wing_orientation_beta(&s, &wind).ok(),
                regularized_velocity_angle(&s, &wind, 0.05).ok(),
            ].into_iter().flatten() {
                prop_assert!((-PI..=PI).contains(&a));
            }
        }

        #[test]
        fn regularized_matches_velocity_angle_at_high_speed(phi in -1.4..1.4f64, theta in 0.1..1.3f64, dir in -PI..PI) {
            // tangent-plane angular speed >= 1000 c
            let wind = WindField::uniform(5.0, 0.0);
            let c = 0.05;
            let w = 1000.0 * c;
            let s = KinematicState {
                theta_dot: w * dir.cos(),
                phi_dot: w * dir.sin() / theta.cos(),
                ..KinematicState::at_rest(phi, theta, 100.0)
            };
            let g = velocity_angle(&s, 1e-9).unwrap();
            let gr = regularized_velocity_angle(&s, &wind, c).unwrap();
            prop_assert!(wrap_angle(g - gr).abs() < 1e-3);
        }

        #[test]
        fn static_regularized_equals_beta(phi in -PI..PI, theta in 0.05..1.5f64, c in 0.001..1.0f64) {
            let wind = WindField::uniform(5.0, 0.2);
            let s = KinematicState::at_rest(phi, theta, 100.0);
            let b = wing_orientation_beta(&s, &wind).unwrap();
            let gr = regularized_velocity_angle(&s, &wind, c).unwrap();
            prop_assert!(wrap_angle(b - gr).abs() < 1e-12);
        }
    }
}
