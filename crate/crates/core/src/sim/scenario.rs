//! Scenario files: TOML with every table optional and unknown keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::actuator::ActuatorParams;
use crate::control::supervisor::Phase;
use crate::control::ControllerConfig;
use crate::dynamics::PlantParams;
use crate::geometry::{KinematicState, WindField, WindShear};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

/// Seeded first-order filtered noise on the nominal wind speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GustConfig {
    /// Standard deviation of the relative speed fluctuation.
    pub intensity: f64,
    /// Filter time constant [s].
    pub time_constant: f64,
}

impl Default for GustConfig {
    fn default() -> Self {
        Self {
            intensity: 0.1,
            time_constant: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindConfig {
    pub w0: f64,
    pub phi_w: f64,
    pub shear: WindShear,
    pub gust: Option<GustConfig>,
}

impl Default for WindConfig {
    fn default() -> Self {
        Self {
            w0: 5.0,
            phi_w: 0.0,
            shear: WindShear::Uniform,
            gust: None,
        }
    }
}

impl WindConfig {
    pub fn field(&self) -> WindField {
        WindField {
            w0: self.w0,
            phi_w: self.phi_w,
            shear: self.shear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub duration: f64,
    pub dt: f64,
    /// Interval between log rows [s].
    pub log_interval: f64,
    /// Stop once this many power cycles are complete.
    pub max_cycles: Option<usize>,
    pub seed: u64,
    pub initial_phase: Phase,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 600.0,
            dt: 1e-3,
            log_interval: 1e-2,
            max_cycles: None,
            seed: 0,
            initial_phase: Phase::TractionFig8,
        }
    }
}

impl SimConfig {
    /// Integration steps per log row.
    pub fn decimation(&self) -> usize {
        ((self.log_interval / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub plant: PlantParams,
    pub actuator: ActuatorParams,
    pub wind: WindConfig,
    pub controller: ControllerConfig,
    /// Initial state; the azimuth is measured from the wind direction.
    pub initial: KinematicState,
    pub sim: SimConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            plant: PlantParams::default(),
            actuator: ActuatorParams::default(),
            wind: WindConfig::default(),
            controller: ControllerConfig::default(),
            initial: KinematicState {
                phi: 0.0,
                theta: 0.35,
                r: 50.0,
                phi_dot: 0.2,
                theta_dot: 0.0,
                r_dot: 1.0,
            },
            sim: SimConfig::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        sc.validate().map_err(ScenarioError::Validation)?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        self.plant.validate()?;
        self.actuator.validate()?;
        self.controller.validate()?;
        let w = &self.wind;
        if !(w.w0 >= 0.0 && w.w0.is_finite() && w.phi_w.is_finite()) {
            return Err("wind.w0 >= 0".into());
        }
        if let Some(g) = w.gust {
            if !(g.intensity >= 0.0 && g.time_constant > 0.0) {
                return Err("wind.gust.intensity >= 0 and wind.gust.time_constant > 0".into());
            }
        }
        if !self.initial.is_finite() {
            return Err("initial state must be finite".into());
        }
        if !(self.initial.r > 0.0) {
            return Err("initial.r > 0".into());
        }
        if !(self.initial.theta > 0.0 && self.initial.theta < std::f64::consts::FRAC_PI_2) {
            return Err("0 < initial.theta < pi/2".into());
        }
        let s = &self.sim;
        if !(s.duration > 0.0 && s.duration.is_finite()) {
            return Err("sim.duration > 0".into());
        }
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return Err("sim.dt > 0".into());
        }
        if !(s.log_interval >= s.dt) {
            return Err("sim.log_interval >= sim.dt".into());
        }
        Ok(())
    }

    /// Initial state in absolute azimuth.
    pub fn initial_state(&self) -> KinematicState {
        KinematicState {
            phi: self.initial.phi + self.wind.phi_w,
            ..self.initial
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml_str(&text)
}
