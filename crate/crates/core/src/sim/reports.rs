//! Retraction tracking sweeps, model-versus-simulation comparisons and
//! plot-data files.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::log::LogRow;
use super::runner::run_simulation_partial;
use super::scenario::Scenario;
use crate::control::supervisor::Phase;
use crate::control::RetractionLaw;
use crate::geometry::{apparent_wind, wing_position, wrap_angle, KinematicState, WindField};
use crate::reduced::{mechanical_power, traction_force_model, turn_rate_bias, turn_rate_gain_at};

fn kinematic(row: &LogRow) -> KinematicState {
    KinematicState {
        phi: row.phi,
        theta: row.theta,
        r: row.r,
        phi_dot: row.phi_dot,
        theta_dot: row.theta_dot,
        r_dot: row.r_dot,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Reel-in speed [m/s].
    ReelIn,
    /// Nominal wind speed [m/s].
    Wind,
}

impl SweepAxis {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepAxis::ReelIn => vec![1.5, 2.0, 2.5, 3.0, 3.5],
            SweepAxis::Wind => vec![4.0, 5.0, 6.0],
        }
    }

    fn apply(self, sc: &mut Scenario, value: f64) {
        match self {
            SweepAxis::ReelIn => sc.controller.reel_in_speed = value,
            SweepAxis::Wind => sc.wind.w0 = value,
        }
    }
}

/// Tracking result of one law at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawResult {
    /// Mean `|theta - theta_ref|` over the first retraction [rad]; `None`
    /// if no retraction row was logged.
    pub error: Option<f64>,
    /// The retraction reached `r_min`.
    pub completed: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub retraction_torque: Option<f64>,
    pub regularized_gamma: LawResult,
    pub elevation_sf: LawResult,
}

impl SweepRow {
    /// Elevation feedback tracks at least as well; a law that lost the wing
    /// counts as worse than any finite error.
    pub fn elevation_not_worse(&self) -> bool {
        let score = |l: &LawResult| match (l.completed, l.error) {
            (true, Some(e)) => e,
            _ => f64::INFINITY,
        };
        score(&self.elevation_sf) <= score(&self.regularized_gamma)
    }
}

/// Mean elevation error over the first retraction, complete or cut short.
fn first_retraction_rows(rows: &[LogRow], theta_ref: f64) -> Option<(f64, usize)> {
    let begin = rows.iter().position(|r| r.phase == Phase::Retraction)?;
    let len = rows[begin..]
        .iter()
        .position(|r| r.phase != Phase::Retraction)
        .unwrap_or(rows.len() - begin);
    let seg = &rows[begin..begin + len];
    let err = seg.iter().map(|r| (r.theta - theta_ref).abs()).sum::<f64>() / len as f64;
    Some((err, begin + len))
}

fn run_one(base: &Scenario, axis: SweepAxis, value: f64, law: RetractionLaw) -> (LawResult, Option<f64>) {
    let mut sc = *base;
    axis.apply(&mut sc, value);
    sc.controller.retraction_law = law;
    sc.sim.max_cycles = Some(1);
    match run_simulation_partial(&sc) {
        Err(e) => (
            LawResult {
                error: None,
                completed: false,
                failure: Some(e.to_string()),
            },
            None,
        ),
        Ok((out, failure)) => {
            let theta_ref = sc.controller.theta_ref;
            let seg = first_retraction_rows(&out.log, theta_ref);
            let completed = seg.is_some_and(|(_, end)| end < out.log.len());
            let failure = match failure {
                Some(e) => Some(e.to_string()),
                None if !completed => Some("no complete retraction within the run".into()),
                None => None,
            };
            (
                LawResult {
                    error: seg.map(|(e, _)| e),
                    completed,
                    failure,
                },
                Some(out.supervisor.retraction_torque),
            )
        }
    }
}

fn sweep_point(base: &Scenario, axis: SweepAxis, value: f64) -> SweepRow {
    let (gamma, tq) = run_one(base, axis, value, RetractionLaw::RegularizedGamma);
    let (sf, tq2) = run_one(base, axis, value, RetractionLaw::ElevationSf);
    SweepRow {
        axis,
        value,
        retraction_torque: tq.or(tq2),
        regularized_gamma: gamma,
        elevation_sf: sf,
    }
}

/// Runs one power cycle per grid point and law. Failures are recorded per
/// point.
pub fn tracking_error_sweep(base: &Scenario, axis: SweepAxis, values: &[f64]) -> Vec<SweepRow> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        values.par_iter().map(|&v| sweep_point(base, axis, v)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        values.iter().map(|&v| sweep_point(base, axis, v)).collect()
    }
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    axis: SweepAxis,
    value: f64,
    retraction_torque: Option<f64>,
    gamma_error: Option<f64>,
    gamma_completed: bool,
    sf_error: Option<f64>,
    sf_completed: bool,
    note: &'a str,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        let note = r
            .regularized_gamma
            .failure
            .as_deref()
            .or(r.elevation_sf.failure.as_deref())
            .unwrap_or("");
        w.serialize(SweepCsvRow {
            axis: r.axis,
            value: r.value,
            retraction_torque: r.retraction_torque,
            gamma_error: r.regularized_gamma.error,
            gamma_completed: r.regularized_gamma.completed,
            sf_error: r.elevation_sf.error,
            sf_completed: r.elevation_sf.completed,
            note,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Simulated versus crosswind-model line force for one log row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub phase: Phase,
    pub wind_along_tether: f64,
    pub force_sim: f64,
    pub force_model: f64,
    pub power_sim: f64,
    pub power_model: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceStats {
    pub samples: usize,
    pub mean_force_sim: f64,
    pub mean_force_model: f64,
    /// Mean of `(model - sim) / sim`; negative when the model
    /// underestimates.
    pub mean_relative_error: f64,
    pub mean_abs_relative_error: f64,
}

impl ForceStats {
    fn from_rows<'a>(rows: impl Iterator<Item = &'a ComparisonRow>) -> Option<Self> {
        let sel: Vec<&ComparisonRow> = rows.filter(|r| r.force_sim > MIN_FORCE).collect();
        if sel.is_empty() {
            return None;
        }
        let n = sel.len() as f64;
        let rel: Vec<f64> = sel
            .iter()
            .map(|r| (r.force_model - r.force_sim) / r.force_sim)
            .collect();
        Some(Self {
            samples: sel.len(),
            mean_force_sim: sel.iter().map(|r| r.force_sim).sum::<f64>() / n,
            mean_force_model: sel.iter().map(|r| r.force_model).sum::<f64>() / n,
            mean_relative_error: rel.iter().sum::<f64>() / n,
            mean_abs_relative_error: rel.iter().map(|e| e.abs()).sum::<f64>() / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub phase: Phase,
    pub stats: ForceStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub rows: Vec<ComparisonRow>,
    pub by_phase: Vec<PhaseStats>,
    /// Straight figure-eight flight near the window centre.
    pub steady_crosswind: Option<ForceStats>,
}

impl ModelComparison {
    pub fn phase(&self, phase: Phase) -> Option<&ForceStats> {
        self.by_phase.iter().find(|s| s.phase == phase).map(|s| &s.stats)
    }
}

/// Rows with a smaller simulated force are skipped in the relative errors [N].
const MIN_FORCE: f64 = 1.0;

/// Selection of log rows that approximate steady crosswind flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyCrosswind {
    /// Largest `|phi - phi_w|` [rad].
    pub max_azimuth: f64,
    /// Largest `|gamma_dot|` [rad/s].
    pub max_turn_rate: f64,
    /// Rows before this time are skipped [s].
    pub settle_time: f64,
}

impl Default for SteadyCrosswind {
    fn default() -> Self {
        Self {
            max_azimuth: 0.2,
            max_turn_rate: 0.1,
            settle_time: 20.0,
        }
    }
}

impl SteadyCrosswind {
    /// Indices of figure-eight rows flown nearly straight through the
    /// window centre.
    pub fn select(&self, rows: &[LogRow], phi_w: f64) -> Vec<usize> {
        (0..rows.len().saturating_sub(1))
            .filter(|&i| {
                let (a, b) = (&rows[i], &rows[i + 1]);
                if a.phase != Phase::TractionFig8 || a.t < self.settle_time {
                    return false;
                }
                let (Some(ga), Some(gb)) = (a.gamma, b.gamma) else {
                    return false;
                };
                let rate = wrap_angle(gb - ga) / (b.t - a.t);
                rate.abs() < self.max_turn_rate && wrap_angle(a.phi - phi_w).abs() < self.max_azimuth
            })
            .collect()
    }
}

pub fn model_comparison_report(rows: &[LogRow], sc: &Scenario) -> ModelComparison {
    let wind = sc.wind.field();
    let wing = &sc.plant.wing;
    let env = &sc.plant.env;
    let out: Vec<ComparisonRow> = rows
        .iter()
        .map(|row| {
            let w_r = wind.along_tether(&kinematic(row));
            let f_model = traction_force_model(w_r, row.r_dot, wing, env);
            ComparisonRow {
                t: row.t,
                phase: row.phase,
                wind_along_tether: w_r,
                force_sim: row.f_c,
                force_model: f_model,
                power_sim: mechanical_power(row.f_c, row.r_dot),
                power_model: mechanical_power(f_model, row.r_dot),
            }
        })
        .collect();
    let by_phase = Phase::ALL
        .into_iter()
        .filter_map(|phase| {
            ForceStats::from_rows(out.iter().filter(|r| r.phase == phase)).map(|stats| PhaseStats { phase, stats })
        })
        .collect();
    let steady = SteadyCrosswind::default().select(rows, wind.phi_w);
    let steady_crosswind = ForceStats::from_rows(steady.iter().map(|&i| &out[i]));
    ModelComparison {
        rows: out,
        by_phase,
        steady_crosswind,
    }
}

/// Reel-out speed relative to a third of the wind along the tether.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReelingFixedPoint {
    pub samples: usize,
    pub mean_ratio: f64,
}

/// Mean `r_dot / (W_r / 3)` over steady crosswind rows where the traction
/// torque law is not clamped.
pub fn reeling_fixed_point(rows: &[LogRow], sc: &Scenario, filter: &SteadyCrosswind) -> Option<ReelingFixedPoint> {
    let wind = sc.wind.field();
    let cfg = &sc.controller;
    let c_f = crate::reduced::traction_coefficient(&sc.plant.wing, &sc.plant.env);
    let law = crate::control::reeling::TorqueLaw::Optimal {
        c_f,
        drum_radius: cfg.drum_radius,
        t_min: cfg.torque_min,
        t_max: cfg.torque_max,
    };
    let ratios: Vec<f64> = filter
        .select(rows, wind.phi_w)
        .into_iter()
        .map(|i| &rows[i])
        .filter(|r| !law.saturated(r.r_dot))
        .map(|r| r.r_dot / (wind.along_tether(&kinematic(r)) / 3.0))
        .collect();
    if ratios.is_empty() {
        return None;
    }
    Some(ReelingFixedPoint {
        samples: ratios.len(),
        mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
    })
}

pub fn write_comparison_csv<W: Write>(report: &ModelComparison, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares fit of `gamma_dot - T = k |W_a| delta + c` over the
/// figure-eight rows of a log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnRateFit {
    pub samples: usize,
    /// Fitted turn-rate gain per unit apparent wind speed [rad/(m^2)].
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of the turn-rate model at the mean tether length.
    pub model_slope: f64,
    pub r_squared: f64,
}

/// Returns `None` when fewer than three usable samples exist.
pub fn turn_rate_regression(rows: &[LogRow], sc: &Scenario) -> Option<TurnRateFit> {
    let wind = sc.wind.field();
    let params = &sc.plant;
    let eps = sc.controller.velocity_angle_epsilon;
    let fig8: Vec<&LogRow> = rows.iter().filter(|r| r.phase == Phase::TractionFig8).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut r_sum = 0.0;
    for w in fig8.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (Some(ga), Some(gb)) = (a.gamma, b.gamma) else {
            continue;
        };
        let dt = b.t - a.t;
        if !(dt > 0.0) {
            continue;
        }
        let gamma_dot = wrap_angle(gb - ga) / dt;
        let s = kinematic(a);
        let Ok(bias) = turn_rate_bias(&s, &wind, &params.env, eps) else {
            continue;
        };
        let speed = apparent_wind(&s, &wind).norm();
        xs.push(speed * a.delta);
        ys.push(gamma_dot - bias);
        r_sum += a.r;
    }
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let mass = crate::dynamics::effective_mass(&params.wing, &params.tether, r_sum / nf);
    Some(TurnRateFit {
        samples: n,
        slope,
        intercept: my - slope * mx,
        model_slope: turn_rate_gain_at(1.0, mass, &params.wing, &params.env),
        r_squared: sxy * sxy / (sxx * syy),
    })
}

/// Plot-data files written by [`emit_figures`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Ground-frame position and its ground projection.
    Trajectory,
    /// Azimuth and elevation.
    Angles,
    /// Velocity angle and regularized velocity angle.
    VelocityAngles,
    /// Line force, torque and power.
    ForcePower,
}

impl Figure {
    pub const ALL: [Figure; 4] = [
        Figure::Trajectory,
        Figure::Angles,
        Figure::VelocityAngles,
        Figure::ForcePower,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Figure::Trajectory => "trajectory.csv",
            Figure::Angles => "angles.csv",
            Figure::VelocityAngles => "velocity_angles.csv",
            Figure::ForcePower => "force_power.csv",
        }
    }

    pub fn from_name(s: &str) -> Option<Figure> {
        Figure::ALL
            .into_iter()
            .find(|f| f.file_name().trim_end_matches(".csv") == s)
    }
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    phase: Phase,
}

#[derive(Serialize)]
struct AnglesRow {
    t: f64,
    phi: f64,
    theta: f64,
    phase: Phase,
}

#[derive(Serialize)]
struct VelocityAnglesRow {
    t: f64,
    gamma: Option<f64>,
    gamma_reg: Option<f64>,
    phase: Phase,
}

#[derive(Serialize)]
struct ForcePowerRow {
    t: f64,
    r: f64,
    r_dot: f64,
    #[serde(rename = "F_c")]
    f_c: f64,
    #[serde(rename = "T_m")]
    t_m: f64,
    power: f64,
    phase: Phase,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one CSV per figure into `dir`, keeping every `stride`-th row.
/// The trajectory is in the ground frame with the wind direction applied
/// as logged.
pub fn emit_figures(
    rows: &[LogRow],
    which: &[Figure],
    dir: &Path,
    stride: usize,
) -> csv::Result<Vec<PathBuf>> {
    let stride = stride.max(1);
    let sel = || rows.iter().step_by(stride);
    let mut written = Vec::new();
    for &fig in which {
        let path = dir.join(fig.file_name());
        match fig {
            Figure::Trajectory => write_rows(
                &path,
                sel().map(|r| {
                    let p = wing_position(&kinematic(r));
                    TrajectoryRow {
                        t: r.t,
                        x: p.x(),
                        y: p.y(),
                        z: p.z(),
                        phase: r.phase,
                    }
                }),
            )?,
            Figure::Angles => write_rows(
                &path,
                sel().map(|r| AnglesRow {
                    t: r.t,
                    phi: r.phi,
                    theta: r.theta,
                    phase: r.phase,
                }),
            )?,
            Figure::VelocityAngles => write_rows(
                &path,
                sel().map(|r| VelocityAnglesRow {
                    t: r.t,
                    gamma: r.gamma,
                    gamma_reg: r.gamma_reg,
                    phase: r.phase,
                }),
            )?,
            Figure::ForcePower => write_rows(
                &path,
                sel().map(|r| ForcePowerRow {
                    t: r.t,
                    r: r.r,
                    r_dot: r.r_dot,
                    f_c: r.f_c,
                    t_m: r.t_m,
                    power: r.power,
                    phase: r.phase,
                }),
            )?,
        }
        written.push(path);
    }
    Ok(written)
}

/// Most negative downwind coordinate of the wing over the retraction rows,
/// measured along the wind direction [m].
pub fn min_downwind_retraction(rows: &[LogRow], wind: &WindField) -> Option<f64> {
    rows.iter()
        .filter(|r| r.phase == Phase::Retraction)
        .map(|r| {
            let p = wing_position(&kinematic(r));
            p.x() * wind.phi_w.cos() + p.y() * wind.phi_w.sin()
        })
        .reduce(f64::min)
}
