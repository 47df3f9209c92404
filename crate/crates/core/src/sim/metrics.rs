//! Per-cycle energy and tracking metrics, computed from log rows only so a
//! re-read log reproduces them exactly.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::log::LogRow;
use crate::control::supervisor::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleMetrics {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub duration: f64,
    /// Energy delivered to the winch outside retraction [J].
    pub traction_energy: f64,
    /// Energy delivered during retraction [J], negative when consumed.
    pub retraction_energy: f64,
    pub net_energy: f64,
    pub traction_duration: f64,
    pub retraction_duration: f64,
    pub duty_cycle: f64,
    pub mean_theta_error_retraction: f64,
    pub peak_force: f64,
    pub mean_traction_force: f64,
    pub mean_retraction_force: f64,
}

/// Row indices that close a cycle: the first row after a retraction.
pub fn cycle_boundaries(rows: &[LogRow]) -> Vec<usize> {
    (1..rows.len())
        .filter(|&i| rows[i - 1].phase == Phase::Retraction && rows[i].phase != Phase::Retraction)
        .collect()
}

/// Left-point trapezoid accounting: the interval `[i, i+1]` belongs to the
/// phase of row `i`.
pub fn compute_metrics(rows: &[LogRow], theta_ref: f64) -> Vec<CycleMetrics> {
    let mut out = Vec::new();
    let mut start = 0;
    for (index, end) in cycle_boundaries(rows).into_iter().enumerate() {
        let mut m = CycleMetrics {
            index,
            t_start: rows[start].t,
            t_end: rows[end].t,
            duration: rows[end].t - rows[start].t,
            traction_energy: 0.0,
            retraction_energy: 0.0,
            net_energy: 0.0,
            traction_duration: 0.0,
            retraction_duration: 0.0,
            duty_cycle: 0.0,
            mean_theta_error_retraction: 0.0,
            peak_force: rows[start..=end].iter().map(|r| r.f_c).fold(0.0, f64::max),
            mean_traction_force: 0.0,
            mean_retraction_force: 0.0,
        };
        let mut err_sum = 0.0;
        let mut n_retr = 0usize;
        for j in start..end {
            let (a, b) = (&rows[j], &rows[j + 1]);
            let dt = b.t - a.t;
            let energy = 0.5 * (a.power + b.power) * dt;
            if a.phase == Phase::Retraction {
                m.retraction_energy += energy;
                m.retraction_duration += dt;
                m.mean_retraction_force += a.f_c * dt;
                err_sum += (a.theta - theta_ref).abs();
                n_retr += 1;
            } else {
                m.traction_energy += energy;
                m.traction_duration += dt;
                m.mean_traction_force += a.f_c * dt;
            }
        }
        m.net_energy = m.traction_energy + m.retraction_energy;
        m.duty_cycle = m.traction_duration / m.duration;
        m.mean_traction_force /= m.traction_duration;
        m.mean_retraction_force /= m.retraction_duration;
        m.mean_theta_error_retraction = err_sum / n_retr as f64;
        out.push(m);
        start = end;
    }
    out
}

/// Mean `|theta - theta_ref|` over the retraction rows of the first complete
/// retraction, or `None` if the log holds none.
pub fn first_retraction_error(rows: &[LogRow], theta_ref: f64) -> Option<f64> {
    let begin = rows.iter().position(|r| r.phase == Phase::Retraction)?;
    let len = rows[begin..].iter().position(|r| r.phase != Phase::Retraction)?;
    let seg = &rows[begin..begin + len];
    Some(seg.iter().map(|r| (r.theta - theta_ref).abs()).sum::<f64>() / seg.len() as f64)
}

pub fn write_metrics_csv<W: Write>(metrics: &[CycleMetrics], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in metrics {
        w.serialize(m)?;
    }
    w.flush()?;
    Ok(())
}
