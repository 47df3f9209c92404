//! Time-series log rows and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::control::supervisor::Phase;

/// Column order of the log CSV.
pub const LOG_COLUMNS: [&str; 15] = [
    "t",
    "phi",
    "theta",
    "r",
    "phi_dot",
    "theta_dot",
    "r_dot",
    "gamma",
    "gamma_reg",
    "delta",
    "delta_ref",
    "F_c",
    "T_m",
    "power",
    "phase",
];

/// One logged sample. `gamma` is empty where the velocity angle is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t: f64,
    pub phi: f64,
    pub theta: f64,
    pub r: f64,
    pub phi_dot: f64,
    pub theta_dot: f64,
    pub r_dot: f64,
    pub gamma: Option<f64>,
    pub gamma_reg: Option<f64>,
    pub delta: f64,
    pub delta_ref: f64,
    #[serde(rename = "F_c")]
    pub f_c: f64,
    #[serde(rename = "T_m")]
    pub t_m: f64,
    pub power: f64,
    pub phase: Phase,
}

pub fn write_log<W: Write>(rows: &[LogRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_log<R: Read>(input: R) -> csv::Result<Vec<LogRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize().collect()
}
