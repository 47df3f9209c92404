//! Tethered-wing power-cycle simulation and control.

pub mod control;
pub mod dynamics;
pub mod geometry;
pub mod linalg;
pub mod ode;
pub mod reduced;
pub mod sim;
pub mod stability;
