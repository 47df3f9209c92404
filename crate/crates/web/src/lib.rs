//! Browser bindings for the demo page in `www/`.

use wasm_bindgen::prelude::*;

use kitepower::control::supervisor::Phase;
use kitepower::control::RetractionLaw;
use kitepower::geometry::wing_position;
use kitepower::sim::{run_simulation_partial, Scenario};
use kitepower::stability::{
    find_common_lyapunov, linspace, stability_sweep, ElevationBox, ElevationGains, GammaBox, GammaGains,
    LyapunovOptions, StabilityError, StabilityProblem,
};

/// Result of one simulated cycle, flattened for typed-array transfer.
#[wasm_bindgen]
pub struct CycleRun {
    crosswind: Vec<f64>,
    altitude: Vec<f64>,
    phase: Vec<u8>,
    summary: String,
    ok: bool,
}

#[wasm_bindgen]
impl CycleRun {
    /// Horizontal position across the wind [m].
    pub fn crosswind(&self) -> Vec<f64> {
        self.crosswind.clone()
    }

    pub fn altitude(&self) -> Vec<f64> {
        self.altitude.clone()
    }

    /// 0 traction, 1 transition to border, 2 retraction, 3 transition to traction.
    pub fn phase(&self) -> Vec<u8> {
        self.phase.clone()
    }

    pub fn summary(&self) -> String {
        self.summary.clone()
    }

    pub fn ok(&self) -> bool {
        self.ok
    }
}

fn phase_code(p: Phase) -> u8 {
    match p {
        Phase::TractionFig8 => 0,
        Phase::TransitionToBorder => 1,
        Phase::Retraction => 2,
        Phase::TransitionToTraction => 3,
    }
}

fn law_from(name: &str) -> Result<RetractionLaw, JsError> {
    match name {
        "elevation_sf" => Ok(RetractionLaw::ElevationSf),
        "regularized_gamma" => Ok(RetractionLaw::RegularizedGamma),
        other => Err(JsError::new(&format!("unknown retraction law '{other}'"))),
    }
}

/// Simulates until the first cycle closes (or 250 s), logging every 0.1 s.
#[wasm_bindgen]
pub fn simulate_cycle(w0: f64, reel_in_speed: f64, law: &str) -> Result<CycleRun, JsError> {
    let mut sc = Scenario::default();
    sc.wind.w0 = w0;
    sc.controller.reel_in_speed = reel_in_speed;
    sc.controller.retraction_law = law_from(law)?;
    sc.sim.duration = 250.0;
    sc.sim.max_cycles = Some(1);
    sc.sim.log_interval = 0.1;
    let (out, failure) = run_simulation_partial(&sc).map_err(|e| JsError::new(&e.to_string()))?;

    let wind = sc.wind.field();
    let mut run = CycleRun {
        crosswind: Vec::with_capacity(out.log.len()),
        altitude: Vec::with_capacity(out.log.len()),
        phase: Vec::with_capacity(out.log.len()),
        summary: String::new(),
        ok: failure.is_none() && !out.metrics.is_empty(),
    };
    for row in &out.log {
        let kin = kitepower::geometry::KinematicState {
            phi: row.phi - wind.phi_w,
            theta: row.theta,
            r: row.r,
            phi_dot: row.phi_dot,
            theta_dot: row.theta_dot,
            r_dot: row.r_dot,
        };
        let p = wing_position(&kin);
        run.crosswind.push(p.y());
        run.altitude.push(p.z());
        run.phase.push(phase_code(row.phase));
    }

    let mut s = format!("retraction torque {:.2} N m\n", out.supervisor.retraction_torque);
    for sw in &out.switches {
        s.push_str(&format!("{:7.2} s  {} -> {}\n", sw.t, sw.from.name(), sw.to.name()));
    }
    match out.metrics.first() {
        Some(m) => s.push_str(&format!(
            "cycle {:.1} s, net energy {:.1} kJ, mean power {:.0} W, retraction elevation error {:.4} rad\n",
            m.duration,
            m.net_energy / 1e3,
            m.net_energy / m.duration,
            m.mean_theta_error_retraction
        )),
        None => s.push_str("no complete cycle\n"),
    }
    if let Some(e) = failure {
        s.push_str(&format!("stopped: {e}\n"));
    }
    run.summary = s;
    Ok(run)
}

fn builder(design: &str) -> Result<Box<dyn Fn(f64, f64) -> StabilityProblem + Sync>, JsError> {
    let sc = Scenario::default();
    let act = sc.actuator;
    match design {
        "gamma" => {
            let b = GammaBox::nominal(&sc.plant);
            Ok(Box::new(move |a, c| b.problem(&GammaGains { k_c: a, k_theta: c }, &act)))
        }
        "elevation" => {
            let theta_ref = sc.controller.theta_ref;
            let b = ElevationBox::nominal(&sc.plant, theta_ref, sc.wind.w0);
            let g = sc.plant.env.g;
            Ok(Box::new(move |a, c| b.problem(&ElevationGains { k1: a, k2: c }, theta_ref, &act, g)))
        }
        other => Err(JsError::new(&format!("unknown design '{other}'"))),
    }
}

/// Searches a common Lyapunov matrix over the default uncertainty box and
/// describes the outcome.
#[wasm_bindgen]
pub fn check_stability(design: &str, gain1: f64, gain2: f64) -> Result<String, JsError> {
    if !(gain1.is_finite() && gain2.is_finite()) {
        return Err(JsError::new("gains must be finite"));
    }
    let problem = builder(design)?(gain1, gain2);
    let opts = LyapunovOptions::default();
    Ok(match find_common_lyapunov(&problem, &opts) {
        Ok(cert) => {
            let mut eig: Vec<f64> = cert.p.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            format!(
                "certified over {} vertices\nmargin {:.3e}\neigenvalues of P: {:.3e} .. {:.3e}",
                problem.vertices.len(),
                cert.margin,
                eig[0],
                eig[3]
            )
        }
        Err(StabilityError::NonHurwitzVertex { index, abscissa }) => {
            format!("vertex {index} is unstable (spectral abscissa {abscissa:.3e}); no certificate possible")
        }
        Err(e) => format!("no certificate: {e}"),
    })
}

/// Feasibility map over a gain grid, row-major with `gain2` fastest:
/// 1 certified, 0 not.
#[wasm_bindgen]
pub fn stability_map(design: &str, lo1: f64, hi1: f64, lo2: f64, hi2: f64, n: usize) -> Result<Vec<u8>, JsError> {
    if !(2..=40).contains(&n) {
        return Err(JsError::new("grid size must be in 2..=40"));
    }
    let build = builder(design)?;
    let cells = stability_sweep(&linspace(lo1, hi1, n), &linspace(lo2, hi2, n), &build, &LyapunovOptions::default());
    Ok(cells.iter().map(|c| u8::from(c.feasible)).collect())
}
