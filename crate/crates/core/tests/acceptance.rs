//! End-to-end acceptance checks. Each test prints one PASS/FAIL line before
//! asserting.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Matrix4};

use kitepower::control::actuator::ActuatorState;
use kitepower::control::reeling::TorqueLaw;
use kitepower::control::supervisor::Phase;
use kitepower::dynamics::{
    find_equilibrium_input, state_derivative, BorderSide, EquilibriumOptions, Plant, PlantState, Winch,
};
use kitepower::geometry::{rotation_lg, wrap_angle, KinematicState};
use kitepower::reduced::{elevation_gain, traction_coefficient};
use kitepower::sim::reports::{
    min_downwind_retraction, model_comparison_report, reeling_fixed_point, tracking_error_sweep,
    turn_rate_regression, SteadyCrosswind, SweepAxis,
};
use kitepower::sim::{run_simulation, Scenario, SimOutput};
use kitepower::stability::{
    find_common_lyapunov, Certificate, ElevationBox, ElevationGains, GammaBox, GammaGains, LyapunovOptions,
    StabilityError, StabilityProblem,
};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("[{id:>2}] {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

struct Baseline {
    sc: Scenario,
    out: SimOutput,
    wall: Duration,
}

/// Default scenario, 600 s at dt = 1 ms.
fn baseline() -> &'static Baseline {
    static CELL: OnceLock<Baseline> = OnceLock::new();
    CELL.get_or_init(|| {
        let sc = Scenario::default();
        let start = Instant::now();
        let out = run_simulation(&sc).expect("baseline run");
        Baseline {
            sc,
            out,
            wall: start.elapsed(),
        }
    })
}

#[test]
fn full_power_cycle() {
    let b = baseline();
    let m = &b.out.metrics;
    let errors: Vec<f64> = m.iter().map(|c| c.mean_theta_error_retraction).collect();
    let per_cycle = b.wall.as_secs_f64() / m.len().max(1) as f64;
    let cfg = &b.sc.controller;
    let r_lo = b.out.log.iter().map(|r| r.r).fold(f64::INFINITY, f64::min);
    let r_hi = b.out.log.iter().map(|r| r.r).fold(0.0, f64::max);
    // tether length at each phase change, from the logged rows
    let switch_r = |from: Phase, to: Phase| -> Vec<f64> {
        b.out
            .log
            .windows(2)
            .filter(|w| w[0].phase == from && w[1].phase == to)
            .map(|w| w[1].r)
            .collect()
    };
    let reel_out_ends = switch_r(Phase::TractionFig8, Phase::TransitionToBorder);
    let reel_in_ends = switch_r(Phase::Retraction, Phase::TransitionToTraction);
    let overshoot = 0.1 * (cfg.r_max - cfg.r_min);
    let pass = m.len() >= 3
        && errors.iter().all(|e| *e < 0.15)
        && per_cycle < 60.0
        && m.iter().all(|c| c.net_energy > 0.0)
        && reel_out_ends.len() >= 3
        && reel_out_ends.iter().all(|r| *r >= cfg.r_max)
        && reel_in_ends.iter().all(|r| *r <= cfg.r_min)
        && r_lo >= cfg.r_min - overshoot
        && r_hi <= cfg.r_max + overshoot;
    report(
        1,
        "full power cycle",
        pass,
        &format!(
            "{} cycles, retraction errors {errors:.3?} rad, traction ends at r {reel_out_ends:.1?}, retraction ends at r {reel_in_ends:.1?}, r in [{r_lo:.1}, {r_hi:.1}] m, {per_cycle:.2} s wall per cycle, T_retr {:.2} N m",
            m.len(),
            b.out.supervisor.retraction_torque
        ),
    );
    assert!(pass);
}

#[test]
fn retraction_law_comparison() {
    let base = Scenario::default();
    let mut rows = tracking_error_sweep(&base, SweepAxis::ReelIn, &SweepAxis::ReelIn.default_values());
    rows.extend(tracking_error_sweep(&base, SweepAxis::Wind, &SweepAxis::Wind.default_values()));
    let detail: Vec<String> = rows
        .iter()
        .map(|r| {
            let show = |l: &kitepower::sim::reports::LawResult| match (l.completed, l.error) {
                (true, Some(e)) => format!("{e:.3}"),
                (false, Some(e)) => format!("{e:.3}*"),
                _ => "-".into(),
            };
            format!(
                "{:?}={}: sf {} vs gamma {}",
                r.axis,
                r.value,
                show(&r.elevation_sf),
                show(&r.regularized_gamma)
            )
        })
        .collect();
    let pass = rows.iter().all(|r| r.elevation_not_worse() && r.elevation_sf.completed);
    report(2, "retraction comparison", pass, &format!("{}; * = lost before r_min", detail.join(", ")));
    assert!(pass);
}

#[test]
fn reeling_speed_fixed_point() {
    let nominal = {
        let sc = Scenario::default();
        sc.wind.field().along_tether(&sc.initial_state()) / 3.0
    };
    let mut ratios = Vec::new();
    for factor in [0.7, 1.3] {
        let mut sc = Scenario::default();
        sc.initial.r_dot = factor * nominal;
        sc.sim.duration = 60.0;
        let out = run_simulation(&sc).expect("traction run");
        assert!(out.log.iter().all(|r| r.phase == Phase::TractionFig8));
        let fp = reeling_fixed_point(&out.log, &sc, &SteadyCrosswind::default()).expect("steady rows");
        assert!(fp.samples > 50);
        ratios.push(fp.mean_ratio);
    }
    let pass = ratios.iter().all(|q| (q - 1.0).abs() < 0.02);
    report(
        3,
        "reeling fixed point",
        pass,
        &format!("r_dot / (W_r/3) = {ratios:.4?} from r_dot0 = {:.3} and {:.3} m/s", 0.7 * nominal, 1.3 * nominal),
    );
    assert!(pass);
}

#[test]
fn upwind_excursion() {
    let mut detail = Vec::new();
    let mut pass = true;
    for v in [2.0, 2.5, 3.0, 3.5] {
        let mut sc = Scenario::default();
        sc.controller.reel_in_speed = v;
        sc.sim.max_cycles = Some(1);
        sc.sim.duration = 250.0;
        let out = run_simulation(&sc).expect("cycle");
        let wind = sc.wind.field();
        let side = sc.controller.side.sign();
        let max_az = out
            .log
            .iter()
            .filter(|r| r.phase == Phase::Retraction)
            .map(|r| side * wrap_angle(r.phi - wind.phi_w))
            .fold(f64::NEG_INFINITY, f64::max);
        let downwind = min_downwind_retraction(&out.log, &wind).unwrap_or(f64::INFINITY);
        pass &= max_az > FRAC_PI_2 && downwind < 0.0;
        detail.push(format!("{v}: max az {max_az:.3}, min downwind {downwind:.1} m"));
    }
    report(4, "upwind excursion", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn force_drop_in_retraction() {
    let m = &baseline().out.metrics;
    let ratios: Vec<f64> = m.iter().map(|c| c.mean_retraction_force / c.mean_traction_force).collect();
    let pass = !ratios.is_empty() && ratios.iter().all(|q| *q <= 0.5);
    report(5, "retraction force drop", pass, &format!("F_retr / F_trac = {ratios:.3?}"));
    assert!(pass);
}

#[test]
fn elevation_gain_matches_finite_difference() {
    let sc = Scenario::default();
    let wind = sc.wind.field();
    let opts = EquilibriumOptions::default();
    let mut detail = Vec::new();
    let mut pass = true;
    // reel-in speeds that keep the equilibrium near the border
    for (r, r_dot) in [(100.0, -1.25), (80.0, -1.25), (120.0, -1.25)] {
        let eq = find_equilibrium_input(1.0, &wind, &sc.plant, r, r_dot, BorderSide::Left, &opts).expect("border equilibrium");
        let c = elevation_gain(&eq.state, &wind, &sc.plant);
        for h in [0.02, 0.05, 0.1] {
            let acc = |d: f64| {
                state_derivative(&eq.state, &wind, eq.delta + d, eq.line_force, &sc.plant)
                    .unwrap()
                    .rates[4]
            };
            let slope = (acc(h) - acc(-h)) / (2.0 * h);
            let rel = (slope + c) / c;
            pass &= rel.abs() < 0.15;
            detail.push(format!("r {r} h {h}: {slope:.4} vs {:.4} ({:+.1}%)", -c, 100.0 * rel));
        }
        detail.push(format!("phi-phi_w {:.3}", eq.state.phi - wind.phi_w));
    }
    report(6, "elevation gain consistency", pass, &detail.join(", "));
    assert!(pass);
}

#[test]
fn turn_rate_regression_recovers_gain() {
    let b = baseline();
    let fit = turn_rate_regression(&b.out.log, &b.sc).expect("figure-eight rows");
    let rel = fit.slope / fit.model_slope - 1.0;
    let pass = rel.abs() < 0.2;
    report(
        7,
        "turn-rate gain",
        pass,
        &format!(
            "fit {:.4} vs model {:.4} ({:+.1}%), R^2 {:.3}, n {}",
            fit.slope,
            fit.model_slope,
            100.0 * rel,
            fit.r_squared,
            fit.samples
        ),
    );
    assert!(pass);
}

#[test]
fn traction_force_model_underestimates() {
    let b = baseline();
    let rep = model_comparison_report(&b.out.log, &b.sc);
    let s = rep.steady_crosswind.expect("steady crosswind rows");
    let pass = s.mean_relative_error < 0.0 && s.mean_abs_relative_error < 0.25;
    report(
        8,
        "traction force model",
        pass,
        &format!(
            "steady crosswind n {}: sim {:.0} N, model {:.0} N, signed {:+.2}%, abs {:.2}%",
            s.samples,
            s.mean_force_sim,
            s.mean_force_model,
            100.0 * s.mean_relative_error,
            100.0 * s.mean_abs_relative_error
        ),
    );
    assert!(pass);
}

/// Positive definiteness by Cholesky on the matrix shifted by `tol`, and
/// by the Schur eigenvalues of the unsymmetrized product.
fn independently_valid(cert: &Certificate, problem: &StabilityProblem, tol: f64) -> bool {
    let p = cert.p;
    let scale = p.norm();
    let shift = Matrix4::identity() * tol * scale;
    if (p - shift).cholesky().is_none() {
        return false;
    }
    problem.vertices.iter().all(|a| {
        let q = -(a.transpose() * p + p * a);
        let chol = (q - shift).cholesky().is_some();
        let schur = q.complex_eigenvalues().iter().all(|l| l.re > tol * scale);
        chol && schur
    })
}

#[test]
fn stability_certificates() {
    let sc = Scenario::default();
    let cfg = sc.controller;
    let opts = LyapunovOptions::default();
    let tol = 1e-7;
    let gamma = GammaBox::nominal(&sc.plant).problem(&GammaGains::from(&cfg), &sc.actuator);
    let ebox = ElevationBox::nominal(&sc.plant, cfg.theta_ref, sc.wind.w0);
    let elevation = ebox.problem(&ElevationGains::from(&cfg), cfg.theta_ref, &sc.actuator, sc.plant.env.g);
    let zero = ebox.problem(&ElevationGains { k1: 0.0, k2: 0.0 }, cfg.theta_ref, &sc.actuator, sc.plant.env.g);

    let mut detail = Vec::new();
    let mut pass = true;
    for (name, problem) in [("gamma", &gamma), ("elevation", &elevation)] {
        match find_common_lyapunov(problem, &opts) {
            Ok(cert) => {
                let ok = cert.verify(problem, tol).is_ok() && independently_valid(&cert, problem, tol);
                pass &= ok;
                detail.push(format!("{name}: margin {:.2e}, re-verified {ok}", cert.margin));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{name}: {e}"));
            }
        }
    }
    let zero_result = find_common_lyapunov(&zero, &opts);
    let non_hurwitz = matches!(zero_result, Err(StabilityError::NonHurwitzVertex { .. }));
    pass &= non_hurwitz;
    detail.push(format!("zero gains NonHurwitz {non_hurwitz}"));
    report(9, "stability certificates", pass, &detail.join("; "));
    assert!(pass);
}

/// Open-loop plant with fixed steering and the optimal reel-out law.
fn plant_trajectory(dt: f64, horizon: f64) -> PlantState {
    let sc = Scenario::default();
    let plant = Plant::new(sc.plant, sc.actuator);
    let wind = sc.wind.field();
    let cfg = sc.controller;
    let winch = Winch::Torque(TorqueLaw::Optimal {
        c_f: traction_coefficient(&sc.plant.wing, &sc.plant.env),
        drum_radius: cfg.drum_radius,
        t_min: cfg.torque_min,
        t_max: cfg.torque_max,
    });
    let mut x = PlantState {
        kin: KinematicState {
            phi: 0.3,
            theta: 0.4,
            r: 60.0,
            phi_dot: 0.1,
            theta_dot: 0.0,
            r_dot: 1.0,
        },
        act: ActuatorState::default(),
    };
    let n = (horizon / dt).round() as usize;
    for _ in 0..n {
        x = plant.integrate_step(&x, &wind, 0.02, &winch, dt).expect("plant step");
    }
    x
}

fn state_distance(a: &PlantState, b: &PlantState) -> f64 {
    a.to_array()
        .iter()
        .zip(b.to_array())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

#[test]
fn numerical_hygiene() {
    let horizon = 60.0;
    let reference = plant_trajectory(1e-3 / 4.0, horizon);
    let errs: Vec<f64> = [0.008, 0.004, 0.002]
        .iter()
        .map(|&dt| state_distance(&plant_trajectory(dt, horizon), &reference))
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    // fourth order: halving the step divides the error by about 16
    let convergent = orders.iter().all(|p| (3.5..=5.0).contains(p));

    let mut sc = Scenario::default();
    sc.sim.duration = 150.0;
    sc.controller.retraction_torque = Some(31.5);
    let a = run_simulation(&sc).unwrap();
    let b = run_simulation(&sc).unwrap();
    let identical = a.log.len() == b.log.len()
        && a.log.iter().zip(&b.log).all(|(p, q)| {
            p.t.to_bits() == q.t.to_bits()
                && p.phi.to_bits() == q.phi.to_bits()
                && p.theta.to_bits() == q.theta.to_bits()
                && p.r.to_bits() == q.r.to_bits()
                && p.f_c.to_bits() == q.f_c.to_bits()
                && p.delta.to_bits() == q.delta.to_bits()
        });

    let mut worst: f64 = 0.0;
    for i in 0..40 {
        for j in 0..40 {
            let phi = -3.1 + 6.2 * i as f64 / 39.0;
            let theta = -1.5 + 3.0 * j as f64 / 39.0;
            let r = rotation_lg(phi, theta);
            let m = r.matrix();
            worst = worst.max((m * m.transpose() - Matrix3::identity()).abs().max());
            worst = worst.max((m.determinant() - 1.0).abs());
        }
    }
    let orthonormal = worst < 1e-12;

    let pass = convergent && identical && orthonormal;
    report(
        10,
        "numerical hygiene",
        pass,
        &format!(
            "errors {}, observed orders {orders:.2?}, identical reruns {identical}, frame error {worst:.1e}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
        ),
    );
    assert!(pass);
}
