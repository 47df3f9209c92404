//! `awe`: run scenarios, sweeps, stability checks and reports.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kitepower::control::supervisor::Phase;
use kitepower::sim::{
    compute_metrics, emit_figures, load_scenario, model_comparison_report, read_log, run_simulation_partial,
    tracking_error_sweep, write_comparison_csv, write_log, write_metrics_csv, write_sweep_csv, CycleMetrics, Figure,
    Scenario, SimError, SweepAxis,
};
use kitepower::stability::{
    find_common_lyapunov, linspace, stability_sweep, write_stability_csv, ElevationBox, ElevationGains, GammaBox,
    GammaGains, Interval, LyapunovOptions, StabilityError, StabilityProblem,
};

#[derive(Parser)]
#[command(name = "awe", version, about = "Tethered-wing power-cycle simulator")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "AWE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its log and cycle metrics.
    Run { scenario: PathBuf },
    /// Compare both retraction laws over reel-in or wind speeds.
    Sweep {
        #[arg(long, value_enum)]
        axis: AxisArg,
        scenario: PathBuf,
        /// Comma-separated grid; defaults to the standard grid of the axis.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Search for a common Lyapunov certificate of a retraction design.
    Stability {
        #[arg(long, value_enum)]
        design: DesignArg,
        /// Map feasibility over a gain grid instead of a single query.
        #[arg(long)]
        sweep: bool,
        /// Scenario supplying plant, actuator and default gains.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Gain pair: `k_c,k_theta` or `k1,k2`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gains: Option<Vec<f64>>,
        /// Interval override `name=lo:hi` (gamma: k, wa_p, r; elevation: r, r_dot, c_gain).
        #[arg(long = "box", value_name = "NAME=LO:HI", allow_hyphen_values = true)]
        bounds: Vec<String>,
        /// First gain grid `lo:hi:n`.
        #[arg(long, allow_hyphen_values = true)]
        grid1: Option<String>,
        /// Second gain grid `lo:hi:n`.
        #[arg(long, allow_hyphen_values = true)]
        grid2: Option<String>,
    },
    /// Recompute metrics and compare line force with the crosswind model.
    Report {
        log: PathBuf,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Write plot-data CSV files from a log.
    Figures {
        log: PathBuf,
        /// Comma-separated subset of trajectory, angles, velocity_angles, force_power.
        #[arg(long, value_delimiter = ',')]
        which: Option<Vec<String>>,
        /// Keep every n-th row.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Reelin,
    Wind,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DesignArg {
    Gamma,
    Elevation,
}

enum Failure {
    Usage(String),
    Negative(String),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out_dir) {
        eprintln!("error: cannot create {}: {e}", cli.out_dir.display());
        return ExitCode::from(1);
    }
    let res = match cli.command {
        Command::Run { scenario } => cmd_run(&scenario, &cli.out_dir),
        Command::Sweep { axis, scenario, values } => cmd_sweep(axis, &scenario, values, &cli.out_dir),
        Command::Stability {
            design,
            sweep,
            scenario,
            gains,
            bounds,
            grid1,
            grid2,
        } => cmd_stability(design, sweep, scenario.as_deref(), gains, &bounds, grid1, grid2, &cli.out_dir),
        Command::Report { log, scenario } => cmd_report(&log, scenario.as_deref(), &cli.out_dir),
        Command::Figures { log, which, stride } => cmd_figures(&log, which, stride, &cli.out_dir),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Negative(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn scenario_or_default(path: Option<&Path>) -> Result<Scenario, Failure> {
    match path {
        Some(p) => load_scenario(p).map_err(usage),
        None => Ok(Scenario::default()),
    }
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn print_metrics(metrics: &[CycleMetrics]) {
    println!(
        "{:>5} {:>8} {:>8} {:>11} {:>11} {:>11} {:>6} {:>10} {:>9}",
        "cycle", "start", "dur[s]", "E_trac[J]", "E_retr[J]", "E_net[J]", "duty", "err[rad]", "Fmax[N]"
    );
    for m in metrics {
        println!(
            "{:>5} {:>8.2} {:>8.2} {:>11.0} {:>11.0} {:>11.0} {:>6.3} {:>10.4} {:>9.1}",
            m.index,
            m.t_start,
            m.duration,
            m.traction_energy,
            m.retraction_energy,
            m.net_energy,
            m.duty_cycle,
            m.mean_theta_error_retraction,
            m.peak_force
        );
    }
}

fn cmd_run(path: &Path, out_dir: &Path) -> CmdResult {
    let sc = load_scenario(path).map_err(usage)?;
    let (out, failure) = match run_simulation_partial(&sc) {
        Ok(r) => r,
        Err(SimError::Validation(m)) => return Err(usage(m)),
        Err(e) => return Err(Failure::Negative(format!("run failed: {e}"))),
    };
    let name = stem(path);
    let log_path = out_dir.join(format!("{name}_log.csv"));
    let metrics_path = out_dir.join(format!("{name}_metrics.csv"));
    write_log(&out.log, create(&log_path)?).map_err(usage)?;
    write_metrics_csv(&out.metrics, create(&metrics_path)?).map_err(usage)?;
    println!(
        "retraction torque {:.2} N m, steering feedforward {:.4} m",
        out.supervisor.retraction_torque, out.supervisor.delta_eq
    );
    for s in &out.switches {
        println!("{:9.3} s  {} -> {}", s.t, s.from.name(), s.to.name());
    }
    print_metrics(&out.metrics);
    println!("wrote {} and {}", log_path.display(), metrics_path.display());
    if let Some(e) = failure {
        return Err(Failure::Negative(format!("run flagged: {e}")));
    }
    if out.metrics.is_empty() {
        return Err(Failure::Negative("run flagged: no complete power cycle".into()));
    }
    if out.metrics.iter().all(|m| m.net_energy <= 0.0) {
        return Err(Failure::Negative("run flagged: no positive net energy".into()));
    }
    Ok(())
}

fn cmd_sweep(axis: AxisArg, path: &Path, values: Option<Vec<f64>>, out_dir: &Path) -> CmdResult {
    let sc = load_scenario(path).map_err(usage)?;
    let (axis, label) = match axis {
        AxisArg::Reelin => (SweepAxis::ReelIn, "reelin"),
        AxisArg::Wind => (SweepAxis::Wind, "wind"),
    };
    let values = values.unwrap_or_else(|| axis.default_values());
    if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(usage("sweep values must be finite and nonnegative"));
    }
    let rows = tracking_error_sweep(&sc, axis, &values);
    let csv_path = out_dir.join(format!("{}_sweep_{label}.csv", stem(path)));
    write_sweep_csv(&rows, create(&csv_path)?).map_err(usage)?;
    let fmt = |e: Option<f64>, done: bool| match (e, done) {
        (Some(e), true) => format!("{e:.4}"),
        (Some(e), false) => format!("{e:.4}*"),
        (None, _) => "-".into(),
    };
    println!("{:>7} {:>10} {:>10} {:>10}", label, "gamma_reg", "elev_sf", "sf<=gamma");
    let mut failed = false;
    for r in &rows {
        let g = &r.regularized_gamma;
        let s = &r.elevation_sf;
        failed |= !(g.completed && s.completed);
        println!(
            "{:>7.2} {:>10} {:>10} {:>10}",
            r.value,
            fmt(g.error, g.completed),
            fmt(s.error, s.completed),
            r.elevation_not_worse()
        );
        for f in [&g.failure, &s.failure].into_iter().flatten() {
            println!("        note: {f}");
        }
    }
    println!("wrote {}", csv_path.display());
    if failed {
        return Err(Failure::Negative(
            "sweep flagged: at least one retraction did not complete (* marks partial errors)".into(),
        ));
    }
    Ok(())
}

fn parse_interval(s: &str) -> Result<(String, Interval), Failure> {
    let (name, range) = s.split_once('=').ok_or_else(|| usage(format!("box entry '{s}' is not NAME=LO:HI")))?;
    let (lo, hi) = range.split_once(':').ok_or_else(|| usage(format!("box entry '{s}' is not NAME=LO:HI")))?;
    let lo: f64 = lo.trim().parse().map_err(|_| usage(format!("bad lower bound in '{s}'")))?;
    let hi: f64 = hi.trim().parse().map_err(|_| usage(format!("bad upper bound in '{s}'")))?;
    let iv = Interval::new(lo, hi);
    iv.validate().map_err(|e| usage(format!("{name}: {e}")))?;
    Ok((name.trim().to_string(), iv))
}

fn parse_grid(s: Option<String>, default: (f64, f64, usize)) -> Result<Vec<f64>, Failure> {
    let (lo, hi, n) = match s {
        None => default,
        Some(s) => {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(usage(format!("grid '{s}' is not LO:HI:N")));
            }
            let lo: f64 = parts[0].parse().map_err(|_| usage(format!("bad grid '{s}'")))?;
            let hi: f64 = parts[1].parse().map_err(|_| usage(format!("bad grid '{s}'")))?;
            let n: usize = parts[2].parse().map_err(|_| usage(format!("bad grid '{s}'")))?;
            (lo, hi, n)
        }
    };
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(usage("grid needs LO <= HI and N >= 1"));
    }
    Ok(linspace(lo, hi, n))
}

#[allow(clippy::too_many_arguments)]
fn cmd_stability(
    design: DesignArg,
    sweep: bool,
    scenario: Option<&Path>,
    gains: Option<Vec<f64>>,
    bounds: &[String],
    grid1: Option<String>,
    grid2: Option<String>,
    out_dir: &Path,
) -> CmdResult {
    let sc = scenario_or_default(scenario)?;
    let act = sc.actuator;
    let cfg = sc.controller;
    let opts = LyapunovOptions::default();
    let overrides = bounds.iter().map(|s| parse_interval(s)).collect::<Result<Vec<_>, _>>()?;

    let build: Box<dyn Fn(f64, f64) -> StabilityProblem + Sync>;
    let (g1, g2, names, default_gains, default_grids);
    match design {
        DesignArg::Gamma => {
            let mut b = GammaBox::nominal(&sc.plant);
            for (name, iv) in &overrides {
                match name.as_str() {
                    "k" => b.k = *iv,
                    "wa_p" => b.wa_p = *iv,
                    "r" => b.r = *iv,
                    other => return Err(usage(format!("unknown gamma box parameter '{other}'"))),
                }
            }
            b.validate().map_err(usage)?;
            println!("box: K [{:.4}, {:.4}], |W_a^p| [{}, {}], r [{}, {}]", b.k.lo, b.k.hi, b.wa_p.lo, b.wa_p.hi, b.r.lo, b.r.hi);
            build = Box::new(move |a, c| b.problem(&GammaGains { k_c: a, k_theta: c }, &act));
            let d = GammaGains::from(&cfg);
            default_gains = (d.k_c, d.k_theta);
            names = ("k_c", "k_theta");
            default_grids = ((0.02, 1.0, 25), (-6.0, -0.25, 24));
        }
        DesignArg::Elevation => {
            let mut b = ElevationBox::nominal(&sc.plant, cfg.theta_ref, sc.wind.w0);
            for (name, iv) in &overrides {
                match name.as_str() {
                    "r" => b.r = *iv,
                    "r_dot" => b.r_dot = *iv,
                    "c_gain" => b.c_gain = *iv,
                    other => return Err(usage(format!("unknown elevation box parameter '{other}'"))),
                }
            }
            b.validate().map_err(usage)?;
            println!("box: r [{}, {}], r_dot [{}, {}], C [{:.4}, {:.4}]", b.r.lo, b.r.hi, b.r_dot.lo, b.r_dot.hi, b.c_gain.lo, b.c_gain.hi);
            let (theta_ref, g) = (cfg.theta_ref, sc.plant.env.g);
            build = Box::new(move |a, c| b.problem(&ElevationGains { k1: a, k2: c }, theta_ref, &act, g));
            let d = ElevationGains::from(&cfg);
            default_gains = (d.k1, d.k2);
            names = ("k1", "k2");
            default_grids = ((-5.0, 0.0, 26), (-10.0, 0.0, 26));
        }
    }

    if sweep {
        g1 = parse_grid(grid1, default_grids.0)?;
        g2 = parse_grid(grid2, default_grids.1)?;
        let cells = stability_sweep(&g1, &g2, &build, &opts);
        let label = if design == DesignArg::Gamma { "gamma" } else { "elevation" };
        let path = out_dir.join(format!("stability_{label}.csv"));
        write_stability_csv(&cells, create(&path)?).map_err(usage)?;
        let feasible = cells.iter().filter(|c| c.feasible).count();
        println!("{feasible} of {} gain pairs certified ({} x {})", cells.len(), names.0, names.1);
        println!("wrote {}", path.display());
        return Ok(());
    }

    let (a, c) = match gains {
        Some(v) if v.len() == 2 => (v[0], v[1]),
        Some(_) => return Err(usage("--gains takes two comma-separated values")),
        None => default_gains,
    };
    if !(a.is_finite() && c.is_finite()) {
        return Err(usage("gains must be finite"));
    }
    let problem = build(a, c);
    println!("gains: {} = {a}, {} = {c}; {} vertices", names.0, names.1, problem.vertices.len());
    match find_common_lyapunov(&problem, &opts) {
        Ok(cert) => {
            cert.verify(&problem, opts.tolerance).map_err(Failure::Negative)?;
            let eig = cert.p.symmetric_eigenvalues();
            let mut eig: Vec<f64> = eig.iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            println!("certificate found after {} iterations", cert.iterations);
            println!("eigenvalues of P: {:.4e} {:.4e} {:.4e} {:.4e}", eig[0], eig[1], eig[2], eig[3]);
            for (i, v) in problem.vertices.iter().enumerate() {
                let q = v.transpose() * cert.p + cert.p * v;
                println!("  vertex {i}: lambda_max(A^T P + P A) = {:.4e}", q.symmetric_eigenvalues().max());
            }
            println!("margin {:.4e}", cert.margin);
            Ok(())
        }
        Err(StabilityError::Invalid(m)) => Err(usage(m)),
        Err(e) => Err(Failure::Negative(format!("no certificate: {e}"))),
    }
}

fn load_log(path: &Path) -> Result<Vec<kitepower::sim::LogRow>, Failure> {
    let f = File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let rows = read_log(BufReader::new(f)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(usage(format!("{} holds no rows", path.display())));
    }
    Ok(rows)
}

fn cmd_report(log: &Path, scenario: Option<&Path>, out_dir: &Path) -> CmdResult {
    let sc = scenario_or_default(scenario)?;
    let rows = load_log(log)?;
    let metrics = compute_metrics(&rows, sc.controller.theta_ref);
    print_metrics(&metrics);
    let report = model_comparison_report(&rows, &sc);
    println!("{:>22} {:>8} {:>10} {:>10} {:>9} {:>9}", "phase", "samples", "F_sim[N]", "F_model[N]", "rel", "|rel|");
    let line = |name: &str, s: &kitepower::sim::reports::ForceStats| {
        println!(
            "{:>22} {:>8} {:>10.1} {:>10.1} {:>9.4} {:>9.4}",
            name, s.samples, s.mean_force_sim, s.mean_force_model, s.mean_relative_error, s.mean_abs_relative_error
        );
    };
    for p in Phase::ALL {
        if let Some(s) = report.phase(p) {
            line(p.name(), s);
        }
    }
    if let Some(s) = &report.steady_crosswind {
        line("steady_crosswind", s);
    }
    let name = stem(log);
    let cmp_path = out_dir.join(format!("{name}_comparison.csv"));
    let met_path = out_dir.join(format!("{name}_metrics.csv"));
    write_comparison_csv(&report, create(&cmp_path)?).map_err(usage)?;
    write_metrics_csv(&metrics, create(&met_path)?).map_err(usage)?;
    println!("wrote {} and {}", cmp_path.display(), met_path.display());
    Ok(())
}

fn cmd_figures(log: &Path, which: Option<Vec<String>>, stride: usize, out_dir: &Path) -> CmdResult {
    let rows = load_log(log)?;
    let figs = match which {
        None => Figure::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| Figure::from_name(n.trim()).ok_or_else(|| usage(format!("unknown figure '{n}'"))))
            .collect::<Result<Vec<_>, _>>()?,
    };
    if stride == 0 {
        return Err(usage("stride must be at least 1"));
    }
    let dir = out_dir.join(format!("{}_figures", stem(log)));
    std::fs::create_dir_all(&dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let written = emit_figures(&rows, &figs, &dir, stride).map_err(usage)?;
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
