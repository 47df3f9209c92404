//! Robust stability of the two retraction designs: uncertain closed-loop
//! matrices over a parameter box and a common quadratic Lyapunov function
//! `A_i^T P + P A_i < 0` for every vertex.

use std::io::Write;

use nalgebra::{Matrix4, SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::actuator::ActuatorParams;
use crate::control::ControllerConfig;
use crate::dynamics::{effective_mass, PlantParams};
use crate::geometry::{KinematicState, WindField};
use crate::reduced::{elevation_gain, turn_rate_gain_at};

pub const DEFAULT_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(format!("interval [{}, {}] must be finite", self.lo, self.hi));
        }
        if self.lo > self.hi {
            return Err(format!("interval lower bound {} exceeds upper bound {}", self.lo, self.hi));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    fn corners(&self) -> Vec<f64> {
        if self.is_degenerate() {
            vec![self.lo]
        } else {
            vec![self.lo, self.hi]
        }
    }
}

/// Intervals of the parameters a closed-loop matrix depends on affinely.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    pub intervals: Vec<Interval>,
}

impl ParamBox {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.intervals.iter().try_for_each(Interval::validate)
    }

    /// All corner points; a degenerate interval contributes one value.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.intervals.len())];
        for iv in &self.intervals {
            out = out
                .into_iter()
                .flat_map(|p| {
                    iv.corners().into_iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityProblem {
    pub vertices: Vec<Matrix4<f64>>,
}

pub fn enumerate_vertices<F>(bounds: &ParamBox, builder: F) -> StabilityProblem
where
    F: Fn(&[f64]) -> Matrix4<f64>,
{
    let mut vertices: Vec<Matrix4<f64>> = Vec::new();
    for c in bounds.corners() {
        let a = builder(&c);
        if !vertices.contains(&a) {
            vertices.push(a);
        }
    }
    StabilityProblem { vertices }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaGains {
    pub k_c: f64,
    pub k_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElevationGains {
    pub k1: f64,
    pub k2: f64,
}

impl From<&ControllerConfig> for GammaGains {
    fn from(c: &ControllerConfig) -> Self {
        Self {
            k_c: c.k_c_retraction,
            k_theta: c.k_theta,
        }
    }
}

impl From<&ControllerConfig> for ElevationGains {
    fn from(c: &ControllerConfig) -> Self {
        Self { k1: c.k1, k2: c.k2 }
    }
}

fn actuator_rows(m: &mut Matrix4<f64>, act: &ActuatorParams) {
    let w2 = act.omega_cl * act.omega_cl;
    m[(2, 3)] = 1.0;
    m[(3, 2)] = -w2;
    m[(3, 3)] = -2.0 * act.zeta_cl * act.omega_cl;
}

/// Velocity-angle design in terms of `K` and `a = |W_a^p| / r`.
fn gamma_matrix(k: f64, a: f64, gains: &GammaGains, act: &ActuatorParams) -> Matrix4<f64> {
    let kt = gains.k_theta;
    let mut m = Matrix4::zeros();
    m[(0, 0)] = kt * a;
    m[(0, 1)] = -a;
    m[(1, 0)] = kt * kt * a;
    m[(1, 1)] = -kt * a;
    m[(1, 2)] = -k * act.k_delta;
    actuator_rows(&mut m, act);
    m[(3, 1)] = gains.k_c * act.omega_cl * act.omega_cl;
    m
}

/// Closed loop of the regularized velocity-angle design, state
/// `[d_theta, d_gamma_r, delta_m, delta_m_dot]`.
pub fn build_acl_gamma(k: f64, wa_p: f64, r: f64, gains: &GammaGains, act: &ActuatorParams) -> Matrix4<f64> {
    gamma_matrix(k, wa_p / r, gains, act)
}

/// Elevation design in terms of `s = 1/r`, `q = r_dot/r` and `C`.
fn elevation_matrix(s: f64, q: f64, c: f64, theta_ref: f64, gains: &ElevationGains, act: &ActuatorParams, g: f64) -> Matrix4<f64> {
    let w2 = act.omega_cl * act.omega_cl;
    let mut m = Matrix4::zeros();
    m[(0, 1)] = 1.0;
    m[(1, 0)] = g * theta_ref.sin() * s;
    m[(1, 1)] = -2.0 * q;
    m[(1, 2)] = -c * act.k_delta;
    actuator_rows(&mut m, act);
    m[(3, 0)] = -w2 * gains.k1;
    m[(3, 1)] = -w2 * gains.k2;
    m
}

/// Closed loop of the elevation state feedback, state
/// `[d_theta, d_theta_dot, delta_m, delta_m_dot]`.
pub fn build_acl_elevation(
    r: f64,
    r_dot: f64,
    c_gain: f64,
    theta_ref: f64,
    gains: &ElevationGains,
    act: &ActuatorParams,
    g: f64,
) -> Matrix4<f64> {
    elevation_matrix(1.0 / r, r_dot / r, c_gain, theta_ref, gains, act, g)
}

/// Bounds for the velocity-angle design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBox {
    /// Turn-rate gain [rad/(m s)].
    pub k: Interval,
    /// Apparent wind speed in the tangent plane [m/s].
    pub wa_p: Interval,
    pub r: Interval,
}

impl GammaBox {
    /// `K` within a factor of two of its value at 5 m/s apparent wind and
    /// 100 m of tether, `|W_a^p|` in [2, 8] m/s, r in [50, 150] m.
    pub fn nominal(plant: &PlantParams) -> Self {
        let m = effective_mass(&plant.wing, &plant.tether, 100.0);
        let k0 = turn_rate_gain_at(5.0, m, &plant.wing, &plant.env);
        Self {
            k: Interval::new(0.5 * k0, 2.0 * k0),
            wa_p: Interval::new(2.0, 8.0),
            r: Interval::new(50.0, 150.0),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.k.validate()?;
        self.wa_p.validate()?;
        self.r.validate()?;
        if !(self.k.lo > 0.0) {
            return Err("K must be positive".into());
        }
        if !(self.wa_p.lo >= 0.0) {
            return Err("|W_a^p| must be nonnegative".into());
        }
        if !(self.r.lo > 0.0) {
            return Err("r must be positive".into());
        }
        Ok(())
    }

    /// Box over `(K, |W_a^p|/r)`, enclosing every ratio the bounds allow.
    pub fn composite(&self) -> ParamBox {
        ParamBox::new(vec![self.k, Interval::new(self.wa_p.lo / self.r.hi, self.wa_p.hi / self.r.lo)])
    }

    pub fn problem(&self, gains: &GammaGains, act: &ActuatorParams) -> StabilityProblem {
        enumerate_vertices(&self.composite(), |p| gamma_matrix(p[0], p[1], gains, act))
    }
}

/// Bounds for the elevation design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElevationBox {
    pub r: Interval,
    pub r_dot: Interval,
    /// Elevation steering gain [1/(m s^2)].
    pub c_gain: Interval,
}

impl ElevationBox {
    /// r in [50, 150] m, reel-in between 0 and 3.5 m/s and the steering
    /// gain between 0.75 and 2 times its value at the left border, 100 m,
    /// 2.5 m/s reel-in, `theta_ref` and `w0`.
    pub fn nominal(plant: &PlantParams, theta_ref: f64, w0: f64) -> Self {
        let c0 = nominal_elevation_gain(plant, theta_ref, w0);
        Self {
            r: Interval::new(50.0, 150.0),
            r_dot: Interval::new(-3.5, 0.0),
            c_gain: Interval::new(0.75 * c0, 2.0 * c0),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.r.validate()?;
        self.r_dot.validate()?;
        self.c_gain.validate()?;
        if !(self.r.lo > 0.0) {
            return Err("r must be positive".into());
        }
        Ok(())
    }

    /// Box over `(1/r, r_dot/r, C)`.
    pub fn composite(&self) -> ParamBox {
        let q: Vec<f64> = [self.r_dot.lo, self.r_dot.hi]
            .iter()
            .flat_map(|rd| [rd / self.r.lo, rd / self.r.hi])
            .collect();
        let q_lo = q.iter().cloned().fold(f64::INFINITY, f64::min);
        let q_hi = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ParamBox::new(vec![
            Interval::new(1.0 / self.r.hi, 1.0 / self.r.lo),
            Interval::new(q_lo, q_hi),
            self.c_gain,
        ])
    }

    pub fn problem(&self, gains: &ElevationGains, theta_ref: f64, act: &ActuatorParams, g: f64) -> StabilityProblem {
        enumerate_vertices(&self.composite(), |p| elevation_matrix(p[0], p[1], p[2], theta_ref, gains, act, g))
    }
}

/// `C` at the left border, 100 m of tether and 2.5 m/s reel-in.
pub fn nominal_elevation_gain(plant: &PlantParams, theta_ref: f64, w0: f64) -> f64 {
    let wind = WindField::uniform(w0, 0.0);
    let state = KinematicState {
        phi: std::f64::consts::FRAC_PI_2,
        theta: theta_ref,
        r: 100.0,
        phi_dot: 0.0,
        theta_dot: 0.0,
        r_dot: -2.5,
    };
    elevation_gain(&state, &wind, plant)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Lyapunov matrix scaled to unit spectral norm.
    pub p: Matrix4<f64>,
    /// Smallest `-lambda_max(A_i^T P + P A_i)` over the vertices.
    pub margin: f64,
    pub iterations: usize,
}

impl Certificate {
    /// Recomputes the eigenvalues of `P` and of every vertex inequality.
    pub fn verify(&self, problem: &StabilityProblem, tolerance: f64) -> Result<(), String> {
        let (lo, hi) = sym_range(&self.p);
        if !(lo > 0.0) {
            return Err(format!("P has eigenvalue {lo}"));
        }
        for (i, a) in problem.vertices.iter().enumerate() {
            let top = lyapunov_max_eig(a, &self.p);
            if !(top <= -tolerance * hi) {
                return Err(format!("vertex {i}: lambda_max = {top}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("vertex {index} is not Hurwitz (spectral abscissa {abscissa:.4e})")]
    NonHurwitzVertex { index: usize, abscissa: f64 },
    #[error("no common Lyapunov matrix found in {iterations} iterations; vertices {violating:?} violate the best iterate (margin {best_margin:.3e})")]
    Infeasible {
        iterations: usize,
        violating: Vec<usize>,
        best_margin: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

fn sym_range(m: &Matrix4<f64>) -> (f64, f64) {
    let e = ((m + m.transpose()) * 0.5).symmetric_eigenvalues();
    (e.min(), e.max())
}

fn lyapunov_max_eig(a: &Matrix4<f64>, p: &Matrix4<f64>) -> f64 {
    sym_range(&(a.transpose() * p + p * a)).1
}

fn spectral_abscissa(a: &Matrix4<f64>) -> f64 {
    a.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Worst margin of `p` normalized to unit norm, and the violating vertices.
fn evaluate(vertices: &[Matrix4<f64>], p: &Matrix4<f64>, tolerance: f64) -> (f64, Vec<usize>) {
    let (lo, hi) = sym_range(p);
    if !(lo > 0.0 && hi.is_finite()) {
        return (f64::NEG_INFINITY, (0..vertices.len()).collect());
    }
    let mut margin = f64::INFINITY;
    let mut bad = Vec::new();
    for (i, a) in vertices.iter().enumerate() {
        let m = -lyapunov_max_eig(a, p) / hi;
        if !(m >= tolerance) {
            bad.push(i);
        }
        margin = margin.min(m);
    }
    (margin, bad)
}

/// Diagonal similarity `D^-1 A D` that evens out row and column norms.
fn balancing(a: &Matrix4<f64>) -> SVector<f64, 4> {
    let mut d = SVector::<f64, 4>::repeat(1.0);
    for _ in 0..50 {
        let mut changed = false;
        for i in 0..4 {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..4 {
                if j != i {
                    c += (a[(j, i)] * d[i] / d[j]).powi(2);
                    r += (a[(i, j)] * d[j] / d[i]).powi(2);
                }
            }
            if c > 0.0 && r > 0.0 {
                let f = (r / c).sqrt().sqrt();
                if (f - 1.0).abs() > 1e-3 {
                    d[i] *= f;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

type Sym = SVector<f64, 10>;

const SYM_INDEX: [(usize, usize); 10] = [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Coordinates of a symmetric matrix in a Frobenius-orthonormal basis.
fn to_sym(m: &Matrix4<f64>) -> Sym {
    let s = std::f64::consts::SQRT_2;
    Sym::from_fn(|k, _| {
        let (i, j) = SYM_INDEX[k];
        if i == j {
            m[(i, i)]
        } else {
            0.5 * (m[(i, j)] + m[(j, i)]) * s
        }
    })
}

fn from_sym(v: &Sym) -> Matrix4<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Matrix4::zeros();
    for (k, &(i, j)) in SYM_INDEX.iter().enumerate() {
        if i == j {
            m[(i, i)] = v[k];
        } else {
            m[(i, j)] = v[k] * s;
            m[(j, i)] = v[k] * s;
        }
    }
    m
}

/// Projection onto `{X : X >= floor I}`.
fn clip_below(m: &Matrix4<f64>, floor: f64) -> Matrix4<f64> {
    let e = ((m + m.transpose()) * 0.5).symmetric_eigen();
    let vals = e.eigenvalues.map(|v| v.max(floor));
    e.eigenvectors * Matrix4::from_diagonal(&vals) * e.eigenvectors.transpose()
}

/// Iterations spent on alternating projections before the barrier stage.
const PROJECTION_ITERATIONS: usize = 500;

/// Searches for `P > 0` with `A_i^T P + P A_i <= -tolerance |P| I` at every
/// vertex.
///
/// Stages: the Lyapunov solution of the average vertex matrix, alternating
/// projections between the shifted cone `{P >= I, Q_i >= mu I}` and the
/// affine set `Q_i = -(A_i^T P + P A_i)`, then a log-det barrier method on
/// `max t` subject to `Q_i >= t I`, `t I <= P <= I`. Every candidate is
/// accepted only after an eigenvalue check in the original coordinates.
pub fn find_common_lyapunov(problem: &StabilityProblem, opts: &LyapunovOptions) -> Result<Certificate, StabilityError> {
    let vs = &problem.vertices;
    if vs.is_empty() {
        return Err(StabilityError::Invalid("no vertices".into()));
    }
    if vs.iter().any(|a| a.iter().any(|v| !v.is_finite())) {
        return Err(StabilityError::Invalid("vertex matrices must be finite".into()));
    }
    for (index, a) in vs.iter().enumerate() {
        let abscissa = spectral_abscissa(a);
        if !(abscissa < 0.0) {
            return Err(StabilityError::NonHurwitzVertex { index, abscissa });
        }
    }
    let tol = opts.tolerance;
    let mut best = (f64::NEG_INFINITY, (0..vs.len()).collect::<Vec<_>>());
    let mut check = |p: &Matrix4<f64>, iterations: usize| -> Option<Certificate> {
        let p = (p + p.transpose()) * 0.5;
        let hi = sym_range(&p).1;
        if !(hi > 0.0 && hi.is_finite()) {
            return None;
        }
        let p = p / hi;
        let (margin, bad) = evaluate(vs, &p, tol);
        if bad.is_empty() {
            return Some(Certificate { p, margin, iterations });
        }
        if margin > best.0 {
            best = (margin, bad);
        }
        None
    };

    let mean = vs.iter().fold(Matrix4::zeros(), |acc, a| acc + a) / vs.len() as f64;
    let warm = lyapunov_identity(&mean);
    if let Some(c) = warm.as_ref().and_then(|p| check(p, 0)) {
        return Ok(c);
    }

    // Later stages work on D^-1 A D scaled to unit norm; P = D^-1 P~ D^-1.
    let d = balancing(&mean);
    let d_inv = Matrix4::from_diagonal(&d.map(|v| 1.0 / v));
    let to_original = |pt: &Matrix4<f64>| d_inv * pt * d_inv;
    let balanced: Vec<Matrix4<f64>> = vs.iter().map(|a| d_inv * a * Matrix4::from_diagonal(&d)).collect();
    let scale = balanced.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let balanced: Vec<Matrix4<f64>> = balanced.iter().map(|a| a / scale).collect();
    let mean_b = balanced.iter().fold(Matrix4::zeros(), |acc, a| acc + a) / balanced.len() as f64;
    let warm_b = lyapunov_identity(&mean_b)
        .filter(|p| sym_range(p).0 > 0.0)
        .unwrap_or_else(Matrix4::identity);

    let n_proj = opts.max_iterations.min(PROJECTION_ITERATIONS);
    if let Some(c) = alternating_projections(&balanced, &warm_b, n_proj, |p, it| check(&to_original(p), it)) {
        return Ok(c);
    }
    let budget = opts.max_iterations - n_proj;
    // The barrier stage only needs the unit-norm scaling.
    let norm = vs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let scaled: Vec<Matrix4<f64>> = vs.iter().map(|a| a / norm).collect();
    let (found, used) = barrier_search(&scaled, budget, |p, it| check(p, n_proj + it));
    if let Some(c) = found {
        return Ok(c);
    }
    let (best_margin, violating) = best;
    Err(StabilityError::Infeasible {
        iterations: n_proj + used,
        violating,
        best_margin,
    })
}

/// Solution of `A^T P + P A = -I`.
fn lyapunov_identity(a: &Matrix4<f64>) -> Option<Matrix4<f64>> {
    crate::linalg::solve_lyapunov(
        &nalgebra::DMatrix::from_column_slice(4, 4, a.as_slice()),
        &nalgebra::DMatrix::identity(4, 4),
    )
    .map(|p| Matrix4::from_column_slice(p.as_slice()))
}

fn lyapunov_operator(a: &Matrix4<f64>) -> SMatrix<f64, 10, 10> {
    let mut m = SMatrix::<f64, 10, 10>::zeros();
    for k in 0..10 {
        let mut e = Sym::zeros();
        e[k] = 1.0;
        let p = from_sym(&e);
        m.set_column(k, &to_sym(&-(a.transpose() * p + p * a)));
    }
    m
}

fn alternating_projections<F>(vs: &[Matrix4<f64>], warm: &Matrix4<f64>, iterations: usize, mut check: F) -> Option<Certificate>
where
    F: FnMut(&Matrix4<f64>, usize) -> Option<Certificate>,
{
    let ops: Vec<SMatrix<f64, 10, 10>> = vs.iter().map(lyapunov_operator).collect();
    let mut normal = SMatrix::<f64, 10, 10>::identity();
    for m in &ops {
        normal += m.transpose() * m;
    }
    let chol = normal.cholesky()?;
    let mut p = to_sym(&(warm / sym_range(warm).0));
    let mut qs: Vec<Sym> = ops.iter().map(|m| m * p).collect();
    let mu = 1e-3;
    for it in 1..=iterations {
        let mut rhs = to_sym(&clip_below(&from_sym(&p), 1.0));
        for (m, q) in ops.iter().zip(&qs) {
            rhs += m.transpose() * to_sym(&clip_below(&from_sym(q), mu));
        }
        p = chol.solve(&rhs);
        qs = ops.iter().map(|m| m * p).collect();
        if it % 10 == 0 {
            if let Some(c) = check(&from_sym(&p), it) {
                return Some(c);
            }
        }
    }
    None
}

type Var = SVector<f64, 11>;

/// `S(x) = s0 + sum_k x_k s_k` over `x = (P in the symmetric basis, t)`.
struct AffineBlock {
    s0: Matrix4<f64>,
    sk: Vec<Matrix4<f64>>,
}

impl AffineBlock {
    fn at(&self, x: &Var) -> Matrix4<f64> {
        self.sk.iter().zip(x.iter()).fold(self.s0, |acc, (s, v)| acc + s * *v)
    }
}

fn log_det(m: &Matrix4<f64>) -> Option<f64> {
    let c = m.cholesky()?;
    Some(2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

/// Barrier method for `max t` subject to `-(A_i^T P + P A_i) >= t I`,
/// `P >= t I`, `P <= I`. Candidates with `t > 0` go through `check`.
/// Returns the certificate, if any, and the Newton steps used.
fn barrier_search<F>(vs: &[Matrix4<f64>], budget: usize, mut check: F) -> (Option<Certificate>, usize)
where
    F: FnMut(&Matrix4<f64>, usize) -> Option<Certificate>,
{
    let basis: Vec<Matrix4<f64>> = (0..10)
        .map(|k| {
            let mut e = Sym::zeros();
            e[k] = 1.0;
            from_sym(&e)
        })
        .collect();
    let eye = Matrix4::identity();
    let mut blocks: Vec<AffineBlock> = vs
        .iter()
        .map(|a| AffineBlock {
            s0: Matrix4::zeros(),
            sk: basis.iter().map(|e| -(a.transpose() * e + e * a)).chain([-eye]).collect(),
        })
        .collect();
    blocks.push(AffineBlock {
        s0: Matrix4::zeros(),
        sk: basis.iter().copied().chain([-eye]).collect(),
    });
    blocks.push(AffineBlock {
        s0: eye,
        sk: basis.iter().map(|e| -e).chain([Matrix4::zeros()]).collect(),
    });

    // Strictly feasible start: P = I/2 and t below every eigenvalue.
    let mut x = Var::zeros();
    x.fixed_rows_mut::<10>(0).copy_from(&to_sym(&(eye * 0.5)));
    let lowest = blocks[..blocks.len() - 1]
        .iter()
        .map(|b| sym_range(&b.at(&x)).0)
        .fold(f64::INFINITY, f64::min);
    x[10] = lowest - 1.0;

    let barrier = |x: &Var, s: f64| -> f64 {
        let mut v = -s * x[10];
        for b in &blocks {
            match log_det(&b.at(x)) {
                Some(l) => v -= l,
                None => return f64::INFINITY,
            }
        }
        v
    };
    let m = 4.0 * blocks.len() as f64;
    let mut s = 1.0;
    let mut used = 0;
    // After the first certificate, finish this stage and one more to
    // improve the margin.
    let mut found: Option<Certificate> = None;
    let mut stages_left = 2;
    while used < budget {
        for _ in 0..100 {
            if used >= budget {
                break;
            }
            used += 1;
            let mut g = Var::zeros();
            g[10] = -s;
            let mut h = SMatrix::<f64, 11, 11>::zeros();
            let mut singular = false;
            for b in &blocks {
                let Some(inv) = b.at(&x).try_inverse() else {
                    singular = true;
                    break;
                };
                let w: Vec<Matrix4<f64>> = b.sk.iter().map(|sk| inv * sk).collect();
                for k in 0..11 {
                    g[k] -= w[k].trace();
                    for l in k..11 {
                        let v = w[k].component_mul(&w[l].transpose()).sum();
                        h[(k, l)] += v;
                        if l != k {
                            h[(l, k)] += v;
                        }
                    }
                }
            }
            let dx = match (singular, h.cholesky()) {
                (false, Some(c)) => -c.solve(&g),
                _ => return (found, used),
            };
            let decrement = -g.dot(&dx);
            let f0 = barrier(&x, s);
            let mut step = 1.0;
            while barrier(&(x + dx * step), s) > f0 - 0.25 * step * decrement && step > 1e-12 {
                step *= 0.5;
            }
            x += dx * step;
            if x[10] > 0.0 {
                let p = from_sym(&x.fixed_rows::<10>(0).into_owned());
                if let Some(c) = check(&p, used) {
                    if found.as_ref().is_none_or(|f| c.margin > f.margin) {
                        found = Some(c);
                    }
                }
            }
            if decrement < 2e-10 {
                break;
            }
        }
        if found.is_some() {
            stages_left -= 1;
            if stages_left == 0 {
                break;
            }
        }
        if m / s < 1e-10 {
            break;
        }
        s *= 10.0;
    }
    (found, used)
}

/// One gain pair of a feasibility sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCell {
    pub gain1: f64,
    pub gain2: f64,
    pub feasible: bool,
    /// Certificate margin when feasible. Otherwise the best margin reached
    /// (nonpositive), or minus the largest spectral abscissa when a vertex
    /// is not Hurwitz.
    pub margin: f64,
}

pub fn classify(gain1: f64, gain2: f64, problem: &StabilityProblem, opts: &LyapunovOptions) -> StabilityCell {
    let (feasible, margin) = match find_common_lyapunov(problem, opts) {
        Ok(c) => (true, c.margin),
        Err(StabilityError::NonHurwitzVertex { .. }) => {
            let worst = problem.vertices.iter().map(spectral_abscissa).fold(f64::NEG_INFINITY, f64::max);
            (false, -worst)
        }
        Err(StabilityError::Infeasible { best_margin, .. }) => (false, best_margin.min(0.0)),
        Err(StabilityError::Invalid(_)) => (false, f64::NAN),
    };
    StabilityCell {
        gain1,
        gain2,
        feasible,
        margin,
    }
}

/// Feasibility of every gain pair in `grid1 x grid2`; `build` maps a pair to
/// its vertex set. Rows are ordered with `gain2` varying fastest.
pub fn stability_sweep<F>(grid1: &[f64], grid2: &[f64], build: F, opts: &LyapunovOptions) -> Vec<StabilityCell>
where
    F: Fn(f64, f64) -> StabilityProblem + Sync,
{
    let pairs: Vec<(f64, f64)> = grid1.iter().flat_map(|&a| grid2.iter().map(move |&b| (a, b))).collect();
    let run = |&(a, b): &(f64, f64)| classify(a, b, &build(a, b), opts);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        pairs.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        pairs.iter().map(run).collect()
    }
}

pub fn write_stability_csv<W: Write>(cells: &[StabilityCell], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

/// `n` evenly spaced values from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
