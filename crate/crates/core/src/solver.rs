//! The envelope linesearch: Bregman forward-backward steps safeguarded by a
//! sufficient-decrease test on the envelope, along arbitrary directions.
//!
//! Each iteration computes `x̄ᵏ ∈ T(xᵏ)`, stops once `D_h(x̄ᵏ, xᵏ) ≤ ε`, and
//! otherwise tries `xᵏ⁺¹ = (1 − τ)x̄ᵏ + τ(xᵏ + dᵏ)` for `τ = 1, ½, ¼, …` until
//!
//! ```text
//! φ_γ(xᵏ⁺¹) ≤ φ_γ(xᵏ) − σ·D_h(x̄ᵏ, xᵏ).
//! ```
//!
//! After `i_max` failed halvings the plain step `xᵏ⁺¹ = x̄ᵏ` is taken. Every
//! trial costs one forward-backward evaluation, and the accepted trial's
//! evaluation is reused by the next iteration.

use std::fmt;

use log::warn;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::directions::DirectionProvider;
use crate::envelope::{fb_operator, FbStep};
use crate::error::{check_dim, Error, Result};
use crate::problem::Problem;

/// Halvings after which an unbounded linesearch falls back to the plain
/// step; `2⁻¹¹⁰⁰` is zero in double precision, so the candidate is `x̄ᵏ` anyway.
pub const BACKTRACK_HARD_LIMIT: usize = 1100;

/// Cap on the number of times the adaptive rule may double `L`.
pub const MAX_L_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gamma: f64,
    pub sigma: f64,
    pub epsilon: f64,
    /// Backtracking cap; `None` is unbounded.
    pub i_max: Option<usize>,
    pub max_iters: usize,
    pub adaptive: bool,
    /// Starting estimate of `L_f` in adaptive mode.
    pub initial_l: Option<f64>,
}

impl SolverConfig {
    /// `γ = 0.95/L`, `σ = 0.45·(1 − γL)/γ`, unbounded backtracking, 10000 iterations.
    pub fn defaults_for(lipschitz: f64) -> Self {
        let (gamma, sigma) = default_gamma_sigma(lipschitz);
        SolverConfig {
            gamma,
            sigma,
            epsilon: 1e-10,
            i_max: None,
            max_iters: 10_000,
            adaptive: false,
            initial_l: None,
        }
    }

    /// Adaptive configuration starting from the estimate `initial_l`.
    pub fn adaptive_from(initial_l: f64) -> Self {
        let (gamma, sigma) = default_gamma_sigma(initial_l);
        SolverConfig {
            adaptive: true,
            initial_l: Some(initial_l),
            gamma,
            sigma,
            ..SolverConfig::defaults_for(initial_l)
        }
    }

    pub fn with_gamma_sigma(mut self, gamma: f64, sigma: f64) -> Self {
        self.gamma = gamma;
        self.sigma = sigma;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_i_max(mut self, i_max: Option<usize>) -> Self {
        self.i_max = i_max;
        self
    }

    /// Checks the parameter ranges against the modulus `lipschitz`:
    /// `0 < γ < 1/L_f` and `0 < σ < (1 − γL_f)/γ` unless adaptive.
    pub fn validate(&self, lipschitz: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.epsilon >= 0.0) {
            return bad(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if self.adaptive {
            match self.initial_l {
                Some(l) if l > 0.0 && l.is_finite() => {}
                other => {
                    return bad(format!(
                        "adaptive mode needs a positive initial L, got {other:?}"
                    ))
                }
            }
            return Ok(());
        }
        if self.gamma * lipschitz >= 1.0 {
            return bad(format!(
                "gamma = {} violates gamma < 1/L_f = {}",
                self.gamma,
                1.0 / lipschitz
            ));
        }
        let window = (1.0 - self.gamma * lipschitz) / self.gamma;
        if self.sigma >= window {
            return bad(format!(
                "sigma = {} is outside (0, (1 - gamma*L_f)/gamma) = (0, {window})",
                self.sigma
            ));
        }
        Ok(())
    }
}

fn default_gamma_sigma(lipschitz: f64) -> (f64, f64) {
    let gamma = if lipschitz > 0.0 {
        0.95 / lipschitz
    } else {
        1.0
    };
    let sigma = 0.45 * (1.0 - gamma * lipschitz) / gamma;
    (gamma, sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    RangeViolation,
    NumericalFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIters => "MaxIters",
            SolveStatus::RangeViolation => "RangeViolation",
            SolveStatus::NumericalFailure => "NumericalFailure",
        };
        f.write_str(s)
    }
}

/// Diagnostics of iteration `k`, taken at `xᵏ`.
///
/// The row of the iteration that meets the stopping test carries no step:
/// `tau = 0`, `backtracks = 0`, `direction_norm = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Accepted `τ`; 0 when the plain step `x̄ᵏ` was taken.
    pub tau: f64,
    pub backtracks: usize,
    /// `φ_γ(xᵏ)`.
    pub bfbe_value: f64,
    /// `φ(x̄ᵏ)`.
    pub phi_at_xbar: f64,
    /// `D_h(x̄ᵏ, xᵏ)`.
    pub bregman_residual: f64,
    /// `‖xᵏ − x̄ᵏ‖`.
    pub euclid_residual: f64,
    pub current_gamma: f64,
    pub current_l: f64,
    pub current_sigma: f64,
    pub direction_norm: f64,
    pub accepted_unit_step: bool,
    /// `dist(xᵏ, X⋆)` when the problem knows its solution set.
    pub solution_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// `x̄ᵏ` at termination.
    pub x_hat: DVector<f64>,
    /// `xᵏ` at termination.
    pub x_last: DVector<f64>,
    pub iterations: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub total_prox_calls: usize,
    pub final_gamma: f64,
    pub final_sigma: f64,
    pub final_l: f64,
    /// Number of times the adaptive rule doubled `L`.
    pub l_doublings: usize,
    pub message: Option<String>,
}

impl SolveResult {
    pub fn final_residual(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.bregman_residual)
    }

    /// Stationarity bound at `x̂`; see [`residual_certificate`].
    pub fn certificate(
        &self,
        problem: &Problem,
        region_l_h: f64,
        region_sigma_h: f64,
    ) -> Result<f64> {
        residual_certificate(
            problem,
            self.final_gamma,
            &self.x_last,
            &self.x_hat,
            region_l_h,
            region_sigma_h,
        )
    }
}

/// Bound on `dist(0, ∂̂φ(x̄))` from the forward-backward residual:
///
/// ```text
/// ((1 + γL_f)/γ) · √(2 L_h² / σ_h · D_h(x̄, x))
/// ```
///
/// where `L_h` and `σ_h` are Lipschitz and strong-convexity moduli of `∇h`
/// on a region containing `x` and `x̄` (both 1 for the Euclidean kernel).
pub fn residual_certificate(
    problem: &Problem,
    gamma: f64,
    x: &DVector<f64>,
    x_bar: &DVector<f64>,
    region_l_h: f64,
    region_sigma_h: f64,
) -> Result<f64> {
    if !(region_sigma_h > 0.0) {
        return Err(Error::Parameter(format!(
            "strong convexity modulus must be positive, got {region_sigma_h}"
        )));
    }
    if !(gamma > 0.0) || !(region_l_h >= 0.0) {
        return Err(Error::Parameter(format!(
            "need gamma > 0 and L_h >= 0, got gamma = {gamma}, L_h = {region_l_h}"
        )));
    }
    check_dim(problem.dimension(), x.len())?;
    check_dim(problem.dimension(), x_bar.len())?;
    let d = problem.kernel.bregman_distance(x_bar, x);
    Ok(certificate_value(
        gamma,
        problem.lipschitz(),
        d,
        region_l_h,
        region_sigma_h,
    ))
}

/// The certificate formula evaluated at a given residual `D`.
pub fn certificate_value(gamma: f64, lipschitz: f64, residual: f64, l_h: f64, sigma_h: f64) -> f64 {
    (1.0 + gamma * lipschitz) / gamma * (2.0 * l_h * l_h / sigma_h * residual).sqrt()
}

struct RunState {
    gamma: f64,
    sigma: f64,
    l: f64,
    prox_calls: usize,
    doublings: usize,
}

enum Stop {
    Status(SolveStatus, String),
    /// Adaptive mode only: the step left the kernel range, so `L` is too small.
    Enlarge,
}

impl Stop {
    fn into_status(self) -> (SolveStatus, String) {
        match self {
            Stop::Status(s, m) => (s, m),
            Stop::Enlarge => (
                SolveStatus::RangeViolation,
                "step left the kernel range".into(),
            ),
        }
    }
}

fn double_l(
    st: &mut RunState,
    directions: &mut dyn DirectionProvider,
) -> std::result::Result<(), Stop> {
    if st.doublings >= MAX_L_DOUBLINGS {
        return Err(Stop::Status(
            SolveStatus::NumericalFailure,
            format!("L doubled more than {MAX_L_DOUBLINGS} times"),
        ));
    }
    st.gamma *= 0.5;
    st.l *= 2.0;
    st.sigma *= 2.0;
    st.doublings += 1;
    directions.reset();
    Ok(())
}

/// `fb_operator` at `x`; in adaptive mode a range violation doubles `L` and retries.
fn fb_at(
    problem: &Problem,
    adaptive: bool,
    st: &mut RunState,
    x: &DVector<f64>,
    directions: &mut dyn DirectionProvider,
) -> std::result::Result<FbStep, Stop> {
    loop {
        st.prox_calls += 1;
        match fb_operator(problem, st.gamma, x) {
            Ok(s) => return Ok(s),
            Err(Error::RangeViolation(_)) if adaptive => double_l(st, directions)?,
            Err(e) => return Err(classify(e)),
        }
    }
}

fn classify(err: Error) -> Stop {
    match err {
        Error::RangeViolation(msg) => Stop::Status(SolveStatus::RangeViolation, msg),
        other => Stop::Status(SolveStatus::NumericalFailure, other.to_string()),
    }
}

/// Runs the envelope linesearch from `x0`.
///
/// Returns `Err` only for invalid input (configuration, dimension, `x0`
/// outside the kernel interior); runtime failures are reported through
/// [`SolveResult::status`].
///
/// In adaptive mode a forward-backward step that leaves the kernel range is
/// read as an underestimated `L` and handled by the same doubling rule.
pub fn bella_solve(
    problem: &Problem,
    config: &SolverConfig,
    x0: &DVector<f64>,
    directions: &mut dyn DirectionProvider,
) -> Result<SolveResult> {
    let lipschitz = problem.lipschitz();
    config.validate(lipschitz)?;
    check_dim(problem.dimension(), x0.len())?;
    if !problem.kernel.is_interior(x0) {
        return Err(Error::OutsideDomain(format!(
            "starting point is not in the interior of dom {}",
            problem.kernel.name()
        )));
    }
    if !problem.kernel.is_coercive() {
        warn!(
            "kernel {} is not 1-coercive; convergence guarantees do not apply",
            problem.kernel.name()
        );
    }

    let mut st = RunState {
        gamma: config.gamma,
        sigma: config.sigma,
        l: if config.adaptive {
            config.initial_l.unwrap_or(lipschitz)
        } else {
            lipschitz
        },
        prox_calls: 0,
        doublings: 0,
    };
    let mut records = Vec::new();
    let mut x = x0.clone();
    let mut sigma_warned = false;

    let finish = |st: &RunState,
                  records: Vec<IterationRecord>,
                  x: DVector<f64>,
                  x_hat: DVector<f64>,
                  status: SolveStatus,
                  message: Option<String>| SolveResult {
        x_hat,
        x_last: x,
        iterations: records,
        status,
        total_prox_calls: st.prox_calls,
        final_gamma: st.gamma,
        final_sigma: st.sigma,
        final_l: st.l,
        l_doublings: st.doublings,
        message,
    };

    let mut fb = match fb_at(problem, config.adaptive, &mut st, &x, directions) {
        Ok(s) => s,
        Err(stop) => {
            let (status, msg) = stop.into_status();
            return Ok(finish(&st, records, x.clone(), x, status, Some(msg)));
        }
    };

    let mut k = 0usize;
    loop {
        if config.adaptive {
            if let Err(stop) = adaptive_lf_guard(problem, &mut st, &mut fb, directions) {
                let (status, msg) = stop.into_status();
                let x_hat = fb.x_bar.clone();
                return Ok(finish(&st, records, x, x_hat, status, Some(msg)));
            }
            let window = (1.0 - st.gamma * lipschitz) / st.gamma;
            if !sigma_warned && lipschitz > 0.0 && st.sigma >= window {
                warn!(
                    "adaptive sigma = {} left the nominal window (0, {window})",
                    st.sigma
                );
                sigma_warned = true;
            }
        }

        let phi_at_xbar = problem.smooth.value(&fb.x_bar) + fb.g_x_bar;
        let mut record = IterationRecord {
            k,
            tau: 0.0,
            backtracks: 0,
            bfbe_value: fb.bfbe,
            phi_at_xbar,
            bregman_residual: fb.bregman_residual,
            euclid_residual: fb.euclid_residual(),
            current_gamma: st.gamma,
            current_l: st.l,
            current_sigma: st.sigma,
            direction_norm: 0.0,
            accepted_unit_step: false,
            solution_distance: problem.distance_to_solutions(&x),
        };

        if !fb.bfbe.is_finite() || !fb.bregman_residual.is_finite() {
            records.push(record);
            let x_hat = fb.x_bar.clone();
            return Ok(finish(
                &st,
                records,
                x,
                x_hat,
                SolveStatus::NumericalFailure,
                Some(format!("non-finite envelope value {}", fb.bfbe)),
            ));
        }
        if fb.bregman_residual <= config.epsilon {
            records.push(record);
            let x_hat = fb.x_bar.clone();
            return Ok(finish(&st, records, x, x_hat, SolveStatus::Converged, None));
        }
        if k >= config.max_iters {
            let x_hat = fb.x_bar.clone();
            return Ok(finish(&st, records, x, x_hat, SolveStatus::MaxIters, None));
        }

        let d = directions.direction(&x, &fb.x_bar);
        record.direction_norm = d.norm();
        if d.len() != x.len() || !record.direction_norm.is_finite() {
            records.push(record);
            let x_hat = fb.x_bar.clone();
            return Ok(finish(
                &st,
                records,
                x,
                x_hat,
                SolveStatus::NumericalFailure,
                Some("direction provider returned a non-finite or misshapen vector".into()),
            ));
        }

        match linesearch(problem, config, &mut st, &fb, &x, &d) {
            Ok((next, tau, backtracks)) => {
                record.tau = tau;
                record.backtracks = backtracks;
                record.accepted_unit_step = tau == 1.0 && backtracks == 0;
                records.push(record);
                x = next.x.clone();
                fb = next;
                k += 1;
            }
            Err(Stop::Enlarge) => {
                let refreshed = double_l(&mut st, directions)
                    .and_then(|_| fb_at(problem, true, &mut st, &x, directions));
                match refreshed {
                    Ok(s) => fb = s,
                    Err(stop) => {
                        records.push(record);
                        let (status, msg) = stop.into_status();
                        let x_hat = fb.x_bar.clone();
                        return Ok(finish(&st, records, x, x_hat, status, Some(msg)));
                    }
                }
            }
            Err(Stop::Status(status, msg)) => {
                records.push(record);
                let x_hat = fb.x_bar.clone();
                return Ok(finish(&st, records, x, x_hat, status, Some(msg)));
            }
        }
    }
}

/// Tries `τ = 1, ½, …` and returns the accepted evaluation with `(τ, i)`.
fn linesearch(
    problem: &Problem,
    config: &SolverConfig,
    st: &mut RunState,
    fb: &FbStep,
    x: &DVector<f64>,
    d: &DVector<f64>,
) -> std::result::Result<(FbStep, f64, usize), Stop> {
    let threshold = fb.bfbe - st.sigma * fb.bregman_residual;
    // (1 − τ)x̄ + τ(x + d) written around x̄, so that d = x̄ − x gives x̄ exactly.
    let shift = (x - &fb.x_bar) + d;
    let mut tau = 1.0_f64;
    let mut i = 0usize;
    loop {
        let candidate = &fb.x_bar + &shift * tau;
        if problem.kernel.is_interior(&candidate) {
            st.prox_calls += 1;
            match fb_operator(problem, st.gamma, &candidate) {
                Ok(trial) => {
                    if trial.bfbe.is_nan() {
                        return Err(Stop::Status(
                            SolveStatus::NumericalFailure,
                            format!("envelope is NaN at a linesearch trial (k-th τ = {tau})"),
                        ));
                    }
                    if trial.bfbe <= threshold {
                        return Ok((trial, tau, i));
                    }
                }
                Err(Error::RangeViolation(_)) if config.adaptive => return Err(Stop::Enlarge),
                Err(e) => return Err(classify(e)),
            }
        }
        let exhausted = match config.i_max {
            Some(cap) => i >= cap,
            None => i >= BACKTRACK_HARD_LIMIT,
        };
        if exhausted {
            if config.i_max.is_none() {
                warn!("linesearch hit {BACKTRACK_HARD_LIMIT} halvings; taking the plain step");
            }
            st.prox_calls += 1;
            return match fb_operator(problem, st.gamma, &fb.x_bar) {
                Ok(plain) => Ok((plain, 0.0, i)),
                Err(Error::RangeViolation(_)) if config.adaptive => Err(Stop::Enlarge),
                Err(e) => Err(classify(e)),
            };
        }
        tau *= 0.5;
        i += 1;
    }
}

/// Adaptive estimation of `L_f`.
///
/// While `f(x̄) > f(x) + ⟨∇f(x), x̄ − x⟩ + L·D_h(x̄, x)`, halves `γ`, doubles
/// `L` and `σ`, and recomputes the forward-backward step at `x`. Direction
/// history is reset after each change since the residual map changed.
fn adaptive_lf_guard(
    problem: &Problem,
    st: &mut RunState,
    fb: &mut FbStep,
    directions: &mut dyn DirectionProvider,
) -> std::result::Result<(), Stop> {
    loop {
        let f_bar = problem.smooth.value(&fb.x_bar);
        let model = fb.f_x + fb.grad_f_x.dot(&(&fb.x_bar - &fb.x)) + st.l * fb.bregman_residual;
        // A few ulps of slack so that exact equality never triggers a doubling.
        let slack = 4.0 * f64::EPSILON * f_bar.abs().max(fb.f_x.abs());
        if !(f_bar > model + slack) {
            return Ok(());
        }
        double_l(st, directions)?;
        let x = fb.x.clone();
        *fb = fb_at(problem, true, st, &x, directions)?;
    }
}
