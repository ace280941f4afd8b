//! Bregman forward-backward operator and its envelope.
//!
//! For `x` in the kernel interior `C` and stepsize `γ`,
//!
//! ```text
//! T(x)  = argmin_z { f(x) + ⟨∇f(x), z − x⟩ + g(z) + (1/γ)·D_h(z, x) }
//!       = prox^h_{γg}( ∇h*(∇h(x) − γ∇f(x)) )
//! φ_γ(x) = the optimal value of the same problem   (the envelope, "BFBE")
//! ```
//!
//! One prox evaluation yields both `x̄ ∈ T(x)` and `φ_γ(x)`; [`FbStep`] keeps
//! them together so the solver can reuse a linesearch trial.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::problem::Problem;

/// Everything one forward-backward evaluation produces at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbStep {
    pub x: DVector<f64>,
    /// The selected element of `T(x)`.
    pub x_bar: DVector<f64>,
    /// `∇h*(∇h(x) − γ∇f(x))`.
    pub forward_point: DVector<f64>,
    /// `φ_γ(x)`.
    pub bfbe: f64,
    /// `D_h(x̄, x)`.
    pub bregman_residual: f64,
    pub gamma: f64,
    pub f_x: f64,
    pub grad_f_x: DVector<f64>,
    pub g_x_bar: f64,
}

impl FbStep {
    /// `x − x̄`.
    pub fn residual(&self) -> DVector<f64> {
        &self.x - &self.x_bar
    }

    pub fn euclid_residual(&self) -> f64 {
        (&self.x - &self.x_bar).norm()
    }
}

fn check_point(problem: &Problem, gamma: f64, x: &DVector<f64>) -> Result<()> {
    check_dim(problem.dimension(), x.len())?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!(
            "stepsize must be positive and finite, got {gamma}"
        )));
    }
    if !problem.kernel.is_interior(x) {
        return Err(Error::OutsideDomain(format!(
            "x is not in the interior of dom {}",
            problem.kernel.name()
        )));
    }
    Ok(())
}

fn forward_from_gradient(
    problem: &Problem,
    gamma: f64,
    x: &DVector<f64>,
    grad_f: &DVector<f64>,
) -> Result<DVector<f64>> {
    let kernel = &problem.kernel;
    let dual = kernel.gradient(x) - grad_f * gamma;
    let z = kernel.gradient_conjugate(&dual)?;
    if !kernel.is_interior(&z) {
        return Err(Error::RangeViolation(
            "mirror step landed outside the kernel interior".into(),
        ));
    }
    Ok(z)
}

/// Mirror gradient step `∇h*(∇h(x) − γ∇f(x))`.
pub fn forward_step(problem: &Problem, gamma: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_point(problem, gamma, x)?;
    let grad = problem.smooth.gradient(x);
    forward_from_gradient(problem, gamma, x, &grad)
}

/// Evaluates `T(x)` and the envelope with a single prox call.
///
/// Fails with [`Error::RangeViolation`] when `x̄` leaves the kernel interior,
/// or when the mirror step itself has no preimage in `C`.
pub fn fb_operator(problem: &Problem, gamma: f64, x: &DVector<f64>) -> Result<FbStep> {
    check_point(problem, gamma, x)?;
    let f_x = problem.smooth.value(x);
    let grad_f_x = problem.smooth.gradient(x);
    let forward_point = match forward_from_gradient(problem, gamma, x, &grad_f_x) {
        Ok(z) => z,
        Err(Error::OutsideDomain(msg)) => return Err(Error::RangeViolation(msg)),
        Err(e) => return Err(e),
    };
    let x_bar = problem
        .nonsmooth
        .bregman_prox(problem.kernel.as_ref(), gamma, &forward_point)?;
    if !problem.kernel.is_interior(&x_bar) {
        return Err(Error::RangeViolation(format!(
            "prox output is outside the interior of dom {}",
            problem.kernel.name()
        )));
    }
    let bregman_residual = problem.kernel.bregman_distance(&x_bar, x);
    let g_x_bar = problem.nonsmooth.value(&x_bar);
    let bfbe = f_x + grad_f_x.dot(&(&x_bar - x)) + g_x_bar + bregman_residual / gamma;
    Ok(FbStep {
        x: x.clone(),
        x_bar,
        forward_point,
        bfbe,
        bregman_residual,
        gamma,
        f_x,
        grad_f_x,
        g_x_bar,
    })
}

/// `φ_γ(x)`.
pub fn bfbe(problem: &Problem, gamma: f64, x: &DVector<f64>) -> Result<f64> {
    fb_operator(problem, gamma, x).map(|s| s.bfbe)
}

/// `((1/γ)∇²h(x) − ∇²f(x))·(x − x̄)`.
///
/// This is the envelope gradient where `T` is single-valued and `g` is
/// prox-regular around the point; elsewhere it is only a diagnostic.
pub fn bfbe_gradient(problem: &Problem, gamma: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    let step = fb_operator(problem, gamma, x)?;
    bfbe_gradient_at(problem, &step)
}

/// Envelope gradient from an already computed [`FbStep`].
pub fn bfbe_gradient_at(problem: &Problem, step: &FbStep) -> Result<DVector<f64>> {
    let r = step.residual();
    let hf = problem.smooth.hessian_vec(&step.x, &r).ok_or_else(|| {
        Error::Unsupported("smooth term provides no Hessian-vector product".into())
    })?;
    let hh = problem.kernel.hessian_vec(&step.x, &r);
    Ok(hh / step.gamma - hf)
}
