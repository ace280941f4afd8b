#![allow(dead_code)]

use bella::directions::DirectionProvider;
use bella::problem::{seeded_rng, Problem, SeededRng, LS_LAMBDA};
use bella::reference::GridSpec;
use bella::solver::SolveResult;
use nalgebra::DVector;
use rand::Rng;

/// Random directions of a fixed norm, ignoring the iterates entirely.
pub struct Adversarial {
    rng: SeededRng,
    norm: f64,
}

impl Adversarial {
    pub fn new(seed: u64, norm: f64) -> Self {
        Adversarial {
            rng: seeded_rng(seed),
            norm,
        }
    }
}

impl DirectionProvider for Adversarial {
    fn direction(&mut self, x: &DVector<f64>, _x_bar: &DVector<f64>) -> DVector<f64> {
        let v = DVector::from_fn(x.len(), |_, _| self.rng.gen_range(-1.0..1.0));
        let nv = v.norm();
        if nv == 0.0 {
            return DVector::from_element(x.len(), self.norm / (x.len() as f64).sqrt());
        }
        v * (self.norm / nv)
    }

    fn reset(&mut self) {}

    fn name(&self) -> String {
        "adversarial".into()
    }
}

/// Consecutive records violating `bfbe(k+1) ≤ bfbe(k) − σ·D(k)` at fixed `γ`.
pub fn decrease_violations(result: &SolveResult, rel_tol: f64) -> Vec<usize> {
    result
        .iterations
        .windows(2)
        .filter(|w| w[0].current_gamma == w[1].current_gamma)
        .filter(|w| {
            let bound = w[0].bfbe_value - w[0].current_sigma * w[0].bregman_residual;
            w[1].bfbe_value > bound + rel_tol * (1.0 + w[0].bfbe_value.abs())
        })
        .map(|w| w[0].k)
        .collect()
}

/// Smallest-norm element of `∇f(x) + λ∂‖x‖₁`.
pub fn l1_min_norm_subgradient(grad: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    grad.iter()
        .zip(x.iter())
        .map(|(&gi, &xi)| {
            if xi != 0.0 {
                (gi + lambda * xi.signum()).abs()
            } else {
                (gi.abs() - lambda).max(0.0)
            }
        })
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

pub const L1_LAMBDA: f64 = LS_LAMBDA;

/// Lattice box for the proximal-point check at `x`.
///
/// Full-domain kernels get a box around `x`, `x̄` and the origin widened by
/// one unit; restricted domains use the problem's sample box widened to the
/// constraint box of the registry problem.
pub fn pp_grid(problem: &Problem, x: &DVector<f64>, x_bar: &DVector<f64>, ppa: usize) -> GridSpec {
    if problem.kernel.has_full_domain() {
        let origin = DVector::zeros(x.len());
        GridSpec::around(&[x, x_bar, &origin], 1.0, ppa).unwrap()
    } else {
        let n = x.len();
        GridSpec::new(
            DVector::from_element(n, 0.05),
            DVector::from_element(n, 20.0),
            ppa,
        )
        .unwrap()
    }
}
