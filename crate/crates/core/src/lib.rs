//! Bregman forward-backward splitting with a linesearch on the Bregman
//! forward-backward envelope, for problems
//!
//! ```text
//! minimize  φ(x) = f(x) + g(x)
//! ```
//!
//! where `f` is smooth relative to a Legendre kernel `h` and `g` is proper,
//! lower semicontinuous and possibly nonconvex.
//!
//! ```
//! use bella::directions::LBfgs;
//! use bella::problem::builtin_problem;
//! use bella::solver::{bella_solve, SolveStatus, SolverConfig};
//! use nalgebra::dvector;
//!
//! let problem = builtin_problem("circle", 2, 0).unwrap();
//! let config = SolverConfig::defaults_for(problem.lipschitz()).with_epsilon(1e-20);
//! let result = bella_solve(&problem, &config, &dvector![2.0, 0.5], &mut LBfgs::new(10)).unwrap();
//! assert_eq!(result.status, SolveStatus::Converged);
//! assert!((result.x_hat.norm() - 1.0).abs() < 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod directions;
pub mod envelope;
pub mod error;
pub mod kernels;
pub mod problem;
pub mod reference;
pub mod solver;

pub use error::{Error, Result};
