//! Composite objectives `φ = f + g` and the built-in benchmark registry.
//!
//! `f` is smooth relative to the problem's kernel with modulus `L_f`
//! (`L_f·h ± f` convex on the kernel interior). `g` is proper, lower
//! semicontinuous and possibly nonconvex; it is accessed only through its
//! value and its Bregman proximal map
//! `argmin_z { g(z) + (1/γ)·D_h(z, z̄) }`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{check_dim, Error, Result};
use crate::kernels::{Kernel, KernelSpec, Legendre};

/// Seeded generator used for every piece of random benchmark data.
pub type SeededRng = SplitMix64;

pub fn seeded_rng(seed: u64) -> SeededRng {
    SplitMix64::seed_from_u64(seed)
}

/// The smooth part `f`.
pub trait SmoothTerm: fmt::Debug + Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// `∇²f(x)·v`, when available.
    fn hessian_vec(&self, _x: &DVector<f64>, _v: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }
    /// Relative smoothness modulus `L_f` with respect to the paired kernel.
    fn rel_smoothness(&self) -> f64;
}

/// The nonsmooth part `g`.
pub trait NonsmoothTerm: fmt::Debug + Send + Sync {
    /// `g(z)`, `+∞` outside `dom g`.
    fn value(&self, z: &DVector<f64>) -> f64;

    /// One element of `argmin_z { g(z) + (1/γ)·D_h(z, anchor) }`.
    fn bregman_prox(
        &self,
        kernel: &dyn Legendre,
        gamma: f64,
        anchor: &DVector<f64>,
    ) -> Result<DVector<f64>>;
}

/// `f = 0`.
#[derive(Debug, Clone)]
pub struct ZeroSmooth {
    pub dim: usize,
}

impl SmoothTerm for ZeroSmooth {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }
    fn hessian_vec(&self, x: &DVector<f64>, _v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::zeros(x.len()))
    }
    fn rel_smoothness(&self) -> f64 {
        0.0
    }
}

/// `f = ½‖x‖²`, relatively smooth with modulus `lipschitz` for the paired kernel.
#[derive(Debug, Clone)]
pub struct HalfSquaredNorm {
    pub dim: usize,
    pub lipschitz: f64,
}

impl SmoothTerm for HalfSquaredNorm {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.norm_squared()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn hessian_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(v.clone())
    }
    fn rel_smoothness(&self) -> f64 {
        self.lipschitz
    }
}

/// `f = ¼(‖x‖² − 1)²`, minimized on the whole unit sphere.
#[derive(Debug, Clone)]
pub struct SphereResidual {
    pub dim: usize,
    pub lipschitz: f64,
}

impl SmoothTerm for SphereResidual {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let e = x.norm_squared() - 1.0;
        0.25 * e * e
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x * (x.norm_squared() - 1.0)
    }
    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(v * (x.norm_squared() - 1.0) + x * (2.0 * x.dot(v)))
    }
    fn rel_smoothness(&self) -> f64 {
        self.lipschitz
    }
}

/// `f = ½‖Ax − b‖²` with `L_f = λ_max(AᵀA)` for the Euclidean kernel.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: DMatrix<f64>,
    b: DVector<f64>,
    lipschitz: f64,
}

impl LeastSquares {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        let gram = a.transpose() * &a;
        let lipschitz = gram
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |m, &e| m.max(e));
        Ok(LeastSquares { a, b, lipschitz })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }
}

impl SmoothTerm for LeastSquares {
    fn dimension(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&(&self.a * x - &self.b))
    }
    fn hessian_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(self.a.tr_mul(&(&self.a * v)))
    }
    fn rel_smoothness(&self) -> f64 {
        self.lipschitz
    }
}

/// Poisson negative log-likelihood `f(x) = Σᵢ ⟨aᵢ, x⟩ − bᵢ log⟨aᵢ, x⟩`.
///
/// With nonnegative `A` and `b`, `f` is `‖b‖₁`-smooth relative to Burg entropy.
#[derive(Debug, Clone)]
pub struct PoissonLikelihood {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl PoissonLikelihood {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if a.iter().any(|&v| v < 0.0) || b.iter().any(|&v| v < 0.0) {
            return Err(Error::Parameter(
                "Poisson data must be entrywise nonnegative".into(),
            ));
        }
        Ok(PoissonLikelihood { a, b })
    }

    /// `Σ bᵢ − bᵢ log bᵢ`, attained when `Ax = b` has a solution in the domain.
    pub fn consistent_infimum(&self) -> f64 {
        self.b
            .iter()
            .map(|&bi| if bi > 0.0 { bi - bi * bi.ln() } else { 0.0 })
            .sum()
    }
}

impl SmoothTerm for PoissonLikelihood {
    fn dimension(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let ax = &self.a * x;
        let mut acc = 0.0;
        for (&t, &bi) in ax.iter().zip(self.b.iter()) {
            if !(t > 0.0) {
                return f64::INFINITY;
            }
            acc += t - bi * t.ln();
        }
        acc
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let ax = &self.a * x;
        let w = DVector::from_fn(ax.len(), |i, _| 1.0 - self.b[i] / ax[i]);
        self.a.tr_mul(&w)
    }
    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        let ax = &self.a * x;
        let av = &self.a * v;
        let w = DVector::from_fn(ax.len(), |i, _| self.b[i] * av[i] / (ax[i] * ax[i]));
        Some(self.a.tr_mul(&w))
    }
    fn rel_smoothness(&self) -> f64 {
        self.b.iter().sum()
    }
}

/// `g = 0`; its Bregman prox is the anchor for every kernel.
#[derive(Debug, Clone, Default)]
pub struct ZeroNonsmooth;

impl NonsmoothTerm for ZeroNonsmooth {
    fn value(&self, _z: &DVector<f64>) -> f64 {
        0.0
    }
    fn bregman_prox(
        &self,
        _kernel: &dyn Legendre,
        _gamma: f64,
        anchor: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(anchor.clone())
    }
}

/// `g = λ‖z‖₁` (Euclidean kernel only).
#[derive(Debug, Clone)]
pub struct L1Norm {
    pub lambda: f64,
}

impl NonsmoothTerm for L1Norm {
    fn value(&self, z: &DVector<f64>) -> f64 {
        self.lambda * z.lp_norm(1)
    }
    fn bregman_prox(
        &self,
        kernel: &dyn Legendre,
        gamma: f64,
        anchor: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        require_euclidean(kernel, "ℓ1 prox")?;
        Ok(soft_threshold_prox(gamma, self.lambda, anchor))
    }
}

/// `g = λ‖z‖₀` (Euclidean kernel only).
#[derive(Debug, Clone)]
pub struct L0Norm {
    pub lambda: f64,
}

impl NonsmoothTerm for L0Norm {
    fn value(&self, z: &DVector<f64>) -> f64 {
        self.lambda * z.iter().filter(|&&v| v != 0.0).count() as f64
    }
    fn bregman_prox(
        &self,
        kernel: &dyn Legendre,
        gamma: f64,
        anchor: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        require_euclidean(kernel, "ℓ0 prox")?;
        Ok(hard_threshold_prox(gamma, self.lambda, anchor))
    }
}

/// Indicator of the box `[lower, upper]` (separable kernels only).
///
/// Each coordinate term `Dᵢ(·, z̄ᵢ)` is convex with its minimum at `z̄ᵢ`, so the
/// constrained minimizer is the coordinatewise clamp of the anchor.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl NonsmoothTerm for BoxIndicator {
    fn value(&self, z: &DVector<f64>) -> f64 {
        let inside = z
            .iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(&v, (&lo, &hi))| v >= lo && v <= hi);
        if inside {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn bregman_prox(
        &self,
        kernel: &dyn Legendre,
        _gamma: f64,
        anchor: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        if !kernel.is_separable() {
            return Err(Error::Unsupported(format!(
                "box prox by clamping needs a separable kernel, got {}",
                kernel.name()
            )));
        }
        check_dim(self.lower.len(), anchor.len())?;
        Ok(DVector::from_fn(anchor.len(), |i, _| {
            anchor[i].clamp(self.lower[i], self.upper[i])
        }))
    }
}

fn require_euclidean(kernel: &dyn Legendre, what: &str) -> Result<()> {
    if kernel.is_euclidean() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{what} is implemented for the Euclidean kernel only, got {}",
            kernel.name()
        )))
    }
}

/// Euclidean prox of `λ‖·‖₀` with stepsize `γ`.
///
/// Coordinates with `|z̄ᵢ| > √(2γλ)` are kept, the rest are zeroed. At the tie
/// `|z̄ᵢ| = √(2γλ)` both choices are minimizers and zero is returned.
pub fn hard_threshold_prox(gamma: f64, lambda: f64, anchor: &DVector<f64>) -> DVector<f64> {
    let threshold = (2.0 * gamma * lambda).sqrt();
    anchor.map(|v| if v.abs() > threshold { v } else { 0.0 })
}

/// Euclidean prox of `λ‖·‖₁` with stepsize `γ`.
pub fn soft_threshold_prox(gamma: f64, lambda: f64, anchor: &DVector<f64>) -> DVector<f64> {
    let t = gamma * lambda;
    anchor.map(|v| v.signum() * (v.abs() - t).max(0.0))
}

pub type DistanceFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// A composite problem `minimize f(x) + g(x)` in the geometry of `kernel`.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub kernel: Arc<dyn Legendre>,
    pub smooth: Arc<dyn SmoothTerm>,
    pub nonsmooth: Arc<dyn NonsmoothTerm>,
    pub known_infimum: Option<f64>,
    /// `dist(x, X⋆)` for problems with a known solution set.
    pub solution_set_distance: Option<DistanceFn>,
    /// Box inside `dom g ∩ C` used for random starting points and samples.
    pub sample_lower: DVector<f64>,
    pub sample_upper: DVector<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("kernel", &self.kernel.name())
            .field("dimension", &self.dimension())
            .field("smooth", &self.smooth)
            .field("nonsmooth", &self.nonsmooth)
            .field("known_infimum", &self.known_infimum)
            .finish()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        kernel: Arc<dyn Legendre>,
        smooth: Arc<dyn SmoothTerm>,
        nonsmooth: Arc<dyn NonsmoothTerm>,
    ) -> Result<Self> {
        let n = kernel.dimension();
        check_dim(n, smooth.dimension())?;
        Ok(Problem {
            name: name.into(),
            kernel,
            smooth,
            nonsmooth,
            known_infimum: None,
            solution_set_distance: None,
            sample_lower: DVector::from_element(n, -2.0),
            sample_upper: DVector::from_element(n, 2.0),
        })
    }

    pub fn with_known_infimum(mut self, inf: f64) -> Self {
        self.known_infimum = Some(inf);
        self
    }

    pub fn with_solution_set_distance(
        mut self,
        dist: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.solution_set_distance = Some(Arc::new(dist));
        self
    }

    pub fn with_sample_box(mut self, lower: DVector<f64>, upper: DVector<f64>) -> Self {
        self.sample_lower = lower;
        self.sample_upper = upper;
        self
    }

    /// Euclidean least squares `½‖Ax − b‖² + g`.
    pub fn least_squares(
        name: impl Into<String>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        g: Arc<dyn NonsmoothTerm>,
    ) -> Result<Self> {
        let n = a.ncols();
        let f = LeastSquares::new(a, b)?;
        Problem::new(name, Arc::new(Kernel::euclidean(n)), Arc::new(f), g)
    }

    pub fn dimension(&self) -> usize {
        self.kernel.dimension()
    }

    pub fn lipschitz(&self) -> f64 {
        self.smooth.rel_smoothness()
    }

    /// `φ(x) = f(x) + g(x)`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let g = self.nonsmooth.value(x);
        if g == f64::INFINITY {
            return f64::INFINITY;
        }
        self.smooth.value(x) + g
    }

    pub fn distance_to_solutions(&self, x: &DVector<f64>) -> Option<f64> {
        self.solution_set_distance.as_ref().map(|d| d(x))
    }

    /// Uniform sample from the problem's sample box.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.dimension(), |i, _| {
            rng.gen_range(self.sample_lower[i]..self.sample_upper[i])
        })
    }
}

/// Names accepted by [`builtin_problem`].
pub const PROBLEM_NAMES: [&str; 5] = ["quadratic", "circle", "l0-ls", "l1-ls", "poisson"];

/// Regularization weight of the `l0-ls` and `l1-ls` registry problems.
pub const LS_LAMBDA: f64 = 0.1;

/// Builds a registry problem with its default kernel.
pub fn builtin_problem(name: &str, n: usize, seed: u64) -> Result<Problem> {
    builtin_problem_with_kernel(name, n, seed, None)
}

/// Builds a registry problem, optionally overriding its kernel.
///
/// Overrides are accepted only where the relative smoothness modulus is known
/// in closed form: `quadratic` with `euclidean` or `quartic:α:β`
/// (`L_f = 1/β`) and `circle` with `quartic:α:β` (`L_f = max(1/α, 1/β)`).
pub fn builtin_problem_with_kernel(
    name: &str,
    n: usize,
    seed: u64,
    kernel: Option<KernelSpec>,
) -> Result<Problem> {
    if n == 0 {
        return Err(Error::Parameter(
            "problem dimension must be positive".into(),
        ));
    }
    let default_kernel = match name {
        "quadratic" | "l0-ls" | "l1-ls" => KernelSpec::Euclidean,
        "circle" => KernelSpec::Quartic {
            alpha: 1.0,
            beta: 1.0,
        },
        "poisson" => KernelSpec::Burg,
        _ => {
            return Err(Error::Registry {
                kind: "problem",
                name: name.to_string(),
                valid: PROBLEM_NAMES.join(", "),
            })
        }
    };
    let spec = kernel.unwrap_or(default_kernel);
    let unsupported = || {
        Error::Unsupported(format!(
            "problem '{name}' has no known relative smoothness modulus for kernel {spec}"
        ))
    };
    let mut rng = seeded_rng(seed);
    let kernel_arc: Arc<dyn Legendre> = Arc::new(Kernel::new(spec, n)?);

    match name {
        "quadratic" => {
            let lipschitz = match spec {
                KernelSpec::Euclidean => 1.0,
                KernelSpec::Quartic { beta, .. } => 1.0 / beta,
                _ => return Err(unsupported()),
            };
            Ok(Problem::new(
                name,
                kernel_arc,
                Arc::new(HalfSquaredNorm { dim: n, lipschitz }),
                Arc::new(ZeroNonsmooth),
            )?
            .with_known_infimum(0.0)
            .with_solution_set_distance(|x| x.norm()))
        }
        "circle" => {
            let lipschitz = match spec {
                KernelSpec::Quartic { alpha, beta } => (1.0 / alpha).max(1.0 / beta),
                _ => return Err(unsupported()),
            };
            Ok(Problem::new(
                name,
                kernel_arc,
                Arc::new(SphereResidual { dim: n, lipschitz }),
                Arc::new(ZeroNonsmooth),
            )?
            .with_known_infimum(0.0)
            .with_solution_set_distance(|x| (x.norm() - 1.0).abs()))
        }
        "l0-ls" | "l1-ls" => {
            if spec != KernelSpec::Euclidean {
                return Err(unsupported());
            }
            let m = 2 * n;
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            let x_true = DVector::from_fn(n, |i, _| {
                if i % 2 == 0 {
                    rng.gen_range(0.5..1.5) * if rng.gen::<bool>() { 1.0 } else { -1.0 }
                } else {
                    0.0
                }
            });
            let noise = DVector::from_fn(m, |_, _| 0.01 * rng.gen_range(-1.0..1.0));
            let b = &a * &x_true + noise;
            let g: Arc<dyn NonsmoothTerm> = if name == "l0-ls" {
                Arc::new(L0Norm { lambda: LS_LAMBDA })
            } else {
                Arc::new(L1Norm { lambda: LS_LAMBDA })
            };
            Problem::least_squares(name, a, b, g)
        }
        "poisson" => {
            if spec != KernelSpec::Burg {
                return Err(unsupported());
            }
            let m = 2 * n;
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(0.1..1.0));
            let x_true = DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0));
            let b = &a * &x_true;
            let f = PoissonLikelihood::new(a, b)?;
            let inf = f.consistent_infimum();
            let lower = DVector::from_element(n, 0.05);
            let upper = DVector::from_element(n, 20.0);
            Ok(Problem::new(
                name,
                kernel_arc,
                Arc::new(f),
                Arc::new(BoxIndicator {
                    lower: lower.clone(),
                    upper: upper.clone(),
                }),
            )?
            .with_known_infimum(inf)
            .with_sample_box(DVector::from_element(n, 0.1), DVector::from_element(n, 5.0)))
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn quadratic_example_values() {
        let p = builtin_problem("quadratic", 1, 0).unwrap();
        let x = dvector![2.0];
        assert_eq!(p.smooth.value(&x), 2.0);
        assert_eq!(p.smooth.gradient(&x), dvector![2.0]);
        assert_eq!(p.lipschitz(), 1.0);
        assert_eq!(p.known_infimum, Some(0.0));
    }

    #[test]
    fn circle_example_values() {
        let p = builtin_problem("circle", 2, 0).unwrap();
        let x = dvector![1.0, 0.0];
        assert_eq!(p.smooth.value(&x), 0.0);
        assert_eq!(p.smooth.gradient(&x), dvector![0.0, 0.0]);
        assert_eq!(p.distance_to_solutions(&x), Some(0.0));
        assert_eq!(p.lipschitz(), 1.0);
    }

    #[test]
    fn unknown_problem_lists_valid_names() {
        let err = builtin_problem("rosenbrock", 2, 0).unwrap_err();
        let msg = err.to_string();
        for name in PROBLEM_NAMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn kernel_overrides() {
        let q = builtin_problem_with_kernel(
            "quadratic",
            2,
            0,
            Some(KernelSpec::Quartic {
                alpha: 1.0,
                beta: 4.0,
            }),
        )
        .unwrap();
        assert_eq!(q.lipschitz(), 0.25);
        assert!(matches!(
            builtin_problem_with_kernel("l1-ls", 2, 0, Some(KernelSpec::Burg)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(
            hard_threshold_prox(1.0, 0.5, &dvector![2.0, 0.5]),
            dvector![2.0, 0.0]
        );
        assert_eq!(
            hard_threshold_prox(1.0, 0.0, &dvector![0.3, -0.1]),
            dvector![0.3, -0.1]
        );
        assert_eq!(hard_threshold_prox(1.0, 0.5, &dvector![1.0]), dvector![0.0]);
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold_prox(0.5, 1.0, &dvector![1.0]), dvector![0.5]);
        assert_eq!(
            soft_threshold_prox(1.0, 1.0, &dvector![-3.0, 0.5]),
            dvector![-2.0, 0.0]
        );
    }

    #[test]
    fn sparse_proxes_reject_non_euclidean_kernels() {
        let k = Kernel::quartic(1, 1.0, 1.0);
        assert!(L1Norm { lambda: 1.0 }
            .bregman_prox(&k, 1.0, &dvector![1.0])
            .is_err());
        assert!(L0Norm { lambda: 1.0 }
            .bregman_prox(&k, 1.0, &dvector![1.0])
            .is_err());
        let b = BoxIndicator {
            lower: dvector![0.0],
            upper: dvector![1.0],
        };
        assert!(b.bregman_prox(&k, 1.0, &dvector![2.0]).is_err());
        assert_eq!(
            b.bregman_prox(&Kernel::burg(1), 1.0, &dvector![2.0])
                .unwrap(),
            dvector![1.0]
        );
    }

    #[test]
    fn registry_is_deterministic() {
        let a = builtin_problem("l1-ls", 3, 7).unwrap();
        let b = builtin_problem("l1-ls", 3, 7).unwrap();
        let x = dvector![0.1, -0.2, 0.3];
        assert_eq!(a.objective(&x).to_bits(), b.objective(&x).to_bits());
        let c = builtin_problem("l1-ls", 3, 8).unwrap();
        assert_ne!(a.objective(&x), c.objective(&x));
    }

    #[test]
    fn poisson_infimum_is_attained_in_box() {
        let p = builtin_problem("poisson", 3, 1).unwrap();
        let inf = p.known_infimum.unwrap();
        let mut rng = seeded_rng(5);
        for _ in 0..50 {
            let x = p.random_point(&mut rng);
            assert!(p.objective(&x) >= inf - 1e-9);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let r = Problem::new(
            "bad",
            Arc::new(Kernel::euclidean(2)),
            Arc::new(ZeroSmooth { dim: 3 }),
            Arc::new(ZeroNonsmooth),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
