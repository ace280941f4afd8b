//! Legendre kernels and the Bregman geometry they generate.
//!
//! A kernel `h` supplies its value, gradient, Hessian-vector products and the
//! inverse gradient map `∇h* = (∇h)⁻¹`. The Bregman distance
//! `D_h(x, y) = h(x) − h(y) − ⟨∇h(y), x − y⟩` is the proximity measure used by
//! every forward-backward step.
//!
//! Four kernels ship with the crate:
//!
//! | name            | `h(x)`                         | interior            |
//! |-----------------|--------------------------------|---------------------|
//! | `euclidean`     | `½‖x‖²`                        | `ℝⁿ`                |
//! | `quartic:α:β`   | `(α/4)‖x‖⁴ + (β/2)‖x‖²`        | `ℝⁿ`                |
//! | `shannon`       | `Σ xᵢ log xᵢ`                  | `xᵢ > 0`            |
//! | `burg`          | `−Σ log xᵢ`                    | `xᵢ > 0`            |
//!
//! The convergence guarantees of the linesearch assume a full-domain kernel.
//! The entropies are provided for mirror-type problems (Poisson likelihoods in
//! particular); with them only subsequential behaviour can be expected.
//! Burg entropy is not 1-coercive, which [`Legendre::is_coercive`] reports.

use std::fmt;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::problem::SmoothTerm;

/// Smallest coordinate accepted as strictly positive by the entropy kernels.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// A Legendre kernel `h` with open interior `C = int dom h`.
///
/// Methods other than [`value`](Legendre::value),
/// [`is_interior`](Legendre::is_interior) and
/// [`gradient_conjugate`](Legendre::gradient_conjugate) may assume their
/// point argument lies in `C`; callers establish that with `is_interior`.
pub trait Legendre: fmt::Debug + Send + Sync {
    fn dimension(&self) -> usize;

    /// `h(x)`, `+∞` outside `dom h`.
    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// `∇²h(x)·v`.
    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;

    /// `∇h*(y)`, the point `x ∈ C` with `∇h(x) = y`.
    fn gradient_conjugate(&self, y: &DVector<f64>) -> Result<DVector<f64>>;

    fn is_interior(&self, x: &DVector<f64>) -> bool;

    /// `D_h(x, y)`; `+∞` when `y ∉ C` or `x ∉ dom h`.
    fn bregman_distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        if !self.is_interior(y) {
            return f64::INFINITY;
        }
        let hx = self.value(x);
        if !hx.is_finite() {
            return f64::INFINITY;
        }
        let d = hx - self.value(y) - self.gradient(y).dot(&(x - y));
        d.max(0.0)
    }

    /// Whether `h` is 1-coercive, as the Legendre-kernel definition requires.
    fn is_coercive(&self) -> bool {
        true
    }

    /// Whether `h(x) = Σ hᵢ(xᵢ)`.
    fn is_separable(&self) -> bool {
        false
    }

    /// Whether `h = ½‖·‖²`.
    fn is_euclidean(&self) -> bool {
        false
    }

    /// Whether `dom h = ℝⁿ`.
    fn has_full_domain(&self) -> bool {
        true
    }

    fn name(&self) -> String;
}

/// The built-in kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Euclidean,
    Quartic { alpha: f64, beta: f64 },
    Shannon,
    Burg,
}

impl KernelSpec {
    pub const NAMES: &'static str = "euclidean, quartic:α:β, shannon, burg";

    /// Parses a registry name: `euclidean`, `quartic:α:β` (bare `quartic`
    /// means `α = β = 1`), `shannon` or `burg`.
    pub fn parse(name: &str) -> Result<Self> {
        let unknown = || Error::Registry {
            kind: "kernel",
            name: name.to_string(),
            valid: Self::NAMES.to_string(),
        };
        let mut parts = name.trim().split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let spec = match (head.as_str(), rest.as_slice()) {
            ("euclidean", []) => KernelSpec::Euclidean,
            ("shannon", []) => KernelSpec::Shannon,
            ("burg", []) => KernelSpec::Burg,
            ("quartic", []) => KernelSpec::Quartic {
                alpha: 1.0,
                beta: 1.0,
            },
            ("quartic", [a, b]) => {
                let alpha: f64 = a.parse().map_err(|_| unknown())?;
                let beta: f64 = b.parse().map_err(|_| unknown())?;
                KernelSpec::Quartic { alpha, beta }
            }
            _ => return Err(unknown()),
        };
        if let KernelSpec::Quartic { alpha, beta } = spec {
            if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                return Err(Error::Parameter(format!(
                    "quartic kernel needs α > 0 and β > 0, got α = {alpha}, β = {beta}"
                )));
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Euclidean => write!(f, "euclidean"),
            KernelSpec::Quartic { alpha, beta } => write!(f, "quartic:{alpha}:{beta}"),
            KernelSpec::Shannon => write!(f, "shannon"),
            KernelSpec::Burg => write!(f, "burg"),
        }
    }
}

/// A built-in kernel of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    dim: usize,
    spec: KernelSpec,
}

impl Kernel {
    pub fn new(spec: KernelSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("kernel dimension must be positive".into()));
        }
        Ok(Kernel { dim, spec })
    }

    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        Kernel::new(KernelSpec::parse(name)?, dim)
    }

    pub fn euclidean(dim: usize) -> Self {
        Kernel {
            dim,
            spec: KernelSpec::Euclidean,
        }
    }

    pub fn quartic(dim: usize, alpha: f64, beta: f64) -> Self {
        assert!(alpha > 0.0 && beta > 0.0, "quartic kernel needs α, β > 0");
        Kernel {
            dim,
            spec: KernelSpec::Quartic { alpha, beta },
        }
    }

    pub fn shannon(dim: usize) -> Self {
        Kernel {
            dim,
            spec: KernelSpec::Shannon,
        }
    }

    pub fn burg(dim: usize) -> Self {
        Kernel {
            dim,
            spec: KernelSpec::Burg,
        }
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    fn assert_dim(&self, v: &DVector<f64>) {
        assert_eq!(
            v.len(),
            self.dim,
            "kernel of dimension {} applied to a vector of length {}",
            self.dim,
            v.len()
        );
    }
}

impl Legendre for Kernel {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.assert_dim(x);
        match self.spec {
            KernelSpec::Euclidean => 0.5 * x.norm_squared(),
            KernelSpec::Quartic { alpha, beta } => {
                let r2 = x.norm_squared();
                0.25 * alpha * r2 * r2 + 0.5 * beta * r2
            }
            KernelSpec::Shannon => {
                let mut acc = 0.0;
                for &xi in x.iter() {
                    if xi < 0.0 || xi.is_nan() {
                        return f64::INFINITY;
                    }
                    if xi > 0.0 {
                        acc += xi * xi.ln();
                    }
                }
                acc
            }
            KernelSpec::Burg => {
                let mut acc = 0.0;
                for &xi in x.iter() {
                    if !(xi > 0.0) {
                        return f64::INFINITY;
                    }
                    acc -= xi.ln();
                }
                acc
            }
        }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.assert_dim(x);
        match self.spec {
            KernelSpec::Euclidean => x.clone(),
            KernelSpec::Quartic { alpha, beta } => x * (alpha * x.norm_squared() + beta),
            KernelSpec::Shannon => x.map(|xi| xi.ln() + 1.0),
            KernelSpec::Burg => x.map(|xi| -1.0 / xi),
        }
    }

    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.assert_dim(x);
        self.assert_dim(v);
        match self.spec {
            KernelSpec::Euclidean => v.clone(),
            KernelSpec::Quartic { alpha, beta } => {
                // ((α‖x‖² + β) I + 2α x xᵀ) v
                v * (alpha * x.norm_squared() + beta) + x * (2.0 * alpha * x.dot(v))
            }
            KernelSpec::Shannon => v.component_div(x),
            KernelSpec::Burg => DVector::from_fn(self.dim, |i, _| v[i] / (x[i] * x[i])),
        }
    }

    fn gradient_conjugate(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim, y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                what: "non-finite argument to the inverse gradient map".into(),
                residual: f64::NAN,
            });
        }
        match self.spec {
            KernelSpec::Euclidean => Ok(y.clone()),
            KernelSpec::Quartic { alpha, beta } => gradient_conjugate_quartic(y, alpha, beta),
            KernelSpec::Shannon => {
                let x = y.map(|yi| (yi - 1.0).exp());
                if self.is_interior(&x) {
                    Ok(x)
                } else {
                    Err(Error::OutsideDomain(
                        "exp(y − 1) underflows below the entropy floor".into(),
                    ))
                }
            }
            KernelSpec::Burg => {
                if let Some(i) = y.iter().position(|&yi| !(yi < 0.0)) {
                    return Err(Error::OutsideDomain(format!(
                        "Burg gradient range is the negative orthant, coordinate {i} is {}",
                        y[i]
                    )));
                }
                Ok(y.map(|yi| -1.0 / yi))
            }
        }
    }

    fn is_interior(&self, x: &DVector<f64>) -> bool {
        if x.len() != self.dim {
            return false;
        }
        match self.spec {
            KernelSpec::Euclidean | KernelSpec::Quartic { .. } => x.iter().all(|v| v.is_finite()),
            KernelSpec::Shannon | KernelSpec::Burg => {
                x.iter().all(|&v| v > ENTROPY_FLOOR && v.is_finite())
            }
        }
    }

    fn bregman_distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.assert_dim(x);
        self.assert_dim(y);
        if !self.is_interior(y) {
            return f64::INFINITY;
        }
        match self.spec {
            KernelSpec::Euclidean => 0.5 * (x - y).norm_squared(),
            KernelSpec::Quartic { alpha, beta } => {
                if x.iter().any(|v| !v.is_finite()) {
                    return f64::INFINITY;
                }
                // α[¼(‖x‖² − ‖y‖²)² + ½‖y‖²‖x − y‖²] + (β/2)‖x − y‖², free of cancellation.
                let dx2 = (x - y).norm_squared();
                let gap = x.norm_squared() - y.norm_squared();
                alpha * (0.25 * gap * gap + 0.5 * y.norm_squared() * dx2) + 0.5 * beta * dx2
            }
            KernelSpec::Shannon => {
                let mut acc = 0.0;
                for (&xi, &yi) in x.iter().zip(y.iter()) {
                    if xi < 0.0 || xi.is_nan() {
                        return f64::INFINITY;
                    }
                    acc += if xi > 0.0 {
                        xi * (xi / yi).ln() - xi + yi
                    } else {
                        yi
                    };
                }
                acc.max(0.0)
            }
            KernelSpec::Burg => {
                let mut acc = 0.0;
                for (&xi, &yi) in x.iter().zip(y.iter()) {
                    if !(xi > 0.0) {
                        return f64::INFINITY;
                    }
                    let r = xi / yi;
                    acc += r - r.ln() - 1.0;
                }
                acc.max(0.0)
            }
        }
    }

    fn is_coercive(&self) -> bool {
        !matches!(self.spec, KernelSpec::Burg)
    }

    fn is_separable(&self) -> bool {
        !matches!(self.spec, KernelSpec::Quartic { .. })
    }

    fn is_euclidean(&self) -> bool {
        matches!(self.spec, KernelSpec::Euclidean)
    }

    fn has_full_domain(&self) -> bool {
        matches!(
            self.spec,
            KernelSpec::Euclidean | KernelSpec::Quartic { .. }
        )
    }

    fn name(&self) -> String {
        self.spec.to_string()
    }
}

/// Bregman distance with explicit dimension checks; `+∞` encodes
/// `y ∉ int dom h` or `x ∉ dom h`.
pub fn bregman_distance(kernel: &dyn Legendre, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    check_dim(kernel.dimension(), x.len())?;
    check_dim(kernel.dimension(), y.len())?;
    Ok(kernel.bregman_distance(x, y))
}

/// Inverse gradient of the quartic kernel `h = (α/4)‖x‖⁴ + (β/2)‖x‖²`.
///
/// `∇h(x) = (α‖x‖² + β)x`, so `x = (t/‖y‖)·y` with `t ≥ 0` the unique root of
/// `αt³ + βt = ‖y‖`. The root is found by Newton's method safeguarded by
/// bisection on the bracket `[0, max(1, ‖y‖/β)]`.
pub fn gradient_conjugate_quartic(y: &DVector<f64>, alpha: f64, beta: f64) -> Result<DVector<f64>> {
    let r = y.norm();
    if r == 0.0 {
        return Ok(DVector::zeros(y.len()));
    }
    let t = monotone_cubic_root(alpha, beta, r)?;
    Ok(y * (t / r))
}

/// Root of `αt³ + βt − r` on `t ≥ 0` for `α, β, r > 0`.
fn monotone_cubic_root(alpha: f64, beta: f64, r: f64) -> Result<f64> {
    let p = |t: f64| alpha * t * t * t + beta * t - r;
    let tol = 1e-14 * r.max(1.0);
    let mut lo = 0.0_f64;
    let mut hi = (r / beta).max(1.0);
    // Both r/β and ∛(r/α) bound the root from above.
    let mut t = (r / beta).min((r / alpha).cbrt());
    for _ in 0..200 {
        let pt = p(t);
        if pt.abs() <= tol {
            return Ok(t);
        }
        if pt > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= f64::EPSILON * hi {
            return Ok(t);
        }
        let dp = 3.0 * alpha * t * t + beta;
        let newton = t - pt / dp;
        t = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let residual = p(t);
    Err(Error::Numerical {
        what: format!("quartic inverse gradient did not converge for ‖y‖ = {r}"),
        residual,
    })
}

/// Outcome of a sampled relative-smoothness check.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSmoothnessReport {
    pub passed: bool,
    /// Largest `|f(y) − f(x) − ⟨∇f(x), y − x⟩| / D_h(y, x)` over pairs with `D > 0`.
    pub worst_ratio: f64,
    /// Index of the pair attaining `worst_ratio`.
    pub worst_pair: Option<usize>,
    pub pairs_checked: usize,
}

/// Checks `|f(y) − f(x) − ⟨∇f(x), y − x⟩| ≤ L·D_h(y, x)` at every sampled pair.
///
/// Rounding slack of `1e-12·(1 + |f(x)| + |f(y)|)` is allowed on each pair.
pub fn verify_relative_smoothness(
    kernel: &dyn Legendre,
    f: &dyn SmoothTerm,
    lipschitz: f64,
    samples: &[(DVector<f64>, DVector<f64>)],
) -> Result<RelativeSmoothnessReport> {
    if !(lipschitz >= 0.0) {
        return Err(Error::Parameter(format!(
            "relative smoothness modulus must be nonnegative, got {lipschitz}"
        )));
    }
    let n = kernel.dimension();
    check_dim(n, f.dimension())?;
    let mut passed = true;
    let mut worst_ratio = 0.0_f64;
    let mut worst_pair = None;
    for (idx, (x, y)) in samples.iter().enumerate() {
        check_dim(n, x.len())?;
        check_dim(n, y.len())?;
        for p in [x, y] {
            if !kernel.is_interior(p) {
                return Err(Error::OutsideDomain(format!(
                    "sample pair {idx} has a point outside the kernel interior"
                )));
            }
        }
        let fx = f.value(x);
        let fy = f.value(y);
        let gap = (fy - fx - f.gradient(x).dot(&(y - x))).abs();
        let dist = kernel.bregman_distance(y, x);
        let slack = 1e-12 * (1.0 + fx.abs() + fy.abs());
        if gap > lipschitz * dist + slack {
            passed = false;
        }
        if dist > 0.0 {
            let ratio = gap / dist;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_pair = Some(idx);
            }
        }
    }
    Ok(RelativeSmoothnessReport {
        passed,
        worst_ratio,
        worst_pair,
        pairs_checked: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn euclidean_distance_is_half_squared_norm() {
        let k = Kernel::euclidean(2);
        assert_eq!(
            k.bregman_distance(&dvector![3.0, 4.0], &dvector![0.0, 0.0]),
            12.5
        );
    }

    #[test]
    fn shannon_distance_matches_hand_value() {
        let k = Kernel::shannon(1);
        let d = k.bregman_distance(&dvector![2.0], &dvector![1.0]);
        assert!((d - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((d - 0.386294).abs() < 1e-6);
    }

    #[test]
    fn burg_boundary_anchor_is_infinite() {
        let k = Kernel::burg(1);
        assert_eq!(
            k.bregman_distance(&dvector![1.0], &dvector![0.0]),
            f64::INFINITY
        );
        assert!(!k.is_interior(&dvector![0.0]));
        assert!(!Kernel::shannon(1).is_interior(&dvector![0.0]));
        assert!(!Kernel::shannon(1).is_interior(&dvector![1e-301]));
    }

    #[test]
    fn distance_to_self_is_zero() {
        let p = dvector![0.4, 1.3];
        for k in [
            Kernel::euclidean(2),
            Kernel::quartic(2, 1.0, 1.0),
            Kernel::shannon(2),
            Kernel::burg(2),
        ] {
            assert_eq!(k.bregman_distance(&p, &p), 0.0, "{}", k.name());
        }
    }

    #[test]
    fn quartic_conjugate_examples() {
        let x = gradient_conjugate_quartic(&dvector![2.0, 0.0], 1.0, 1.0).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1] == 0.0);
        let z = gradient_conjugate_quartic(&dvector![0.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(z, dvector![0.0, 0.0]);
        let k = Kernel::quartic(2, 1.0, 1.0);
        let p = dvector![0.3, -0.7];
        let back = k.gradient_conjugate(&k.gradient(&p)).unwrap();
        assert!((back - &p).norm() <= 1e-10 * p.norm());
    }

    #[test]
    fn quartic_conjugate_large_and_tiny_arguments() {
        let k = Kernel::quartic(3, 0.5, 2.0);
        for scale in [1e-12, 1e-3, 1.0, 1e3, 1e8] {
            let y = dvector![1.0, -2.0, 0.5] * scale;
            let x = k.gradient_conjugate(&y).unwrap();
            let back = k.gradient(&x);
            assert!((back - &y).norm() <= 1e-12 * y.norm(), "scale {scale}");
        }
    }

    #[test]
    fn burg_conjugate_rejects_nonnegative_argument() {
        let k = Kernel::burg(2);
        assert!(matches!(
            k.gradient_conjugate(&dvector![-1.0, 0.0]),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn parses_registry_names() {
        assert_eq!(
            KernelSpec::parse("euclidean").unwrap(),
            KernelSpec::Euclidean
        );
        assert_eq!(
            KernelSpec::parse("quartic:2:0.5").unwrap(),
            KernelSpec::Quartic {
                alpha: 2.0,
                beta: 0.5
            }
        );
        assert_eq!(KernelSpec::parse("burg").unwrap(), KernelSpec::Burg);
        assert!(matches!(
            KernelSpec::parse("fermi"),
            Err(Error::Registry { .. })
        ));
        assert!(matches!(
            KernelSpec::parse("quartic:-1:1"),
            Err(Error::Parameter(_))
        ));
        let spec = KernelSpec::Quartic {
            alpha: 0.25,
            beta: 3.0,
        };
        assert_eq!(KernelSpec::parse(&spec.to_string()).unwrap(), spec);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let k = Kernel::euclidean(2);
        assert!(matches!(
            bregman_distance(&k, &dvector![1.0], &dvector![1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(k.gradient_conjugate(&dvector![1.0]).is_err());
        assert!(!k.is_interior(&dvector![1.0, 2.0, 3.0]));
    }

    #[test]
    fn coercivity_flags() {
        assert!(!Kernel::burg(1).is_coercive());
        assert!(Kernel::shannon(1).is_coercive());
        assert!(Kernel::quartic(1, 1.0, 1.0).has_full_domain());
        assert!(!Kernel::shannon(1).has_full_domain());
    }

    #[test]
    fn hessian_is_symmetric() {
        let k = Kernel::quartic(3, 1.5, 0.5);
        let x = dvector![0.3, -1.2, 2.0];
        let u = dvector![1.0, 0.5, -0.25];
        let v = dvector![-0.7, 2.0, 1.0];
        let a = k.hessian_vec(&x, &u).dot(&v);
        let b = u.dot(&k.hessian_vec(&x, &v));
        assert!(close(a, b, 1e-10));
    }
}
