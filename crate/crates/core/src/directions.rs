//! Update directions for the envelope linesearch.
//!
//! The solver accepts any direction; fast ones come from quasi-Newton
//! schemes for the fixed-point residual `R(x) = x − x̄`, which produce
//! `d = −H·R(x)` with `H` satisfying the secant equation `H y = s` for
//! `s = x⁺ − x` and `y = R(x⁺) − R(x)`.
//!
//! Every built-in provider rescales its output so that
//! `‖d‖ ≤ D·‖x − x̄‖` for the provider's safeguard constant `D`.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

pub const DEFAULT_SAFEGUARD: f64 = 100.0;
pub const DEFAULT_LBFGS_MEMORY: usize = 10;
/// Frobenius-norm cap on the dense Broyden matrix.
pub const DEFAULT_BROYDEN_CAP: f64 = 1e8;

/// Source of the directions `dᵏ`.
///
/// `direction` is called once per iteration, at accepted iterates only, so
/// providers may difference consecutive calls to build secant pairs.
pub trait DirectionProvider {
    fn direction(&mut self, x: &DVector<f64>, x_bar: &DVector<f64>) -> DVector<f64>;

    /// Drops any history. Called when the solver changes the stepsize,
    /// since that changes the residual map.
    fn reset(&mut self) {}

    fn name(&self) -> String;
}

/// Rescales `d` so that `‖d‖ ≤ bound·‖residual‖`.
pub fn apply_safeguard(d: DVector<f64>, residual_norm: f64, bound: f64) -> DVector<f64> {
    let dn = d.norm();
    let cap = bound * residual_norm;
    if dn > cap && dn > 0.0 {
        d * (cap / dn)
    } else {
        d
    }
}

/// `d = x̄ − x`; turns the linesearch into the plain forward-backward iteration.
pub fn bfbs_direction(x: &DVector<f64>, x_bar: &DVector<f64>) -> DVector<f64> {
    x_bar - x
}

/// Direction provider registry names: `bfbs`, `zero`, `broyden`, `lbfgs:m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionSpec {
    Bfbs,
    Zero,
    Broyden,
    LBfgs { memory: usize },
}

impl DirectionSpec {
    pub const NAMES: &'static str = "bfbs, zero, broyden, lbfgs:m";

    pub fn parse(name: &str) -> Result<Self> {
        let unknown = || Error::Registry {
            kind: "direction",
            name: name.to_string(),
            valid: Self::NAMES.to_string(),
        };
        let lower = name.trim().to_ascii_lowercase();
        let mut parts = lower.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        match (head, rest.as_slice()) {
            ("bfbs", []) => Ok(DirectionSpec::Bfbs),
            ("zero", []) => Ok(DirectionSpec::Zero),
            ("broyden", []) => Ok(DirectionSpec::Broyden),
            ("lbfgs", []) => Ok(DirectionSpec::LBfgs {
                memory: DEFAULT_LBFGS_MEMORY,
            }),
            ("lbfgs", [m]) => match m.parse::<usize>() {
                Ok(memory) if memory > 0 => Ok(DirectionSpec::LBfgs { memory }),
                _ => Err(unknown()),
            },
            _ => Err(unknown()),
        }
    }

    pub fn build(&self, dim: usize) -> Box<dyn DirectionProvider + Send> {
        match *self {
            DirectionSpec::Bfbs => Box::new(Bfbs::default()),
            DirectionSpec::Zero => Box::new(ZeroDirection),
            DirectionSpec::Broyden => Box::new(Broyden::new(dim)),
            DirectionSpec::LBfgs { memory } => Box::new(LBfgs::new(memory)),
        }
    }
}

impl fmt::Display for DirectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectionSpec::Bfbs => write!(f, "bfbs"),
            DirectionSpec::Zero => write!(f, "zero"),
            DirectionSpec::Broyden => write!(f, "broyden"),
            DirectionSpec::LBfgs { memory } => write!(f, "lbfgs:{memory}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bfbs {
    pub safeguard: f64,
}

impl Default for Bfbs {
    fn default() -> Self {
        Bfbs {
            safeguard: DEFAULT_SAFEGUARD,
        }
    }
}

impl DirectionProvider for Bfbs {
    fn direction(&mut self, x: &DVector<f64>, x_bar: &DVector<f64>) -> DVector<f64> {
        let d = bfbs_direction(x, x_bar);
        let rn = d.norm();
        apply_safeguard(d, rn, self.safeguard)
    }
    fn name(&self) -> String {
        "bfbs".into()
    }
}

/// `d = 0`: the candidate slides from `x` toward `x̄`.
#[derive(Debug, Clone, Default)]
pub struct ZeroDirection;

impl DirectionProvider for ZeroDirection {
    fn direction(&mut self, x: &DVector<f64>, _x_bar: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }
    fn name(&self) -> String {
        "zero".into()
    }
}

/// Rank-one inverse update `H⁺ = H + (s − Hy)yᵀ/⟨y, y⟩`, which satisfies `H⁺y = s`.
///
/// The update is skipped, returning `H`, when `⟨y, y⟩ < 1e-24` or when
/// `‖H⁺‖_F` would exceed `norm_cap`.
pub fn broyden_update(
    h: &DMatrix<f64>,
    s: &DVector<f64>,
    y: &DVector<f64>,
    norm_cap: f64,
) -> Result<DMatrix<f64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::Parameter(format!(
            "Broyden matrix must be square, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    check_dim(h.nrows(), s.len())?;
    check_dim(h.nrows(), y.len())?;
    let yy = y.norm_squared();
    if yy < 1e-24 {
        return Ok(h.clone());
    }
    let hy = h * y;
    let updated = h + (s - hy) * (y.transpose() / yy);
    if !(updated.norm() <= norm_cap) {
        return Ok(h.clone());
    }
    Ok(updated)
}

/// Dense Broyden quasi-Newton directions on the fixed-point residual.
#[derive(Debug, Clone)]
pub struct Broyden {
    h: DMatrix<f64>,
    pub safeguard: f64,
    pub norm_cap: f64,
    previous: Option<(DVector<f64>, DVector<f64>)>,
}

impl Broyden {
    pub fn new(dim: usize) -> Self {
        Broyden {
            h: DMatrix::identity(dim, dim),
            safeguard: DEFAULT_SAFEGUARD,
            norm_cap: DEFAULT_BROYDEN_CAP,
            previous: None,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }
}

impl DirectionProvider for Broyden {
    fn direction(&mut self, x: &DVector<f64>, x_bar: &DVector<f64>) -> DVector<f64> {
        let r = x - x_bar;
        if let Some((xp, rp)) = self.previous.take() {
            let s = x - xp;
            let y = &r - rp;
            if let Ok(h) = broyden_update(&self.h, &s, &y, self.norm_cap) {
                self.h = h;
            }
        }
        let d = -(&self.h * &r);
        let rn = r.norm();
        self.previous = Some((x.clone(), r));
        apply_safeguard(d, rn, self.safeguard)
    }

    fn reset(&mut self) {
        let n = self.h.nrows();
        self.h = DMatrix::identity(n, n);
        self.previous = None;
    }

    fn name(&self) -> String {
        "broyden".into()
    }
}

/// Limited-memory BFGS directions on the fixed-point residual.
///
/// Pairs with `⟨s, y⟩ ≤ 1e-12·‖s‖·‖y‖` are skipped; the initial matrix is
/// `⟨s, y⟩/⟨y, y⟩·I` from the newest pair.
#[derive(Debug, Clone)]
pub struct LBfgs {
    memory: usize,
    pub safeguard: f64,
    pairs: VecDeque<(DVector<f64>, DVector<f64>, f64)>,
    previous: Option<(DVector<f64>, DVector<f64>)>,
}

impl LBfgs {
    pub fn new(memory: usize) -> Self {
        assert!(memory > 0, "L-BFGS memory must be positive");
        LBfgs {
            memory,
            safeguard: DEFAULT_SAFEGUARD,
            pairs: VecDeque::with_capacity(memory),
            previous: None,
        }
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn history_len(&self) -> usize {
        self.pairs.len()
    }

    /// Most recent stored `(s, y)`.
    pub fn last_pair(&self) -> Option<(&DVector<f64>, &DVector<f64>)> {
        self.pairs.back().map(|(s, y, _)| (s, y))
    }

    /// Stores `(s, y)` unless it fails the curvature test. Returns whether it was kept.
    pub fn push_pair(&mut self, s: DVector<f64>, y: DVector<f64>) -> bool {
        let sy = s.dot(&y);
        if !(sy > 1e-12 * s.norm() * y.norm()) {
            return false;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// `H·v` by the two-loop recursion; the identity when the history is empty.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut q = v.clone();
        let Some((s_new, y_new, _)) = self.pairs.back() else {
            return q;
        };
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * s.dot(&q);
            q.axpy(-a, y, 1.0);
            alphas.push(a);
        }
        let scale = s_new.dot(y_new) / y_new.norm_squared();
        let mut r = q * scale;
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * y.dot(&r);
            r.axpy(a - b, s, 1.0);
        }
        r
    }
}

impl DirectionProvider for LBfgs {
    fn direction(&mut self, x: &DVector<f64>, x_bar: &DVector<f64>) -> DVector<f64> {
        let r = x - x_bar;
        if let Some((xp, rp)) = self.previous.take() {
            self.push_pair(x - xp, &r - rp);
        }
        let d = -self.apply(&r);
        let rn = r.norm();
        self.previous = Some((x.clone(), r));
        apply_safeguard(d, rn, self.safeguard)
    }

    fn reset(&mut self) {
        self.pairs.clear();
        self.previous = None;
    }

    fn name(&self) -> String {
        format!("lbfgs:{}", self.memory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;

    #[test]
    fn bfbs_examples() {
        assert_eq!(
            bfbs_direction(&dvector![2.0], &dvector![1.0]),
            dvector![-1.0]
        );
        assert_eq!(
            bfbs_direction(&dvector![0.5], &dvector![0.5]),
            dvector![0.0]
        );
        let x = dvector![2.0, -1.0];
        let xb = dvector![1.0, 0.5];
        let d = bfbs_direction(&x, &xb);
        for tau in [1.0, 0.5, 0.25] {
            let cand = &xb * (1.0 - tau) + (&x + &d) * tau;
            assert!((cand - &xb).norm() < 1e-15);
        }
    }

    #[test]
    fn broyden_example() {
        let h = DMatrix::identity(2, 2);
        let s = dvector![1.0, 0.0];
        let y = dvector![2.0, 0.0];
        let hp = broyden_update(&h, &s, &y, 1e8).unwrap();
        assert_eq!(hp, dmatrix![0.5, 0.0; 0.0, 1.0]);
        assert_eq!(&hp * &y, s);
    }

    #[test]
    fn broyden_no_op_when_secant_already_holds() {
        let h = dmatrix![2.0, 1.0; 0.0, 3.0];
        let y = dvector![1.0, -1.0];
        let s = &h * &y;
        assert_eq!(broyden_update(&h, &s, &y, 1e8).unwrap(), h);
    }

    #[test]
    fn broyden_skips_tiny_y_and_norm_blowup() {
        let h = DMatrix::identity(2, 2);
        let tiny = dvector![1e-13, 0.0];
        assert_eq!(
            broyden_update(&h, &dvector![1.0, 0.0], &tiny, 1e8).unwrap(),
            h
        );
        let y = dvector![1e-6, 0.0];
        assert_eq!(broyden_update(&h, &dvector![1e6, 0.0], &y, 1e8).unwrap(), h);
        assert!(broyden_update(&h, &dvector![1.0], &y, 1e8).is_err());
    }

    #[test]
    fn identity_operator_gives_bfbs_direction() {
        let mut b = Broyden::new(2);
        let x = dvector![1.0, 2.0];
        let xb = dvector![0.5, 1.0];
        assert_eq!(b.direction(&x, &xb), &xb - &x);
        let mut l = LBfgs::new(5);
        assert_eq!(l.direction(&x, &xb), &xb - &x);
    }

    #[test]
    fn zero_residual_gives_zero_direction() {
        let x = dvector![1.0, 2.0];
        let mut l = LBfgs::new(3);
        l.direction(&dvector![0.0, 0.0], &dvector![1.0, 1.0]);
        assert_eq!(l.direction(&x, &x).norm(), 0.0);
        let mut b = Broyden::new(2);
        assert_eq!(b.direction(&x, &x).norm(), 0.0);
    }

    #[test]
    fn lbfgs_secant_on_last_pair() {
        let mut l = LBfgs::new(3);
        let pairs = [
            (dvector![1.0, 0.0, 0.5], dvector![2.0, 0.1, 0.4]),
            (dvector![0.0, 1.0, -0.2], dvector![0.3, 1.5, 0.0]),
            (dvector![0.5, 0.5, 1.0], dvector![1.0, 0.2, 2.0]),
            (dvector![-0.3, 0.2, 0.1], dvector![-0.5, 0.4, 0.3]),
        ];
        for (s, y) in pairs {
            assert!(l.push_pair(s, y));
        }
        assert_eq!(l.history_len(), 3);
        let (s, y) = l.last_pair().unwrap();
        let hy = l.apply(y);
        assert!((hy - s).norm() <= 1e-12 * (s.norm() + y.norm()));
    }

    #[test]
    fn lbfgs_skips_negative_curvature() {
        let mut l = LBfgs::new(2);
        assert!(!l.push_pair(dvector![1.0, 0.0], dvector![-1.0, 0.0]));
        assert_eq!(l.history_len(), 0);
    }

    #[test]
    fn parses_provider_names() {
        assert_eq!(DirectionSpec::parse("bfbs").unwrap(), DirectionSpec::Bfbs);
        assert_eq!(
            DirectionSpec::parse("lbfgs:7").unwrap(),
            DirectionSpec::LBfgs { memory: 7 }
        );
        assert!(DirectionSpec::parse("lbfgs:0").is_err());
        assert!(DirectionSpec::parse("newton").is_err());
        for spec in [
            DirectionSpec::Bfbs,
            DirectionSpec::Zero,
            DirectionSpec::Broyden,
            DirectionSpec::LBfgs { memory: 4 },
        ] {
            assert_eq!(DirectionSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    fn vec3() -> impl Strategy<Value = DVector<f64>> {
        prop::collection::vec(-10.0..10.0f64, 3).prop_map(DVector::from_vec)
    }

    proptest! {
        #[test]
        fn broyden_secant_holds(
            hv in prop::collection::vec(-3.0..3.0f64, 9),
            s in vec3(),
            y in vec3(),
        ) {
            prop_assume!(y.norm_squared() > 1e-6);
            let h = DMatrix::from_vec(3, 3, hv);
            let hp = broyden_update(&h, &s, &y, f64::INFINITY).unwrap();
            let scale = s.norm() + hp.norm() * y.norm();
            prop_assert!((&hp * &y - &s).norm() <= 1e-14 * scale.max(1.0));
        }

        #[test]
        fn safeguard_bounds_every_provider(
            xs in prop::collection::vec((vec3(), vec3()), 1..8),
            bound in 0.5..50.0f64,
        ) {
            let mut providers: Vec<Box<dyn DirectionProvider>> = vec![
                Box::new(Bfbs { safeguard: bound }),
                Box::new(ZeroDirection),
                Box::new(Broyden { safeguard: bound, ..Broyden::new(3) }),
                Box::new(LBfgs { safeguard: bound, ..LBfgs::new(4) }),
            ];
            for p in providers.iter_mut() {
                for (x, xb) in &xs {
                    let d = p.direction(x, xb);
                    let cap = bound * (x - xb).norm();
                    prop_assert!(d.norm() <= cap * (1.0 + 1e-12), "{}: {} > {}", p.name(), d.norm(), cap);
                }
            }
        }
    }
}
