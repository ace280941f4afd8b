//! Brute-force oracles for validating the main implementation: exhaustive
//! grid minimization, central finite differences, and the grid check that
//! the forward-backward operator equals a Bregman proximal-point step on
//! `φ` with kernel `ĥ = h/γ − f`.

use nalgebra::DVector;

use crate::envelope::fb_operator;
use crate::error::{Error, Result};
use crate::problem::Problem;

/// Largest grid [`grid_argmin`] will evaluate exhaustively.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Coarse points per axis used by the two-level search in
/// [`lattice_argmin`] when a lattice exceeds [`MAX_GRID_POINTS`].
pub const COARSE_POINTS_PER_AXIS: usize = 401;

/// A uniform lattice on the box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>, points_per_axis: usize) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Parameter(
                "grid bounds must be nonempty and equally long".into(),
            ));
        }
        if lower.len() > 2 {
            return Err(Error::Parameter(format!(
                "grid oracles are limited to dimension 2, got {}",
                lower.len()
            )));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l < u)) {
            return Err(Error::Parameter(
                "grid needs lower < upper componentwise".into(),
            ));
        }
        if points_per_axis < 2 {
            return Err(Error::Parameter(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        Ok(GridSpec {
            lower,
            upper,
            points_per_axis,
        })
    }

    /// The smallest box containing every point, widened by `margin` on each side.
    pub fn around(points: &[&DVector<f64>], margin: f64, points_per_axis: usize) -> Result<Self> {
        let n = points
            .first()
            .ok_or_else(|| Error::Parameter("no points given".into()))?
            .len();
        let lower = DVector::from_fn(n, |i, _| {
            points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min) - margin
        });
        let upper = DVector::from_fn(n, |i, _| {
            points
                .iter()
                .map(|p| p[i])
                .fold(f64::NEG_INFINITY, f64::max)
                + margin
        });
        GridSpec::new(lower, upper, points_per_axis)
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.saturating_pow(self.dimension() as u32)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.points_per_axis - 1) as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        (0..self.dimension())
            .map(|i| self.spacing(i).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn coord(&self, axis: usize, index: usize) -> f64 {
        if index == self.points_per_axis - 1 {
            self.upper[axis]
        } else {
            self.lower[axis] + index as f64 * self.spacing(axis)
        }
    }
}

/// Running minimum over nodes visited in lexicographic order; the first
/// strictly smaller value wins, so ties go to the lexicographically smallest node.
struct Best {
    index: Option<Vec<usize>>,
    value: f64,
}

impl Best {
    fn new() -> Self {
        Best {
            index: None,
            value: f64::INFINITY,
        }
    }

    fn offer(&mut self, idx: &[usize], value: f64) {
        let v = if value.is_nan() { f64::INFINITY } else { value };
        if v < self.value {
            self.value = v;
            self.index = Some(idx.to_vec());
        }
    }
}

/// Evaluates `objective` on index ranges `ranges[axis] = (start, stop, step)`.
fn scan<F>(grid: &GridSpec, objective: &F, ranges: &[(usize, usize, usize)], best: &mut Best)
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut z = DVector::zeros(grid.dimension());
    let axis_indices = |(start, stop, step): (usize, usize, usize)| {
        let mut v: Vec<usize> = (start..=stop).step_by(step).collect();
        if v.last() != Some(&stop) {
            v.push(stop);
        }
        v
    };
    match ranges {
        [r0] => {
            for i in axis_indices(*r0) {
                z[0] = grid.coord(0, i);
                best.offer(&[i], objective(&z));
            }
        }
        [r0, r1] => {
            let js = axis_indices(*r1);
            for i in axis_indices(*r0) {
                z[0] = grid.coord(0, i);
                for &j in &js {
                    z[1] = grid.coord(1, j);
                    best.offer(&[i, j], objective(&z));
                }
            }
        }
        _ => unreachable!("grid dimension is validated to be 1 or 2"),
    }
}

fn node(grid: &GridSpec, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(grid.dimension(), |a, _| grid.coord(a, idx[a]))
}

/// Exhaustive minimization over the grid.
///
/// Ties are broken by the lexicographically smallest node; `NaN` counts as
/// `+∞`. Fails when the grid exceeds [`MAX_GRID_POINTS`] or every value is `+∞`.
pub fn grid_argmin<F>(objective: F, grid: &GridSpec) -> Result<(DVector<f64>, f64)>
where
    F: Fn(&DVector<f64>) -> f64,
{
    if grid.total_points() > MAX_GRID_POINTS {
        return Err(Error::Parameter(format!(
            "grid of {} points exceeds the cap of {MAX_GRID_POINTS}",
            grid.total_points()
        )));
    }
    let last = grid.points_per_axis - 1;
    let ranges = vec![(0, last, 1); grid.dimension()];
    let mut best = Best::new();
    scan(grid, &objective, &ranges, &mut best);
    match best.index {
        Some(idx) => Ok((node(grid, &idx), best.value)),
        None => Err(Error::EmptyDomain),
    }
}

/// Minimization over a lattice of any size.
///
/// Lattices within [`MAX_GRID_POINTS`] are scanned exhaustively. Larger ones
/// are scanned on a coarse sublattice first (every `s`-th node, at most
/// [`COARSE_POINTS_PER_AXIS`] per axis), then exhaustively on the fine
/// lattice within `±2s` nodes of the coarse minimizer. Returned nodes are
/// always nodes of the fine lattice.
pub fn lattice_argmin<F>(objective: F, grid: &GridSpec) -> Result<(DVector<f64>, f64)>
where
    F: Fn(&DVector<f64>) -> f64,
{
    if grid.total_points() <= MAX_GRID_POINTS {
        return grid_argmin(objective, grid);
    }
    let last = grid.points_per_axis - 1;
    let stride = last.div_ceil(COARSE_POINTS_PER_AXIS - 1).max(1);
    let mut coarse = Best::new();
    scan(
        grid,
        &objective,
        &vec![(0, last, stride); grid.dimension()],
        &mut coarse,
    );
    let center = coarse.index.ok_or(Error::EmptyDomain)?;
    let window: Vec<(usize, usize, usize)> = center
        .iter()
        .map(|&c| (c.saturating_sub(2 * stride), (c + 2 * stride).min(last), 1))
        .collect();
    let mut fine = Best::new();
    scan(grid, &objective, &window, &mut fine);
    let idx = fine.index.ok_or(Error::EmptyDomain)?;
    Ok((node(grid, &idx), fine.value))
}

/// Central-difference gradient with per-coordinate step `step`.
pub fn finite_diff_gradient<F>(field: F, x: &DVector<f64>, step: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    if !(step > 0.0) {
        return Err(Error::Parameter(format!(
            "step must be positive, got {step}"
        )));
    }
    let mut probe = x.clone();
    let mut grad = DVector::zeros(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let fp = field(&probe);
        probe[i] = x[i] - step;
        let fm = field(&probe);
        probe[i] = x[i];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::Numerical {
                what: format!("non-finite field value along coordinate {i}"),
                residual: if fp.is_finite() { fm } else { fp },
            });
        }
        grad[i] = (fp - fm) / (2.0 * step);
    }
    Ok(grad)
}

/// Outcome of [`check_pp_equivalence`].
#[derive(Debug, Clone, PartialEq)]
pub struct PpEquivalenceReport {
    /// `x̄` from the forward-backward operator.
    pub fb_point: DVector<f64>,
    /// Lattice minimizer of `φ(z) + D_ĥ(z, x)`.
    pub grid_point: DVector<f64>,
    pub grid_value: f64,
    /// `φ(x̄) + D_ĥ(x̄, x)`.
    pub fb_value: f64,
    /// Envelope value reported by the forward-backward operator.
    pub bfbe: f64,
    pub distance: f64,
    pub cell_diagonal: f64,
    /// The two points are more than a cell apart yet `x̄` is at least as good
    /// as every lattice node: the argmin is (numerically) not unique.
    pub multivalued: bool,
    pub passed: bool,
}

/// Compares `T(x)` from [`fb_operator`] with a lattice minimizer of the
/// proximal-point objective `z ↦ φ(z) + D_ĥ(z, x)`, `ĥ = h/γ − f`.
///
/// Passes when the points are within one cell diagonal of each other, or
/// when the lattice found a different minimizer that does not beat `x̄`
/// (flagged as `multivalued`).
pub fn check_pp_equivalence(
    problem: &Problem,
    gamma: f64,
    x: &DVector<f64>,
    grid: &GridSpec,
) -> Result<PpEquivalenceReport> {
    if grid.dimension() != problem.dimension() {
        return Err(Error::DimensionMismatch {
            expected: problem.dimension(),
            actual: grid.dimension(),
        });
    }
    let step = fb_operator(problem, gamma, x)?;
    let kernel = problem.kernel.as_ref();
    let f = problem.smooth.as_ref();
    let g = problem.nonsmooth.as_ref();
    let hhat_x = kernel.value(x) / gamma - f.value(x);
    let grad_hhat_x = kernel.gradient(x) / gamma - f.gradient(x);

    let objective = |z: &DVector<f64>| -> f64 {
        let hz = kernel.value(z);
        if !hz.is_finite() {
            return f64::INFINITY;
        }
        let gz = g.value(z);
        if !gz.is_finite() {
            return f64::INFINITY;
        }
        let fz = f.value(z);
        let hhat_z = hz / gamma - fz;
        let mut lin = 0.0;
        for i in 0..z.len() {
            lin += grad_hhat_x[i] * (z[i] - x[i]);
        }
        fz + gz + (hhat_z - hhat_x - lin)
    };

    let (grid_point, grid_value) = lattice_argmin(objective, grid)?;
    let fb_value = objective(&step.x_bar);
    let distance = (&grid_point - &step.x_bar).norm();
    let cell_diagonal = grid.cell_diagonal();
    let close = distance <= cell_diagonal * (1.0 + 1e-9);
    let no_better = fb_value <= grid_value + 1e-10 * (1.0 + grid_value.abs());
    let multivalued = !close && no_better;
    Ok(PpEquivalenceReport {
        fb_point: step.x_bar,
        grid_point,
        grid_value,
        fb_value,
        bfbe: step.bfbe,
        distance,
        cell_diagonal,
        multivalued,
        passed: close || multivalued,
    })
}
