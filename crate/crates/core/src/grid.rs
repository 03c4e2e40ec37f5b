//! Uniform grids on `[0, T]` and grid-sampled functions.
//!
//! `GridFunction` is the discrete stand-in for an element of `C(J, R)` with the
//! sup-norm; `PairFunction` is an element of the product space normed by the
//! vector `(||x||_inf, ||y||_inf)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::OrderedVector;

/// Uniform grid `t_j = j T / N`, `j = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    t_end: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(t_end: f64, intervals: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidGrid(format!("right endpoint must be positive, got {t_end}")));
        }
        if intervals == 0 {
            return Err(Error::InvalidGrid("at least one subinterval is required".into()));
        }
        Ok(Self { t_end, intervals })
    }

    /// Grid on `[0, 1]`.
    pub fn unit(intervals: usize) -> Result<Self> {
        Self::new(1.0, intervals)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of subintervals `N`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.intervals as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.intervals {
            self.t_end
        } else {
            self.t_end * j as f64 / self.intervals as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.node(j))
    }
}

/// Real function sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, found {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(v) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample {v}")));
        }
        Ok(Self { grid, samples })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Discrete sup-norm `max_j |f(t_j)|`.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_abs(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Piecewise-linear interpolant evaluated at `t` (clamped to `[0, T]`).
    pub fn interpolate(&self, t: f64) -> f64 {
        let h = self.grid.step();
        let x = (t.clamp(0.0, self.grid.t_end()) / h).min(self.grid.intervals() as f64);
        let j = (x.floor() as usize).min(self.grid.intervals() - 1);
        let theta = x - j as f64;
        (1.0 - theta) * self.samples[j] + theta * self.samples[j + 1]
    }

    /// Transfers the function to another grid by linear interpolation.
    pub fn resample(&self, grid: Grid) -> GridFunction {
        Self {
            grid,
            samples: grid.nodes().map(|t| self.interpolate(t)).collect(),
        }
    }
}

/// Element `(x, y)` of the product space; both components share one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFunction {
    first: GridFunction,
    second: GridFunction,
}

impl PairFunction {
    pub fn new(first: GridFunction, second: GridFunction) -> Result<Self> {
        if first.grid() != second.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { first, second })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            first: GridFunction::zeros(grid),
            second: GridFunction::zeros(grid),
        }
    }

    pub fn constant(grid: Grid, x: f64, y: f64) -> Result<Self> {
        Self::new(GridFunction::constant(grid, x)?, GridFunction::constant(grid, y)?)
    }

    pub fn grid(&self) -> Grid {
        self.first.grid()
    }

    pub fn first(&self) -> &GridFunction {
        &self.first
    }

    pub fn second(&self) -> &GridFunction {
        &self.second
    }

    /// Component `i` (0 or 1).
    pub fn component(&self, i: usize) -> &GridFunction {
        match i {
            0 => &self.first,
            1 => &self.second,
            _ => panic!("pair component index {i} out of range"),
        }
    }

    pub fn into_parts(self) -> (GridFunction, GridFunction) {
        (self.first, self.second)
    }

    /// Vector norm `(||x||_inf, ||y||_inf)`.
    pub fn pair_norm(&self) -> OrderedVector {
        OrderedVector::new(vec![self.first.sup_norm(), self.second.sup_norm()])
            .expect("sup-norms of finite samples are finite")
    }

    pub fn add(&self, other: &PairFunction) -> Result<PairFunction> {
        Self::new(self.first.add(&other.first)?, self.second.add(&other.second)?)
    }

    pub fn sub(&self, other: &PairFunction) -> Result<PairFunction> {
        Self::new(self.first.sub(&other.first)?, self.second.sub(&other.second)?)
    }

    /// Componentwise pointwise product `(x1 * x2, y1 * y2)`.
    pub fn multiply(&self, other: &PairFunction) -> Result<PairFunction> {
        Self::new(
            self.first.multiply(&other.first)?,
            self.second.multiply(&other.second)?,
        )
    }

    pub fn scale(&self, c: f64) -> PairFunction {
        Self {
            first: self.first.scale(c),
            second: self.second.scale(c),
        }
    }

    /// `(1 - lambda) self + lambda other`.
    pub fn lerp(&self, other: &PairFunction, lambda: f64) -> Result<PairFunction> {
        self.scale(1.0 - lambda).add(&other.scale(lambda))
    }

    pub fn resample(&self, grid: Grid) -> PairFunction {
        Self {
            first: self.first.resample(grid),
            second: self.second.resample(grid),
        }
    }

    /// `true` when `pair_norm(self) <= (r, r)`.
    pub fn within_radius(&self, r: f64) -> bool {
        self.first.sup_norm() <= r && self.second.sup_norm() <= r
    }
}

/// Free-function form of [`GridFunction::sup_norm`].
pub fn sup_norm(f: &GridFunction) -> f64 {
    f.sup_norm()
}

/// Free-function form of [`PairFunction::pair_norm`].
pub fn pair_norm(p: &PairFunction) -> OrderedVector {
    p.pair_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid {
        Grid::unit(n).unwrap()
    }

    #[test]
    fn grid_nodes_are_exact_at_the_ends() {
        let g = Grid::new(1.0, 3).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(3), 1.0);
        assert!(g.nodes().collect::<Vec<_>>().windows(2).all(|w| w[0] < w[1]));
        assert!(Grid::new(1.0, 0).is_err());
        assert!(Grid::new(0.0, 4).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        let g = unit(1000);
        assert_eq!(GridFunction::zeros(g).sup_norm(), 0.0);
        assert_eq!(GridFunction::from_fn(g, |t| t).unwrap().sup_norm(), 1.0);
        let f = GridFunction::from_fn(g, |t| 3.0 * (std::f64::consts::PI * t).cos() + 2.0 * t).unwrap();
        // Interior maximum where -3 pi sin(pi t) + 2 = 0.
        let t_star = (2.0 / (3.0 * std::f64::consts::PI)).asin() / std::f64::consts::PI;
        let peak = 3.0 * (std::f64::consts::PI * t_star).cos() + 2.0 * t_star;
        assert!((f.sup_norm() - peak).abs() < 1e-4);
        assert!(peak > 3.06);
    }

    #[test]
    fn pair_norm_examples() {
        let g = unit(10);
        assert_eq!(PairFunction::zeros(g).pair_norm().values(), &[0.0, 0.0]);
        let p = PairFunction::new(
            GridFunction::from_fn(g, |t| t).unwrap(),
            GridFunction::from_fn(g, |t| 1.0 - t).unwrap(),
        )
        .unwrap();
        assert_eq!(p.pair_norm().values(), &[1.0, 1.0]);
    }

    #[test]
    fn algebra_identities() {
        let g = unit(16);
        let f = GridFunction::from_fn(g, |t| (3.0 * t).sin() - 0.2).unwrap();
        let one = GridFunction::constant(g, 1.0).unwrap();
        let zero = GridFunction::zeros(g);
        assert_eq!(f.multiply(&one).unwrap(), f);
        assert_eq!(f.multiply(&zero).unwrap().sup_norm(), 0.0);
        assert_eq!(f.add(&zero).unwrap(), f);
        assert_eq!(f.scale(0.0).sup_norm(), 0.0);
        assert_eq!(f.add(&f.scale(-1.0)).unwrap().sup_norm(), 0.0);
        let t = GridFunction::from_fn(g, |t| t).unwrap();
        let sq = t.multiply(&t).unwrap();
        assert_eq!(sq.sup_norm(), 1.0);
        assert!(sq.sup_norm() <= t.sup_norm() * t.sup_norm());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridFunction::zeros(unit(8));
        let b = GridFunction::zeros(unit(9));
        assert_eq!(a.multiply(&b).unwrap_err(), Error::GridMismatch);
        assert_eq!(a.add(&b).unwrap_err(), Error::GridMismatch);
        assert!(PairFunction::new(a, b).is_err());
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let g = unit(7);
        let f = GridFunction::from_fn(g, |t| 2.0 * t - 1.0).unwrap();
        for t in [0.0, 0.13, 0.5, 0.99, 1.0] {
            assert!((f.interpolate(t) - (2.0 * t - 1.0)).abs() < 1e-14);
        }
        let fine = f.resample(unit(21));
        assert!((fine.samples()[21] - 1.0).abs() < 1e-14);
    }
}
