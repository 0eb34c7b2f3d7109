//! The unit-cube lattice and cell-centered fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub type Point = [f64; 3];

/// Uniform cell-centered lattice on `[0,1]^3` with `n` cells per axis.
///
/// Cell `(i, j, k)` has center `((i+½)h, (j+½)h, (k+½)h)` and linear index
/// `(i*n + j)*n + k` (row-major, last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
}

impl Grid {
    /// Smallest admissible resolution; stencils need two interior layers.
    pub const MIN_CELLS: usize = 4;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::GridTooSmall(n));
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Volume of one cell, the midpoint-rule weight.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn cell_of(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn center(&self, cell: [usize; 3]) -> Point {
        [self.coord(cell[0]), self.coord(cell[1]), self.coord(cell[2])]
    }

    /// Distance (in cells) from the cell to the nearest boundary face, 0 for
    /// boundary-adjacent cells.
    #[inline]
    pub fn layer(&self, cell: [usize; 3]) -> usize {
        cell.iter()
            .map(|&c| c.min(self.n - 1 - c))
            .min()
            .unwrap_or(0)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// One of the six faces of the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XLow,
    XHigh,
    YLow,
    YHigh,
    ZLow,
    ZHigh,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XLow,
        Face::XHigh,
        Face::YLow,
        Face::YHigh,
        Face::ZLow,
        Face::ZHigh,
    ];

    /// Coordinate axis the face is perpendicular to.
    pub fn axis(self) -> usize {
        match self {
            Face::XLow | Face::XHigh => 0,
            Face::YLow | Face::YHigh => 1,
            Face::ZLow | Face::ZHigh => 2,
        }
    }

    pub fn is_high(self) -> bool {
        matches!(self, Face::XHigh | Face::YHigh | Face::ZHigh)
    }

    /// Outward unit normal.
    pub fn normal(self) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.axis()] = if self.is_high() { 1.0 } else { -1.0 };
        n
    }

    /// The two tangential axes in increasing order.
    pub fn tangential_axes(self) -> [usize; 2] {
        match self.axis() {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }
}

/// One real value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.cell_count()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.cell_count()],
        }
    }

    /// Wraps raw row-major values. Panics if the length is not `n^3`.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.cell_count(), "scalar field length");
        Self { grid, values }
    }

    /// Samples `f` at every cell center.
    pub fn sample(grid: Grid, f: impl Fn(Point) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.cell_count());
        for idx in 0..grid.cell_count() {
            let cell = grid.cell_of(idx);
            let v = f(grid.center(cell));
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    cell,
                    component: 0,
                    value: v,
                });
            }
            values.push(v);
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &ScalarField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Three real components per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.cell_count();
        Self {
            grid,
            comps: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    pub fn from_components(grid: Grid, comps: [Vec<f64>; 3]) -> Self {
        for c in &comps {
            assert_eq!(c.len(), grid.cell_count(), "vector component length");
        }
        Self { grid, comps }
    }

    pub fn sample(grid: Grid, f: impl Fn(Point) -> [f64; 3]) -> Result<Self> {
        let len = grid.cell_count();
        let mut comps = [
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        ];
        for idx in 0..len {
            let cell = grid.cell_of(idx);
            let v = f(grid.center(cell));
            for (c, (&x, out)) in v.iter().zip(comps.iter_mut()).enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite {
                        cell,
                        component: c,
                        value: x,
                    });
                }
                out.push(x);
            }
        }
        Ok(Self { grid, comps })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.comps
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            comps: self
                .comps
                .clone()
                .map(|v| v.into_iter().map(|x| c * x).collect()),
        }
    }

    pub fn add_scaled(&self, c: f64, other: &VectorField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        Ok(out)
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_abs(&self) -> f64 {
        (0..self.grid.cell_count()).fold(0.0, |m, idx| {
            let [a, b, c] = self.at(idx);
            m.max(libm::sqrt(a * a + b * b + c * c))
        })
    }
}
