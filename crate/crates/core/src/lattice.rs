//! Staggered storage: face, edge and node fields on the cell lattice.
//!
//! Along each axis a component either sits at the `n` cell centers or at the
//! `n + 1` nodes `0, h, .., 1`. Face component `a` is nodal along axis `a`
//! only; edge component `a` is nodal along the two other axes.

use alloc::vec;
use alloc::vec::Vec;
use core::marker::PhantomData;

use crate::grid::{Grid, Point, ScalarField, VectorField};
use crate::{Error, Result};

pub(crate) type Dims = [usize; 3];

#[inline]
pub(crate) fn dims_of(n: usize, nodal: [bool; 3]) -> Dims {
    nodal.map(|b| if b { n + 1 } else { n })
}

#[inline]
pub(crate) fn len_of(d: Dims) -> usize {
    d[0] * d[1] * d[2]
}

#[inline]
pub(crate) fn idx3(d: Dims, i: usize, j: usize, k: usize) -> usize {
    (i * d[1] + j) * d[2] + k
}

#[inline]
fn split(d: Dims, axis: usize) -> (usize, usize) {
    let outer: usize = d[..axis].iter().product();
    let inner: usize = d[axis + 1..].iter().product();
    (outer, inner)
}

/// Quadrature weights along one axis: `h` at centers, trapezoid at nodes.
pub(crate) fn weights_1d(n: usize, h: f64, nodal: bool) -> Vec<f64> {
    if nodal {
        let mut w = vec![h; n + 1];
        w[0] = 0.5 * h;
        w[n] = 0.5 * h;
        w
    } else {
        vec![h; n]
    }
}

pub(crate) fn weights_3d(n: usize, h: f64, nodal: [bool; 3]) -> Vec<f64> {
    let w = nodal.map(|b| weights_1d(n, h, b));
    let mut out = Vec::with_capacity(w[0].len() * w[1].len() * w[2].len());
    for &a in &w[0] {
        for &b in &w[1] {
            for &c in &w[2] {
                out.push(a * b * c);
            }
        }
    }
    out
}

/// `out += c * Dc(src)` along `axis`, where `src` is cell-centered along the
/// axis (`n` points) and `out` nodal (`n + 1`). The boundary uses the odd
/// reflection `s_{-1} = -s_0`, `s_n = -s_{n-1}`.
pub(crate) fn dc_acc(out: &mut [f64], src: &[f64], sdims: Dims, axis: usize, c: f64) {
    let n = sdims[axis];
    let (outer, inner) = split(sdims, axis);
    for a in 0..outer {
        let sbase = a * n * inner;
        let obase = a * (n + 1) * inner;
        for i in 0..=n {
            let o = &mut out[obase + i * inner..obase + (i + 1) * inner];
            if i == 0 {
                let hi = &src[sbase..sbase + inner];
                for (x, &s) in o.iter_mut().zip(hi) {
                    *x += 2.0 * c * s;
                }
            } else if i == n {
                let lo = &src[sbase + (n - 1) * inner..sbase + n * inner];
                for (x, &s) in o.iter_mut().zip(lo) {
                    *x -= 2.0 * c * s;
                }
            } else {
                let lo = &src[sbase + (i - 1) * inner..sbase + i * inner];
                let hi = &src[sbase + i * inner..sbase + (i + 1) * inner];
                for ((x, &l), &r) in o.iter_mut().zip(lo).zip(hi) {
                    *x += c * (r - l);
                }
            }
        }
    }
}

/// `out += c * Dn(src)` along `axis`, `src` nodal (`n + 1`), `out` centered.
pub(crate) fn dn_acc(out: &mut [f64], src: &[f64], sdims: Dims, axis: usize, c: f64) {
    let n = sdims[axis] - 1;
    let (outer, inner) = split(sdims, axis);
    for a in 0..outer {
        let sbase = a * (n + 1) * inner;
        let obase = a * n * inner;
        for i in 0..n {
            let o = &mut out[obase + i * inner..obase + (i + 1) * inner];
            let lo = &src[sbase + i * inner..sbase + (i + 1) * inner];
            let hi = &src[sbase + (i + 1) * inner..sbase + (i + 2) * inner];
            for ((x, &l), &r) in o.iter_mut().zip(lo).zip(hi) {
                *x += c * (r - l);
            }
        }
    }
}

/// Averages a nodal axis down to centers: `out[i] += c * (s[i] + s[i+1]) / 2`.
pub(crate) fn avg_to_centers(out: &mut [f64], src: &[f64], sdims: Dims, axis: usize, c: f64) {
    let n = sdims[axis] - 1;
    let (outer, inner) = split(sdims, axis);
    let c = 0.5 * c;
    for a in 0..outer {
        let sbase = a * (n + 1) * inner;
        let obase = a * n * inner;
        for i in 0..n {
            let o = &mut out[obase + i * inner..obase + (i + 1) * inner];
            let lo = &src[sbase + i * inner..sbase + (i + 1) * inner];
            let hi = &src[sbase + (i + 1) * inner..sbase + (i + 2) * inner];
            for ((x, &l), &r) in o.iter_mut().zip(lo).zip(hi) {
                *x += c * (r + l);
            }
        }
    }
}

pub(crate) fn wdot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

#[inline]
fn coord(h: f64, i: usize, nodal: bool) -> f64 {
    if nodal {
        i as f64 * h
    } else {
        (i as f64 + 0.5) * h
    }
}

/// Which axes are nodal for each component of a staggered family.
pub trait Layout: Clone + core::fmt::Debug {
    const NAME: &'static str;
    fn nodal(comp: usize) -> [bool; 3];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Faces;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edges;

impl Layout for Faces {
    const NAME: &'static str = "faces";
    fn nodal(comp: usize) -> [bool; 3] {
        let mut m = [false; 3];
        m[comp] = true;
        m
    }
}

impl Layout for Edges {
    const NAME: &'static str = "edges";
    fn nodal(comp: usize) -> [bool; 3] {
        let mut m = [true; 3];
        m[comp] = false;
        m
    }
}

/// A three-component staggered field.
#[derive(Debug, Clone, PartialEq)]
pub struct Staggered<L: Layout> {
    grid: Grid,
    comps: [Vec<f64>; 3],
    _layout: PhantomData<L>,
}

pub type FaceField = Staggered<Faces>;
pub type EdgeField = Staggered<Edges>;

impl<L: Layout> Staggered<L> {
    pub fn zeros(grid: Grid) -> Self {
        let comps = [0, 1, 2].map(|c| vec![0.0; len_of(Self::dims_for(grid, c))]);
        Self {
            grid,
            comps,
            _layout: PhantomData,
        }
    }

    pub fn from_components(grid: Grid, comps: [Vec<f64>; 3]) -> Self {
        for (c, v) in comps.iter().enumerate() {
            assert_eq!(v.len(), len_of(Self::dims_for(grid, c)), "{} component {c}", L::NAME);
        }
        Self {
            grid,
            comps,
            _layout: PhantomData,
        }
    }

    #[inline]
    pub(crate) fn dims_for(grid: Grid, comp: usize) -> Dims {
        dims_of(grid.n(), L::nodal(comp))
    }

    #[inline]
    pub fn dims(&self, comp: usize) -> [usize; 3] {
        Self::dims_for(self.grid, comp)
    }

    /// Location of entry `(i, j, k)` of component `comp`.
    pub fn location(grid: Grid, comp: usize, ijk: [usize; 3]) -> Point {
        let nodal = L::nodal(comp);
        [0, 1, 2].map(|a| coord(grid.h(), ijk[a], nodal[a]))
    }

    /// Samples component `a` of `f` at the locations of component `a`.
    pub fn sample(grid: Grid, f: impl Fn(Point) -> [f64; 3]) -> Result<Self> {
        let mut out = Self::zeros(grid);
        for c in 0..3 {
            let d = Self::dims_for(grid, c);
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let v = f(Self::location(grid, c, [i, j, k]))[c];
                        if !v.is_finite() {
                            return Err(Error::NonFinite {
                                cell: [i, j, k],
                                component: c,
                                value: v,
                            });
                        }
                        out.comps[c][idx3(d, i, j, k)] = v;
                    }
                }
            }
        }
        Ok(out)
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

    pub fn weights(&self, comp: usize) -> Vec<f64> {
        weights_3d(self.grid.n(), self.grid.h(), L::nodal(comp))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.comps
            .iter_mut()
            .flat_map(|v| v.iter_mut())
            .for_each(|x| *x *= c);
        out
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        Ok(out)
    }

    /// Quadrature inner product (midpoint in centered directions, trapezoid
    /// in nodal ones).
    pub fn dot(&self, other: &Self) -> f64 {
        (0..3)
            .map(|c| wdot(&self.weights(c), &self.comps[c], &other.comps[c]))
            .sum()
    }

    pub fn l2(&self) -> f64 {
        libm::sqrt(self.dot(self).max(0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Interpolates every component to cell centers by averaging its nodal
    /// neighbours.
    pub fn to_cells(&self) -> VectorField {
        let g = self.grid;
        let comps = [0, 1, 2].map(|c| {
            let mut cur = self.comps[c].clone();
            let mut d = self.dims(c);
            for axis in 0..3 {
                if L::nodal(c)[axis] {
                    let mut nd = d;
                    nd[axis] -= 1;
                    let mut next = vec![0.0; len_of(nd)];
                    avg_to_centers(&mut next, &cur, d, axis, 1.0);
                    cur = next;
                    d = nd;
                }
            }
            cur
        });
        VectorField::from_components(g, comps)
    }
}

/// One value per lattice node, `(n+1)^3` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    grid: Grid,
    values: Vec<f64>,
}

impl NodeField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; len_of(Self::dims_for(grid))],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), len_of(Self::dims_for(grid)), "node field length");
        Self { grid, values }
    }

    #[inline]
    pub(crate) fn dims_for(grid: Grid) -> Dims {
        [grid.n() + 1; 3]
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> Vec<f64> {
        weights_3d(self.grid.n(), self.grid.h(), [true; 3])
    }

    pub fn l2(&self) -> f64 {
        libm::sqrt(wdot(&self.weights(), &self.values, &self.values).max(0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Cell-field quadrature helpers shared with the solvers.
pub(crate) fn cell_l2(s: &ScalarField) -> f64 {
    let g = s.grid();
    libm::sqrt(g.cell_volume() * s.values().iter().map(|v| v * v).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn staggered_dims() {
        let g = grid(5);
        let f = FaceField::zeros(g);
        assert_eq!(f.dims(0), [6, 5, 5]);
        assert_eq!(f.dims(2), [5, 5, 6]);
        let e = EdgeField::zeros(g);
        assert_eq!(e.dims(0), [5, 6, 6]);
        assert_eq!(e.dims(1), [6, 5, 6]);
        assert_eq!(NodeField::zeros(g).values().len(), 216);
    }

    #[test]
    fn weights_integrate_unity() {
        let g = grid(6);
        for c in 0..3 {
            let wf: f64 = FaceField::zeros(g).weights(c).iter().sum();
            let we: f64 = EdgeField::zeros(g).weights(c).iter().sum();
            assert!((wf - 1.0).abs() < 1e-14);
            assert!((we - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dn_is_negative_adjoint_of_dc() {
        let n = 7;
        let h = 1.0 / n as f64;
        let d = [n, n, n];
        let mut nd = d;
        nd[0] = n + 1;
        let s: Vec<f64> = (0..len_of(d)).map(|i| libm::sin(i as f64 * 0.37)).collect();
        let v: Vec<f64> = (0..len_of(nd)).map(|i| libm::cos(i as f64 * 0.91)).collect();
        let mut dcs = vec![0.0; len_of(nd)];
        dc_acc(&mut dcs, &s, d, 0, 1.0 / h);
        let mut dnv = vec![0.0; len_of(d)];
        dn_acc(&mut dnv, &v, nd, 0, 1.0 / h);
        let wn = weights_3d(n, h, [true, false, false]);
        let ws: Vec<f64> = vec![h * h * h; len_of(d)];
        let lhs = wdot(&wn, &dcs, &v);
        let rhs = -wdot(&ws, &s, &dnv);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn to_cells_reproduces_linear_fields() {
        let g = grid(4);
        let lin = |p: Point| [p[0] + 2.0 * p[1], p[1] - p[2], 3.0 * p[2] + p[0]];
        let e = EdgeField::sample(g, lin).unwrap().to_cells();
        let f = FaceField::sample(g, lin).unwrap().to_cells();
        let exact = VectorField::sample(g, lin).unwrap();
        for c in 0..3 {
            for ((a, b), x) in e.component(c).iter().zip(f.component(c)).zip(exact.component(c)) {
                assert!((a - x).abs() < 1e-14 && (b - x).abs() < 1e-14);
            }
        }
    }
}
