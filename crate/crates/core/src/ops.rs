//! Collocated central-difference calculus on cell-centered fields.
//!
//! These operators differentiate sampled data without knowledge of a boundary
//! condition (one-sided closure by default). The solvers use the staggered
//! operators in [`crate::complex`] instead.

use alloc::vec;
use alloc::vec::Vec;

use crate::coeff::TensorField;
use crate::grid::{Face, Grid, ScalarField, VectorField};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Central2,
}

/// How the first and last cell along an axis are differenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryRule {
    /// Ghost `s_{-1} = -s_0`: homogeneous Dirichlet on the boundary face.
    DirichletOdd,
    /// Ghost `s_{-1} = s_0`: homogeneous Neumann.
    NeumannEven,
    #[default]
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StencilSpec {
    pub scheme: Scheme,
    pub boundary: BoundaryRule,
}

impl StencilSpec {
    pub const ONE_SIDED: Self = Self {
        scheme: Scheme::Central2,
        boundary: BoundaryRule::OneSided,
    };
    pub const DIRICHLET: Self = Self {
        scheme: Scheme::Central2,
        boundary: BoundaryRule::DirichletOdd,
    };
    pub const NEUMANN: Self = Self {
        scheme: Scheme::Central2,
        boundary: BoundaryRule::NeumannEven,
    };
}

#[inline]
fn stride(n: usize, axis: usize) -> usize {
    match axis {
        0 => n * n,
        1 => n,
        _ => 1,
    }
}

/// `d s / d x_axis` at every cell.
pub fn partial(grid: Grid, s: &[f64], axis: usize, rule: StencilSpec) -> Vec<f64> {
    let n = grid.n();
    let st = stride(n, axis);
    let inv2h = 0.5 / grid.h();
    let mut out = vec![0.0; s.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let i = grid.cell_of(idx)[axis];
        let at = |k: usize| s[idx - i * st + k * st];
        *o = if i > 0 && i + 1 < n {
            (at(i + 1) - at(i - 1)) * inv2h
        } else if i == 0 {
            match rule.boundary {
                BoundaryRule::DirichletOdd => (at(1) + at(0)) * inv2h,
                BoundaryRule::NeumannEven => (at(1) - at(0)) * inv2h,
                BoundaryRule::OneSided => (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h,
            }
        } else {
            match rule.boundary {
                BoundaryRule::DirichletOdd => (-at(n - 1) - at(n - 2)) * inv2h,
                BoundaryRule::NeumannEven => (at(n - 1) - at(n - 2)) * inv2h,
                BoundaryRule::OneSided => {
                    (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h
                }
            }
        };
    }
    out
}

pub fn grad(s: &ScalarField, rule: StencilSpec) -> VectorField {
    let g = s.grid();
    VectorField::from_components(g, [0, 1, 2].map(|a| partial(g, s.values(), a, rule)))
}

pub fn div(u: &VectorField, rule: StencilSpec) -> ScalarField {
    let g = u.grid();
    let mut out = partial(g, u.component(0), 0, rule);
    for a in 1..3 {
        for (o, d) in out.iter_mut().zip(partial(g, u.component(a), a, rule)) {
            *o += d;
        }
    }
    ScalarField::from_values(g, out)
}

pub fn curl(u: &VectorField, rule: StencilSpec) -> VectorField {
    let g = u.grid();
    let d = |c: usize, a: usize| partial(g, u.component(c), a, rule);
    let sub = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| x - y).collect() };
    VectorField::from_components(g, [sub(d(2, 1), d(1, 2)), sub(d(0, 2), d(2, 0)), sub(d(1, 0), d(0, 1))])
}

/// Seven-point Laplacian. The one-sided rule uses the second-order
/// four-point closure `(2s_0 - 5s_1 + 4s_2 - s_3)/h^2`.
pub fn laplacian(s: &ScalarField, rule: StencilSpec) -> ScalarField {
    let g = s.grid();
    let n = g.n();
    let inv_h2 = 1.0 / (g.h() * g.h());
    let v = s.values();
    let mut out = vec![0.0; v.len()];
    for axis in 0..3 {
        let st = stride(n, axis);
        for (idx, o) in out.iter_mut().enumerate() {
            let i = g.cell_of(idx)[axis];
            let at = |k: usize| v[idx - i * st + k * st];
            let edge = |near: f64, next: f64, far: [f64; 2]| match rule.boundary {
                BoundaryRule::DirichletOdd => next - 3.0 * near,
                BoundaryRule::NeumannEven => next - near,
                BoundaryRule::OneSided => 2.0 * near - 5.0 * next + 4.0 * far[0] - far[1],
            };
            *o += inv_h2
                * if i > 0 && i + 1 < n {
                    at(i + 1) - 2.0 * at(i) + at(i - 1)
                } else if i == 0 {
                    edge(at(0), at(1), [at(2), at(3)])
                } else {
                    edge(at(n - 1), at(n - 2), [at(n - 3), at(n - 4)])
                };
        }
    }
    ScalarField::from_values(g, out)
}

/// Per-cell `M u`.
pub fn apply_tensor(m: &TensorField, u: &VectorField) -> Result<VectorField> {
    m.apply(u)
}

/// The two tangential components of a field on each boundary face, stored as
/// `n x n` arrays indexed by the face's tangential axes in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentialTrace {
    pub n: usize,
    pub faces: [(Face, [Vec<f64>; 2]); 6],
}

impl TangentialTrace {
    pub fn face(&self, f: Face) -> &[Vec<f64>; 2] {
        &self.faces.iter().find(|(g, _)| *g == f).expect("all faces present").1
    }

    pub fn max_abs(&self) -> f64 {
        self.faces
            .iter()
            .flat_map(|(_, c)| c.iter().flat_map(|v| v.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Linear extrapolation from the two nearest cell layers to the face,
/// `1.5 u_0 - 0.5 u_1`.
pub fn tangential_trace(u: &VectorField) -> TangentialTrace {
    let g = u.grid();
    let n = g.n();
    let faces = Face::ALL.map(|f| {
        let axis = f.axis();
        let (l0, l1) = if f.is_high() { (n - 1, n - 2) } else { (0, 1) };
        let t = f.tangential_axes();
        let comps = t.map(|c| {
            let v = u.component(c);
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    let at = |layer: usize| {
                        let mut ijk = [0; 3];
                        ijk[axis] = layer;
                        ijk[t[0]] = a;
                        ijk[t[1]] = b;
                        v[g.index(ijk[0], ijk[1], ijk[2])]
                    };
                    out.push(1.5 * at(l0) - 0.5 * at(l1));
                }
            }
            out
        });
        (f, comps)
    });
    TangentialTrace { n, faces }
}
