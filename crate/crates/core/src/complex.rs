//! The staggered exact sequence used by the solvers.
//!
//! Primal chain (homogeneous Dirichlet for cell scalars and tangential face
//! components, realised by odd reflection across the boundary):
//!
//! ```text
//! cells --grad--> faces --curl--> edges --div--> nodes
//! ```
//!
//! Its negative adjoints under the quadrature inner products run the other
//! way: `div_faces = -grad*`, `curl_edges = curl*`, `grad_nodes = -div*`.
//! Discrete partials along different axes commute, so `curl∘grad = 0` and
//! `div∘curl = 0` hold to rounding at every point, boundary included.

use alloc::vec;
use alloc::vec::Vec;

use crate::coeff::TensorField;
use crate::grid::{Grid, ScalarField};
use crate::lattice::{dc_acc, dn_acc, len_of, Dims, EdgeField, Edges, FaceField, Layout, NodeField};
use crate::mat3;

#[inline]
fn cell_dims(g: Grid) -> Dims {
    [g.n(); 3]
}

pub fn grad(q: &ScalarField) -> FaceField {
    let g = q.grid();
    let inv_h = 1.0 / g.h();
    let comps = [0, 1, 2].map(|a| {
        let mut out = vec![0.0; len_of(FaceField::dims_for(g, a))];
        dc_acc(&mut out, q.values(), cell_dims(g), a, inv_h);
        out
    });
    FaceField::from_components(g, comps)
}

/// `(curl u)_a = D_b u_c - D_c u_b` for cyclic `(a, b, c)`.
pub fn curl(u: &FaceField) -> EdgeField {
    let g = u.grid();
    let inv_h = 1.0 / g.h();
    let comps = [0, 1, 2].map(|a| {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let mut out = vec![0.0; len_of(EdgeField::dims_for(g, a))];
        dc_acc(&mut out, u.component(c), u.dims(c), b, inv_h);
        dc_acc(&mut out, u.component(b), u.dims(b), c, -inv_h);
        out
    });
    EdgeField::from_components(g, comps)
}

pub fn div(w: &EdgeField) -> NodeField {
    let g = w.grid();
    let inv_h = 1.0 / g.h();
    let mut out = vec![0.0; len_of(NodeField::dims_for(g))];
    for a in 0..3 {
        dc_acc(&mut out, w.component(a), w.dims(a), a, inv_h);
    }
    NodeField::from_values(g, out)
}

pub fn div_faces(u: &FaceField) -> ScalarField {
    let g = u.grid();
    let inv_h = 1.0 / g.h();
    let mut out = vec![0.0; g.cell_count()];
    for a in 0..3 {
        dn_acc(&mut out, u.component(a), u.dims(a), a, inv_h);
    }
    ScalarField::from_values(g, out)
}

pub fn curl_edges(w: &EdgeField) -> FaceField {
    let g = w.grid();
    let inv_h = 1.0 / g.h();
    let comps = [0, 1, 2].map(|a| {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let mut out = vec![0.0; len_of(FaceField::dims_for(g, a))];
        dn_acc(&mut out, w.component(c), w.dims(c), b, inv_h);
        dn_acc(&mut out, w.component(b), w.dims(b), c, -inv_h);
        out
    });
    FaceField::from_components(g, comps)
}

pub fn grad_nodes(p: &NodeField) -> EdgeField {
    let g = p.grid();
    let inv_h = 1.0 / g.h();
    let comps = [0, 1, 2].map(|a| {
        let mut out = vec![0.0; len_of(EdgeField::dims_for(g, a))];
        dn_acc(&mut out, p.values(), NodeField::dims_for(g), a, inv_h);
        out
    });
    EdgeField::from_components(g, comps)
}

/// `out += c * D2(src)` along `axis`. Centered axes get the odd-ghost
/// Dirichlet stencil `Dn Dc`, nodal axes the even-ghost stencil `Dc Dn`.
pub(crate) fn second_diff_acc(
    out: &mut [f64],
    src: &[f64],
    dims: Dims,
    axis: usize,
    nodal: bool,
    c: f64,
) {
    let len = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    for a in 0..outer {
        let base = a * len * inner;
        for i in 0..len {
            let row = |k: usize| &src[base + k * inner..base + (k + 1) * inner];
            let o = &mut out[base + i * inner..base + (i + 1) * inner];
            let mid = row(i);
            if i > 0 && i + 1 < len {
                let (lo, hi) = (row(i - 1), row(i + 1));
                for (((x, &l), &m), &r) in o.iter_mut().zip(lo).zip(mid).zip(hi) {
                    *x += c * (l - 2.0 * m + r);
                }
            } else {
                let nb = row(if i == 0 { 1 } else { len - 2 });
                if nodal {
                    for ((x, &m), &b) in o.iter_mut().zip(mid).zip(nb) {
                        *x += 2.0 * c * (b - m);
                    }
                } else {
                    for ((x, &m), &b) in o.iter_mut().zip(mid).zip(nb) {
                        *x += c * (b - 3.0 * m);
                    }
                }
            }
        }
    }
}

/// The seven-point cell Laplacian `div_faces∘grad` with odd ghosts.
pub(crate) fn cell_laplacian_into(g: Grid, q: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let c = 1.0 / (g.h() * g.h());
    for a in 0..3 {
        second_diff_acc(out, q, cell_dims(g), a, false, c);
    }
}

pub fn cell_laplacian(q: &ScalarField) -> ScalarField {
    let g = q.grid();
    let mut out = vec![0.0; g.cell_count()];
    cell_laplacian_into(g, q.values(), &mut out);
    ScalarField::from_values(g, out)
}

/// Component `comp` of the edge vector Laplacian
/// `-(curl∘curl_edges - grad_nodes∘div)`, which decouples by component.
pub(crate) fn edge_laplacian_into(g: Grid, comp: usize, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let c = 1.0 / (g.h() * g.h());
    let d = EdgeField::dims_for(g, comp);
    let nodal = Edges::nodal(comp);
    for a in 0..3 {
        second_diff_acc(out, v, d, a, nodal[a], c);
    }
}

pub fn edge_laplacian(w: &EdgeField) -> EdgeField {
    let g = w.grid();
    let comps = [0, 1, 2].map(|c| {
        let mut out = vec![0.0; w.component(c).len()];
        edge_laplacian_into(g, c, w.component(c), &mut out);
        out
    });
    EdgeField::from_components(g, comps)
}

/// Spreads a cell array onto the given nodal axes: nodes take the mean of
/// their adjacent cells (a single cell on the boundary). With `geometric`,
/// the mean is geometric.
fn cells_to(g: Grid, src: &[f64], nodal: [bool; 3], geometric: bool) -> Vec<f64> {
    let n = g.n();
    let mut cur = src.to_vec();
    let mut d = cell_dims(g);
    for axis in 0..3 {
        if !nodal[axis] {
            continue;
        }
        let mut nd = d;
        nd[axis] = n + 1;
        let outer: usize = d[..axis].iter().product();
        let inner: usize = d[axis + 1..].iter().product();
        let mut next = vec![0.0; len_of(nd)];
        for a in 0..outer {
            let sb = a * n * inner;
            let ob = a * (n + 1) * inner;
            for i in 0..=n {
                for b in 0..inner {
                    let lo = cur[sb + i.saturating_sub(1) * inner + b];
                    let hi = cur[sb + i.min(n - 1) * inner + b];
                    next[ob + i * inner + b] = if i == 0 {
                        hi
                    } else if i == n {
                        lo
                    } else if geometric {
                        libm::sqrt(lo * hi)
                    } else {
                        0.5 * (lo + hi)
                    };
                }
            }
        }
        cur = next;
        d = nd;
    }
    cur
}

/// Off-diagonal cell entries `M_ab` for `a != b`, or `None` if the field is
/// diagonal.
fn off_diagonal(m: &TensorField) -> Option<Vec<mat3::Mat3>> {
    if m.is_diagonal() {
        return None;
    }
    Some(
        m.cells()
            .iter()
            .map(|c| {
                let mut o = *c;
                o[0] = 0.0;
                o[4] = 0.0;
                o[8] = 0.0;
                o
            })
            .collect(),
    )
}

fn apply_off_diagonal(
    g: Grid,
    off: &[mat3::Mat3],
    cells: &crate::grid::VectorField,
    nodal: impl Fn(usize) -> [bool; 3],
    out: &mut [Vec<f64>; 3],
) {
    let mut t = [vec![0.0; g.cell_count()], vec![0.0; g.cell_count()], vec![0.0; g.cell_count()]];
    for (idx, m) in off.iter().enumerate() {
        let v = mat3::mul_vec(m, cells.at(idx));
        for a in 0..3 {
            t[a][idx] = v[a];
        }
    }
    for a in 0..3 {
        let spread = cells_to(g, &t[a], nodal(a), false);
        for (o, s) in out[a].iter_mut().zip(spread) {
            *o += s;
        }
    }
}

/// A cell coefficient acting on face fields.
///
/// Diagonal entries use the geometric mean of the two cells sharing a face.
/// Off-diagonal entries act through cell averages: `(Tu)_a` on a face is the
/// mean over its cells of `sum_{b != a} M_ab ū_b`. The result is symmetric
/// under the face inner product whenever `M` is symmetric per cell.
#[derive(Debug, Clone)]
pub struct FaceTensor {
    grid: Grid,
    diag: [Vec<f64>; 3],
    off: Option<Vec<mat3::Mat3>>,
}

impl FaceTensor {
    pub fn new(m: &TensorField) -> Self {
        let g = m.grid();
        let diag = [0, 1, 2].map(|a| {
            let d: Vec<f64> = m.cells().iter().map(|c| c[4 * a]).collect();
            cells_to(g, &d, dims_nodal(g, FaceField::dims_for(g, a)), true)
        });
        Self {
            grid: g,
            diag,
            off: off_diagonal(m),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.off.is_none()
    }

    pub fn diagonal(&self, comp: usize) -> &[f64] {
        &self.diag[comp]
    }

    pub fn apply(&self, u: &FaceField) -> FaceField {
        let mut out = [0, 1, 2].map(|a| {
            self.diag[a]
                .iter()
                .zip(u.component(a))
                .map(|(d, x)| d * x)
                .collect::<Vec<f64>>()
        });
        if let Some(off) = &self.off {
            let nodal = |a: usize| dims_nodal(self.grid, FaceField::dims_for(self.grid, a));
            apply_off_diagonal(self.grid, off, &u.to_cells(), nodal, &mut out);
        }
        FaceField::from_components(self.grid, out)
    }

    /// Exact inverse for diagonal tensors.
    pub fn apply_diagonal_inverse(&self, u: &FaceField) -> FaceField {
        let out = [0, 1, 2].map(|a| {
            self.diag[a]
                .iter()
                .zip(u.component(a))
                .map(|(d, x)| x / d)
                .collect::<Vec<f64>>()
        });
        FaceField::from_components(self.grid, out)
    }
}

/// A cell coefficient acting on edge fields: arithmetic means of the (up to
/// four) cells around an edge, off-diagonal part as in [`FaceTensor`].
#[derive(Debug, Clone)]
pub struct EdgeTensor {
    grid: Grid,
    diag: [Vec<f64>; 3],
    off: Option<Vec<mat3::Mat3>>,
}

impl EdgeTensor {
    pub fn new(m: &TensorField) -> Self {
        let g = m.grid();
        let diag = [0, 1, 2].map(|a| {
            let d: Vec<f64> = m.cells().iter().map(|c| c[4 * a]).collect();
            cells_to(g, &d, dims_nodal(g, EdgeField::dims_for(g, a)), false)
        });
        Self {
            grid: g,
            diag,
            off: off_diagonal(m),
        }
    }

    pub fn apply(&self, u: &EdgeField) -> EdgeField {
        let mut out = [0, 1, 2].map(|a| {
            self.diag[a]
                .iter()
                .zip(u.component(a))
                .map(|(d, x)| d * x)
                .collect::<Vec<f64>>()
        });
        if let Some(off) = &self.off {
            let nodal = |a: usize| dims_nodal(self.grid, EdgeField::dims_for(self.grid, a));
            apply_off_diagonal(self.grid, off, &u.to_cells(), nodal, &mut out);
        }
        EdgeField::from_components(self.grid, out)
    }
}

#[inline]
fn dims_nodal(g: Grid, d: Dims) -> [bool; 3] {
    d.map(|x| x == g.n() + 1)
}

/// Largest tangential face value extrapolated to the boundary from the two
/// nearest layers, `1.5 u_0 - 0.5 u_1`.
pub fn tangential_trace_max(u: &FaceField) -> f64 {
    let g = u.grid();
    let n = g.n();
    let mut m = 0.0f64;
    for axis in 0..3 {
        for c in (0..3).filter(|&c| c != axis) {
            let d = u.dims(c);
            let v = u.component(c);
            let outer: usize = d[..axis].iter().product();
            let inner: usize = d[axis + 1..].iter().product();
            for a in 0..outer {
                for b in 0..inner {
                    let at = |i: usize| v[(a * n + i) * inner + b];
                    let lo = 1.5 * at(0) - 0.5 * at(1);
                    let hi = 1.5 * at(n - 1) - 0.5 * at(n - 2);
                    m = m.max(lo.abs()).max(hi.abs());
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{wdot, Staggered};
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn random_stag<L: crate::lattice::Layout>(g: Grid, rng: &mut impl Rng) -> Staggered<L> {
        let comps = [0, 1, 2].map(|c| random_vec(rng, len_of(Staggered::<L>::dims_for(g, c))));
        Staggered::from_components(g, comps)
    }

    fn cell_dot(a: &ScalarField, b: &ScalarField) -> f64 {
        a.grid().cell_volume() * a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>()
    }

    #[test]
    fn exactness_everywhere() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = grid(7);
        let q = ScalarField::from_values(g, random_vec(&mut rng, g.cell_count()));
        let scale = 1.0 / (g.h() * g.h());
        assert!(curl(&grad(&q)).max_abs() < 1e-12 * scale);
        let u: FaceField = random_stag(g, &mut rng);
        assert!(div(&curl(&u)).max_abs() < 1e-12 * scale);
        let w: EdgeField = random_stag(g, &mut rng);
        assert!(div_faces(&curl_edges(&w)).max_abs() < 1e-12 * scale);
        let p = NodeField::from_values(g, random_vec(&mut rng, (g.n() + 1).pow(3)));
        assert!(curl_edges(&grad_nodes(&p)).max_abs() < 1e-12 * scale);
    }

    #[test]
    fn adjoint_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = grid(6);
        let q = ScalarField::from_values(g, random_vec(&mut rng, g.cell_count()));
        let u: FaceField = random_stag(g, &mut rng);
        let w: EdgeField = random_stag(g, &mut rng);
        let p = NodeField::from_values(g, random_vec(&mut rng, (g.n() + 1).pow(3)));

        let l = grad(&q).dot(&u);
        let r = -cell_dot(&q, &div_faces(&u));
        assert!((l - r).abs() < 1e-12 * l.abs().max(1.0));

        let l = curl(&u).dot(&w);
        let r = u.dot(&curl_edges(&w));
        assert!((l - r).abs() < 1e-12 * l.abs().max(1.0));

        let l = wdot(&p.weights(), div(&w).values(), p.values());
        let r = -w.dot(&grad_nodes(&p));
        assert!((l - r).abs() < 1e-12 * l.abs().max(1.0));
    }

    #[test]
    fn laplacians_factor_through_the_complex() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = grid(5);
        let q = ScalarField::from_values(g, random_vec(&mut rng, g.cell_count()));
        let a = cell_laplacian(&q);
        let b = div_faces(&grad(&q));
        assert!(a.add_scaled(-1.0, &b).unwrap().max_abs() < 1e-10);

        let w: EdgeField = random_stag(g, &mut rng);
        let lhs = edge_laplacian(&w);
        let rhs = grad_nodes(&div(&w)).add_scaled(-1.0, &curl(&curl_edges(&w))).unwrap();
        assert!(lhs.add_scaled(-1.0, &rhs).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn grad_of_sine_converges() {
        let q = |p: [f64; 3]| (PI * p[0]).sin() * (PI * p[1]).sin() * (PI * p[2]).sin();
        let dq = |p: [f64; 3]| {
            let (s, c) = (p.map(|x| (PI * x).sin()), p.map(|x| PI * (PI * x).cos()));
            [c[0] * s[1] * s[2], s[0] * c[1] * s[2], s[0] * s[1] * c[2]]
        };
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let g = grid(n);
                let gq = grad(&ScalarField::sample(g, q).unwrap());
                gq.add_scaled(-1.0, &FaceField::sample(g, dq).unwrap()).unwrap().max_abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.8, "{errs:?}");
        }
    }

    #[test]
    fn face_tensor_geometric_means_compose() {
        let g = grid(6);
        let a = TensorField::sample(g, |p| mat3::diag([1.0 + p[0], 2.0 + p[1] * p[2], 1.5])).unwrap();
        let b = TensorField::sample(g, |p| mat3::diag([2.0 - p[2], 1.0 + p[0] * p[0], 0.5 + p[1]])).unwrap();
        let ab = crate::coeff::compose(&a, &b).unwrap();
        let (ta, tb, tab) = (FaceTensor::new(&a), FaceTensor::new(&b), FaceTensor::new(&ab));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u: FaceField = random_stag(g, &mut rng);
        let lhs = ta.apply(&tb.apply_diagonal_inverse(&u));
        let rhs = tab.apply(&u);
        assert!(lhs.add_scaled(-1.0, &rhs).unwrap().max_abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn tensors_are_symmetric(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = grid(5);
            let cells: Vec<mat3::Mat3> = (0..g.cell_count()).map(|_| {
                let e: Vec<f64> = random_vec(&mut rng, 3);
                [2.0 + e[0], 0.3 * e[1], 0.1 * e[2], 0.3 * e[1], 2.5, -0.2 * e[0], 0.1 * e[2], -0.2 * e[0], 1.5 + e[2]]
            }).collect();
            let m = TensorField::from_cells(g, cells);
            let (u, v): (FaceField, FaceField) = (random_stag(g, &mut rng), random_stag(g, &mut rng));
            let t = FaceTensor::new(&m);
            let (l, r) = (t.apply(&u).dot(&v), u.dot(&t.apply(&v)));
            prop_assert!((l - r).abs() < 1e-12 * l.abs().max(1.0));
            let (x, y): (EdgeField, EdgeField) = (random_stag(g, &mut rng), random_stag(g, &mut rng));
            let s = EdgeTensor::new(&m);
            let (l, r) = (s.apply(&x).dot(&y), x.dot(&s.apply(&y)));
            prop_assert!((l - r).abs() < 1e-12 * l.abs().max(1.0));
        }
    }
}
