//! Anisotropic div-curl pipelines:
//!
//! * partial system `curl u = f`, `div(Au) = g`, `n x u = 0`: split off the
//!   curl part `w` from `f` alone, then solve `div(A grad q) = g - div(A w)`;
//! * full system `curl(Bu) = f`, `div(Au) = g`, `n x Bu = 0`: substitute
//!   `ũ = Bu`, solve the partial system with `A B^{-1}`, map back.

use crate::coeff::{compose, spd_check, TensorField};
use crate::complex::{self, FaceTensor};
use crate::grid::ScalarField;
use crate::helmholtz::solve_constant_divcurl;
use crate::lattice::{self, wdot, EdgeField, FaceField, Layout, Staggered};
use crate::linsolve::{conjugate_residual, elliptic_with, SolveReport, SolverConfig};
use crate::{Error, Result};

/// Data of one div-curl problem. `b` is the identity for the partial system.
#[derive(Debug, Clone)]
pub struct DivCurlProblem {
    pub a: TensorField,
    pub b: TensorField,
    pub f: EdgeField,
    pub g: ScalarField,
    pub cfg: SolverConfig,
}

impl DivCurlProblem {
    pub fn validate(&self) -> Result<()> {
        let grid = self.a.grid();
        grid.check_same(&self.b.grid())?;
        grid.check_same(&self.f.grid())?;
        grid.check_same(&self.g.grid())?;
        check_coefficient(&self.a)?;
        check_coefficient(&self.b)?;
        self.cfg.validate()
    }

    pub fn solve(&self) -> Result<Solution> {
        solve_full(&self.a, &self.b, &self.f, &self.g, &self.cfg)
    }
}

fn check_coefficient(m: &TensorField) -> Result<()> {
    let e = spd_check(m);
    if !(e.lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite {
            cell: e.min_cell,
            lambda_min: e.lambda_min,
        });
    }
    m.check_symmetric()
}

/// Residuals of `curl(Bu) = f`, `div(Au) = g` on entries at least two cells
/// from the boundary, relative to the data on the same entries, and the
/// largest extrapolated tangential trace of `Bu`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    pub r_curl: f64,
    pub r_div: f64,
    pub r_trace: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: FaceField,
    pub report: SolveReport,
    pub residuals: ResidualReport,
}

/// Entries whose location is at least `layers * h` from every face.
fn interior_weights<L: Layout>(f: &Staggered<L>, comp: usize, layers: usize) -> alloc::vec::Vec<f64> {
    let g = f.grid();
    let d = f.dims(comp);
    let lo = layers as f64 * g.h() - 1e-12;
    let mut w = f.weights(comp);
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                let x = Staggered::<L>::location(g, comp, [i, j, k]);
                if x.iter().any(|&c| c < lo || c > 1.0 - lo) {
                    w[lattice::idx3(d, i, j, k)] = 0.0;
                }
            }
        }
    }
    w
}

fn relative(res2: f64, data2: f64) -> f64 {
    if data2 > 0.0 {
        libm::sqrt(res2 / data2)
    } else {
        libm::sqrt(res2)
    }
}

pub const INTERIOR_LAYERS: usize = 2;

pub fn residuals(a: &TensorField, b: &TensorField, u: &FaceField, f: &EdgeField, g: &ScalarField) -> Result<ResidualReport> {
    let grid = u.grid();
    for other in [a.grid(), b.grid(), f.grid(), g.grid()] {
        grid.check_same(&other)?;
    }
    let bu = FaceTensor::new(b).apply(u);
    let curl = complex::curl(&bu);
    let (mut rc, mut fc) = (0.0, 0.0);
    for c in 0..3 {
        let w = interior_weights(f, c, INTERIOR_LAYERS);
        let r: alloc::vec::Vec<f64> = curl.component(c).iter().zip(f.component(c)).map(|(x, y)| x - y).collect();
        rc += wdot(&w, &r, &r);
        fc += wdot(&w, f.component(c), f.component(c));
    }
    let div = complex::div_faces(&FaceTensor::new(a).apply(u));
    let (mut rd, mut gd) = (0.0, 0.0);
    for (idx, (x, y)) in div.values().iter().zip(g.values()).enumerate() {
        if grid.layer(grid.cell_of(idx)) >= INTERIOR_LAYERS {
            rd += (x - y) * (x - y);
            gd += y * y;
        }
    }
    Ok(ResidualReport {
        r_curl: relative(rc, fc),
        r_div: relative(rd, gd),
        r_trace: complex::tangential_trace_max(&bu),
    })
}

/// `curl u = f`, `div(Au) = g`, `n x u = 0`.
pub fn solve_partial(a: &TensorField, f: &EdgeField, g: &ScalarField, cfg: &SolverConfig) -> Result<Solution> {
    a.grid().check_same(&f.grid())?;
    a.grid().check_same(&g.grid())?;
    check_coefficient(a)?;
    let t = FaceTensor::new(a);
    let (u, report) = partial_with(&t, f, g, cfg)?;
    let id = TensorField::identity(a.grid());
    let residuals = residuals(a, &id, &u, f, g)?;
    Ok(Solution { u, report, residuals })
}

fn partial_with(t: &FaceTensor, f: &EdgeField, g: &ScalarField, cfg: &SolverConfig) -> Result<(FaceField, SolveReport)> {
    let base = solve_constant_divcurl(f, &ScalarField::zeros(g.grid()), cfg)?;
    let w = base.w;
    let rhs = g.add_scaled(-1.0, &complex::div_faces(&t.apply(&w)))?;
    let (q, rq) = elliptic_with(t, &rhs, cfg)?;
    let rq = rq.require("elliptic potential")?;
    let u = complex::grad(&q).add_scaled(1.0, &w)?;
    Ok((u, SolveReport::combined([&base.report, &rq])))
}

/// Solves `T_B u = v` on faces; exact division for diagonal `B`, a Krylov
/// solve otherwise.
pub fn apply_inverse(tb: &FaceTensor, v: &FaceField, cfg: &SolverConfig) -> Result<(FaceField, SolveReport)> {
    if tb.is_diagonal() {
        return Ok((tb.apply_diagonal_inverse(v), SolveReport::combined([])));
    }
    let grid = v.grid();
    let lens = [0, 1, 2].map(|c| v.component(c).len());
    let weights: alloc::vec::Vec<f64> = (0..3).flat_map(|c| v.weights(c)).collect();
    let flat: alloc::vec::Vec<f64> = v.components().iter().flatten().copied().collect();
    let unflat = |x: &[f64]| {
        let (a, rest) = x.split_at(lens[0]);
        let (b, c) = rest.split_at(lens[1]);
        FaceField::from_components(grid, [a.to_vec(), b.to_vec(), c.to_vec()])
    };
    let tol = (cfg.tolerance * 1e-3).max(1e-15);
    let (x, report) = conjugate_residual(
        |x, out| {
            let y = tb.apply(&unflat(x));
            for (o, v) in out.iter_mut().zip(y.components().iter().flatten()) {
                *o = *v;
            }
        },
        &weights,
        None,
        &flat,
        tol,
        cfg.iteration_cap(grid),
    );
    let report = report.require("coefficient inverse")?;
    Ok((unflat(&x), report))
}

/// `curl(Bu) = f`, `div(Au) = g`, `n x (Bu) = 0` through `ũ = Bu`.
pub fn solve_full(a: &TensorField, b: &TensorField, f: &EdgeField, g: &ScalarField, cfg: &SolverConfig) -> Result<Solution> {
    let grid = a.grid();
    for other in [b.grid(), f.grid(), g.grid()] {
        grid.check_same(&other)?;
    }
    check_coefficient(a)?;
    check_coefficient(b)?;
    let ab = compose(a, b)?;
    check_coefficient(&ab)?;
    let (ut, mut report) = partial_with(&FaceTensor::new(&ab), f, g, cfg)?;
    let (u, ri) = apply_inverse(&FaceTensor::new(b), &ut, cfg)?;
    report.merge(&ri);
    let residuals = residuals(a, b, &u, f, g)?;
    Ok(Solution { u, report, residuals })
}

/// `ũ = solve_partial(A B^{-1}, f, g)` without mapping back; the left side of
/// the transform identity `B solve_full(A, B) = solve_partial(A B^{-1})`.
pub fn transformed_partial(a: &TensorField, b: &TensorField, f: &EdgeField, g: &ScalarField, cfg: &SolverConfig) -> Result<FaceField> {
    Ok(solve_partial(&compose(a, b)?, f, g, cfg)?.u)
}
