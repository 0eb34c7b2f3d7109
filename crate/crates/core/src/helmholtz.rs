//! Gradient/curl splitting of face fields and the constant-coefficient
//! div-curl solve built on it.

use crate::complex;
use crate::grid::ScalarField;
use crate::lattice::{cell_l2, EdgeField, FaceField};
use crate::linsolve::{poisson_dirichlet, vector_poisson, SolveReport, SolverConfig, VectorBc};
use crate::norms;
use crate::Result;

/// `u = grad q + curl_edges phi`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub q: ScalarField,
    pub phi: EdgeField,
    pub grad_q: FaceField,
    pub curl_phi: FaceField,
    /// `|u - grad q - curl phi| / |u|`.
    pub reconstruction_residual: f64,
    /// `|div phi| / (|phi| / h)`, the gauge defect.
    pub div_phi: f64,
    /// `|phi|_{H^1} / |u|_{L^2}`.
    pub stability_ratio: f64,
    pub report: SolveReport,
}

impl Decomposition {
    /// `|<grad q, curl phi>| / (|grad q| |curl phi|)`, or 0 if either part
    /// vanishes.
    pub fn orthogonality_defect(&self) -> f64 {
        let denom = self.grad_q.l2() * self.curl_phi.l2();
        if denom == 0.0 {
            0.0
        } else {
            self.grad_q.dot(&self.curl_phi).abs() / denom
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn decompose(u: &FaceField, cfg: &SolverConfig) -> Result<Decomposition> {
    let g = u.grid();
    let (q, rq) = poisson_dirichlet(&complex::div_faces(u), cfg)?;
    let rq = rq.require("helmholtz potential")?;
    let grad_q = complex::grad(&q);
    let rot = u.add_scaled(-1.0, &grad_q)?;
    let (phi, rp) = vector_poisson(&complex::curl(&rot), VectorBc::default(), cfg)?;
    let rp = rp.require("helmholtz vector potential")?;
    let curl_phi = complex::curl_edges(&phi);

    let unorm = u.l2();
    let rest = rot.add_scaled(-1.0, &curl_phi)?;
    let div_phi = ratio(complex::div(&phi).l2() * g.h(), phi.l2());
    Ok(Decomposition {
        reconstruction_residual: ratio(rest.l2(), unorm.max(f64::MIN_POSITIVE)),
        div_phi,
        stability_ratio: ratio(norms::h1_norm(&phi.to_cells()), unorm),
        q,
        phi,
        grad_q,
        curl_phi,
        report: SolveReport::combined([&rq, &rp]),
    })
}

/// Relative size of `div f`, the solvability defect of `curl u = f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compatibility {
    /// `h |div f| / |f|`.
    pub div_f: f64,
    pub warning: bool,
}

/// Above this relative divergence the data is flagged as incompatible.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

pub fn compatibility(f: &EdgeField) -> Compatibility {
    let div_f = ratio(complex::div(f).l2() * f.grid().h(), f.l2());
    Compatibility {
        div_f,
        warning: div_f > COMPATIBILITY_TOL,
    }
}

#[derive(Debug, Clone)]
pub struct ConstantSolve {
    pub u: FaceField,
    /// The curl part `curl_edges phi`.
    pub w: FaceField,
    pub report: SolveReport,
    pub compatibility: Compatibility,
}

/// `curl u = f`, `div u = g`, `n x u = 0`, as `u = grad q + curl_edges phi`
/// with `Δq = g` and `-Δphi = f`.
pub fn solve_constant_divcurl(f: &EdgeField, g: &ScalarField, cfg: &SolverConfig) -> Result<ConstantSolve> {
    f.grid().check_same(&g.grid())?;
    let compatibility = compatibility(f);
    let (phi, rp) = vector_poisson(f, VectorBc::default(), cfg)?;
    let rp = rp.require("vector potential")?;
    let w = complex::curl_edges(&phi);
    let (q, rq) = if cell_l2(g) == 0.0 {
        (ScalarField::zeros(g.grid()), SolveReport::combined([]))
    } else {
        let (q, r) = poisson_dirichlet(g, cfg)?;
        (q, r.require("scalar potential")?)
    };
    let u = complex::grad(&q).add_scaled(1.0, &w)?;
    Ok(ConstantSolve {
        u,
        w,
        report: SolveReport::combined([&rp, &rq]),
        compatibility,
    })
}
