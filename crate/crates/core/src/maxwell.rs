//! Real time-harmonic Maxwell problems in curl-curl form
//! `curl(A curl u) + B u = f + curl g`, solved for `v = curl u - G` through
//! the shifted first-order system
//!
//! ```text
//! curl(A v) = f + curl g - curl(A G) - B u,   div v = h - div G,   n x v = 0.
//! ```
//!
//! `u` lives on edges, `curl u`, `g` and `G` on faces.

use crate::coeff::{invert, spd_check, TensorField};
use crate::complex::{self, EdgeTensor, FaceTensor};
use crate::divcurl::{residuals, solve_full, ResidualReport};
use crate::grid::ScalarField;
use crate::lattice::{EdgeField, FaceField};
use crate::linsolve::{SolveReport, SolverConfig};
use crate::norms::{campanato_norm, holder_k_norm, Channels, NormReport, SamplingPlan};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CurlCurlProblem {
    /// Coefficient inside the curl (`eps^{-1}`).
    pub a: TensorField,
    /// Zeroth-order coefficient; only bounded.
    pub b: TensorField,
    pub f: EdgeField,
    /// The source `curl g`.
    pub g_rot: EdgeField,
    pub h: ScalarField,
    /// The shift `G`.
    pub shift: FaceField,
    pub u_apriori: EdgeField,
}

impl CurlCurlProblem {
    pub fn with_apriori(mut self, u: EdgeField) -> Self {
        self.u_apriori = u;
        self
    }

    /// Scales every source and the known field together.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            f: self.f.scaled(c),
            g_rot: self.g_rot.scaled(c),
            h: self.h.scaled(c),
            shift: self.shift.scaled(c),
            u_apriori: self.u_apriori.scaled(c),
        }
    }

    fn validate(&self) -> Result<()> {
        let g = self.a.grid();
        for other in [
            self.b.grid(),
            self.f.grid(),
            self.g_rot.grid(),
            self.h.grid(),
            self.shift.grid(),
            self.u_apriori.grid(),
        ] {
            g.check_same(&other)?;
        }
        let e = spd_check(&self.a);
        if !(e.lambda_min > 0.0) {
            return Err(Error::NotPositiveDefinite {
                cell: e.min_cell,
                lambda_min: e.lambda_min,
            });
        }
        self.a.check_symmetric()
    }

    /// Right-hand sides `(F, h - div G)` of the shifted system.
    pub fn shifted_sources(&self) -> Result<(EdgeField, ScalarField)> {
        let ag = complex::curl(&FaceTensor::new(&self.a).apply(&self.shift));
        let bu = EdgeTensor::new(&self.b).apply(&self.u_apriori);
        let rhs = self
            .f
            .add_scaled(1.0, &self.g_rot)?
            .add_scaled(-1.0, &ag)?
            .add_scaled(-1.0, &bu)?;
        let div = self.h.add_scaled(-1.0, &complex::div_faces(&self.shift))?;
        Ok((rhs, div))
    }
}

/// The magnetic-field form with `iω` replaced by `ω`: `A = eps^{-1}`,
/// `B = -ω² mu`, `f = ω J_m`, `curl g = curl(eps^{-1} J_e)`, `h = div J_e`
/// and shift `ω G + eps^{-1} J_e`. `u_apriori` starts at zero.
pub fn reduce_maxwell_h(
    eps: &TensorField,
    mu: &TensorField,
    omega: f64,
    j_e: &FaceField,
    j_m: &EdgeField,
    g: &FaceField,
) -> Result<CurlCurlProblem> {
    let grid = eps.grid();
    for other in [mu.grid(), j_e.grid(), j_m.grid(), g.grid()] {
        grid.check_same(&other)?;
    }
    if !omega.is_finite() {
        return Err(Error::invalid("omega", "must be finite"));
    }
    let a = invert(eps)?;
    let aj = FaceTensor::new(&a).apply(j_e);
    Ok(CurlCurlProblem {
        b: mu.scaled(-omega * omega),
        f: j_m.scaled(omega),
        g_rot: complex::curl(&aj),
        h: complex::div_faces(j_e),
        shift: g.scaled(omega).add_scaled(1.0, &aj)?,
        u_apriori: EdgeField::zeros(grid),
        a,
    })
}

#[derive(Debug, Clone)]
pub struct MaxwellSolution {
    /// `v + G`.
    pub curl_u: FaceField,
    pub v: FaceField,
    /// Residuals of the shifted system; the trace is that of `v`.
    pub residuals: ResidualReport,
    pub report: SolveReport,
}

/// Solves the shifted system as the full div-curl system with curl
/// coefficient `A` and div coefficient `I`.
pub fn shift_and_solve(prob: &CurlCurlProblem, cfg: &SolverConfig) -> Result<MaxwellSolution> {
    prob.validate()?;
    let (rhs, div) = prob.shifted_sources()?;
    let id = TensorField::identity(prob.a.grid());
    let sol = solve_full(&id, &prob.a, &rhs, &div, cfg)?;
    let mut res = residuals(&id, &prob.a, &sol.u, &rhs, &div)?;
    res.r_trace = complex::tangential_trace_max(&sol.u);
    Ok(MaxwellSolution {
        curl_u: sol.u.add_scaled(1.0, &prob.shift)?,
        v: sol.u,
        residuals: res,
        report: sol.report,
    })
}

#[derive(Debug, Clone)]
pub struct MaxwellEstimate {
    pub alpha: f64,
    pub tau: f64,
    /// `C^alpha` norm of `curl u`.
    pub lhs: NormReport,
    /// Campanato norm of `(u, f, h, curl g)`.
    pub data: NormReport,
    /// `C^alpha` norm of `G`.
    pub shift: NormReport,
    pub ratio: f64,
    pub solution: MaxwellSolution,
}

/// Solves with `u_apriori` as the known field and measures
/// `|curl u|_{C^alpha} / (|(u, f, h, curl g)|_{L^{2,tau}} + |G|_{C^alpha})`
/// with `tau = 2 alpha + 1`. Zero data gives ratio 0.
pub fn verify_maxwell_estimate(
    prob: &CurlCurlProblem,
    alpha: f64,
    cfg: &SolverConfig,
    plan: &SamplingPlan,
) -> Result<MaxwellEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", alloc::format!("must lie in (0, 1), got {alpha}")));
    }
    let tau = 2.0 * alpha + 1.0;
    let sol = shift_and_solve(prob, cfg)?;
    let lhs = holder_k_norm(&sol.curl_u.to_cells(), 0, alpha, plan)?;

    let grid = prob.a.grid();
    let mut data = alloc::vec::Vec::new();
    data.extend(prob.u_apriori.to_cells().into_components());
    data.extend(prob.f.to_cells().into_components());
    data.push(prob.h.values().to_vec());
    data.extend(prob.g_rot.to_cells().into_components());
    let data = campanato_norm(&Channels { grid, data }, tau, plan)?;
    let shift = holder_k_norm(&prob.shift.to_cells(), 0, alpha, plan)?;

    let rhs = data.value + shift.value;
    let ratio = if rhs > 0.0 { lhs.value / rhs } else { 0.0 };
    Ok(MaxwellEstimate {
        alpha,
        tau,
        lhs,
        data,
        shift,
        ratio,
        solution: sol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::mms::make_maxwell_case;

    #[test]
    fn zero_currents_give_zero_sources() {
        let g = Grid::new(6).unwrap();
        let id = TensorField::identity(g);
        let p = reduce_maxwell_h(&id, &id, 1.0, &FaceField::zeros(g), &EdgeField::zeros(g), &FaceField::zeros(g)).unwrap();
        assert_eq!(p.f.max_abs() + p.g_rot.max_abs() + p.h.max_abs() + p.shift.max_abs(), 0.0);
        assert_eq!(p.a.cells(), id.cells());
        assert!(p.b.cells().iter().all(|m| *m == crate::mat3::scale(&crate::mat3::IDENTITY, -1.0)));
    }

    #[test]
    fn constant_electric_current_has_no_interior_sources() {
        let g = Grid::new(8).unwrap();
        let eps = TensorField::scaled_identity(g, 2.0);
        let je = FaceField::sample(g, |_| [1.0, 0.0, 0.0]).unwrap();
        let p = reduce_maxwell_h(&eps, &eps, 1.0, &je, &EdgeField::zeros(g), &FaceField::zeros(g)).unwrap();
        assert!(p.h.max_abs() < 1e-12);
        // the curl of a constant face field only sees the boundary ghost
        let n = g.n();
        for c in 0..3 {
            let d = p.g_rot.dims(c);
            for i in 1..d[0] - 1 {
                for j in 1..d[1] - 1 {
                    for k in 1..d[2] - 1 {
                        let v = p.g_rot.component(c)[(i * d[1] + j) * d[2] + k];
                        assert!(v.abs() < 1e-12, "{c} {i} {j} {k} {v} {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_data_gives_shift_only() {
        let g = Grid::new(8).unwrap();
        let shift = FaceField::sample(g, |x| [x[1], 0.0, x[0] * x[2]]).unwrap();
        let p = CurlCurlProblem {
            a: TensorField::identity(g),
            b: TensorField::scaled_identity(g, 0.0),
            f: EdgeField::zeros(g),
            g_rot: complex::curl(&shift),
            h: complex::div_faces(&shift),
            shift: shift.clone(),
            u_apriori: EdgeField::zeros(g),
        };
        let s = shift_and_solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.v.max_abs(), 0.0);
        assert!(s.curl_u.add_scaled(-1.0, &shift).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn recovers_manufactured_curl() {
        let g = Grid::new(12).unwrap();
        let case = make_maxwell_case(g, 0.5, 3).unwrap();
        let s = shift_and_solve(&case.problem, &SolverConfig::default()).unwrap();
        let exact = case.curl_exact();
        let err = s.curl_u.add_scaled(-1.0, &exact).unwrap().l2() / exact.l2();
        assert!(err < 1e-6, "{err}");
        assert!(s.residuals.r_curl < 1e-6 && s.residuals.r_div < 1e-6, "{:?}", s.residuals);
    }

    #[test]
    fn estimate_ratio_is_homogeneous() {
        let g = Grid::new(12).unwrap();
        let case = make_maxwell_case(g, 0.5, 1).unwrap();
        let cfg = SolverConfig::default();
        let plan = SamplingPlan::default();
        let a = verify_maxwell_estimate(&case.problem, 0.5, &cfg, &plan).unwrap();
        let b = verify_maxwell_estimate(&case.problem.scaled(10.0), 0.5, &cfg, &plan).unwrap();
        assert!(a.ratio > 0.0);
        assert!((a.ratio - b.ratio).abs() <= 1e-6 * a.ratio);
        let z = verify_maxwell_estimate(&case.problem.scaled(0.0), 0.5, &cfg, &plan).unwrap();
        assert_eq!(z.ratio, 0.0);
    }
}
