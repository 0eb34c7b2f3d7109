//! Matrix-free Krylov solves for the scalar and vector Poisson problems and
//! the variable-coefficient divergence-form problem.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::coeff::{spd_check, TensorField};
use crate::complex::{self, FaceTensor};
use crate::grid::{Grid, ScalarField};
use crate::lattice::{wdot, EdgeField, Edges, Layout};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    #[default]
    None,
    Diagonal,
}

impl Preconditioner {
    pub fn name(self) -> &'static str {
        match self {
            Preconditioner::None => "none",
            Preconditioner::Diagonal => "diagonal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Preconditioner::None),
            "diagonal" => Some(Preconditioner::Diagonal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual at which a solve stops.
    pub tolerance: f64,
    /// Iteration cap; `None` means `50 n`.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: None,
            preconditioner: Preconditioner::None,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_max_iterations(mut self, it: usize) -> Self {
        self.max_iterations = Some(it);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-2) {
            return Err(Error::invalid(
                "tolerance",
                format!("must lie in (0, 1e-2], got {}", self.tolerance),
            ));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, grid: Grid) -> usize {
        self.max_iterations.unwrap_or(50 * grid.n())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
    pub operator_applications: usize,
    /// Seconds; always 0 without the `std` feature.
    pub wall_time: f64,
    /// Relative residual before the first and after every iteration.
    pub residual_history: Vec<f64>,
}

impl SolveReport {
    fn trivial() -> Self {
        Self {
            converged: true,
            residual_history: vec![0.0],
            ..Self::default()
        }
    }

    /// Combines the reports of consecutive sub-solves.
    pub fn merge(&mut self, other: &SolveReport) {
        self.iterations += other.iterations;
        self.final_relative_residual = self.final_relative_residual.max(other.final_relative_residual);
        self.converged &= other.converged;
        self.operator_applications += other.operator_applications;
        self.wall_time += other.wall_time;
        self.residual_history.extend_from_slice(&other.residual_history);
    }

    pub fn combined<'a>(reports: impl IntoIterator<Item = &'a SolveReport>) -> SolveReport {
        let mut out = SolveReport {
            converged: true,
            ..SolveReport::default()
        };
        for r in reports {
            out.merge(r);
        }
        out
    }

    pub(crate) fn require(self, stage: &'static str) -> Result<SolveReport> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::SolverFailed { stage, report: self })
        }
    }
}

struct Timer {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Timer {
    fn start() -> Self {
        Timer {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// Preconditioned conjugate residual for an operator self-adjoint and
/// positive definite in the `weights` inner product. Starts from zero.
///
/// The iteration minimises `|r|` in the `M^{-1}` norm over the Krylov space,
/// so the recorded history is non-increasing.
pub fn conjugate_residual(
    mut op: impl FnMut(&[f64], &mut [f64]),
    weights: &[f64],
    inv_diag: Option<&[f64]>,
    b: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> (Vec<f64>, SolveReport) {
    let timer = Timer::start();
    let len = b.len();
    let precond = |r: &[f64], z: &mut [f64]| match inv_diag {
        Some(d) => z.iter_mut().zip(r).zip(d).for_each(|((z, r), d)| *z = r * d),
        None => z.copy_from_slice(r),
    };
    let mut x = vec![0.0; len];
    let mut z = vec![0.0; len];
    precond(b, &mut z);
    let bnorm = libm::sqrt(wdot(weights, b, &z).max(0.0));
    if bnorm == 0.0 {
        return (x, SolveReport::trivial());
    }

    let mut r = b.to_vec();
    let mut az = vec![0.0; len];
    let mut mq = vec![0.0; len];
    let mut applications = 0;
    let mut history = vec![1.0];
    let mut rel = 1.0;
    let mut iterations = 0;

    // The recurrence residual can drift from the true one; on apparent
    // convergence the true residual is recomputed and the iteration restarted
    // from it if it falls short.
    'restart: loop {
        precond(&r, &mut z);
        let mut p = z.clone();
        op(&z, &mut az);
        applications += 1;
        let mut ap = az.clone();
        let mut rho = wdot(weights, &z, &az);

        while rel > tolerance && iterations < max_iterations {
            precond(&ap, &mut mq);
            let denom = wdot(weights, &ap, &mq);
            if !(denom > 0.0) || !rho.is_finite() {
                break 'restart;
            }
            let alpha = rho / denom;
            axpy(&mut x, alpha, &p);
            axpy(&mut r, -alpha, &ap);
            axpy(&mut z, -alpha, &mq);
            op(&z, &mut az);
            applications += 1;
            iterations += 1;
            let rho_new = wdot(weights, &z, &az);
            rel = libm::sqrt(wdot(weights, &r, &z).max(0.0)) / bnorm;
            history.push(rel);
            let beta = rho_new / rho;
            rho = rho_new;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
            ap.iter_mut().zip(&az).for_each(|(q, a)| *q = a + beta * *q);
        }

        op(&x, &mut az);
        applications += 1;
        r.iter_mut().zip(b).zip(&az).for_each(|((r, b), a)| *r = b - a);
        precond(&r, &mut z);
        let true_rel = libm::sqrt(wdot(weights, &r, &z).max(0.0)) / bnorm;
        let drifted = true_rel > tolerance && rel <= tolerance;
        rel = true_rel;
        if !drifted || iterations >= max_iterations {
            break;
        }
    }

    let report = SolveReport {
        iterations,
        final_relative_residual: rel,
        converged: rel <= tolerance,
        operator_applications: applications,
        wall_time: timer.seconds(),
        residual_history: history,
    };
    (x, report)
}

fn inverse(d: Vec<f64>) -> Vec<f64> {
    d.into_iter().map(|x| 1.0 / x).collect()
}

/// Diagonal of `-D2` along one axis of length `len`.
fn second_diff_diag(len: usize, i: usize, nodal: bool) -> f64 {
    if !nodal && (i == 0 || i + 1 == len) {
        3.0
    } else {
        2.0
    }
}

fn cell_poisson_diag(g: Grid) -> Vec<f64> {
    let n = g.n();
    let inv_h2 = 1.0 / (g.h() * g.h());
    (0..g.cell_count())
        .map(|idx| {
            let c = g.cell_of(idx);
            inv_h2 * c.iter().map(|&i| second_diff_diag(n, i, false)).sum::<f64>()
        })
        .collect()
}

/// Solves `Δq = rhs` with the seven-point odd-ghost Laplacian (so `q`
/// vanishes on the boundary faces).
pub fn poisson_dirichlet(rhs: &ScalarField, cfg: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    cfg.validate()?;
    let g = rhs.grid();
    let weights = vec![g.cell_volume(); g.cell_count()];
    let b: Vec<f64> = rhs.values().iter().map(|v| -v).collect();
    let inv_diag = (cfg.preconditioner == Preconditioner::Diagonal).then(|| inverse(cell_poisson_diag(g)));
    let (x, report) = conjugate_residual(
        |v, out| {
            complex::cell_laplacian_into(g, v, out);
            out.iter_mut().for_each(|x| *x = -*x);
        },
        &weights,
        inv_diag.as_deref(),
        &b,
        cfg.tolerance,
        cfg.iteration_cap(g),
    );
    Ok((ScalarField::from_values(g, x), report))
}

/// The operator `q -> div_faces(T_A grad q)`.
pub fn divform_apply(t: &FaceTensor, q: &ScalarField) -> ScalarField {
    complex::div_faces(&t.apply(&complex::grad(q)))
}

fn divform_diag(g: Grid, t: &FaceTensor) -> Vec<f64> {
    let n = g.n();
    let inv_h2 = 1.0 / (g.h() * g.h());
    (0..g.cell_count())
        .map(|idx| {
            let c = g.cell_of(idx);
            let mut s = 0.0;
            for a in 0..3 {
                let d = t.diagonal(a);
                let mut f = c;
                for (node, k) in [(c[a], if c[a] == 0 { 2.0 } else { 1.0 }), (c[a] + 1, if c[a] + 1 == n { 2.0 } else { 1.0 })] {
                    f[a] = node;
                    let fd = crate::lattice::dims_of(n, crate::lattice::Faces::nodal(a));
                    s += k * d[crate::lattice::idx3(fd, f[0], f[1], f[2])];
                }
            }
            s * inv_h2
        })
        .collect()
}

/// Solves `div(A grad q) = rhs` with `q = 0` on the boundary. `A` must be
/// symmetric and positive definite in every cell.
pub fn elliptic_divform(a: &TensorField, rhs: &ScalarField, cfg: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    a.grid().check_same(&rhs.grid())?;
    let bounds = spd_check(a);
    if !(bounds.lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite {
            cell: bounds.min_cell,
            lambda_min: bounds.lambda_min,
        });
    }
    a.check_symmetric()?;
    elliptic_with(&FaceTensor::new(a), rhs, cfg)
}

/// [`elliptic_divform`] with a prebuilt face tensor and no coefficient checks.
pub fn elliptic_with(t: &FaceTensor, rhs: &ScalarField, cfg: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    cfg.validate()?;
    let g = rhs.grid();
    let weights = vec![g.cell_volume(); g.cell_count()];
    let b: Vec<f64> = rhs.values().iter().map(|v| -v).collect();
    let inv_diag = (cfg.preconditioner == Preconditioner::Diagonal).then(|| inverse(divform_diag(g, t)));
    let (x, report) = conjugate_residual(
        |v, out| {
            let q = ScalarField::from_values(g, v.to_vec());
            for (o, x) in out.iter_mut().zip(divform_apply(t, &q).values()) {
                *o = -x;
            }
        },
        &weights,
        inv_diag.as_deref(),
        &b,
        cfg.tolerance,
        cfg.iteration_cap(g),
    );
    Ok((ScalarField::from_values(g, x), report))
}

/// Boundary conditions available to [`vector_poisson`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VectorBc {
    /// Normal component Dirichlet, tangential components Neumann.
    #[default]
    NormalDirichletTangentialNeumann,
}

/// Solves `-ΔΦ = rhs` componentwise on edges. Along its own axis a component
/// is cell-centered (odd ghost), across it nodal (even ghost), which is the
/// normal-Dirichlet / tangential-Neumann pairing.
///
/// Each component is solved to the relative tolerance separately, so the
/// whole vector meets it too.
pub fn vector_poisson(rhs: &EdgeField, _bc: VectorBc, cfg: &SolverConfig) -> Result<(EdgeField, SolveReport)> {
    cfg.validate()?;
    let g = rhs.grid();
    let inv_h2 = 1.0 / (g.h() * g.h());
    let mut comps: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut report = SolveReport::combined([]);
    let (mut res2, mut rhs2) = (0.0, 0.0);
    for c in 0..3 {
        let nodal = Edges::nodal(c);
        let d = rhs.dims(c);
        let weights = rhs.weights(c);
        let inv_diag = (cfg.preconditioner == Preconditioner::Diagonal).then(|| {
            let mut out = Vec::with_capacity(rhs.component(c).len());
            for i in 0..d[0] {
                for j in 0..d[1] {
                    for k in 0..d[2] {
                        let s: f64 = [(i, 0), (j, 1), (k, 2)]
                            .iter()
                            .map(|&(x, a)| second_diff_diag(d[a], x, nodal[a]))
                            .sum();
                        out.push(1.0 / (s * inv_h2));
                    }
                }
            }
            out
        });
        let (x, r) = conjugate_residual(
            |v, out| {
                complex::edge_laplacian_into(g, c, v, out);
                out.iter_mut().for_each(|x| *x = -*x);
            },
            &weights,
            inv_diag.as_deref(),
            rhs.component(c),
            cfg.tolerance,
            cfg.iteration_cap(g),
        );
        let b2 = wdot(&weights, rhs.component(c), rhs.component(c));
        rhs2 += b2;
        res2 += b2 * r.final_relative_residual * r.final_relative_residual;
        report.merge(&r);
        comps[c] = x;
    }
    report.final_relative_residual = if rhs2 > 0.0 { libm::sqrt(res2 / rhs2) } else { 0.0 };
    Ok((EdgeField::from_components(g, comps), report))
}
