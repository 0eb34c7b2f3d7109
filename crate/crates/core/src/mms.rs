//! Manufactured solutions. Discrete cases build their sources with the same
//! operators the solvers and residual checks use; analytic cases sample
//! closed forms and are meant for convergence studies.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::{make_coefficient, CoeffFamily, TensorField};
use crate::complex::{self, EdgeTensor, FaceTensor};
use crate::grid::{Grid, Point, ScalarField};
use crate::lattice::{EdgeField, FaceField};
use crate::mat3;
use crate::maxwell::{reduce_maxwell_h, CurlCurlProblem};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularity {
    Smooth,
    Holder(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Discrete,
    Analytic,
}

#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub label: String,
    pub u_exact: FaceField,
    pub a: TensorField,
    pub b: TensorField,
    pub f: EdgeField,
    pub g: ScalarField,
    pub regularity: Regularity,
    pub construction: Construction,
    pub seed: u64,
}

impl ManufacturedCase {
    /// Scales the solution and the sources together.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            u_exact: self.u_exact.scaled(c),
            f: self.f.scaled(c),
            g: self.g.scaled(c),
            ..self.clone()
        }
    }
}

/// One term `c * Π_a w_a(k_a π x_a)` with `w_a` sin or cos.
#[derive(Debug, Clone, Copy)]
struct Mode {
    coeff: f64,
    k: [f64; 3],
    sine: [bool; 3],
}

impl Mode {
    fn eval(&self, x: Point) -> f64 {
        let mut v = self.coeff;
        for a in 0..3 {
            let t = self.k[a] * PI * x[a];
            v *= if self.sine[a] { libm::sin(t) } else { libm::cos(t) };
        }
        v
    }

    fn deriv(&self, x: Point, axis: usize) -> f64 {
        let mut v = self.coeff * self.k[axis] * PI;
        for a in 0..3 {
            let t = self.k[a] * PI * x[a];
            v *= match (a == axis, self.sine[a]) {
                (false, true) => libm::sin(t),
                (false, false) => libm::cos(t),
                (true, true) => libm::cos(t),
                (true, false) => -libm::sin(t),
            };
        }
        v
    }

    fn laplacian(&self, x: Point) -> f64 {
        let k2: f64 = self.k.iter().map(|k| k * k).sum();
        -PI * PI * k2 * self.eval(x)
    }
}

/// A random combination of low sine/cosine modes with fixed parity per axis.
#[derive(Debug, Clone)]
pub struct SineSeries {
    modes: Vec<Mode>,
}

impl SineSeries {
    const MODES: usize = 4;
    const MAX_WAVENUMBER: u32 = 3;

    fn random(rng: &mut impl Rng, sine: [bool; 3]) -> Self {
        let modes = (0..Self::MODES)
            .map(|_| {
                let k = [0; 3].map(|_| rng.random_range(1..=Self::MAX_WAVENUMBER) as f64);
                let k2: f64 = k.iter().map(|k| k * k).sum();
                Mode {
                    coeff: rng.random_range(-1.0..1.0) * 3.0 / k2,
                    k,
                    sine,
                }
            })
            .collect();
        Self { modes }
    }

    /// Vanishes on the whole boundary.
    pub fn random_dirichlet(rng: &mut impl Rng) -> Self {
        Self::random(rng, [true; 3])
    }

    /// Vanishes on the faces normal to `axis`, even across the others: the
    /// boundary parity of component `axis` of a vector potential.
    pub fn random_potential_component(rng: &mut impl Rng, axis: usize) -> Self {
        let mut sine = [false; 3];
        sine[axis] = true;
        Self::random(rng, sine)
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.modes.iter().map(|m| m.eval(x)).sum()
    }

    pub fn gradient(&self, x: Point) -> [f64; 3] {
        [0, 1, 2].map(|a| self.modes.iter().map(|m| m.deriv(x, a)).sum())
    }

    pub fn laplacian(&self, x: Point) -> f64 {
        self.modes.iter().map(|m| m.laplacian(x)).sum()
    }
}

/// Three parity-compatible components, one per axis.
#[derive(Debug, Clone)]
pub struct VectorPotential {
    comps: [SineSeries; 3],
}

impl VectorPotential {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            comps: [0, 1, 2].map(|a| SineSeries::random_potential_component(rng, a)),
        }
    }

    pub fn eval(&self, x: Point) -> [f64; 3] {
        [0, 1, 2].map(|a| self.comps[a].eval(x))
    }

    pub fn curl(&self, x: Point) -> [f64; 3] {
        let d = |c: usize, a: usize| self.comps[c].gradient(x)[a];
        [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
    }
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `grad q* + curl_edges phi*` from seeded random potentials.
pub fn random_smooth_face_field(grid: Grid, seed: u64) -> Result<FaceField> {
    let mut rng = seeded(seed, 1);
    let q = SineSeries::random_dirichlet(&mut rng);
    let phi = VectorPotential::random(&mut rng);
    let qs = ScalarField::sample(grid, |x| q.eval(x))?;
    let ps = EdgeField::sample(grid, |x| phi.eval(x))?;
    complex::grad(&qs).add_scaled(1.0, &complex::curl_edges(&ps))
}

/// Discrete sources `f = curl(B u*)`, `g = div(A u*)`.
pub fn make_case(
    label: &str,
    grid: Grid,
    a: TensorField,
    b: TensorField,
    u_exact: FaceField,
    regularity: Regularity,
    seed: u64,
) -> Result<ManufacturedCase> {
    grid.check_same(&a.grid())?;
    grid.check_same(&b.grid())?;
    grid.check_same(&u_exact.grid())?;
    let f = complex::curl(&FaceTensor::new(&b).apply(&u_exact));
    let g = complex::div_faces(&FaceTensor::new(&a).apply(&u_exact));
    Ok(ManufacturedCase {
        label: label.to_string(),
        u_exact,
        a,
        b,
        f,
        g,
        regularity,
        construction: Construction::Discrete,
        seed,
    })
}

pub fn make_smooth_case(grid: Grid, a: &CoeffFamily, b: &CoeffFamily, seed: u64) -> Result<ManufacturedCase> {
    let u = random_smooth_face_field(grid, seed)?;
    let regularity = match a.kind {
        crate::coeff::CoeffKind::Holder => Regularity::Holder(a.alpha),
        _ => Regularity::Smooth,
    };
    make_case(
        "smooth",
        grid,
        make_coefficient(a, grid)?,
        make_coefficient(b, grid)?,
        u,
        regularity,
        seed,
    )
}

/// Amplitude of the Hölder coefficient profile used by generated cases.
pub const HOLDER_AMPLITUDE: f64 = 0.5;

/// `A = holder(alpha)`, `B = I`, smooth `u*`.
pub fn make_holder_case(grid: Grid, alpha: f64, seed: u64) -> Result<ManufacturedCase> {
    make_holder_case_with(grid, alpha, &CoeffFamily::identity(), seed)
}

pub fn make_holder_case_with(grid: Grid, alpha: f64, b: &CoeffFamily, seed: u64) -> Result<ManufacturedCase> {
    let a = CoeffFamily::holder(alpha, HOLDER_AMPLITUDE);
    let mut case = make_smooth_case(grid, &a, b, seed)?;
    case.label = alloc::format!("holder-{alpha}");
    case.regularity = Regularity::Holder(alpha);
    Ok(case)
}

/// Ids accepted by [`make_analytic_case`].
pub const CATALOG: [(&str, &str); 3] = [
    ("grad-sine", "u = grad(sin πx sin πy sin πz), A = B = I, f = 0"),
    ("rot-sine", "u = (cos πx sin πy sin πz, -sin πx cos πy sin πz, 0), A = B = I, g = 0"),
    ("mixed-aniso", "gradient plus rot-sine part, A = diag(1, 2.5, 0.5), B = 2I"),
];

const MIXED_ANISOTROPY: [f64; 3] = [1.0, 2.5, 0.5];

fn sss(x: Point) -> f64 {
    libm::sin(PI * x[0]) * libm::sin(PI * x[1]) * libm::sin(PI * x[2])
}

fn grad_sss(x: Point) -> [f64; 3] {
    let (s, c) = (x.map(|t| libm::sin(PI * t)), x.map(|t| libm::cos(PI * t)));
    [PI * c[0] * s[1] * s[2], PI * s[0] * c[1] * s[2], PI * s[0] * s[1] * c[2]]
}

fn rot_sine(x: Point) -> [f64; 3] {
    let (s, c) = (x.map(|t| libm::sin(PI * t)), x.map(|t| libm::cos(PI * t)));
    [c[0] * s[1] * s[2], -s[0] * c[1] * s[2], 0.0]
}

fn curl_rot_sine(x: Point) -> [f64; 3] {
    let (s, c) = (x.map(|t| libm::sin(PI * t)), x.map(|t| libm::cos(PI * t)));
    [PI * s[0] * c[1] * c[2], PI * c[0] * s[1] * c[2], -2.0 * PI * c[0] * c[1] * s[2]]
}

pub fn make_analytic_case(grid: Grid, id: &str) -> Result<ManufacturedCase> {
    let id_eye = || TensorField::identity(grid);
    let (u, a, b, f, g) = match id {
        "grad-sine" => (
            FaceField::sample(grid, grad_sss)?,
            id_eye(),
            id_eye(),
            EdgeField::zeros(grid),
            ScalarField::sample(grid, |x| -3.0 * PI * PI * sss(x))?,
        ),
        "rot-sine" => (
            FaceField::sample(grid, rot_sine)?,
            id_eye(),
            id_eye(),
            EdgeField::sample(grid, curl_rot_sine)?,
            ScalarField::zeros(grid),
        ),
        "mixed-aniso" => {
            let [a1, a2, a3] = MIXED_ANISOTROPY;
            let u = FaceField::sample(grid, |x| {
                let (p, r) = (grad_sss(x), rot_sine(x));
                [p[0] + r[0], p[1] + r[1], p[2] + r[2]]
            })?;
            let f = EdgeField::sample(grid, |x| curl_rot_sine(x).map(|v| 2.0 * v))?;
            let g = ScalarField::sample(grid, |x| (-PI * PI * (a1 + a2 + a3) + PI * (a2 - a1)) * sss(x))?;
            (
                u,
                TensorField::constant(grid, mat3::diag(MIXED_ANISOTROPY)),
                TensorField::scaled_identity(grid, 2.0),
                f,
                g,
            )
        }
        other => return Err(Error::UnknownCase(other.to_string())),
    };
    Ok(ManufacturedCase {
        label: id.to_string(),
        u_exact: u,
        a,
        b,
        f,
        g,
        regularity: Regularity::Smooth,
        construction: Construction::Analytic,
        seed: 0,
    })
}

/// Sweep data `f = curl(random face potential)`, `g = Δ(random H¹_0
/// scalar)`, both from the same seeded continuous functions on every grid.
pub fn random_compatible_data(grid: Grid, seed: u64) -> Result<(EdgeField, ScalarField)> {
    let mut rng = seeded(seed, 2);
    let s = SineSeries::random_dirichlet(&mut rng);
    let w = [0, 1, 2].map(|_| SineSeries::random_dirichlet(&mut rng));
    let pot = FaceField::sample(grid, |x| [0, 1, 2].map(|a| w[a].eval(x)))?;
    let g = ScalarField::sample(grid, |x| s.laplacian(x))?;
    Ok((complex::curl(&pot), g))
}

/// A real time-harmonic case with known field `u*` on edges.
#[derive(Debug, Clone)]
pub struct MaxwellCase {
    pub label: String,
    pub problem: CurlCurlProblem,
    pub u_exact: EdgeField,
    pub omega: f64,
    pub seed: u64,
}

impl MaxwellCase {
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            problem: self.problem.scaled(c),
            u_exact: self.u_exact.scaled(c),
            ..self.clone()
        }
    }

    /// `curl_edges u*`.
    pub fn curl_exact(&self) -> FaceField {
        complex::curl_edges(&self.u_exact)
    }
}

pub const MAXWELL_OMEGA: f64 = 1.5;

/// `eps^{-1} = holder(alpha)`, smooth `mu`, divergence-free electric current
/// and `J_m` chosen so that the smooth `u*` solves the curl-curl equation.
pub fn make_maxwell_case(grid: Grid, alpha: f64, seed: u64) -> Result<MaxwellCase> {
    let omega = MAXWELL_OMEGA;
    let a = make_coefficient(&CoeffFamily::holder(alpha, HOLDER_AMPLITUDE), grid)?;
    let eps = crate::coeff::invert(&a)?;
    let mu = make_coefficient(&CoeffFamily::smooth(0.3), grid)?;
    let mut rng = seeded(seed, 3);
    let field = VectorPotential::random(&mut rng);
    let u = EdgeField::sample(grid, |x| field.eval(x))?;
    let current = VectorPotential::random(&mut rng);
    let j_e = complex::curl_edges(&EdgeField::sample(grid, |x| current.eval(x))?);
    let shift = SineSeries::random_dirichlet(&mut rng);
    let g = FaceField::sample(grid, |x| shift.gradient(x))?;

    let b = mu.scaled(-omega * omega);
    let g_rot = complex::curl(&FaceTensor::new(&a).apply(&j_e));
    let lhs = EdgeTensor::new(&b)
        .apply(&u)
        .add_scaled(1.0, &complex::curl(&FaceTensor::new(&a).apply(&complex::curl_edges(&u))))?;
    let j_m = lhs.add_scaled(-1.0, &g_rot)?.scaled(1.0 / omega);
    let problem = reduce_maxwell_h(&eps, &mu, omega, &j_e, &j_m, &g)?.with_apriori(u.clone());
    Ok(MaxwellCase {
        label: alloc::format!("maxwell-holder-{alpha}"),
        problem,
        u_exact: u,
        omega,
        seed,
    })
}
