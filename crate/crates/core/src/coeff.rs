//! Matrix coefficient fields and the regularity families used in experiments.

use alloc::format;
use alloc::vec::Vec;

use crate::grid::{Grid, Point, VectorField};
use crate::mat3::{self, Mat3};
use crate::{Error, Result};

/// Smallest determinant [`invert`] accepts.
pub const MIN_DET: f64 = 1e-10;

/// Tolerance on `|A - A^T|` below which a cell counts as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A 3x3 matrix per cell, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid,
    cells: Vec<Mat3>,
}

impl TensorField {
    pub fn constant(grid: Grid, m: Mat3) -> Self {
        Self {
            grid,
            cells: alloc::vec![m; grid.cell_count()],
        }
    }

    pub fn identity(grid: Grid) -> Self {
        Self::constant(grid, mat3::IDENTITY)
    }

    pub fn scaled_identity(grid: Grid, c: f64) -> Self {
        Self::constant(grid, mat3::diag([c; 3]))
    }

    pub fn from_cells(grid: Grid, cells: Vec<Mat3>) -> Self {
        assert_eq!(cells.len(), grid.cell_count(), "tensor field length");
        Self { grid, cells }
    }

    /// Samples `f` at cell centers.
    pub fn sample(grid: Grid, f: impl Fn(Point) -> Mat3) -> Result<Self> {
        let mut cells = Vec::with_capacity(grid.cell_count());
        for idx in 0..grid.cell_count() {
            let cell = grid.cell_of(idx);
            let m = f(grid.center(cell));
            if let Some(c) = m.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    cell,
                    component: c,
                    value: m[c],
                });
            }
            cells.push(m);
        }
        Ok(Self { grid, cells })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn cells(&self) -> &[Mat3] {
        &self.cells
    }

    #[inline]
    pub fn at(&self, idx: usize) -> &Mat3 {
        &self.cells[idx]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            cells: self.cells.iter().map(|m| mat3::scale(m, c)).collect(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.cells.iter().all(mat3::is_diagonal)
    }

    /// First cell whose asymmetry exceeds [`SYMMETRY_TOL`] (relative to the
    /// entry scale).
    pub fn check_symmetric(&self) -> Result<()> {
        for (idx, m) in self.cells.iter().enumerate() {
            let scale = m.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            let asym = mat3::asymmetry(m);
            if asym > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric {
                    cell: self.grid.cell_of(idx),
                    asymmetry: asym,
                });
            }
        }
        Ok(())
    }

    /// Per-cell matrix-vector product at cell centers.
    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        self.grid.check_same(&u.grid())?;
        let mut out = VectorField::zeros(self.grid);
        for (idx, m) in self.cells.iter().enumerate() {
            let v = mat3::mul_vec(m, u.at(idx));
            for (c, x) in v.into_iter().enumerate() {
                out.component_mut(c)[idx] = x;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoeffKind {
    Constant,
    Smooth,
    Lipschitz,
    Holder,
}

impl CoeffKind {
    pub fn name(self) -> &'static str {
        match self {
            CoeffKind::Constant => "constant",
            CoeffKind::Smooth => "smooth",
            CoeffKind::Lipschitz => "lipschitz",
            CoeffKind::Holder => "holder",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "constant" => Some(CoeffKind::Constant),
            "smooth" => Some(CoeffKind::Smooth),
            "lipschitz" => Some(CoeffKind::Lipschitz),
            "holder" => Some(CoeffKind::Holder),
            _ => None,
        }
    }
}

/// `diag(anisotropy) * profile(x)` with a scalar profile selected by `kind`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffFamily {
    pub kind: CoeffKind,
    /// Hölder exponent, used by [`CoeffKind::Holder`] only.
    pub alpha: f64,
    pub center: Point,
    pub amplitude: f64,
    pub anisotropy: [f64; 3],
}

impl CoeffFamily {
    pub const DOMAIN_CENTER: Point = [0.5, 0.5, 0.5];

    pub fn identity() -> Self {
        Self::constant([1.0; 3])
    }

    pub fn constant(anisotropy: [f64; 3]) -> Self {
        Self {
            kind: CoeffKind::Constant,
            alpha: 0.5,
            center: Self::DOMAIN_CENTER,
            amplitude: 0.0,
            anisotropy,
        }
    }

    pub fn holder(alpha: f64, amplitude: f64) -> Self {
        Self {
            kind: CoeffKind::Holder,
            alpha,
            amplitude,
            ..Self::identity()
        }
    }

    pub fn lipschitz(amplitude: f64) -> Self {
        Self {
            kind: CoeffKind::Lipschitz,
            amplitude,
            ..Self::identity()
        }
    }

    pub fn smooth(amplitude: f64) -> Self {
        Self {
            kind: CoeffKind::Smooth,
            amplitude,
            ..Self::identity()
        }
    }

    pub fn with_anisotropy(mut self, anisotropy: [f64; 3]) -> Self {
        self.anisotropy = anisotropy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == CoeffKind::Holder && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("holder exponent must lie in (0,1), got {}", self.alpha),
            ));
        }
        if !self.anisotropy.iter().all(|&a| a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(
                "anisotropy",
                format!("axis scales must be positive, got {:?}", self.anisotropy),
            ));
        }
        if !self.amplitude.is_finite() || !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        Ok(())
    }

    /// The scalar profile multiplying `diag(anisotropy)`.
    pub fn profile(&self, x: Point) -> f64 {
        let r = || {
            let d = [0, 1, 2].map(|a| x[a] - self.center[a]);
            libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        };
        let pi = core::f64::consts::PI;
        match self.kind {
            CoeffKind::Constant => 1.0,
            CoeffKind::Smooth => {
                1.0 + self.amplitude
                    * libm::sin(pi * x[0])
                    * libm::sin(pi * x[1])
                    * libm::sin(pi * x[2])
            }
            CoeffKind::Lipschitz => 1.0 + self.amplitude * r(),
            CoeffKind::Holder => 1.0 + self.amplitude * libm::pow(r(), self.alpha),
        }
    }

    pub fn eval(&self, x: Point) -> Mat3 {
        let p = self.profile(x);
        mat3::diag(self.anisotropy.map(|a| a * p))
    }
}

/// Samples a family and certifies positive definiteness cell by cell.
pub fn make_coefficient(family: &CoeffFamily, grid: Grid) -> Result<TensorField> {
    family.validate()?;
    let t = TensorField::sample(grid, |x| family.eval(x))?;
    let bounds = spd_check(&t);
    if !(bounds.lambda_min > 0.0) {
        return Err(Error::NotPositiveDefinite {
            cell: bounds.min_cell,
            lambda_min: bounds.lambda_min,
        });
    }
    Ok(t)
}

/// Extreme eigenvalues of the symmetric part over all cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipticity {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub min_cell: [usize; 3],
    pub max_cell: [usize; 3],
}

pub fn spd_check(m: &TensorField) -> Ellipticity {
    let mut out = Ellipticity {
        lambda_min: f64::INFINITY,
        lambda_max: f64::NEG_INFINITY,
        min_cell: [0; 3],
        max_cell: [0; 3],
    };
    for (idx, a) in m.cells.iter().enumerate() {
        let e = mat3::sym_eigenvalues(a);
        if e[0] < out.lambda_min {
            out.lambda_min = e[0];
            out.min_cell = m.grid.cell_of(idx);
        }
        if e[2] > out.lambda_max {
            out.lambda_max = e[2];
            out.max_cell = m.grid.cell_of(idx);
        }
    }
    out
}

pub fn invert(m: &TensorField) -> Result<TensorField> {
    let cells = m
        .cells
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            mat3::inverse(a, MIN_DET).ok_or(Error::Singular {
                cell: m.grid.cell_of(idx),
                det: mat3::det(a),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TensorField {
        grid: m.grid,
        cells,
    })
}

/// Per-cell `A * B^{-1}`.
pub fn compose(a: &TensorField, b: &TensorField) -> Result<TensorField> {
    a.grid.check_same(&b.grid)?;
    let binv = invert(b)?;
    Ok(TensorField {
        grid: a.grid,
        cells: a
            .cells
            .iter()
            .zip(&binv.cells)
            .map(|(x, y)| mat3::mul(x, y))
            .collect(),
    })
}
