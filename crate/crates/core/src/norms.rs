//! Quadrature norms and sampled sup-type seminorms (Campanato, Hölder).
//!
//! Fields are measured at cell centers. Staggered data goes through
//! `to_cells` first. Vector fields use the pointwise Euclidean magnitude.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, Point, ScalarField, VectorField};
use crate::ops::{partial, StencilSpec};
use crate::{Error, Result};

/// Cell-centered data with one or more channels.
pub trait CellData {
    fn grid(&self) -> Grid;
    fn channels(&self) -> Vec<&[f64]>;
}

impl CellData for ScalarField {
    fn grid(&self) -> Grid {
        ScalarField::grid(self)
    }
    fn channels(&self) -> Vec<&[f64]> {
        vec![self.values()]
    }
}

impl CellData for VectorField {
    fn grid(&self) -> Grid {
        VectorField::grid(self)
    }
    fn channels(&self) -> Vec<&[f64]> {
        self.components().iter().map(|c| c.as_slice()).collect()
    }
}

/// Borrowed channels, e.g. a gradient assembled on the fly.
pub struct Channels {
    pub grid: Grid,
    pub data: Vec<Vec<f64>>,
}

impl CellData for Channels {
    fn grid(&self) -> Grid {
        self.grid
    }
    fn channels(&self) -> Vec<&[f64]> {
        self.data.iter().map(|c| c.as_slice()).collect()
    }
}

#[inline]
fn sq_magnitude(ch: &[&[f64]], idx: usize) -> f64 {
    ch.iter().map(|c| c[idx] * c[idx]).sum()
}

#[inline]
fn sq_difference(ch: &[&[f64]], i: usize, j: usize) -> f64 {
    ch.iter().map(|c| (c[i] - c[j]) * (c[i] - c[j])).sum()
}

pub fn l2_norm(f: &impl CellData) -> f64 {
    let ch = f.channels();
    let g = f.grid();
    let s: f64 = (0..g.cell_count()).map(|i| sq_magnitude(&ch, i)).sum();
    libm::sqrt(s * g.cell_volume())
}

pub fn lp_norm(f: &impl CellData, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid("p", alloc::format!("need 1 <= p < inf, got {p}")));
    }
    let ch = f.channels();
    let g = f.grid();
    let s: f64 = (0..g.cell_count())
        .map(|i| libm::pow(libm::sqrt(sq_magnitude(&ch, i)), p))
        .sum();
    Ok(libm::pow(s * g.cell_volume(), 1.0 / p))
}

/// All first partials of every channel (channel-major, then axis).
pub fn gradient_channels(f: &impl CellData) -> Channels {
    let g = f.grid();
    let data = f
        .channels()
        .into_iter()
        .flat_map(|c| (0..3).map(move |a| partial(g, c, a, StencilSpec::ONE_SIDED)))
        .collect();
    Channels { grid: g, data }
}

pub fn h1_norm(f: &impl CellData) -> f64 {
    let l2 = l2_norm(f);
    let d = l2_norm(&gradient_channels(f));
    libm::sqrt(l2 * l2 + d * d)
}

/// Where sup-type seminorms look.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    /// Spacing (in cells) of Campanato centers; `None` picks about seven
    /// centers per axis.
    pub center_stride: Option<usize>,
    /// Random pairs evaluated on top of the exhaustive near field.
    pub pair_budget: usize,
    /// Every pair with index offset at most this (per axis) is evaluated.
    pub near_pair_radius: usize,
    /// Fraction of the domain excluded next to each face.
    pub interior_margin: f64,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            center_stride: None,
            pair_budget: 10_000,
            near_pair_radius: 2,
            interior_margin: 0.125,
            seed: 0,
        }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.interior_margin >= 0.0 && self.interior_margin < 0.5) {
            return Err(Error::invalid("interior_margin", "must lie in [0, 0.5)"));
        }
        if self.center_stride == Some(0) {
            return Err(Error::invalid("center_stride", "must be positive"));
        }
        Ok(())
    }

    /// First and last interior cell index along an axis.
    pub fn interior_range(&self, g: Grid) -> (usize, usize) {
        let n = g.n();
        let m = self.interior_margin;
        let lo = (0..n).find(|&i| g.coord(i) >= m).unwrap_or(0);
        let hi = (0..n).rev().find(|&i| g.coord(i) <= 1.0 - m).unwrap_or(n - 1);
        (lo, hi.max(lo))
    }

    /// Campanato radii `2h 2^j` up to the interior width.
    pub fn radii(&self, g: Grid) -> Vec<f64> {
        let width = 1.0 - 2.0 * self.interior_margin;
        let mut out = Vec::new();
        let mut r = 2.0 * g.h();
        while r <= width + 1e-12 {
            out.push(r);
            r *= 2.0;
        }
        out
    }

    fn centers_1d(&self, g: Grid) -> Vec<usize> {
        let (lo, hi) = self.interior_range(g);
        let stride = self.center_stride.unwrap_or(((hi - lo + 1) / 7).max(1));
        let mut c: Vec<usize> = (lo..=hi).step_by(stride).collect();
        if c.last() != Some(&hi) {
            c.push(hi);
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    None,
    Ball { center: Point, radius: f64 },
    Pair { x: Point, y: Point, distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    /// The full norm (base part plus seminorm part).
    pub value: f64,
    pub seminorm: f64,
    /// L² part for Campanato, sup part for Hölder norms.
    pub base: f64,
    pub witness: Witness,
    pub seed: u64,
    /// Balls or pairs evaluated.
    pub evaluated: usize,
}

impl NormReport {
    fn seminorm_only(seminorm: f64, witness: Witness, seed: u64, evaluated: usize) -> Self {
        Self {
            value: seminorm,
            seminorm,
            base: 0.0,
            witness,
            seed,
            evaluated,
        }
    }
}

/// `|u|_{L2} + sup_{x,r} ( r^{-tau} ∫_{B(x,r)} |u - ū|^2 )^{1/2}`, with balls
/// restricted to the interior box.
pub fn campanato_norm(f: &impl CellData, tau: f64, plan: &SamplingPlan) -> Result<NormReport> {
    plan.validate()?;
    if !(tau > 0.0 && tau < 5.0) {
        return Err(Error::invalid("tau", alloc::format!("must lie in (0, 5), got {tau}")));
    }
    let g = f.grid();
    let ch = f.channels();
    let radii = plan.radii(g);
    if radii.is_empty() {
        return Err(Error::EmptySampling("radius"));
    }
    let centers = plan.centers_1d(g);
    let (lo, hi) = plan.interior_range(g);
    let h = g.h();
    let reach = (radii[radii.len() - 1] / h) as usize + 1;
    let nr = radii.len();
    let nc = ch.len();

    let mut best = (f64::NEG_INFINITY, Witness::None);
    let mut evaluated = 0;
    let mut count = vec![0usize; nr];
    let mut sum = vec![0.0; nr * nc];
    let mut sq = vec![0.0; nr];
    for &ci in &centers {
        for &cj in &centers {
            for &ck in &centers {
                count.iter_mut().for_each(|x| *x = 0);
                sum.iter_mut().for_each(|x| *x = 0.0);
                sq.iter_mut().for_each(|x| *x = 0.0);
                let c0 = g.index(ci, cj, ck);
                let span = |c: usize| (c.saturating_sub(reach).max(lo), (c + reach).min(hi));
                let (i0, i1) = span(ci);
                let (j0, j1) = span(cj);
                let (k0, k1) = span(ck);
                for i in i0..=i1 {
                    let di = (i as f64 - ci as f64) * h;
                    for j in j0..=j1 {
                        let dj = (j as f64 - cj as f64) * h;
                        for k in k0..=k1 {
                            let dk = (k as f64 - ck as f64) * h;
                            let d = libm::sqrt(di * di + dj * dj + dk * dk);
                            let Some(shell) = radii.iter().position(|&r| d <= r + 1e-12) else {
                                continue;
                            };
                            let idx = g.index(i, j, k);
                            count[shell] += 1;
                            let mut s2 = 0.0;
                            for (c, v) in ch.iter().enumerate() {
                                let x = v[idx] - v[c0];
                                sum[shell * nc + c] += x;
                                s2 += x * x;
                            }
                            sq[shell] += s2;
                        }
                    }
                }
                let (mut n_acc, mut s2_acc) = (0usize, 0.0);
                let mut s_acc = vec![0.0; nc];
                for (r, &radius) in radii.iter().enumerate() {
                    n_acc += count[r];
                    s2_acc += sq[r];
                    for c in 0..nc {
                        s_acc[c] += sum[r * nc + c];
                    }
                    if n_acc == 0 {
                        continue;
                    }
                    evaluated += 1;
                    let mean2: f64 = s_acc.iter().map(|s| s * s).sum::<f64>() / n_acc as f64;
                    let osc = ((s2_acc - mean2) * g.cell_volume()).max(0.0);
                    let v = osc / libm::pow(radius, tau);
                    if v > best.0 {
                        best = (
                            v,
                            Witness::Ball {
                                center: g.center([ci, cj, ck]),
                                radius,
                            },
                        );
                    }
                }
            }
        }
    }
    if evaluated == 0 {
        return Err(Error::EmptySampling("ball"));
    }
    let semi = libm::sqrt(best.0.max(0.0));
    let base = l2_norm(f);
    Ok(NormReport {
        value: base + semi,
        seminorm: semi,
        base,
        witness: best.1,
        seed: plan.seed,
        evaluated,
    })
}

fn interior_cells(g: Grid, plan: &SamplingPlan) -> (usize, usize, Vec<usize>) {
    let (lo, hi) = plan.interior_range(g);
    let mut cells = Vec::new();
    for i in lo..=hi {
        for j in lo..=hi {
            for k in lo..=hi {
                cells.push(g.index(i, j, k));
            }
        }
    }
    (lo, hi, cells)
}

fn holder_channels(ch: &[&[f64]], g: Grid, alpha: f64, plan: &SamplingPlan) -> Result<NormReport> {
    plan.validate()?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", alloc::format!("must lie in (0, 1], got {alpha}")));
    }
    let (lo, hi, cells) = interior_cells(g, plan);
    if cells.len() < 2 {
        return Err(Error::EmptySampling("pair"));
    }
    let h = g.h();
    let mut best = (0.0f64, Witness::None);
    let mut evaluated = 0;
    let consider = |a: usize, b: usize, dist: f64, best: &mut (f64, Witness)| {
        let v = libm::sqrt(sq_difference(ch, a, b)) / libm::pow(dist, alpha);
        if v > best.0 {
            *best = (
                v,
                Witness::Pair {
                    x: g.center(g.cell_of(a)),
                    y: g.center(g.cell_of(b)),
                    distance: dist,
                },
            );
        }
    };

    let r = plan.near_pair_radius as isize;
    let mut offsets = Vec::new();
    for di in -r..=r {
        for dj in -r..=r {
            for dk in -r..=r {
                if (di, dj, dk) > (0, 0, 0) {
                    offsets.push([di, dj, dk]);
                }
            }
        }
    }
    let (lo, hi) = (lo as isize, hi as isize);
    for &a in &cells {
        let c = g.cell_of(a).map(|x| x as isize);
        for o in &offsets {
            let t = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
            if t.iter().any(|&x| x < lo || x > hi) {
                continue;
            }
            let b = g.index(t[0] as usize, t[1] as usize, t[2] as usize);
            let dist = h * libm::sqrt((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64);
            consider(a, b, dist, &mut best);
            evaluated += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    for _ in 0..plan.pair_budget {
        let a = cells[rng.random_range(0..cells.len())];
        let b = cells[rng.random_range(0..cells.len())];
        if a == b {
            continue;
        }
        let (x, y) = (g.cell_of(a), g.cell_of(b));
        let d2: f64 = (0..3)
            .map(|k| {
                let d = (x[k] as f64 - y[k] as f64) * h;
                d * d
            })
            .sum();
        consider(a, b, libm::sqrt(d2), &mut best);
        evaluated += 1;
    }
    Ok(NormReport::seminorm_only(best.0, best.1, plan.seed, evaluated))
}

/// `sup |v(x) - v(y)| / |x - y|^alpha` over sampled interior pairs.
pub fn holder_seminorm(f: &impl CellData, alpha: f64, plan: &SamplingPlan) -> Result<NormReport> {
    holder_channels(&f.channels(), f.grid(), alpha, plan)
}

fn interior_sup(ch: &[&[f64]], g: Grid, plan: &SamplingPlan) -> f64 {
    let (_, _, cells) = interior_cells(g, plan);
    cells
        .iter()
        .fold(0.0f64, |m, &i| m.max(libm::sqrt(sq_magnitude(ch, i))))
}

/// `C^{k,alpha}` norm on the interior box: sup norms of the field and (for
/// `k = 1`) its gradient, plus the Hölder seminorm of the highest derivative.
pub fn holder_k_norm(f: &impl CellData, k: u8, alpha: f64, plan: &SamplingPlan) -> Result<NormReport> {
    let g = f.grid();
    let ch = f.channels();
    match k {
        0 => {
            let mut r = holder_channels(&ch, g, alpha, plan)?;
            r.base = interior_sup(&ch, g, plan);
            r.value = r.base + r.seminorm;
            Ok(r)
        }
        1 => {
            let (lo, _) = plan.interior_range(g);
            if lo == 0 {
                return Err(Error::invalid("interior_margin", "k = 1 needs at least one cell of margin"));
            }
            let d = gradient_channels(f);
            let dch = d.channels();
            let mut r = holder_channels(&dch, g, alpha, plan)?;
            r.base = interior_sup(&ch, g, plan) + interior_sup(&dch, g, plan);
            r.value = r.base + r.seminorm;
            Ok(r)
        }
        _ => Err(Error::invalid("k", "only k = 0 and k = 1 are supported")),
    }
}

/// The Hölder exponent matching a Campanato exponent, `(tau - 1) / 2`.
pub fn alpha_from_tau(tau: f64) -> f64 {
    0.5 * (tau - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpace {
    L2,
    Lp { p: f64 },
    H1,
    Campanato { tau: f64 },
    Holder { alpha: f64 },
    HolderK { k: u8, alpha: f64 },
}

/// Evaluates `space` on `f`; the plain integral norms carry no witness.
pub fn evaluate(f: &impl CellData, space: NormSpace, plan: &SamplingPlan) -> Result<NormReport> {
    let plain = |v: f64| NormReport {
        value: v,
        seminorm: 0.0,
        base: v,
        witness: Witness::None,
        seed: plan.seed,
        evaluated: 0,
    };
    match space {
        NormSpace::L2 => Ok(plain(l2_norm(f))),
        NormSpace::Lp { p } => Ok(plain(lp_norm(f, p)?)),
        NormSpace::H1 => Ok(plain(h1_norm(f))),
        NormSpace::Campanato { tau } => campanato_norm(f, tau, plan),
        NormSpace::Holder { alpha } => holder_seminorm(f, alpha, plan),
        NormSpace::HolderK { k, alpha } => holder_k_norm(f, k, alpha, plan),
    }
}
