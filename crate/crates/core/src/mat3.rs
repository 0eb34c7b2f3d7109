//! Small dense 3x3 helpers, row-major.

pub type Mat3 = [f64; 9];

pub const IDENTITY: Mat3 = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];

#[inline]
pub fn diag(d: [f64; 3]) -> Mat3 {
    [d[0], 0.0, 0.0, 0.0, d[1], 0.0, 0.0, 0.0, d[2]]
}

#[inline]
pub fn scale(m: &Mat3, c: f64) -> Mat3 {
    m.map(|x| c * x)
}

#[inline]
pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = (0..3).map(|k| a[3 * i + k] * b[3 * k + j]).sum();
        }
    }
    out
}

#[inline]
pub fn mul_vec(a: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2])
}

#[inline]
pub fn transpose(a: &Mat3) -> Mat3 {
    [a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]]
}

#[inline]
pub fn det(a: &Mat3) -> f64 {
    a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
        + a[2] * (a[3] * a[7] - a[4] * a[6])
}

/// Inverse by cofactors, or `None` when `|det| < min_det`.
pub fn inverse(a: &Mat3, min_det: f64) -> Option<Mat3> {
    let d = det(a);
    if !(d.abs() >= min_det) {
        return None;
    }
    let inv = 1.0 / d;
    Some([
        (a[4] * a[8] - a[5] * a[7]) * inv,
        (a[2] * a[7] - a[1] * a[8]) * inv,
        (a[1] * a[5] - a[2] * a[4]) * inv,
        (a[5] * a[6] - a[3] * a[8]) * inv,
        (a[0] * a[8] - a[2] * a[6]) * inv,
        (a[2] * a[3] - a[0] * a[5]) * inv,
        (a[3] * a[7] - a[4] * a[6]) * inv,
        (a[1] * a[6] - a[0] * a[7]) * inv,
        (a[0] * a[4] - a[1] * a[3]) * inv,
    ])
}

/// Largest entry of `|A - A^T|`.
pub fn asymmetry(a: &Mat3) -> f64 {
    (a[1] - a[3]).abs().max((a[2] - a[6]).abs()).max((a[5] - a[7]).abs())
}

#[inline]
pub fn is_diagonal(a: &Mat3) -> bool {
    a[1] == 0.0 && a[2] == 0.0 && a[3] == 0.0 && a[5] == 0.0 && a[6] == 0.0 && a[7] == 0.0
}

/// Eigenvalues of the symmetric part, ascending (trigonometric closed form).
pub fn sym_eigenvalues(a: &Mat3) -> [f64; 3] {
    let s = |i: usize, j: usize| 0.5 * (a[3 * i + j] + a[3 * j + i]);
    let (a00, a11, a22) = (s(0, 0), s(1, 1), s(2, 2));
    let (a01, a02, a12) = (s(0, 1), s(0, 2), s(1, 2));
    let p1 = a01 * a01 + a02 * a02 + a12 * a12;
    if p1 <= f64::EPSILON * f64::EPSILON * (a00 * a00 + a11 * a11 + a22 * a22) {
        let mut e = [a00, a11, a22];
        e.sort_by(f64::total_cmp);
        return e;
    }
    let q = (a00 + a11 + a22) / 3.0;
    let p2 = (a00 - q) * (a00 - q) + (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + 2.0 * p1;
    let p = libm::sqrt(p2 / 6.0);
    let b = [
        (a00 - q) / p,
        a01 / p,
        a02 / p,
        a01 / p,
        (a11 - q) / p,
        a12 / p,
        a02 / p,
        a12 / p,
        (a22 - q) / p,
    ];
    let r = (0.5 * det(&b)).clamp(-1.0, 1.0);
    let phi = libm::acos(r) / 3.0;
    let hi = q + 2.0 * p * libm::cos(phi);
    let lo = q + 2.0 * p * libm::cos(phi + 2.0 * core::f64::consts::PI / 3.0);
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}
