//! Reference values computed independently of the library kernel: spectral functions go through
//! the real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` and nalgebra's real eigensolver.

#![allow(dead_code)]

use liebsdp::kernel::{CMatrix, HermitianMatrix, RationalExponent};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn r(p: i64, q: i64) -> RationalExponent {
    RationalExponent::new(p, q).unwrap()
}

fn embed(h: &CMatrix) -> DMatrix<f64> {
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// `f(H)` for Hermitian `H`. The embedding doubles every eigenvalue, and `f` commutes with it.
pub fn spectral(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = h.nrows();
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = embed(&herm).symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| f(x)));
    let fe = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    CMatrix::from_fn(n, n, |i, j| Complex64::new(fe[(i, j)], fe[(i + n, j)]))
}

pub fn eigenvalues(h: &CMatrix) -> Vec<f64> {
    let herm = (h + h.adjoint()).scale(0.5);
    let mut v: Vec<f64> = embed(&herm).symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().step_by(2).collect()
}

pub fn min_eig(h: &CMatrix) -> f64 {
    eigenvalues(h)[0]
}

pub fn pow(h: &CMatrix, t: f64) -> CMatrix {
    spectral(h, |x| x.powf(t))
}

pub fn log(h: &CMatrix) -> CMatrix {
    spectral(h, f64::ln)
}

pub fn tr(m: &CMatrix) -> Complex64 {
    m.trace()
}

pub fn mean(a: &CMatrix, b: &CMatrix, t: f64) -> CMatrix {
    let ah = pow(a, 0.5);
    let ai = pow(a, -0.5);
    let inner = &ai * b * &ai;
    &ah * pow(&inner, t) * &ah
}

pub fn lieb(k: &CMatrix, a: &CMatrix, b: &CMatrix, t: f64) -> f64 {
    tr(&(k.adjoint() * pow(a, 1.0 - t) * k * pow(b, t))).re
}

pub fn upsilon(k: &CMatrix, a: &CMatrix, t: f64) -> f64 {
    let inner = k.adjoint() * pow(a, t) * k;
    tr(&pow(&inner, 1.0 / t)).re
}

pub fn fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let h = pow(a, 0.5);
    tr(&pow(&(&h * b * &h), 0.5)).re
}

pub fn tsallis_rel(a: &CMatrix, b: &CMatrix, t: f64) -> f64 {
    (tr(a) - tr(&(pow(a, 1.0 - t) * pow(b, t)))).re / t
}

pub fn tsallis(a: &CMatrix, t: f64) -> f64 {
    (tr(&pow(a, 1.0 - t)) - tr(a)).re / t
}

pub fn rel_entropy(a: &CMatrix, b: &CMatrix) -> f64 {
    tr(&(a * (log(a) - log(b)))).re
}

/// `A ⊗ B` by explicit indexing.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = b.shape();
    CMatrix::from_fn(a.nrows() * p, a.ncols() * q, |i, j| a[(i / p, j / q)] * b[(i % p, j % q)])
}

pub fn conj(a: &CMatrix) -> CMatrix {
    a.map(|z| z.conj())
}

/// Row-major stacking of `K`.
pub fn vec_rows(k: &CMatrix) -> CMatrix {
    let (n, m) = k.shape();
    CMatrix::from_fn(n * m, 1, |i, _| k[(i / m, i % m)])
}

pub fn h(m: &HermitianMatrix) -> CMatrix {
    m.as_matrix().clone()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}
