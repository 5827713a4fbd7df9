//! Eigendecomposition-based reference values for every function the crate compiles.

use num_complex::Complex64;

use super::hermitian::{CMatrix, CVector, HermitianMatrix};
use crate::error::{Error, Result};

/// Relative threshold below which a matrix is treated as singular.
pub const PD_TOL: f64 = 1e-10;

/// Maximum imaginary residue tolerated when a trace is reported as a real number.
pub const IMAG_TOL: f64 = 1e-9;

/// Fails unless the smallest eigenvalue exceeds `PD_TOL` times the largest.
pub fn require_pd(a: &HermitianMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (values, vectors) = a.eigh();
    let max = values.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let min = values.first().copied().unwrap_or(0.0);
    let threshold = PD_TOL * max;
    if !(min > threshold) {
        return Err(Error::NotPositiveDefinite {
            min_eig: min,
            threshold,
        });
    }
    Ok((values, vectors))
}

fn from_spectrum(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> HermitianMatrix {
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let fj = f(v);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= fj;
        }
    }
    HermitianMatrix::hermitian_part(&(&scaled * vectors.adjoint())).expect("square")
}

/// `A^t = U diag(λ^t) U*` for positive definite `A`.
pub fn herm_power(a: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    let (values, vectors) = require_pd(a)?;
    Ok(from_spectrum(&values, &vectors, |x| x.powf(t)))
}

/// Principal logarithm of a positive definite matrix.
pub fn herm_log(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (values, vectors) = require_pd(a)?;
    Ok(from_spectrum(&values, &vectors, f64::ln))
}

fn same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dims(a.dim(), b.dim()));
    }
    Ok(())
}

/// Weighted geometric mean `A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    same_dim(a, b)?;
    let (values, vectors) = require_pd(a)?;
    require_pd(b)?;
    let half = from_spectrum(&values, &vectors, f64::sqrt);
    let inv_half = from_spectrum(&values, &vectors, |x| 1.0 / x.sqrt());
    let inner = b.congruence(inv_half.as_matrix());
    let inner_t = herm_power(&inner, t)?;
    Ok(inner_t.congruence(half.as_matrix()))
}

/// Kronecker product with `[A⊗B]_{(i,k),(j,l)} = A_ij B_kl`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_herm(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::hermitian_part(&kron(a.as_matrix(), b.as_matrix())).expect("square")
}

/// Concatenates the rows of `K` into one column vector.
pub fn vec_rows(k: &CMatrix) -> CVector {
    let (r, c) = k.shape();
    CVector::from_fn(r * c, |idx, _| k[(idx / c, idx % c)])
}

pub(crate) fn real_of(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "{what} has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

fn trace_c(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Lieb's function `tr[K* A^{1-t} K B^t]` for `K` of shape `n×m`.
pub fn lieb_value(k: &CMatrix, a: &HermitianMatrix, b: &HermitianMatrix, t: f64) -> Result<f64> {
    if k.nrows() != a.dim() {
        return Err(Error::dims(a.dim(), k.nrows()));
    }
    if k.ncols() != b.dim() {
        return Err(Error::dims(b.dim(), k.ncols()));
    }
    let a_pow = herm_power(a, 1.0 - t)?;
    let b_pow = herm_power(b, t)?;
    let prod = k.adjoint() * a_pow.as_matrix() * k * b_pow.as_matrix();
    real_of(trace_c(&prod), "Lieb trace")
}

/// The same quantity through the lifted quadratic form `vec(K)* (A^{1-t} ⊗ conj(B)^t) vec(K)`.
pub fn lieb_value_kron(k: &CMatrix, a: &HermitianMatrix, b: &HermitianMatrix, t: f64) -> Result<f64> {
    if k.nrows() != a.dim() || k.ncols() != b.dim() {
        return Err(Error::dims(a.dim() * b.dim(), k.nrows() * k.ncols()));
    }
    let lifted = kron(
        herm_power(a, 1.0 - t)?.as_matrix(),
        herm_power(b, t)?.conj().as_matrix(),
    );
    let v = vec_rows(k);
    let q = v.adjoint() * lifted * &v;
    real_of(q[(0, 0)], "lifted Lieb form")
}

fn check_tsallis_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("Tsallis parameter {t} outside (0, 1]")));
    }
    Ok(())
}

/// `S_t(A) = tr[A^{1-t} - A] / t`.
pub fn tsallis_entropy(a: &HermitianMatrix, t: f64) -> Result<f64> {
    check_tsallis_t(t)?;
    let p = herm_power(a, 1.0 - t)?;
    Ok((p.trace() - a.trace()) / t)
}

/// `S_t(A‖B) = tr[A - A^{1-t} B^t] / t`.
pub fn tsallis_rel_entropy(a: &HermitianMatrix, b: &HermitianMatrix, t: f64) -> Result<f64> {
    check_tsallis_t(t)?;
    same_dim(a, b)?;
    let cross = herm_power(a, 1.0 - t)?.matmul(&herm_power(b, t)?);
    let cross = real_of(trace_c(&cross), "Tsallis cross term")?;
    Ok((a.trace() - cross) / t)
}

/// von Neumann entropy `-tr[A log A]`.
pub fn von_neumann_entropy(a: &HermitianMatrix) -> Result<f64> {
    let (values, _) = require_pd(a)?;
    Ok(-values.iter().map(|x| x * x.ln()).sum::<f64>())
}

/// Quantum relative entropy `tr[A (log A - log B)]`.
pub fn relative_entropy(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let diff = &herm_log(a)? - &herm_log(b)?;
    real_of(trace_c(&a.matmul(&diff)), "relative entropy")
}

/// `Υ_t(A) = tr[(K* A^t K)^{1/t}]`; requires `K* A^t K` to be positive definite.
pub fn upsilon_value(k: &CMatrix, a: &HermitianMatrix, t: f64) -> Result<f64> {
    Ok(upsilon_optimizer(k, a, t)?.trace())
}

/// `(K* A^t K)^{1/t}`, the maximizer (or minimizer) of the variational expression for `tΥ_t`.
pub fn upsilon_optimizer(k: &CMatrix, a: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    if t == 0.0 {
        return Err(Error::Domain("Υ_t is undefined at t = 0".into()));
    }
    if k.nrows() != a.dim() {
        return Err(Error::dims(a.dim(), k.nrows()));
    }
    let inner = herm_power(a, t)?.congruence(&k.adjoint());
    herm_power(&inner, 1.0 / t)
}

/// `tr[K* A^t K X^{1-t}] - (1-t) tr[X]`.
pub fn upsilon_variational(k: &CMatrix, a: &HermitianMatrix, x: &HermitianMatrix, t: f64) -> Result<f64> {
    let inner = herm_power(a, t)?.congruence(&k.adjoint());
    let xp = herm_power(x, 1.0 - t)?;
    let v = real_of(trace_c(&inner.matmul(&xp)), "variational trace")?;
    Ok(v - (1.0 - t) * x.trace())
}

/// Fidelity `tr[(A^{1/2} B A^{1/2})^{1/2}]`.
pub fn fidelity_value(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    same_dim(a, b)?;
    require_pd(b)?;
    let half = herm_power(a, 0.5)?;
    let inner = b.congruence(half.as_matrix());
    Ok(herm_power(&inner, 0.5)?.trace())
}

/// An optimal off-diagonal block `Z` for the fidelity program: `Z = A^{1/2} V U* B^{1/2}`
/// where `B^{1/2} A^{1/2} = U Σ V*`.
pub fn fidelity_optimizer(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<CMatrix> {
    same_dim(a, b)?;
    let ah = herm_power(a, 0.5)?;
    let bh = herm_power(b, 0.5)?;
    let svd = (bh.as_matrix() * ah.as_matrix()).svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::NumericalFailure("fidelity SVD failed".into())),
    };
    Ok(ah.as_matrix() * vt.adjoint() * u.adjoint() * bh.as_matrix())
}
