use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, the storage type for every matrix in the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Relative tolerance used when accepting user-supplied matrices as Hermitian.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-9;

/// A dense complex Hermitian matrix.
///
/// Constructors always symmetrize, so `entries[i][j] == conj(entries[j][i])` holds exactly.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Takes the Hermitian part `(M + M*)/2` of a square matrix.
    pub fn hermitian_part(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(m.nrows(), m.ncols()));
        }
        let h = (m + m.adjoint()).scale(0.5);
        Ok(HermitianMatrix { m: h })
    }

    /// Accepts `m` if it is Hermitian up to a relative tolerance, then symmetrizes it.
    pub fn from_matrix(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(m.nrows(), m.ncols()));
        }
        let asym = asymmetry(&m);
        let scale = 1.0 + max_abs(&m);
        if asym > tol * scale {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Self::hermitian_part(&m)
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::hermitian_part(&m.map(|x| Complex64::new(x, 0.0)))
    }

    /// Builds from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let m = matrix_from_parts(re, im)?;
        Self::from_matrix(m, HERMITIAN_INPUT_TOL)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        HermitianMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    /// Eigenvalues in ascending order with matching unitary eigenvectors (columns).
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let n = self.dim();
        if n == 0 {
            return (Vec::new(), CMatrix::zeros(0, 0));
        }
        let eig = self.m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub fn is_pd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= tol
    }

    /// Applies a scalar function to the spectrum: `U diag(f(λ)) U*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let (values, u) = self.eigh();
        let n = self.dim();
        let mut scaled = u.clone();
        for j in 0..n {
            let fj = f(values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        HermitianMatrix {
            m: &scaled * u.adjoint(),
        }
        .symmetrized()
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        HermitianMatrix {
            m: self.m.map(|z| z.conj()),
        }
    }

    /// Real symmetric embedding `[[Re X, -Im X], [Im X, Re X]]` of twice the dimension.
    pub fn real_embedding(&self) -> Self {
        HermitianMatrix {
            m: real_embedding(&self.m),
        }
    }

    /// `X H X*` for an arbitrary (possibly rectangular) `X`.
    pub fn congruence(&self, x: &CMatrix) -> Self {
        HermitianMatrix {
            m: x * &self.m * x.adjoint(),
        }
        .symmetrized()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix {
            m: self.m.map(|z| z * s),
        }
    }

    /// Ordinary matrix product; generally not Hermitian.
    pub fn matmul(&self, other: &HermitianMatrix) -> CMatrix {
        &self.m * &other.m
    }

    fn symmetrized(self) -> Self {
        HermitianMatrix {
            m: (&self.m + self.m.adjoint()).scale(0.5),
        }
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix({}x{}) ", self.dim(), self.dim())?;
        f.debug_list()
            .entries(self.m.row_iter().map(|r| {
                r.iter()
                    .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

/// Largest absolute value of `M - M*`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let d = m - m.adjoint();
    max_abs(&d)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `[[Re M, -Im M], [Im M, Re M]]` for a general square or rectangular matrix.
pub fn real_embedding(m: &CMatrix) -> CMatrix {
    let (r, c) = m.shape();
    let mut out = CMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out[(i, j)] = Complex64::new(z.re, 0.0);
            out[(i + r, j + c)] = Complex64::new(z.re, 0.0);
            out[(i, j + c)] = Complex64::new(-z.im, 0.0);
            out[(i + r, j)] = Complex64::new(z.im, 0.0);
        }
    }
    out
}

/// Builds a (possibly rectangular) complex matrix from row-major real/imaginary parts.
pub fn matrix_from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<CMatrix> {
    let rows = re.len();
    let cols = re.first().map_or(0, |r| r.len());
    if let Some(bad) = re.iter().find(|r| r.len() != cols) {
        return Err(Error::dims(cols, bad.len()));
    }
    if let Some(im) = im {
        if im.len() != rows {
            return Err(Error::dims(rows, im.len()));
        }
        if let Some(bad) = im.iter().find(|r| r.len() != cols) {
            return Err(Error::dims(cols, bad.len()));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let imag = im.map_or(0.0, |im| im[i][j]);
        Complex64::new(re[i][j], imag)
    }))
}

/// Converts a real matrix to complex storage.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constructor_symmetrizes() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let h = HermitianMatrix::hermitian_part(&m).unwrap();
        assert_eq!(h.entry(0, 1), h.entry(1, 0).conj());
        assert_eq!(h.entry(0, 1), c(1.0, 0.5));
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::from_matrix(m, 1e-9),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn embedding_doubles_the_spectrum() {
        let x = HermitianMatrix::from_parts(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            Some(&[vec![0.0, 1.0], vec![-1.0, 0.0]]),
        )
        .unwrap();
        assert_eq!(x.dim(), 2);
        let emb = x.real_embedding();
        assert!(emb.is_real());
        let eig = emb.eigenvalues();
        let expected = [0.0, 0.0, 2.0, 2.0];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{eig:?}");
        }
    }

    #[test]
    fn psd_predicates() {
        let h = HermitianMatrix::diag(&[0.0, 2.0]);
        assert!(h.is_psd(0.0));
        assert!(!h.is_pd(1e-12));
        assert!(HermitianMatrix::diag(&[1e-3, 2.0]).is_pd(1e-6));
    }
}
