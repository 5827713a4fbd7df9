//! Reproducible random test instances.
//!
//! Positive definite matrices are drawn as `Q diag(exp(u)) Q*` with `u` uniform in `[-2, 2]`
//! and `Q` Haar distributed (unitary for complex instances, orthogonal for real ones), so every
//! instance has condition number at most `e^4`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::kernel::{CMatrix, HermitianMatrix};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// Entries i.i.d. standard normal (real and imaginary parts for complex).
pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize, field: Field) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => rng.sample(StandardNormal),
        };
        Complex64::new(re, im)
    })
}

/// Haar-distributed unitary (or orthogonal) matrix via QR with phase correction.
pub fn haar(rng: &mut impl Rng, n: usize, field: Field) -> CMatrix {
    let g = gaussian(rng, n, n, field);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `Q diag(exp(u)) Q*`, `u ~ U[-2, 2]`.
pub fn random_pd(rng: &mut impl Rng, n: usize, field: Field) -> HermitianMatrix {
    let q = haar(rng, n, field);
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0f64).exp()).collect();
    HermitianMatrix::diag(&d).congruence(&q)
}

/// Random positive definite matrix scaled to unit trace.
pub fn random_density(rng: &mut impl Rng, n: usize, field: Field) -> HermitianMatrix {
    let a = random_pd(rng, n, field);
    let tr = a.trace();
    a.scale(1.0 / tr)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, field: Field) -> CMatrix {
    gaussian(rng, rows, cols, field)
}

pub fn real_matrix(rows: usize, cols: usize, values: &[f64]) -> CMatrix {
    DMatrix::from_row_slice(rows, cols, values).map(|x| Complex64::new(x, 0.0))
}
