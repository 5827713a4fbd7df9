//! Fixed inputs shared by the benchmarks.

use liebsdp::geomean::{self, GeoMeanModel, GeoMeanTask};
use liebsdp::kernel::{CMatrix, HermitianMatrix, RationalExponent};
use liebsdp::lieb::{build_lieb, CompiledModel, LiebTask};
use liebsdp::random::{self, Field};

/// Exponents with growing denominators, used to show how model size scales.
pub const EXPONENTS: [(i64, i64); 5] = [(1, 2), (5, 8), (8, 13), (3, 7), (21, 64)];

pub fn exponent(p: i64, q: i64) -> RationalExponent {
    RationalExponent::new(p, q).expect("benchmark exponents are in range")
}

/// A reproducible complex positive definite pair of size `n`.
pub fn pair(n: usize, seed: u64) -> (HermitianMatrix, HermitianMatrix) {
    let mut rng = random::rng(seed);
    (
        random::random_pd(&mut rng, n, Field::Complex),
        random::random_pd(&mut rng, n, Field::Complex),
    )
}

pub fn geomean_model(t: RationalExponent, n: usize, seed: u64) -> GeoMeanModel {
    let (a, b) = pair(n, seed);
    geomean::build(&GeoMeanTask::optimize(t, a, b)).expect("valid task")
}

pub fn lieb_model(t: RationalExponent, n: usize, seed: u64) -> CompiledModel {
    let (a, b) = pair(n, seed);
    let k: CMatrix = random::gaussian(&mut random::rng(seed ^ 1), n, n, Field::Complex);
    build_lieb(&LiebTask::optimize(k, t, a, b)).expect("valid task")
}
