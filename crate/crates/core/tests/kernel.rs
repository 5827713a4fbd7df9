mod common;

use common::*;
use liebsdp::kernel::{self, CMatrix, HermitianMatrix, MatrixDocument};
use liebsdp::random::{self, Field};
use proptest::prelude::*;

fn pd(seed: u64, n: usize) -> HermitianMatrix {
    random::random_pd(&mut random::rng(seed), n, Field::Complex)
}

#[test]
fn powers_and_means_match_the_embedding_oracle() {
    let mut rng = random::rng(11);
    for n in [1, 2, 3, 4] {
        let a = random::random_pd(&mut rng, n, Field::Complex);
        let b = random::random_pd(&mut rng, n, Field::Complex);
        for t in [-1.0, -0.5, 0.0, 0.25, 0.5, 0.625, 1.0, 1.5, 2.0] {
            let p = kernel::herm_power(&a, t).unwrap();
            assert!((h(&p) - pow(&h(&a), t)).norm() < 1e-9 * (1.0 + p.max_abs()));
            let g = kernel::geometric_mean(&a, &b, t).unwrap();
            let expect = mean(&h(&a), &h(&b), t);
            assert!((h(&g) - &expect).norm() < 1e-9 * (1.0 + expect.norm()), "n={n} t={t}");
        }
    }
}

#[test]
fn trace_functions_match_the_oracle() {
    let mut rng = random::rng(12);
    for _ in 0..5 {
        let k = random::gaussian(&mut rng, 3, 2, Field::Complex);
        let a = random::random_pd(&mut rng, 3, Field::Complex);
        let b = random::random_pd(&mut rng, 2, Field::Complex);
        for t in [-1.0, -0.5, 1.0 / 3.0, 0.5, 1.5, 2.0] {
            let v = kernel::lieb_value(&k, &a, &b, t).unwrap();
            assert!(rel(v, lieb(&k, &h(&a), &h(&b), t)) < 1e-9);
            let vk = kernel::lieb_value_kron(&k, &a, &b, t).unwrap();
            assert!(rel(vk, v) < 1e-9);
            let u = kernel::upsilon_value(&k, &a, t).unwrap();
            assert!(rel(u, upsilon(&k, &h(&a), t)) < 1e-9);
        }
        let c = random::random_pd(&mut rng, 3, Field::Complex);
        assert!(rel(kernel::fidelity_value(&a, &c).unwrap(), fidelity(&h(&a), &h(&c))) < 1e-9);
        let (da, db) = (
            random::random_density(&mut rng, 3, Field::Complex),
            random::random_density(&mut rng, 3, Field::Complex),
        );
        for t in [0.125, 0.5, 1.0] {
            assert!(rel(kernel::tsallis_entropy(&da, t).unwrap(), tsallis(&h(&da), t)) < 1e-9);
            assert!(rel(kernel::tsallis_rel_entropy(&da, &db, t).unwrap(), tsallis_rel(&h(&da), &h(&db), t)) < 1e-9);
        }
        assert!(rel(kernel::relative_entropy(&da, &db).unwrap(), rel_entropy(&h(&da), &h(&db))) < 1e-9);
    }
}

#[test]
fn kronecker_and_vec_conventions() {
    let mut rng = random::rng(13);
    let a = random::gaussian(&mut rng, 2, 3, Field::Complex);
    let b = random::gaussian(&mut rng, 3, 2, Field::Complex);
    assert!((kernel::kron(&a, &b) - kron(&a, &b)).norm() < 1e-14);
    let v = kernel::vec_rows(&a);
    assert!((CMatrix::from_column_slice(6, 1, v.as_slice()) - vec_rows(&a)).norm() == 0.0);
}

#[test]
fn non_positive_inputs_are_rejected() {
    let a = HermitianMatrix::diag(&[1.0, 0.0]);
    let b = HermitianMatrix::identity(2);
    assert!(kernel::geometric_mean(&a, &b, 0.5).is_err());
    assert!(kernel::lieb_value(&CMatrix::identity(2, 2), &a, &b, 0.5).is_err());
    assert!(kernel::tsallis_entropy(&b, 0.0).is_err());
    assert!(kernel::upsilon_value(&CMatrix::identity(2, 2), &b, 0.0).is_err());
}

#[test]
fn matrix_documents_round_trip() {
    let a = pd(3, 3);
    let doc = MatrixDocument::from_matrix(a.as_matrix());
    let back = MatrixDocument::from_json(&doc.to_json()).unwrap().hermitian().unwrap();
    assert!((h(&back) - h(&a)).norm() < 1e-15);
    let real = MatrixDocument::from_json(r#"{"dim": 2, "re": [[2, 1], [1, 3]]}"#).unwrap();
    assert_eq!(real.hermitian().unwrap().trace(), 5.0);
    assert!(MatrixDocument::from_json(r#"{"dim": 2, "re": [[2, 1], [0, 3]]}"#)
        .unwrap()
        .hermitian()
        .is_err());
}

fn diff_min_eig(x: &CMatrix, y: &CMatrix) -> f64 {
    min_eig(&(x - y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mean_identities(seed in any::<u64>(), n in 1usize..4, tp in 0usize..5, sp in 0usize..5) {
        let ts = [0.0, 0.25, 0.5, 0.625, 1.0];
        let (t, s) = (ts[tp], ts[sp]);
        let mut rng = random::rng(seed);
        let a = random::random_pd(&mut rng, n, Field::Complex);
        let b = random::random_pd(&mut rng, n, Field::Complex);
        let g = |x: &HermitianMatrix, y: &HermitianMatrix, w: f64| kernel::geometric_mean(x, y, w).unwrap();
        let scale = 1.0 + a.max_abs() + b.max_abs();
        // Symmetry.
        prop_assert!((h(&g(&a, &b, t)) - h(&g(&b, &a, 1.0 - t))).norm() < 1e-9 * scale);
        // Composition on the left.
        prop_assert!((h(&g(&a, &g(&a, &b, t), s)) - h(&g(&a, &b, s * t))).norm() < 1e-9 * scale);
        // Composition on the right.
        prop_assert!((h(&g(&g(&a, &b, t), &b, s)) - h(&g(&a, &b, s + t - s * t))).norm() < 1e-9 * scale);
    }

    #[test]
    fn commuting_lift(seed in any::<u64>(), n in 1usize..4, m in 1usize..4, tp in 0usize..6) {
        let t = [-1.0, -0.5, 0.25, 0.5, 1.5, 2.0][tp];
        let mut rng = random::rng(seed);
        let a = random::random_pd(&mut rng, n, Field::Complex);
        let b = random::random_pd(&mut rng, m, Field::Complex);
        let left = kron(&h(&a), &CMatrix::identity(m, m));
        let right = kron(&CMatrix::identity(n, n), &conj(&h(&b)));
        let lift = mean(&left, &right, t);
        let expect = kron(&pow(&h(&a), 1.0 - t), &pow(&conj(&h(&b)), t));
        prop_assert!((&lift - &expect).norm() < 1e-9 * (1.0 + expect.norm()));
        let k = random::gaussian(&mut rng, n, m, Field::Complex);
        let v = vec_rows(&k);
        let quad = (v.adjoint() * &expect * &v)[(0, 0)].re;
        prop_assert!(rel(quad, kernel::lieb_value(&k, &a, &b, t).unwrap()) < 1e-9);
    }

    #[test]
    fn midpoint_concavity_and_convexity(seed in any::<u64>(), n in 1usize..4, tp in 0usize..8) {
        let t = [0.0, 0.25, 0.5, 0.75, 1.0, -0.5, 1.5, 2.0][tp];
        let mut rng = random::rng(seed);
        let (a1, a2, b1, b2) = (
            random::random_pd(&mut rng, n, Field::Complex),
            random::random_pd(&mut rng, n, Field::Complex),
            random::random_pd(&mut rng, n, Field::Complex),
            random::random_pd(&mut rng, n, Field::Complex),
        );
        let am = (h(&a1) + h(&a2)).scale(0.5);
        let bm = (h(&b1) + h(&b2)).scale(0.5);
        let at_mid = mean(&am, &bm, t);
        let avg = (mean(&h(&a1), &h(&b1), t) + mean(&h(&a2), &h(&b2), t)).scale(0.5);
        let slack = if (0.0..=1.0).contains(&t) { diff_min_eig(&at_mid, &avg) } else { diff_min_eig(&avg, &at_mid) };
        prop_assert!(slack >= -1e-9 * (1.0 + avg.norm()), "t = {t}: {slack}");
    }
}
