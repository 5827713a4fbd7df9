mod common;

use common::*;
use liebsdp::geomean::{CensusAudit, Mode, Role};
use liebsdp::kernel::{self, CMatrix, HermitianMatrix};
use liebsdp::lieb::*;
use liebsdp::model::check_feasible;
use liebsdp::random::{self, Field};
use liebsdp::{solve_complex, SolveStatus, SolverOptions};

fn solve_report(c: &CompiledModel) -> f64 {
    let res = solve_complex(&c.model, &SolverOptions::default()).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal, "{}: {}", c.model.name(), res.message);
    c.report(res.objective)
}

#[test]
fn lieb_optimum_and_census() {
    let mut rng = random::rng(31);
    for t in [r(1, 3), r(1, 2), r(2, 3), r(-1, 2), r(3, 2)] {
        for (n, m) in [(2, 2), (2, 1)] {
            let k = random::gaussian(&mut rng, n, m, Field::Complex);
            let a = random::random_pd(&mut rng, n, Field::Complex);
            let b = random::random_pd(&mut rng, m, Field::Complex);
            let expect = lieb(&k, &h(&a), &h(&b), t.value());
            let c = build_lieb(&LiebTask::optimize(k, t, a, b)).unwrap();
            let census = c.model.lmi_census();
            let mode = Mode::natural(t);
            assert!(census.count(2 * n * m) <= CensusAudit::bound(t, mode));
            assert!(census.count(n * m) <= 1);
            assert_eq!(census.scalars, 1);
            let w = c.witness(&[]).unwrap();
            assert!(check_feasible(&c.model, &w, 1e-9).unwrap().ok());
            assert!(rel(w.scalar(c.target.unwrap()).unwrap(), expect) < 1e-9);
            let got = solve_report(&c);
            assert!(rel(got, expect) < 1e-6, "t = {t}: {got} vs {expect}");
        }
    }
}

#[test]
fn fixed_tau_membership() {
    let mut rng = random::rng(32);
    let k = random::gaussian(&mut rng, 2, 2, Field::Complex);
    let a = random::random_pd(&mut rng, 2, Field::Complex);
    let b = random::random_pd(&mut rng, 2, Field::Complex);
    let t = r(1, 3);
    let v = kernel::lieb_value(&k, &a, &b, t.value()).unwrap();
    let task = |tau: f64| LiebTask {
        tau: TauRole::Datum(tau),
        ..LiebTask::optimize(k.clone(), t, a.clone(), b.clone())
    };
    let below = build_lieb(&task(v - 1e-3)).unwrap();
    assert!(check_feasible(&below.model, &below.witness(&[]).unwrap(), 1e-9).unwrap().ok());
    let above = build_lieb(&task(v + 1e-3)).unwrap();
    assert!(!check_feasible(&above.model, &above.witness(&[]).unwrap(), 1e-9).unwrap().ok());
}

#[test]
fn upsilon_value_and_equality_witness() {
    let mut rng = random::rng(33);
    for t in [r(1, 2), r(-1, 2), r(3, 2)] {
        let k = random::gaussian(&mut rng, 3, 2, Field::Complex);
        let a = random::random_pd(&mut rng, 3, Field::Complex);
        let expect = upsilon(&k, &h(&a), t.value());
        let c = build_upsilon(&k, t, &a).unwrap();
        let w = c.witness(&[]).unwrap();
        assert!(check_feasible(&c.model, &w, 1e-9).unwrap().ok());
        let x = w.get(c.model.find_var("X").unwrap()).unwrap();
        let inner = k.adjoint() * pow(&h(&a), t.value()) * &k;
        assert!((x - pow(&inner, 1.0 / t.value())).norm() < 1e-8 * (1.0 + x.norm()));
        let at_witness = c.report(c.model.objective_value(&w).unwrap());
        assert!(rel(at_witness, expect) < 1e-8);
        let got = solve_report(&c);
        assert!(rel(got, expect) < 1e-6, "t = {t}: {got} vs {expect}");
    }
}

#[test]
fn variational_expression_is_bounded_by_upsilon() {
    let mut rng = random::rng(34);
    for t in [0.5, 1.0 / 3.0, -0.5, 1.5, 2.0] {
        let k = random::gaussian(&mut rng, 3, 2, Field::Complex);
        let a = random::random_pd(&mut rng, 3, Field::Complex);
        let bound = t * upsilon(&k, &h(&a), t);
        for _ in 0..5 {
            let x = random::random_pd(&mut rng, 2, Field::Complex);
            let v = kernel::upsilon_variational(&k, &a, &x, t).unwrap();
            if t > 0.0 && t <= 1.0 {
                assert!(v <= bound + 1e-9 * (1.0 + bound.abs()));
            } else {
                assert!(v >= bound - 1e-9 * (1.0 + bound.abs()));
            }
        }
    }
}

#[test]
fn upsilon_at_one_is_a_trace() {
    let a = random::random_pd(&mut random::rng(35), 2, Field::Complex);
    let c = build_upsilon(&CMatrix::identity(2, 2), r(1, 1), &a).unwrap();
    assert!(rel(solve_report(&c), a.trace()) < 1e-6);
}

#[test]
fn fidelity_optimum() {
    let mut rng = random::rng(36);
    for _ in 0..3 {
        let a = random::random_pd(&mut rng, 2, Field::Complex);
        let b = random::random_pd(&mut rng, 2, Field::Complex);
        let c = build_fidelity(&a, &b).unwrap();
        assert_eq!(c.model.lmi_census().count(4), 1);
        let expect = fidelity(&h(&a), &h(&b));
        assert!(rel(solve_report(&c), expect) < 1e-6);
    }
}

#[test]
fn tsallis_optima() {
    let mut rng = random::rng(37);
    let a = random::random_density(&mut rng, 3, Field::Complex);
    let b = random::random_density(&mut rng, 3, Field::Complex);
    for t in [r(1, 2), r(1, 4), r(1, 1)] {
        let c = build_tsallis_entropy(t, &Role::Datum(a.clone()), 3).unwrap();
        assert!(rel(solve_report(&c), tsallis(&h(&a), t.value())) < 1e-6, "t = {t}");
        let c = build_tsallis_rel_entropy(t, &Role::Datum(a.clone()), &Role::Datum(b.clone()), 3, 3).unwrap();
        assert!(rel(solve_report(&c), tsallis_rel(&h(&a), &h(&b), t.value())) < 1e-6, "t = {t}");
    }
    assert!(build_tsallis_rel_entropy(r(1, 2), &Role::Free, &Role::Free, 2, 3).is_err());
}

#[test]
fn kron_power_and_multivariate_optima() {
    let mut rng = random::rng(38);
    let a = random::random_pd(&mut rng, 2, Field::Real);
    let b = random::random_pd(&mut rng, 2, Field::Real);
    let c3 = random::random_pd(&mut rng, 2, Field::Real);
    let p = |m: &HermitianMatrix, s: f64| tr(&pow(&h(m), s)).re;

    let c = build_kron_power(r(1, 3), r(1, 3), &Role::Datum(a.clone()), &Role::Datum(b.clone()), 2, 2).unwrap();
    assert!(rel(solve_report(&c), p(&a, 1.0 / 3.0) * p(&b, 1.0 / 3.0)) < 1e-6);
    let c = build_kron_power(r(1, 4), r(3, 4), &Role::Datum(a.clone()), &Role::Datum(b.clone()), 2, 2).unwrap();
    assert!(rel(solve_report(&c), p(&a, 0.25) * p(&b, 0.75)) < 1e-6);
    assert!(build_kron_power(r(2, 3), r(2, 3), &Role::Free, &Role::Free, 2, 2).is_err());

    let roles = [Role::Datum(a.clone()), Role::Datum(b.clone()), Role::Datum(c3.clone())];
    let c = build_multivariate(&[r(1, 3), r(1, 3), r(1, 3)], &roles, &[2, 2, 2]).unwrap();
    let expect = p(&a, 1.0 / 3.0) * p(&b, 1.0 / 3.0) * p(&c3, 1.0 / 3.0);
    assert!(rel(solve_report(&c), expect) < 1e-6);
    assert!(build_multivariate(&[r(1, 2), r(1, 3)], &roles[..2], &[2, 2]).is_err());
}
