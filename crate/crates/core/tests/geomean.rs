mod common;

use common::*;
use liebsdp::geomean::{self, lmi_census_audit, audit_mode, GeoMeanTask, Mode};
use liebsdp::kernel::{CMatrix, HermitianMatrix, RationalExponent};
use liebsdp::model::check_feasible;
use liebsdp::random::{self, Field};
use liebsdp::{solve_complex, SolveStatus, SolverOptions};

fn census(t: RationalExponent, n: usize, mode: Mode) -> (usize, usize) {
    let m = geomean::build(&GeoMeanTask::symbolic(t, n, mode)).unwrap();
    let c = m.model.lmi_census();
    assert_eq!(c.total_lmis(), c.count(2 * n) + c.count(n), "t = {t}");
    (c.count(2 * n), c.count(n))
}

#[test]
fn worked_examples_have_the_printed_sizes() {
    for n in [1, 2, 3] {
        assert_eq!(census(r(5, 8), n, Mode::Hypograph), (3, 0));
        assert_eq!(census(r(8, 13), n, Mode::Hypograph), (4, 1));
        assert_eq!(census(r(1, 2), n, Mode::Hypograph), (1, 0));
        assert_eq!(census(r(1, 1), n, Mode::Hypograph), (0, 1));
    }
    let (double, single) = census(r(3, 7), 2, Mode::Hypograph);
    assert!(double <= 5 && single <= 1);
}

#[test]
fn census_within_bounds_for_small_denominators() {
    for t in RationalExponent::enumerate(64, (0, 1), (1, 1)) {
        let a = audit_mode(t, 2, Mode::Hypograph).unwrap();
        assert!(a.ok, "hyp {t}: {a:?}");
        assert!(a.double <= 2 * t.floor_log2_denom() as usize + 1);
    }
    for t in RationalExponent::enumerate(64, (-1, 1), (0, 1))
        .into_iter()
        .chain(RationalExponent::enumerate(64, (1, 1), (2, 1)))
    {
        let a = audit_mode(t, 2, Mode::Epigraph).unwrap();
        assert!(a.ok, "epi {t}: {a:?}");
        assert!(a.double <= 2 * t.floor_log2_denom() as usize + 2);
    }
}

#[test]
fn wrong_mode_is_rejected() {
    assert!(geomean::build(&GeoMeanTask::symbolic(r(3, 2), 2, Mode::Hypograph)).is_err());
    assert!(geomean::build(&GeoMeanTask::symbolic(r(1, 3), 2, Mode::Epigraph)).is_err());
    assert!(lmi_census_audit(r(-1, 2), 2).unwrap().ok);
}

#[test]
fn chain_witnesses_hold_the_expected_means() {
    let mut rng = random::rng(21);
    let a = random::random_pd(&mut rng, 3, Field::Complex);
    let b = random::random_pd(&mut rng, 3, Field::Complex);
    let var = |m: &geomean::GeoMeanModel, w: &liebsdp::WitnessAssignment, name: &str| {
        w.get(m.model.find_var(name).unwrap()).unwrap().clone()
    };

    let m = geomean::build(&GeoMeanTask::optimize(r(5, 8), a.clone(), b.clone())).unwrap();
    let w = m.data_witness().unwrap();
    assert!(check_feasible(&m.model, &w, 1e-9).unwrap().ok());
    for (name, t) in [("Z1", 0.5), ("Z2", 0.25), ("T", 0.625)] {
        assert!((var(&m, &w, name) - mean(&h(&a), &h(&b), t)).norm() < 1e-9, "{name}");
    }

    let m = geomean::build(&GeoMeanTask::optimize(r(3, 8), a.clone(), b.clone())).unwrap();
    let w = m.data_witness().unwrap();
    assert!(check_feasible(&m.model, &w, 1e-9).unwrap().ok());
    assert!((var(&m, &w, "T") - mean(&h(&a), &h(&b), 0.375)).norm() < 1e-9);

    let m = geomean::build(&GeoMeanTask::optimize(r(-1, 2), a.clone(), b.clone())).unwrap();
    let w = m.data_witness().unwrap();
    assert!(check_feasible(&m.model, &w, 1e-9).unwrap().ok());
    assert!((var(&m, &w, "S") - mean(&h(&a), &h(&b), 0.5)).norm() < 1e-9);
    assert!((var(&m, &w, "T") - mean(&h(&a), &h(&b), -0.5)).norm() < 1e-9);
}

#[test]
fn witnesses_are_feasible_and_downward_closed() {
    let mut rng = random::rng(22);
    for t in [r(1, 4), r(1, 3), r(3, 7), r(5, 8), r(8, 13), r(2, 3), r(1, 1), r(0, 1)] {
        for n in [2, 3] {
            let a = random::random_pd(&mut rng, n, Field::Complex);
            let b = random::random_pd(&mut rng, n, Field::Complex);
            let m = geomean::build(&GeoMeanTask::optimize(t, a, b)).unwrap();
            let mut w = m.data_witness().unwrap();
            assert!(check_feasible(&m.model, &w, 1e-9).unwrap().ok(), "t = {t}");
            let tv = m.t_var.unwrap();
            let lowered = w.get(tv).unwrap() - CMatrix::identity(n, n).scale(1e-3);
            w.set(tv, lowered);
            assert!(check_feasible(&m.model, &w, 1e-9).unwrap().ok(), "lowered, t = {t}");
            let raised = w.get(tv).unwrap() + CMatrix::identity(n, n).scale(2e-2);
            w.set(tv, raised);
            assert!(!check_feasible(&m.model, &w, 1e-9).unwrap().ok(), "raised, t = {t}");
        }
    }
}

#[test]
fn identity_data_boundary() {
    let i = HermitianMatrix::identity(2);
    let m = geomean::build(&GeoMeanTask::optimize(r(1, 2), i.clone(), i.clone())).unwrap();
    let mut w = m.data_witness().unwrap();
    assert!(check_feasible(&m.model, &w, 1e-12).unwrap().ok());
    w.set(m.t_var.unwrap(), CMatrix::identity(2, 2).scale(1.01));
    assert!(!check_feasible(&m.model, &w, 1e-9).unwrap().ok());
}

fn optimum(t: RationalExponent, a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    let m = geomean::build(&GeoMeanTask::optimize(t, a.clone(), b.clone())).unwrap();
    let res = solve_complex(&m.model, &SolverOptions::default()).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal, "t = {t}: {}", res.message);
    res.objective
}

#[test]
fn solver_optimum_is_the_mean_trace() {
    let mut rng = random::rng(23);
    for t in [r(1, 3), r(2, 3), r(3, 7), r(5, 8), r(8, 13), r(3, 2), r(-1, 1), r(2, 1)] {
        let a = random::random_pd(&mut rng, 3, Field::Complex);
        let b = random::random_pd(&mut rng, 3, Field::Complex);
        let expect = tr(&mean(&h(&a), &h(&b), t.value())).re;
        let got = optimum(t, &a, &b);
        assert!(rel(got, expect) < 1e-6, "t = {t}: {got} vs {expect}");
    }
}

#[test]
fn closed_forms_at_minus_one_and_two() {
    let mut rng = random::rng(24);
    let a = random::random_pd(&mut rng, 2, Field::Real);
    let b = random::random_pd(&mut rng, 2, Field::Real);
    let (ah, bh) = (h(&a), h(&b));
    let inv = |m: &CMatrix| m.clone().try_inverse().unwrap();
    let minus_one = tr(&(&ah * inv(&bh) * &ah)).re;
    let two = tr(&(&bh * inv(&ah) * &bh)).re;
    assert!(rel(optimum(r(-1, 1), &a, &b), minus_one) < 1e-6);
    assert!(rel(optimum(r(2, 1), &a, &b), two) < 1e-6);
}

#[test]
fn swapping_inputs_complements_the_exponent() {
    let mut rng = random::rng(25);
    let a = random::random_pd(&mut rng, 2, Field::Real);
    let b = random::random_pd(&mut rng, 2, Field::Real);
    for t in [r(1, 3), r(3, 8), r(5, 7)] {
        let lhs = optimum(t, &a, &b);
        let rhs = optimum(t.one_minus().unwrap(), &b, &a);
        assert!(rel(lhs, rhs) < 1e-6, "t = {t}");
    }
}
