//! Interior-point solver for real models.

mod ipm;

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{realify_with_map, FlatProblem, Goal, SdpModel, WitnessAssignment};

pub use ipm::IterInfo;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
    /// Reserved for randomized perturbation. The current method is deterministic and ignores it.
    pub seed: u64,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
    /// Retry with more conservative centering and starting points when a run stalls.
    pub fallback: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iters: 200,
            seed: 0,
            step_fraction: 0.98,
            fallback: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// The objective is unbounded over the model or the constraints cannot be met.
    Infeasible,
    NumericalFailure,
    IterLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical failure",
            SolveStatus::IterLimit => "iteration limit",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Model objective at the returned point.
    pub objective: f64,
    /// Bound from the dual iterate, in the model's sense.
    pub dual_objective: f64,
    /// Flat coordinates of the returned point.
    pub y: Vec<f64>,
    pub assignment: WitnessAssignment,
    /// `|objective − dual_objective|`.
    pub duality_gap: f64,
    pub iterations: usize,
    /// Per-iteration data in maximization form.
    pub history: Vec<IterInfo>,
    /// Dual blocks `X_j`, one per LMI followed by one per scalar constraint.
    pub dual_blocks: Vec<DMatrix<f64>>,
    pub message: String,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Solves a real model. Complex models must be realified first, see [`solve_complex`].
pub fn solve(model: &SdpModel, opts: &SolverOptions) -> Result<SolveResult> {
    if !model.is_real() {
        return Err(Error::NotRealified);
    }
    let goal = model.objective().map(|o| o.goal).ok_or(Error::NoObjective)?;
    let flat = FlatProblem::new(model)?;
    solve_flat(model, &flat, goal, opts)
}

/// Realifies, solves, and maps the optimizer back onto the original variables.
pub fn solve_complex(model: &SdpModel, opts: &SolverOptions) -> Result<SolveResult> {
    let real = realify_with_map(model);
    let mut res = solve(&real.model, opts)?;
    res.assignment = real.recover(&res.assignment);
    Ok(res)
}

fn solve_flat(model: &SdpModel, flat: &FlatProblem, goal: Goal, opts: &SolverOptions) -> Result<SolveResult> {
    let n = flat.num_coords();
    let sign = match goal {
        Goal::Maximize => 1.0,
        Goal::Minimize => -1.0,
    };

    // Coordinates whose constraint matrices depend on the others are fixed at zero; the objective
    // must not see the dependent direction or the model is unbounded.
    let basis = independent_coords(flat);
    let bscale = 1.0 + flat.objective.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (k, combo) in &basis.dependent {
        let along = flat.objective[*k] - combo.iter().map(|(l, c)| c * flat.objective[*l]).sum::<f64>();
        if along.abs() > 1e-9 * bscale {
            let y = vec![0.0; n];
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                objective: f64::NAN,
                dual_objective: f64::NAN,
                assignment: flat.assignment(model, &y),
                y,
                duality_gap: f64::INFINITY,
                iterations: 0,
                history: Vec::new(),
                dual_blocks: Vec::new(),
                message: format!(
                    "objective is unbounded along a direction that leaves every constraint unchanged (variable {})",
                    model.var(flat.coords[*k].var).name
                ),
            });
        }
    }
    let active = basis.kept;
    let mut index = vec![usize::MAX; n];
    for (a, &k) in active.iter().enumerate() {
        index[k] = a;
    }

    let mut blocks = Vec::with_capacity(flat.blocks.len() + flat.rows.len());
    for b in &flat.blocks {
        blocks.push(ipm::StdBlock {
            n: b.size,
            c: b.constant.clone(),
            a: b
                .coefs
                .iter()
                .filter(|(k, _)| index[*k] != usize::MAX)
                .map(|(k, e)| (index[*k], e.clone()))
                .collect(),
        });
    }
    for r in &flat.rows {
        blocks.push(ipm::StdBlock {
            n: 1,
            c: DMatrix::from_element(1, 1, r.constant),
            a: r
                .coefs
                .iter()
                .filter(|(k, _)| index[*k] != usize::MAX)
                .map(|(k, v)| (index[*k], vec![(0, 0, *v)]))
                .collect(),
        });
    }
    let b = DVector::from_iterator(active.len(), active.iter().map(|&k| sign * flat.objective[k]));
    let std = ipm::StdForm {
        m: active.len(),
        b,
        blocks,
    };
    let out = if std.blocks.is_empty() {
        ipm::IpmResult {
            outcome: ipm::Outcome::Converged,
            y: DVector::zeros(std.m),
            x: Vec::new(),
            history: Vec::new(),
            message: String::new(),
        }
    } else {
        run_ladder(&std, opts)?
    };

    let mut y = vec![0.0; n];
    for (a, &k) in active.iter().enumerate() {
        y[k] = out.y[a];
    }
    let dual_max = out.history.last().map(|h| h.dual).unwrap_or(0.0);
    let objective = flat.eval_objective(&y);
    let dual_objective = flat.objective_constant + sign * dual_max;
    let status = match out.outcome {
        ipm::Outcome::Converged => SolveStatus::Optimal,
        ipm::Outcome::IterLimit => diverging(&out.history).unwrap_or(SolveStatus::IterLimit),
        ipm::Outcome::Stalled => diverging(&out.history).unwrap_or(SolveStatus::NumericalFailure),
    };
    Ok(SolveResult {
        status,
        objective,
        dual_objective,
        assignment: flat.assignment(model, &y),
        y,
        duality_gap: (objective - dual_objective).abs(),
        iterations: out.history.len().saturating_sub(1),
        history: out.history,
        dual_blocks: out.x,
        message: out.message,
    })
}

/// Fallback settings tried in order until one converges.
const LADDER: [(f64, f64, f64); 4] = [
    // (lag, step fraction multiplier, start scale)
    (0.1, 1.0, 1.0),
    (1.0, 1.0, 1.0),
    (0.01, 0.97, 10.0),
    (0.3, 0.92, 0.1),
];

fn run_ladder(std: &ipm::StdForm, opts: &SolverOptions) -> Result<ipm::IpmResult> {
    let mut first: Option<ipm::IpmResult> = None;
    let attempts = if opts.fallback { LADDER.len() } else { 1 };
    for &(lag, frac, scale) in &LADDER[..attempts] {
        let params = ipm::Params {
            gap_tol: opts.gap_tol,
            feas_tol: opts.feas_tol,
            max_iters: opts.max_iters,
            step_fraction: opts.step_fraction * frac,
            corrector: true,
            lag,
            start_scale: scale,
        };
        let out = ipm::solve(std, &params)?;
        if out.outcome == ipm::Outcome::Converged {
            return Ok(out);
        }
        first.get_or_insert(out);
    }
    Ok(first.expect("at least one attempt"))
}

struct Basis {
    kept: Vec<usize>,
    /// `(k, c)` with `A(e_k) = Σ c_l A(e_l)` over kept `l`.
    dependent: Vec<(usize, Vec<(usize, f64)>)>,
}

/// Pivoted Cholesky on the Gram matrix `⟨A_k, A_l⟩` of the constraint map.
fn independent_coords(flat: &FlatProblem) -> Basis {
    let n = flat.num_coords();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut by_pos: HashMap<(usize, usize, usize), Vec<(usize, f64)>> = HashMap::new();
    for (bi, b) in flat.blocks.iter().enumerate() {
        for (k, entries) in &b.coefs {
            for &(i, j, v) in entries {
                by_pos.entry((bi, i, j)).or_default().push((*k, v));
            }
        }
    }
    for (ri, r) in flat.rows.iter().enumerate() {
        for (k, v) in &r.coefs {
            by_pos.entry((flat.blocks.len() + ri, 0, 0)).or_default().push((*k, *v));
        }
    }
    for list in by_pos.values() {
        for &(k, u) in list {
            for &(l, v) in list {
                gram[(k, l)] += u * v;
            }
        }
    }

    let mut d: Vec<f64> = (0..n).map(|k| gram[(k, k)]).collect();
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut pivots: Vec<usize> = Vec::new();
    let mut taken = vec![false; n];
    loop {
        let Some((j, &dj)) = d
            .iter()
            .enumerate()
            .filter(|(k, _)| !taken[*k])
            .max_by(|a, b| a.1.total_cmp(b.1))
        else {
            break;
        };
        if !(dj > 1e-10 * dmax) {
            break;
        }
        let r = pivots.len();
        let ljj = dj.sqrt();
        taken[j] = true;
        for i in 0..n {
            if taken[i] && i != j {
                continue;
            }
            let mut v = gram[(i, j)];
            for s in 0..r {
                v -= l[(i, s)] * l[(j, s)];
            }
            l[(i, r)] = if i == j { ljj } else { v / ljj };
            if i != j {
                d[i] -= l[(i, r)] * l[(i, r)];
            }
        }
        pivots.push(j);
    }

    let r = pivots.len();
    let lkk = DMatrix::from_fn(r, r, |a, b| l[(pivots[a], b)]);
    let mut dependent = Vec::new();
    for k in 0..n {
        if taken[k] {
            continue;
        }
        let row = DVector::from_fn(r, |b, _| l[(k, b)]);
        let c = lkk.transpose().solve_upper_triangular(&row).unwrap_or_else(|| DVector::zeros(r));
        let combo = pivots.iter().zip(c.iter()).filter(|(_, c)| **c != 0.0).map(|(&p, &c)| (p, c)).collect();
        dependent.push((k, combo));
    }
    let mut kept = pivots;
    kept.sort_unstable();
    Basis { kept, dependent }
}

/// Iterates that blow up while the other side stays infeasible indicate an infeasible or
/// unbounded model.
fn diverging(history: &[IterInfo]) -> Option<SolveStatus> {
    let last = history.last()?;
    let big = 1e8;
    if (last.primal.abs() > big && last.dual_infeas > 1e-6) || (last.dual.abs() > big && last.primal_infeas > 1e-6) {
        Some(SolveStatus::Infeasible)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomean::GeoMeanTask;
    use crate::kernel::{geometric_mean, HermitianMatrix, RationalExponent};
    use crate::model::{check_feasible, parse_sdpa, ModelBuilder, Goal, LinearFunctional};
    use num_complex::Complex64;

    fn r(p: i64, q: i64) -> RationalExponent {
        RationalExponent::new(p, q).unwrap()
    }

    /// The H-set with `x2 = x3 = 1` substituted.
    fn hset() -> SdpModel {
        let mut b = ModelBuilder::new("hset");
        let x1 = b.scalar_var("x1");
        let y = b.scalar_var("y");
        let z = b.scalar_var("z");
        let one = crate::model::AffineBlock::identity(1);
        let (bx1, by, bz) = (b.var_block(x1), b.var_block(y), b.var_block(z));
        b.lmi2("h1", bx1, by.clone(), one.clone());
        b.lmi2("h2", one.clone(), bz.clone(), one.clone());
        b.lmi2("h3", by, one, bz);
        b.objective(Goal::Minimize, LinearFunctional::trace(x1, 1.0));
        b.freeze().unwrap()
    }

    #[test]
    fn hset_minimum() {
        let m = hset();
        let res = solve(&m, &SolverOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal, "{}", res.message);
        assert!((res.objective - 1.0).abs() < 1e-7, "{}", res.objective);
    }

    #[test]
    fn unbounded_is_not_optimal() {
        let mut b = ModelBuilder::new("u");
        let x = b.scalar_var("x");
        let bx = b.var_block(x);
        b.lmi1("pos", bx);
        b.objective(Goal::Maximize, LinearFunctional::trace(x, 1.0));
        let m = b.freeze().unwrap();
        let res = solve(&m, &SolverOptions::default()).unwrap();
        assert_ne!(res.status, SolveStatus::Optimal);
    }

    #[test]
    fn half_mean_diagonal() {
        let a = HermitianMatrix::diag(&[1.0, 4.0]);
        let bb = HermitianMatrix::diag(&[9.0, 16.0]);
        let task = GeoMeanTask::optimize(RationalExponent::HALF, a, bb);
        let gm = crate::geomean::build(&task).unwrap();
        let res = solve_complex(&gm.model, &SolverOptions::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective - 11.0).abs() < 1e-7, "{}", res.objective);
        assert!(check_feasible(&gm.model, &res.assignment, 1e-6).unwrap().ok());
    }

    #[test]
    fn geomean_values_and_weak_duality() {
        let mut rng = crate::random::rng(3);
        for t in [r(1, 3), r(5, 8), r(-1, 2), r(3, 2), r(1, 1)] {
            let a = crate::random::random_pd(&mut rng, 3, crate::random::Field::Real);
            let bb = crate::random::random_pd(&mut rng, 3, crate::random::Field::Real);
            let expected = geometric_mean(&a, &bb, t.value()).unwrap().trace();
            let task = GeoMeanTask::optimize(t, a, bb);
            let gm = crate::geomean::build(&task).unwrap();
            let res = solve_complex(&gm.model, &SolverOptions::default()).unwrap();
            assert_eq!(res.status, SolveStatus::Optimal, "t = {t}: {}", res.message);
            assert!(
                (res.objective - expected).abs() <= 1e-6 * expected.abs().max(1.0),
                "t = {t}: {} vs {}",
                res.objective,
                expected
            );
            for h in &res.history {
                assert!(h.primal - h.dual <= h.infeas_term.abs() + 1e-9 * (1.0 + h.primal.abs()));
            }
        }
    }

    #[test]
    fn complex_data_requires_realify() {
        let a = HermitianMatrix::from_matrix(crate::kernel::CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        ), 0.0)
        .unwrap();
        let task = GeoMeanTask::optimize(RationalExponent::HALF, a.clone(), a.clone());
        let gm = crate::geomean::build(&task).unwrap();
        assert!(matches!(solve(&gm.model, &SolverOptions::default()), Err(Error::NotRealified)));
        let res = solve_complex(&gm.model, &SolverOptions::default()).unwrap();
        assert!((res.objective - 4.0).abs() < 1e-7);
        let t = res.assignment.hermitian(gm.t_var.unwrap()).unwrap();
        assert!(t.as_matrix().iter().any(|z| z.im.abs() > 0.1));
    }

    #[test]
    fn deterministic() {
        let text = crate::model::to_sdpa_string(&hset()).unwrap();
        let m = parse_sdpa(&text).unwrap();
        let a = solve(&m, &SolverOptions::default()).unwrap();
        let b = solve(&m, &SolverOptions::default()).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.iterations, b.iterations);
    }
}
