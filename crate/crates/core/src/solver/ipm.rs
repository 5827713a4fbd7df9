//! Infeasible-start primal-dual path following for
//!
//! ```text
//! maximize bᵀy  s.t.  S_j = C_j + Σ_k y_k A_jk ⪰ 0
//! minimize Σ⟨C_j, X_j⟩  s.t.  Σ_j ⟨A_jk, X_j⟩ = −b_k,  X_j ⪰ 0
//! ```
//!
//! with Nesterov-Todd scaling and a Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) type Sparse = Vec<(usize, usize, f64)>;

pub(crate) struct StdBlock {
    pub n: usize,
    pub c: DMatrix<f64>,
    /// `(variable, A_jk)` with both triangles stored.
    pub a: Vec<(usize, Sparse)>,
}

pub(crate) struct StdForm {
    pub m: usize,
    pub b: DVector<f64>,
    pub blocks: Vec<StdBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterInfo {
    pub iter: usize,
    /// `bᵀy`.
    pub primal: f64,
    /// `Σ⟨C, X⟩`.
    pub dual: f64,
    /// `Σ⟨X, S⟩`.
    pub complementarity: f64,
    /// Relative residual of `S = C + Σ y A`.
    pub primal_infeas: f64,
    /// Relative residual of `A(X) = −b`.
    pub dual_infeas: f64,
    /// `⟨R_d, X⟩ + yᵀ r_p`: the part of `dual − primal` not explained by `⟨X, S⟩`.
    pub infeas_term: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Converged,
    IterLimit,
    Stalled,
}

pub(crate) struct IpmResult {
    pub outcome: Outcome,
    pub y: DVector<f64>,
    pub x: Vec<DMatrix<f64>>,
    pub history: Vec<IterInfo>,
    pub message: String,
}

pub(crate) struct Params {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
    pub corrector: bool,
    /// Lower bound on `σ` relative to the lag of the infeasibilities behind `μ`.
    pub lag: f64,
    /// Multiplier on the initial `X` and `S`.
    pub start_scale: f64,
}

struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: DVector<f64>,
    lx_inv: DMatrix<f64>,
    ls_inv: DMatrix<f64>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn sparse_inner(a: &Sparse, m: &DMatrix<f64>) -> f64 {
    a.iter().map(|&(i, j, v)| v * m[(i, j)]).sum()
}

fn add_sparse(m: &mut DMatrix<f64>, a: &Sparse, scale: f64) {
    for &(i, j, v) in a {
        m[(i, j)] += scale * v;
    }
}

fn chol_lower(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| c.l())
}

fn lower_inverse(l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(n, n))
}

fn scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<Scaling> {
    let lx = chol_lower(x).ok_or_else(|| Error::NumericalFailure("Cholesky of X failed".into()))?;
    let ls = chol_lower(s).ok_or_else(|| Error::NumericalFailure("Cholesky of S failed".into()))?;
    let svd = (lx.transpose() * &ls).svd(true, true);
    let u = svd.u.ok_or_else(|| Error::NumericalFailure("SVD in NT scaling failed".into()))?;
    let sv = svd.singular_values;
    if sv.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NumericalFailure("degenerate NT scaling".into()));
    }
    let inv_sqrt = sv.map(|v| 1.0 / v.sqrt());
    let sqrt = sv.map(|v| v.sqrt());
    let g = &lx * &u * DMatrix::from_diagonal(&inv_sqrt);
    let lx_inv = lower_inverse(&lx).ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    let ls_inv = lower_inverse(&ls).ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    let g_inv = DMatrix::from_diagonal(&sqrt) * u.transpose() * &lx_inv;
    let w = &g * g.transpose();
    Ok(Scaling {
        g,
        g_inv,
        w,
        lambda: sv,
        lx_inv,
        ls_inv,
    })
}

/// Largest `α ≤ 1` with `L L^T + α Δ ⪰ 0`, given `L^{-1}`.
fn max_step(l_inv: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let m = sym(&(l_inv * delta * l_inv.transpose()));
    let min = m.symmetric_eigenvalues().min();
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

fn schur(p: &StdForm, sc: &[Scaling]) -> DMatrix<f64> {
    let mut mat = DMatrix::<f64>::zeros(p.m, p.m);
    for (blk, s) in p.blocks.iter().zip(sc) {
        let n = blk.n;
        for (idx, (l, al)) in blk.a.iter().enumerate() {
            // P = W A_l W
            let mut pm = DMatrix::<f64>::zeros(n, n);
            for &(i, j, v) in al {
                let wi = s.w.column(i);
                let wj = s.w.column(j);
                pm.ger(v, &wi, &wj, 1.0);
            }
            for (k, ak) in &blk.a[idx..] {
                let v = sparse_inner(ak, &pm);
                mat[(*k, *l)] += v;
                if k != l {
                    mat[(*l, *k)] += v;
                }
            }
        }
    }
    mat
}

enum Kind {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Factorization of `D^{-1/2} M D^{-1/2}` with `D = diag(M)`.
struct Factor {
    d: DVector<f64>,
    kind: Kind,
}

impl Factor {
    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let r = rhs.component_mul(&self.d);
        let z = match &self.kind {
            Kind::Chol(c) => c.solve(&r),
            Kind::Lu(lu) => lu.solve(&r)?,
        };
        Some(z.component_mul(&self.d))
    }
}

fn factor(m: &DMatrix<f64>) -> Result<Factor> {
    let n = m.nrows();
    let d = DVector::from_iterator(n, m.diagonal().iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }));
    let scaled = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * d[i] * d[j]);
    if let Some(c) = scaled.clone().cholesky() {
        return Ok(Factor { d, kind: Kind::Chol(c) });
    }
    let mut reg = 1e-14;
    for _ in 0..8 {
        let shifted = &scaled + DMatrix::<f64>::identity(n, n) * reg;
        if let Some(c) = shifted.cholesky() {
            return Ok(Factor { d, kind: Kind::Chol(c) });
        }
        reg *= 100.0;
    }
    let lu = scaled.lu();
    if lu.is_invertible() {
        Ok(Factor { d, kind: Kind::Lu(lu) })
    } else {
        Err(Error::NumericalFailure("Schur complement is singular".into()))
    }
}

struct Direction {
    dy: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
}

fn direction(
    p: &StdForm,
    sc: &[Scaling],
    m: &DMatrix<f64>,
    fac: &Factor,
    rd: &[DMatrix<f64>],
    rp: &DVector<f64>,
    rhat: &[DMatrix<f64>],
) -> Result<Direction> {
    let mut rhs = -rp.clone();
    let mut tmp = Vec::with_capacity(p.blocks.len());
    for ((blk, s), (r, h)) in p.blocks.iter().zip(sc).zip(rd.iter().zip(rhat)) {
        let t = h - &s.w * r * &s.w;
        for (k, ak) in &blk.a {
            rhs[*k] += sparse_inner(ak, &t);
        }
        tmp.push(t);
    }
    let mut dy = fac
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("Schur solve failed".into()))?;
    // Iterative refinement against the unregularized matrix.
    let scale = rhs.amax().max(1e-300);
    for _ in 0..4 {
        let res = &rhs - m * &dy;
        if res.amax() <= 1e-15 * scale {
            break;
        }
        match fac.solve(&res) {
            Some(c) => dy += c,
            None => break,
        }
    }
    if dy.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite search direction".into()));
    }
    let mut dx = Vec::with_capacity(p.blocks.len());
    let mut ds = Vec::with_capacity(p.blocks.len());
    for ((blk, s), (r, h)) in p.blocks.iter().zip(sc).zip(rd.iter().zip(rhat)) {
        let mut d = r.clone();
        for (k, ak) in &blk.a {
            add_sparse(&mut d, ak, dy[*k]);
        }
        let x = sym(&(h - &s.w * &d * &s.w));
        dx.push(x);
        ds.push(d);
    }
    // Refine against the true residual of A(ΔX) = r_p, which also sees the rounding in W ΔS W.
    // A sweep that does not help is undone.
    let residual = |dx: &[DMatrix<f64>]| {
        let mut res = -rp.clone();
        for (blk, x) in p.blocks.iter().zip(dx) {
            for (k, ak) in &blk.a {
                res[*k] += sparse_inner(ak, x);
            }
        }
        res
    };
    let mut res = residual(&dx);
    for _ in 0..3 {
        let size = res.amax();
        if size <= 1e-15 * (1.0 + rp.amax()) {
            break;
        }
        let Some(xi) = fac.solve(&res) else { break };
        let mut dx2 = dx.clone();
        let mut ds2 = ds.clone();
        for ((blk, s), (x, d)) in p.blocks.iter().zip(sc).zip(dx2.iter_mut().zip(ds2.iter_mut())) {
            let mut e = DMatrix::<f64>::zeros(blk.n, blk.n);
            for (k, ak) in &blk.a {
                add_sparse(&mut e, ak, xi[*k]);
            }
            *x -= sym(&(&s.w * &e * &s.w));
            *d += e;
        }
        let res2 = residual(&dx2);
        if !(res2.amax() < size) {
            break;
        }
        dy += &xi;
        dx = dx2;
        ds = ds2;
        let done = res2.amax() > 0.5 * size;
        res = res2;
        if done {
            break;
        }
    }
    Ok(Direction { dy, dx, ds })
}

/// Shrinks `alpha` until every updated block factors.
fn backtrack(m: &[DMatrix<f64>], d: &[DMatrix<f64>], mut alpha: f64) -> f64 {
    for _ in 0..30 {
        if m.iter().zip(d).all(|(a, b)| sym(&(a + b * alpha)).cholesky().is_some()) {
            return alpha;
        }
        alpha *= 0.7;
    }
    0.0
}

fn step_lengths(sc: &[Scaling], d: &Direction) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (s, (dx, ds)) in sc.iter().zip(d.dx.iter().zip(&d.ds)) {
        ap = ap.min(max_step(&s.lx_inv, dx));
        ad = ad.min(max_step(&s.ls_inv, ds));
    }
    (ap, ad)
}

fn stalled(y: DVector<f64>, x: Vec<DMatrix<f64>>, history: Vec<IterInfo>, e: Error) -> IpmResult {
    IpmResult {
        outcome: Outcome::Stalled,
        y,
        x,
        history,
        message: e.to_string(),
    }
}

pub(crate) fn solve(p: &StdForm, params: &Params) -> Result<IpmResult> {
    let nb = p.blocks.len();
    let total: usize = p.blocks.iter().map(|b| b.n).sum();
    let bnorm = p.b.norm();
    let cnorm = p.blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>().sqrt();

    // Identity-scaled start in the spirit of SDPT3.
    let mut x = Vec::with_capacity(nb);
    let mut s = Vec::with_capacity(nb);
    for blk in &p.blocks {
        let n = blk.n as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt()).max(blk.c.norm());
        for (k, ak) in &blk.a {
            let an = ak.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
            xi = xi.max(n.sqrt() * (1.0 + p.b[*k].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        x.push(DMatrix::identity(blk.n, blk.n) * (xi * params.start_scale));
        s.push(DMatrix::identity(blk.n, blk.n) * (eta * params.start_scale));
    }
    let mut y = DVector::<f64>::zeros(p.m);
    let mut history = Vec::new();
    let mut start: Option<(f64, f64, f64)> = None;

    for iter in 0..=params.max_iters {
        // Residuals.
        let mut rd = Vec::with_capacity(nb);
        let mut rp = -p.b.clone();
        let mut dual = 0.0;
        let mut comp = 0.0;
        for (j, blk) in p.blocks.iter().enumerate() {
            let mut r = blk.c.clone();
            for (k, ak) in &blk.a {
                add_sparse(&mut r, ak, y[*k]);
                rp[*k] -= sparse_inner(ak, &x[j]);
            }
            r -= &s[j];
            rd.push(r);
            dual += inner(&blk.c, &x[j]);
            comp += inner(&x[j], &s[j]);
        }
        let primal = p.b.dot(&y);
        let rd_norm = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt();
        let pinf = rd_norm / (1.0 + cnorm);
        let dinf = rp.norm() / (1.0 + bnorm);
        let infeas_term = rd.iter().zip(&x).map(|(r, xj)| inner(r, xj)).sum::<f64>() + y.dot(&rp);
        let denom = 1.0 + primal.abs() + dual.abs();
        let relgap = comp.max((dual - primal).abs()) / denom;
        let mut info = IterInfo {
            iter,
            primal,
            dual,
            complementarity: comp,
            primal_infeas: pinf,
            dual_infeas: dinf,
            infeas_term,
            step_primal: 0.0,
            step_dual: 0.0,
        };

        if relgap <= params.gap_tol && pinf <= params.feas_tol && dinf <= params.feas_tol {
            history.push(info);
            return Ok(IpmResult {
                outcome: Outcome::Converged,
                y,
                x,
                history,
                message: String::new(),
            });
        }
        if iter == params.max_iters {
            history.push(info);
            break;
        }

        let mu = comp / total as f64;
        let (mu0, pinf0, dinf0) = *start.get_or_insert((mu, pinf.max(1e-300), dinf.max(1e-300)));
        // Keep μ from running ahead of the infeasibilities.
        let feas_ratio = (pinf / pinf0).max(dinf / dinf0);
        let sigma_min = (params.lag * feas_ratio * mu0 / mu).min(1.0);
        let sc = match p.blocks.iter().enumerate().map(|(j, _)| scaling(&x[j], &s[j])).collect::<Result<Vec<_>>>() {
            Ok(sc) => sc,
            Err(e) => {
                history.push(info);
                return Ok(IpmResult {
                    outcome: Outcome::Stalled,
                    y,
                    x,
                    history,
                    message: e.to_string(),
                });
            }
        };
        let m = schur(p, &sc);
        let fac = match factor(&m) {
            Ok(f) => f,
            Err(e) => {
                history.push(info);
                return Ok(IpmResult {
                    outcome: Outcome::Stalled,
                    y,
                    x,
                    history,
                    message: e.to_string(),
                });
            }
        };

        // Predictor.
        let rhat: Vec<_> = x.iter().map(|xj| -xj.clone()).collect();
        let pred = match direction(p, &sc, &m, &fac, &rd, &rp, &rhat) {
            Ok(d) => d,
            Err(e) => {
                history.push(info);
                return Ok(stalled(y, x, history, e));
            }
        };
        let dir = if params.corrector {
            let (ap, ad) = step_lengths(&sc, &pred);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mut mu_aff = 0.0;
            for j in 0..nb {
                let xa = &x[j] + &pred.dx[j] * ap;
                let sa = &s[j] + &pred.ds[j] * ad;
                mu_aff += inner(&xa, &sa);
            }
            mu_aff /= total as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3).max(sigma_min);
            let mut rhat = Vec::with_capacity(nb);
            for (j, scj) in sc.iter().enumerate() {
                let n = p.blocks[j].n;
                let dxs = &scj.g_inv * &pred.dx[j] * scj.g_inv.transpose();
                let dss = scj.g.transpose() * &pred.ds[j] * &scj.g;
                let mut rc = -sym(&(&dxs * &dss));
                for i in 0..n {
                    rc[(i, i)] += sigma * mu - scj.lambda[i] * scj.lambda[i];
                }
                let t = DMatrix::from_fn(n, n, |a, b| 2.0 * rc[(a, b)] / (scj.lambda[a] + scj.lambda[b]));
                rhat.push(&scj.g * t * scj.g.transpose());
            }
            match direction(p, &sc, &m, &fac, &rd, &rp, &rhat) {
                Ok(d) => d,
                Err(e) => {
                    history.push(info);
                    return Ok(stalled(y, x, history, e));
                }
            }
        } else {
            pred
        };

        let (ap, ad) = step_lengths(&sc, &dir);
        // Shorter fraction when either side is blocked.
        let gamma = params.step_fraction * (0.92 + 0.08 * ap.min(ad).min(1.0));
        let ap = backtrack(&x, &dir.dx, (gamma * ap).min(1.0));
        let ad = backtrack(&s, &dir.ds, (gamma * ad).min(1.0));
        info.step_primal = ap;
        info.step_dual = ad;
        history.push(info);
        for j in 0..nb {
            x[j] = sym(&(&x[j] + &dir.dx[j] * ap));
            s[j] = sym(&(&s[j] + &dir.ds[j] * ad));
        }
        y += &dir.dy * ad;
        if ap < 1e-12 && ad < 1e-12 {
            return Ok(IpmResult {
                outcome: Outcome::Stalled,
                y,
                x,
                history,
                message: "step lengths collapsed".into(),
            });
        }
    }
    Ok(IpmResult {
        outcome: Outcome::IterLimit,
        y,
        x,
        history,
        message: "iteration limit reached".into(),
    })
}
