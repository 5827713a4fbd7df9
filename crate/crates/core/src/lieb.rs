//! Lieb's function and its relatives, compiled through geometric means of Kronecker lifts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geomean::{add_epi, add_hyp, Mode, Role};
use crate::kernel::{self, CMatrix, HermitianMatrix, RationalExponent};
use crate::model::{
    AffineBlock, Goal, LinearFunctional, ModelBuilder, Sense, SdpModel, VarId, Weight, WitnessAssignment, WitnessRule,
};

/// A compiled model together with the handles needed to build witnesses and report values.
#[derive(Clone, Debug)]
pub struct CompiledModel {
    pub model: SdpModel,
    /// Free input matrices in declaration order.
    pub inputs: Vec<VarId>,
    /// The optimized variable (`τ` or `T`), if any.
    pub target: Option<VarId>,
    /// Reported value = `report_scale` × objective.
    pub report_scale: f64,
}

impl CompiledModel {
    /// Assigns the free inputs and fills every other variable from the construction's rules.
    pub fn witness(&self, inputs: &[&HermitianMatrix]) -> Result<WitnessAssignment> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::dims(self.inputs.len(), inputs.len()));
        }
        let mut w = WitnessAssignment::new();
        for (id, value) in self.inputs.iter().zip(inputs) {
            w.set_hermitian(*id, value);
        }
        self.model.complete_witness(&w)
    }

    pub fn report(&self, objective: f64) -> f64 {
        objective * self.report_scale
    }
}

fn slot(b: &mut ModelBuilder, role: &Role, name: &str, dim: usize, inputs: &mut Vec<VarId>) -> Result<AffineBlock> {
    match role {
        Role::Datum(m) => {
            if m.dim() != dim {
                return Err(Error::dims(dim, m.dim()));
            }
            Ok(b.const_block(name, m.as_matrix().clone()))
        }
        Role::Free => {
            let id = b.hermitian_var(name, dim);
            inputs.push(id);
            Ok(b.var_block(id))
        }
    }
}

fn compile_mean(
    b: &mut ModelBuilder,
    mode: Mode,
    a: &AffineBlock,
    bb: &AffineBlock,
    target: &AffineBlock,
    t: RationalExponent,
) -> Result<()> {
    match mode {
        Mode::Hypograph => add_hyp(b, a, bb, target, t),
        Mode::Epigraph => add_epi(b, a, bb, target, t),
    }
}

fn new_mean_var(b: &mut ModelBuilder, name: &str, a: &AffineBlock, bb: &AffineBlock, t: f64) -> (VarId, AffineBlock) {
    let id = b.hermitian_var(name, a.dim());
    b.rule(
        id,
        WitnessRule::GeoMean {
            a: a.clone(),
            b: bb.clone(),
            t,
        },
    );
    (id, b.var_block(id))
}

/// Whether `τ` is optimized or fixed.
#[derive(Clone, Debug, PartialEq)]
pub enum TauRole {
    Objective,
    Datum(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiebTask {
    /// `n×m` weight matrix.
    pub k: CMatrix,
    pub t: RationalExponent,
    pub a: Role,
    pub b: Role,
    pub mode: Mode,
    pub tau: TauRole,
}

impl LiebTask {
    pub fn optimize(k: CMatrix, t: RationalExponent, a: HermitianMatrix, b: HermitianMatrix) -> Self {
        LiebTask {
            k,
            t,
            a: Role::Datum(a),
            b: Role::Datum(b),
            mode: Mode::natural(t),
            tau: TauRole::Objective,
        }
    }
}

/// Adds `T ~ (a ⊗ I_m) #_t (I_n ⊗ conj(b))` (in `mode`) and returns `T`.
fn lieb_core(
    b: &mut ModelBuilder,
    a: &AffineBlock,
    bb: &AffineBlock,
    t: RationalExponent,
    mode: Mode,
) -> Result<VarId> {
    let (n, m) = (a.dim(), bb.dim());
    let al = b.lift(a, 1, m, false);
    let bl = b.lift(bb, n, 1, true);
    let (tv, tb) = new_mean_var(b, "T", &al, &bl, t.value());
    compile_mean(b, mode, &al, &bl, &tb, t)?;
    Ok(tv)
}

/// `tr[K* A^{1-t} K B^t] ≥ τ` (hypograph) or `≤ τ` (epigraph).
pub fn build_lieb(task: &LiebTask) -> Result<CompiledModel> {
    let t = task.t;
    check_mode(t, task.mode)?;
    let (n, m) = task.k.shape();
    let mut b = ModelBuilder::new(format!("lieb_{t}"));
    let mut inputs = Vec::new();
    let a = slot(&mut b, &task.a, "A", n, &mut inputs)?;
    let bb = slot(&mut b, &task.b, "B", m, &mut inputs)?;
    let tv = lieb_core(&mut b, &a, &bb, t, task.mode)?;
    let v = b.data("vecK", CMatrix::from_column_slice(n * m, 1, kernel::vec_rows(&task.k).as_slice()));
    let mut quad = LinearFunctional::default();
    quad.add(1.0, tv, Weight::Quadratic(v));
    let sense = match task.mode {
        Mode::Hypograph => Sense::Ge,
        Mode::Epigraph => Sense::Le,
    };
    let target = match task.tau {
        TauRole::Objective => {
            let tau = b.scalar_var("tau");
            b.rule(tau, WitnessRule::Functional(quad.clone()));
            let mut lhs = quad;
            lhs.add(-1.0, tau, Weight::Trace);
            b.scalar("lieb", sense, lhs);
            let goal = match task.mode {
                Mode::Hypograph => Goal::Maximize,
                Mode::Epigraph => Goal::Minimize,
            };
            b.objective(goal, LinearFunctional::trace(tau, 1.0));
            Some(tau)
        }
        TauRole::Datum(tau) => {
            let mut lhs = quad;
            lhs.constant = -tau;
            b.scalar("lieb", sense, lhs);
            None
        }
    };
    Ok(CompiledModel {
        model: b.freeze()?,
        inputs,
        target,
        report_scale: 1.0,
    })
}

fn check_mode(t: RationalExponent, mode: Mode) -> Result<()> {
    match mode {
        Mode::Hypograph if !t.concave_range() => Err(Error::wrong_exponent(t, "hypograph needs t in [0, 1]")),
        Mode::Epigraph if !t.convex_range() => Err(Error::wrong_exponent(t, "epigraph needs t in [-1, 0] or [1, 2]")),
        _ => Ok(()),
    }
}

/// Maximizes `tr T` subject to `A^s ⊗ B^t ⪰ T`.
pub fn build_kron_power(s: RationalExponent, t: RationalExponent, a: &Role, b: &Role, n: usize, m: usize) -> Result<CompiledModel> {
    if s.numer() < 0 || t.numer() < 0 {
        return Err(Error::Domain("kron power weights must be non-negative".into()));
    }
    let total = s.add(t).map_err(|_| Error::Domain("s + t must not exceed 1".into()))?;
    if total.is_zero() || total.numer() > total.denom() {
        return Err(Error::Domain(format!("need 0 < s + t <= 1, got {total}")));
    }
    let w = t.div(total)?;
    let mut bld = ModelBuilder::new(format!("kron_power_{s}_{t}"));
    let mut inputs = Vec::new();
    let a = slot(&mut bld, a, "A", n, &mut inputs)?;
    let bb = slot(&mut bld, b, "B", m, &mut inputs)?;
    let al = bld.lift(&a, 1, m, false);
    let bl = bld.lift(&bb, n, 1, false);
    let target = if total.is_one() {
        let (tv, tb) = new_mean_var(&mut bld, "T", &al, &bl, w.value());
        add_hyp(&mut bld, &al, &bl, &tb, w)?;
        tv
    } else {
        let (_, sb) = new_mean_var(&mut bld, "S", &al, &bl, w.value());
        add_hyp(&mut bld, &al, &bl, &sb, w)?;
        let eye = AffineBlock::identity(n * m);
        let (tv, tb) = new_mean_var(&mut bld, "T", &eye, &sb, total.value());
        add_hyp(&mut bld, &eye, &sb, &tb, total)?;
        tv
    };
    bld.objective(Goal::Maximize, LinearFunctional::trace(target, 1.0));
    Ok(CompiledModel {
        model: bld.freeze()?,
        inputs,
        target: Some(target),
        report_scale: 1.0,
    })
}

/// Maximizes `tr T` subject to `A_1^{t_1} ⊗ … ⊗ A_k^{t_k} ⪰ T`, eliminating one factor at a time.
pub fn build_multivariate(weights: &[RationalExponent], mats: &[Role], dims: &[usize]) -> Result<CompiledModel> {
    let k = weights.len();
    if k < 2 || mats.len() != k || dims.len() != k {
        return Err(Error::Domain("need at least two factors with matching weights and dimensions".into()));
    }
    if weights.iter().any(|w| w.numer() < 0) {
        return Err(Error::Domain("weights must be non-negative".into()));
    }
    let mut partial = RationalExponent::ZERO;
    let mut partials = Vec::with_capacity(k);
    for w in weights {
        partial = partial
            .add(*w)
            .map_err(|_| Error::Domain("weights must sum to 1".into()))?;
        partials.push(partial);
    }
    if !partial.is_one() {
        return Err(Error::Domain(format!("weights sum to {partial}, not 1")));
    }
    if partials[1].is_zero() {
        return Err(Error::Domain("the first two weights are both zero".into()));
    }
    let name = weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",");
    let mut b = ModelBuilder::new(format!("multivariate_{name}"));
    let mut inputs = Vec::new();
    let blocks = mats
        .iter()
        .zip(dims)
        .enumerate()
        .map(|(i, (role, &d))| slot(&mut b, role, &format!("A{}", i + 1), d, &mut inputs))
        .collect::<Result<Vec<_>>>()?;

    let mut acc = blocks[0].clone();
    let mut target = None;
    for j in 1..k {
        let w = weights[j].div(partials[j])?;
        let left = b.lift(&acc, 1, dims[j], false);
        let right = b.lift(&blocks[j], acc.dim(), 1, false);
        let name = if j == k - 1 { "T".to_string() } else { format!("S{j}") };
        let (sv, sb) = new_mean_var(&mut b, &name, &left, &right, w.value());
        add_hyp(&mut b, &left, &right, &sb, w)?;
        acc = sb;
        target = Some(sv);
    }
    let target = target.expect("at least two factors");
    b.objective(Goal::Maximize, LinearFunctional::trace(target, 1.0));
    Ok(CompiledModel {
        model: b.freeze()?,
        inputs,
        target: Some(target),
        report_scale: 1.0,
    })
}

fn check_tsallis(t: RationalExponent) -> Result<()> {
    if t.numer() <= 0 || t.numer() > t.denom() {
        return Err(Error::Domain(format!("Tsallis parameter {t} outside (0, 1]")));
    }
    Ok(())
}

/// Maximizes `(tr T − tr A)/t` subject to `A^{1-t} ⪰ T`; the optimum is `S_t(A)`.
pub fn build_tsallis_entropy(t: RationalExponent, a: &Role, n: usize) -> Result<CompiledModel> {
    check_tsallis(t)?;
    let mut b = ModelBuilder::new(format!("tsallis_{t}"));
    let mut inputs = Vec::new();
    let ab = slot(&mut b, a, "A", n, &mut inputs)?;
    let eye = AffineBlock::identity(n);
    let (tv, tb) = new_mean_var(&mut b, "T", &ab, &eye, t.value());
    add_hyp(&mut b, &ab, &eye, &tb, t)?;
    let inv = 1.0 / t.value();
    let mut obj = LinearFunctional::trace(tv, inv);
    match a {
        Role::Datum(m) => obj.constant = -m.trace() * inv,
        Role::Free => {
            obj.add(-inv, inputs[0], Weight::Trace);
        }
    }
    b.objective(Goal::Maximize, obj);
    Ok(CompiledModel {
        model: b.freeze()?,
        inputs,
        target: Some(tv),
        report_scale: 1.0,
    })
}

/// Minimizes `(tr A − τ)/t` with `τ ≤ tr[A^{1-t} B^t]`; the optimum is `S_t(A‖B)`.
pub fn build_tsallis_rel_entropy(t: RationalExponent, a: &Role, bm: &Role, n: usize, m: usize) -> Result<CompiledModel> {
    check_tsallis(t)?;
    if n != m {
        return Err(Error::dims(n, m));
    }
    let mut b = ModelBuilder::new(format!("tsallis_rel_{t}"));
    let mut inputs = Vec::new();
    let ab = slot(&mut b, a, "A", n, &mut inputs)?;
    let bb = slot(&mut b, bm, "B", m, &mut inputs)?;
    let tv = lieb_core(&mut b, &ab, &bb, t, Mode::Hypograph)?;
    let v = b.data("vecI", CMatrix::from_column_slice(n * n, 1, kernel::vec_rows(&CMatrix::identity(n, n)).as_slice()));
    let mut quad = LinearFunctional::default();
    quad.add(1.0, tv, Weight::Quadratic(v));
    let tau = b.scalar_var("tau");
    b.rule(tau, WitnessRule::Functional(quad.clone()));
    let mut lhs = quad;
    lhs.add(-1.0, tau, Weight::Trace);
    b.scalar("lieb", Sense::Ge, lhs);
    let inv = 1.0 / t.value();
    let mut obj = LinearFunctional::trace(tau, -inv);
    match a {
        Role::Datum(mat) => obj.constant = mat.trace() * inv,
        Role::Free => {
            obj.add(inv, inputs[0], Weight::Trace);
        }
    }
    b.objective(Goal::Minimize, obj);
    Ok(CompiledModel {
        model: b.freeze()?,
        inputs,
        target: Some(tau),
        report_scale: 1.0,
    })
}

/// Bounds `tΥ_t(A)` through `tr[K* A^t K X^{1-t}] − (1−t) tr X`; the reported value is `Υ_t(A)`.
///
/// For `t ∈ (0, 1]` the model maximizes `τ`, otherwise it minimizes.
pub fn build_upsilon(k: &CMatrix, t: RationalExponent, a: &HermitianMatrix) -> Result<CompiledModel> {
    if t.is_zero() {
        return Err(Error::Domain("Υ_t is undefined at t = 0".into()));
    }
    let (n, m) = k.shape();
    if a.dim() != n {
        return Err(Error::dims(n, a.dim()));
    }
    let tp = t.one_minus()?;
    let mode = if t.numer() > 0 && t.numer() <= t.denom() {
        Mode::Hypograph
    } else {
        Mode::Epigraph
    };
    let x_opt = kernel::upsilon_optimizer(k, a, t.value())?;

    let mut b = ModelBuilder::new(format!("upsilon_{t}"));
    let ab = b.const_block("A", a.as_matrix().clone());
    let x = b.hermitian_var("X", m);
    b.rule(x, WitnessRule::Fixed(x_opt.into_matrix()));
    let xb = b.var_block(x);
    let tv = lieb_core(&mut b, &ab, &xb, tp, mode)?;

    let v = b.data("vecK", CMatrix::from_column_slice(n * m, 1, kernel::vec_rows(k).as_slice()));
    let mut value = LinearFunctional::default();
    value.add(1.0, tv, Weight::Quadratic(v));
    value.add(-tp.value(), x, Weight::Trace);
    let tau = b.scalar_var("tau");
    b.rule(tau, WitnessRule::Functional(value.clone()));
    let mut lhs = value;
    lhs.add(-1.0, tau, Weight::Trace);
    let (sense, goal) = match mode {
        Mode::Hypograph => (Sense::Ge, Goal::Maximize),
        Mode::Epigraph => (Sense::Le, Goal::Minimize),
    };
    b.scalar("variational", sense, lhs);
    b.objective(goal, LinearFunctional::trace(tau, 1.0));
    Ok(CompiledModel {
        model: b.freeze()?,
        inputs: Vec::new(),
        target: Some(tau),
        report_scale: 1.0 / t.value(),
    })
}

/// Maximizes `Re tr Z` subject to `[[A, Z], [Z*, B]] ⪰ 0`, with `Z = H1 + i H2`.
pub fn build_fidelity(a: &HermitianMatrix, bm: &HermitianMatrix) -> Result<CompiledModel> {
    let n = a.dim();
    if bm.dim() != n {
        return Err(Error::dims(n, bm.dim()));
    }
    let z = kernel::fidelity_optimizer(a, bm)?;
    let h1v = (&z + z.adjoint()).scale(0.5);
    let h2v = (&z - z.adjoint()).map(|e| e * Complex64::new(0.0, -0.5));

    let mut b = ModelBuilder::new("fidelity");
    let ab = b.const_block("A", a.as_matrix().clone());
    let bb = b.const_block("B", bm.as_matrix().clone());
    let h1 = b.hermitian_var("H1", n);
    b.rule(h1, WitnessRule::Fixed(h1v));
    let h2 = b.hermitian_var("H2", n);
    b.rule(h2, WitnessRule::Fixed(h2v));
    let zb = b.var_block(h1).plus(&b.var_block(h2).scaled(Complex64::i()));
    b.lmi2("fidelity", ab, zb, bb);
    b.objective(Goal::Maximize, LinearFunctional::trace(h1, 1.0));
    Ok(CompiledModel {
        model: b.freeze()?,
        inputs: Vec::new(),
        target: Some(h1),
        report_scale: 1.0,
    })
}
