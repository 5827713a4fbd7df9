//! Block-LMI descriptions of the hypograph and epigraph of `(A, B) ↦ A #_t B`.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{self, BinaryExpansion, HermitianMatrix, RationalExponent};
use crate::model::{AffineBlock, Goal, LinearFunctional, ModelBuilder, SdpModel, VarId, WitnessAssignment, WitnessRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `A #_t B ⪰ T`, for `t ∈ [0, 1]`.
    Hypograph,
    /// `A #_t B ⪯ T`, for `t ∈ [-1, 0] ∪ [1, 2]`.
    Epigraph,
}

impl Mode {
    /// The mode in which `t` gives a convex set; `t ∈ {0, 1}` defaults to the hypograph.
    pub fn natural(t: RationalExponent) -> Mode {
        if t.concave_range() {
            Mode::Hypograph
        } else {
            Mode::Epigraph
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Hypograph => "hyp",
            Mode::Epigraph => "epi",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Role {
    Datum(HermitianMatrix),
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TRole {
    /// Free variable whose trace is optimized (maximized for hypographs, minimized for epigraphs).
    Objective,
    Free,
    Datum(HermitianMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeoMeanTask {
    pub t: RationalExponent,
    pub n: usize,
    pub mode: Mode,
    pub a: Role,
    pub b: Role,
    pub t_role: TRole,
}

impl GeoMeanTask {
    /// `A`, `B` fixed; optimize `tr T` in the natural mode for `t`.
    pub fn optimize(t: RationalExponent, a: HermitianMatrix, b: HermitianMatrix) -> Self {
        GeoMeanTask {
            t,
            n: a.dim(),
            mode: Mode::natural(t),
            a: Role::Datum(a),
            b: Role::Datum(b),
            t_role: TRole::Objective,
        }
    }

    /// Everything free; used for structural questions such as the LMI census.
    pub fn symbolic(t: RationalExponent, n: usize, mode: Mode) -> Self {
        GeoMeanTask {
            t,
            n,
            mode,
            a: Role::Free,
            b: Role::Free,
            t_role: TRole::Free,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Hypograph if !self.t.concave_range() => {
                return Err(Error::wrong_exponent(self.t, "hypograph needs t in [0, 1]"))
            }
            Mode::Epigraph if !self.t.convex_range() => {
                return Err(Error::wrong_exponent(self.t, "epigraph needs t in [-1, 0] or [1, 2]"))
            }
            _ => {}
        }
        if self.n == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        for role in [&self.a, &self.b] {
            if let Role::Datum(m) = role {
                if m.dim() != self.n {
                    return Err(Error::dims(self.n, m.dim()));
                }
            }
        }
        if let TRole::Datum(m) = &self.t_role {
            if m.dim() != self.n {
                return Err(Error::dims(self.n, m.dim()));
            }
        }
        Ok(())
    }
}

/// A compiled geometric-mean model with handles to its named variables.
#[derive(Clone, Debug)]
pub struct GeoMeanModel {
    pub model: SdpModel,
    pub task: GeoMeanTask,
    pub a_var: Option<VarId>,
    pub b_var: Option<VarId>,
    pub t_var: Option<VarId>,
}

impl GeoMeanModel {
    /// Proof witness for the data pair `(a, b)`: every auxiliary variable gets its value from
    /// the recursion and `T = a #_t b`. Free `A`/`B` slots take `a`/`b`; data slots must
    /// already hold them.
    pub fn witness(&self, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<WitnessAssignment> {
        let mut w = WitnessAssignment::new();
        if let Some(id) = self.a_var {
            w.set_hermitian(id, a);
        }
        if let Some(id) = self.b_var {
            w.set_hermitian(id, b);
        }
        if let Some(id) = self.t_var {
            w.set_hermitian(id, &kernel::geometric_mean(a, b, self.task.t.value())?);
        }
        self.model.complete_witness(&w)
    }

    /// Witness using the task's own data for `A` and `B`.
    pub fn data_witness(&self) -> Result<WitnessAssignment> {
        match (&self.task.a, &self.task.b) {
            (Role::Datum(a), Role::Datum(b)) => self.witness(a, b),
            _ => Err(Error::MissingAssignment("A/B".into())),
        }
    }
}

struct Slots {
    a: AffineBlock,
    b: AffineBlock,
    t: AffineBlock,
    a_var: Option<VarId>,
    b_var: Option<VarId>,
    t_var: Option<VarId>,
}

fn prepare(task: &GeoMeanTask, name: &str) -> Result<(ModelBuilder, Slots)> {
    task.validate()?;
    let n = task.n;
    let mut b = ModelBuilder::new(name);
    let slot = |b: &mut ModelBuilder, role: &Role, label: &str| match role {
        Role::Datum(m) => (b.const_block(label, m.as_matrix().clone()), None),
        Role::Free => {
            let id = b.hermitian_var(label, n);
            (b.var_block(id), Some(id))
        }
    };
    let (a, a_var) = slot(&mut b, &task.a, "A");
    let (bb, b_var) = slot(&mut b, &task.b, "B");
    let (t, t_var) = match &task.t_role {
        TRole::Datum(m) => (b.const_block("T", m.as_matrix().clone()), None),
        TRole::Free | TRole::Objective => {
            let id = b.hermitian_var("T", n);
            (b.var_block(id), Some(id))
        }
    };
    Ok((
        b,
        Slots {
            a,
            b: bb,
            t,
            a_var,
            b_var,
            t_var,
        },
    ))
}

fn finish(mut b: ModelBuilder, slots: Slots, task: &GeoMeanTask) -> Result<GeoMeanModel> {
    if let (TRole::Objective, Some(t)) = (&task.t_role, slots.t_var) {
        let goal = match task.mode {
            Mode::Hypograph => Goal::Maximize,
            Mode::Epigraph => Goal::Minimize,
        };
        b.objective(goal, LinearFunctional::trace(t, 1.0));
    }
    Ok(GeoMeanModel {
        model: b.freeze()?,
        task: task.clone(),
        a_var: slots.a_var,
        b_var: slots.b_var,
        t_var: slots.t_var,
    })
}

fn build_with(
    task: &GeoMeanTask,
    name: &str,
    body: impl FnOnce(&mut ModelBuilder, &Slots) -> Result<()>,
) -> Result<GeoMeanModel> {
    let (mut b, slots) = prepare(task, name)?;
    body(&mut b, &slots)?;
    finish(b, slots, task)
}

/// The single LMI `[[A, T], [T, B]] ⪰ 0`.
pub fn build_base_half(task: &GeoMeanTask) -> Result<GeoMeanModel> {
    if task.t != RationalExponent::HALF || task.mode != Mode::Hypograph {
        return Err(Error::wrong_exponent(task.t, "base case is the hypograph at t = 1/2"));
    }
    build_with(task, "hyp_1/2", |b, s| {
        half(b, &s.a, &s.b, &s.t);
        Ok(())
    })
}

/// Binary-expansion chain for `t = p/2^ℓ ∈ (0, 1)`.
pub fn build_dyadic(task: &GeoMeanTask) -> Result<GeoMeanModel> {
    let t = task.t;
    if !t.is_dyadic() || t.numer() <= 0 || t.numer() >= t.denom() || task.mode != Mode::Hypograph {
        return Err(Error::wrong_exponent(t, "dyadic construction needs a hypograph with t = p/2^l in (0, 1)"));
    }
    build_with(task, &format!("hyp_{t}"), |b, s| dyadic(b, &s.a, &s.b, &s.t, t))
}

/// Construction for `t = 2^ℓ/q ∈ [1/2, 1]`.
pub fn build_pow2_numerator(task: &GeoMeanTask) -> Result<GeoMeanModel> {
    let t = task.t;
    if !t.numerator_is_power_of_two() || 2 * t.numer() < t.denom() || t.numer() > t.denom() || task.mode != Mode::Hypograph {
        return Err(Error::wrong_exponent(t, "needs a hypograph with t = 2^l/q in [1/2, 1]"));
    }
    build_with(task, &format!("hyp_{t}"), |b, s| add_hyp(b, &s.a, &s.b, &s.t, t))
}

/// Hypograph for any `t ∈ [0, 1]`.
pub fn build_hyp(task: &GeoMeanTask) -> Result<GeoMeanModel> {
    if task.mode != Mode::Hypograph {
        return Err(Error::wrong_exponent(task.t, "build_hyp needs hypograph mode"));
    }
    build_with(task, &format!("hyp_{}", task.t), |b, s| add_hyp(b, &s.a, &s.b, &s.t, task.t))
}

/// Epigraph for `t ∈ [-1, 0] ∪ [1, 2]`.
pub fn build_epi(task: &GeoMeanTask) -> Result<GeoMeanModel> {
    if task.mode != Mode::Epigraph {
        return Err(Error::wrong_exponent(task.t, "build_epi needs epigraph mode"));
    }
    build_with(task, &format!("epi_{}", task.t), |b, s| add_epi(b, &s.a, &s.b, &s.t, task.t))
}

/// Dispatches on the task's mode.
pub fn build(task: &GeoMeanTask) -> Result<GeoMeanModel> {
    match task.mode {
        Mode::Hypograph => build_hyp(task),
        Mode::Epigraph => build_epi(task),
    }
}

fn half(b: &mut ModelBuilder, a: &AffineBlock, bb: &AffineBlock, t: &AffineBlock) {
    b.lmi2("half", a.clone(), t.clone(), bb.clone());
}

fn aux(b: &mut ModelBuilder, name: &str, n: usize, a: &AffineBlock, bb: &AffineBlock, t: f64) -> AffineBlock {
    let id = b.hermitian_var(name, n);
    b.rule(
        id,
        WitnessRule::GeoMean {
            a: a.clone(),
            b: bb.clone(),
            t,
        },
    );
    b.var_block(id)
}

fn dyadic(b: &mut ModelBuilder, a: &AffineBlock, bb: &AffineBlock, t_slot: &AffineBlock, t: RationalExponent) -> Result<()> {
    let n = a.dim();
    let bits = BinaryExpansion::of(t)?;
    let l = bits.len();
    let mut prev: Option<AffineBlock> = None;
    for i in 1..=l {
        let z = if i == l {
            t_slot.clone()
        } else {
            aux(b, &format!("Z{i}"), n, a, bb, bits.prefix_value(i)?.value())
        };
        match prev {
            None => b.lmi2(&format!("dyadic{i}"), a.clone(), z.clone(), bb.clone()),
            Some(p) => {
                let sel = if bits.bit(i) == 1 { bb.clone() } else { a.clone() };
                b.lmi2(&format!("dyadic{i}"), sel, z.clone(), p);
            }
        }
        prev = Some(z);
    }
    Ok(())
}

fn pow2(b: &mut ModelBuilder, a: &AffineBlock, bb: &AffineBlock, t_slot: &AffineBlock, t: RationalExponent) -> Result<()> {
    let n = a.dim();
    let inner = RationalExponent::new(2 * t.numer() - t.denom(), t.numer())?;
    let two_t_minus_one = RationalExponent::new(2 * t.numer() - t.denom(), t.denom())?;
    let w = aux(b, "W", n, a, bb, t.value());
    let z = aux(b, "Z", n, a, bb, two_t_minus_one.value());
    add_hyp(b, a, &w, &z, inner)?;
    b.lmi2("pow2", z, w.clone(), bb.clone());
    b.lmi1("pow2.T", w.minus(t_slot));
    Ok(())
}

/// Adds constraints forcing `a #_t bb ⪰ t_slot` for `t ∈ [0, 1]`.
pub(crate) fn add_hyp(
    b: &mut ModelBuilder,
    a: &AffineBlock,
    bb: &AffineBlock,
    t_slot: &AffineBlock,
    t: RationalExponent,
) -> Result<()> {
    if !t.concave_range() {
        return Err(Error::wrong_exponent(t, "hypograph needs t in [0, 1]"));
    }
    let (p, q) = (t.numer(), t.denom());
    if p == 0 {
        b.lmi1("endpoint", a.minus(t_slot));
        return Ok(());
    }
    if p == q {
        b.lmi1("endpoint", bb.minus(t_slot));
        return Ok(());
    }
    if t == RationalExponent::HALF {
        half(b, a, bb, t_slot);
        return Ok(());
    }
    if t.is_dyadic() {
        return dyadic(b, a, bb, t_slot, t);
    }
    if t.numerator_is_power_of_two() && 2 * p > q {
        return pow2(b, a, bb, t_slot, t);
    }
    if 2 * p < q {
        // t = (p/2^ℓ)·(2^ℓ/q) with ℓ = ⌊log₂ q⌋.
        let l = t.floor_log2_denom();
        let inner = RationalExponent::new(1 << l, q)?;
        let outer = RationalExponent::new(p, 1 << l)?;
        let z = aux(b, "Z", a.dim(), a, bb, inner.value());
        add_hyp(b, a, bb, &z, inner)?;
        return add_hyp(b, a, &z, t_slot, outer);
    }
    add_hyp(b, bb, a, t_slot, t.one_minus()?)
}

/// Adds constraints forcing `a #_t bb ⪯ t_slot` for `t ∈ [-1, 0] ∪ [1, 2]`.
pub(crate) fn add_epi(
    b: &mut ModelBuilder,
    a: &AffineBlock,
    bb: &AffineBlock,
    t_slot: &AffineBlock,
    t: RationalExponent,
) -> Result<()> {
    if !t.convex_range() {
        return Err(Error::wrong_exponent(t, "epigraph needs t in [-1, 0] or [1, 2]"));
    }
    if t.is_zero() {
        b.lmi1("endpoint", t_slot.minus(a));
        return Ok(());
    }
    if t.is_one() {
        b.lmi1("endpoint", t_slot.minus(bb));
        return Ok(());
    }
    if t.numer() > 0 {
        // A #_t B = B #_{1-t} A.
        return add_epi(b, bb, a, t_slot, t.one_minus()?);
    }
    let s = t.neg()?;
    let sv = aux(b, "S", a.dim(), a, bb, s.value());
    add_hyp(b, a, bb, &sv, s)?;
    b.lmi2("epi", t_slot.clone(), a.clone(), sv);
    Ok(())
}

/// Census of a compiled geometric-mean model against the size bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusAudit {
    pub t: RationalExponent,
    pub mode: Mode,
    pub n: usize,
    pub double: usize,
    pub single: usize,
    pub bound_double: usize,
    pub ok: bool,
}

impl CensusAudit {
    /// Maximum number of size-`2n` LMIs allowed for `t` in `mode`.
    pub fn bound(t: RationalExponent, mode: Mode) -> usize {
        let l = t.floor_log2_denom() as usize;
        match mode {
            Mode::Hypograph => 2 * l + 1,
            Mode::Epigraph => 2 * l + 2,
        }
    }
}

/// Builds the natural-mode model for `t` and compares its census with the bounds.
pub fn lmi_census_audit(t: RationalExponent, n: usize) -> Result<CensusAudit> {
    audit_mode(t, n, Mode::natural(t))
}

pub fn audit_mode(t: RationalExponent, n: usize, mode: Mode) -> Result<CensusAudit> {
    let m = build(&GeoMeanTask::symbolic(t, n, mode))?;
    let census = m.model.lmi_census();
    let (double, single) = (census.count(2 * n), census.count(n));
    let bound_double = CensusAudit::bound(t, mode);
    let others = census.total_lmis() - double - single;
    Ok(CensusAudit {
        t,
        mode,
        n,
        double,
        single,
        bound_double,
        ok: double <= bound_double && single <= 1 && others == 0,
    })
}
