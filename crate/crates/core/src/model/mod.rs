//! Symbolic block-LMI programs.
//!
//! A model holds matrix-valued variables, a table of constant matrices, LMI constraints built
//! from 1×1 or 2×2 grids of affine blocks, scalar inequalities, and an optional linear
//! objective. Models are assembled through [`ModelBuilder`] and are immutable once frozen.

mod feasibility;
mod flatten;
mod realify;
mod sdpa;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{self, CMatrix, HermitianMatrix};

pub use feasibility::{check_feasible, ConstraintKind, ConstraintReport, FeasibilityReport, DEFAULT_FEAS_TOL};
pub use flatten::{Coord, FlatBlock, FlatProblem, FlatRow};
pub use realify::{realify, realify_embedded, realify_with_map, Realified, VarImage};
pub use sdpa::{export_sdpa, import_sdpa, parse_sdpa, to_sdpa_string};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataId(pub(crate) usize);

/// Shape class of a matrix variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Complex Hermitian, `d²` real coordinates.
    Hermitian,
    /// Real symmetric, `d(d+1)/2` coordinates.
    Symmetric,
    /// Real antisymmetric, `d(d-1)/2` coordinates. Only produced by realification.
    Antisymmetric,
}

impl VarKind {
    pub fn is_real(self) -> bool {
        !matches!(self, VarKind::Hermitian)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub dim: usize,
    pub kind: VarKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataEntry {
    pub name: String,
    pub matrix: CMatrix,
}

/// Real embedding applied on top of a lifted variable after realification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Embed {
    None,
    /// `I₂ ⊗ M`.
    Re,
    /// `[[0, -1], [1, 0]] ⊗ M`.
    Im,
}

/// `I_left ⊗ op(X) ⊗ I_right` where `op` is the identity or entrywise conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lift {
    pub left: usize,
    pub right: usize,
    pub conj: bool,
    pub embed: Embed,
}

impl Lift {
    pub const PLAIN: Lift = Lift {
        left: 1,
        right: 1,
        conj: false,
        embed: Embed::None,
    };

    pub fn factor(&self) -> usize {
        self.left * self.right * if self.embed == Embed::None { 1 } else { 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operand {
    Identity,
    Data(DataId),
    Var { id: VarId, lift: Lift },
    /// A 1×1 variable times a fixed matrix.
    ScaledData { var: VarId, data: DataId },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: Complex64,
    pub operand: Operand,
}

/// A matrix-valued affine expression of fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBlock {
    dim: usize,
    terms: Vec<Term>,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl AffineBlock {
    pub fn zero(dim: usize) -> Self {
        AffineBlock { dim, terms: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        AffineBlock {
            dim,
            terms: vec![Term {
                coef: one(),
                operand: Operand::Identity,
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn push(&mut self, coef: Complex64, operand: Operand) {
        self.terms.push(Term { coef, operand });
    }

    pub fn plus(&self, other: &AffineBlock) -> AffineBlock {
        assert_eq!(self.dim, other.dim, "affine blocks of different dimension");
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    pub fn scaled(&self, c: Complex64) -> AffineBlock {
        AffineBlock {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * c,
                    operand: t.operand.clone(),
                })
                .collect(),
        }
    }

    pub fn minus(&self, other: &AffineBlock) -> AffineBlock {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.iter().filter_map(|t| match t.operand {
            Operand::Var { id, .. } => Some(id),
            Operand::ScaledData { var, .. } => Some(var),
            _ => None,
        })
    }
}

/// `grid ⪰ 0` for a 1×1 or 2×2 grid of equally sized blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiConstraint {
    pub label: String,
    pub grid: Vec<Vec<AffineBlock>>,
}

impl LmiConstraint {
    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn block_dim(&self) -> usize {
        self.grid[0][0].dim()
    }

    /// Side length of the full block matrix.
    pub fn size(&self) -> usize {
        self.rows() * self.block_dim()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// `lhs ≥ 0`.
    Ge,
    /// `lhs ≤ 0`.
    Le,
}

/// How a functional term reads a variable.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// `tr X`.
    Trace,
    /// `Re tr(M X)` for a fixed matrix `M`.
    Matrix(DataId),
    /// `Re v* X v` for a fixed column vector `v`.
    Quadratic(DataId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalTerm {
    pub coef: f64,
    pub var: VarId,
    pub weight: Weight,
}

/// `constant + Σ coef · weight(var)`, always real-valued.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearFunctional {
    pub constant: f64,
    pub terms: Vec<FunctionalTerm>,
}

impl LinearFunctional {
    pub fn constant(c: f64) -> Self {
        LinearFunctional {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn trace(var: VarId, coef: f64) -> Self {
        let mut f = LinearFunctional::default();
        f.add(coef, var, Weight::Trace);
        f
    }

    pub fn add(&mut self, coef: f64, var: VarId, weight: Weight) -> &mut Self {
        if coef != 0.0 {
            self.terms.push(FunctionalTerm { coef, var, weight });
        }
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        LinearFunctional {
            constant: self.constant * s,
            terms: self
                .terms
                .iter()
                .map(|t| FunctionalTerm {
                    coef: t.coef * s,
                    ..t.clone()
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarConstraint {
    pub label: String,
    pub sense: Sense,
    pub lhs: LinearFunctional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub goal: Goal,
    pub functional: LinearFunctional,
}

/// Proof-derived value for an auxiliary variable, evaluated in creation order.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessRule {
    /// `a #_t b` with both slots evaluated under the partial assignment.
    GeoMean { a: AffineBlock, b: AffineBlock, t: f64 },
    /// A value computed when the model was built.
    Fixed(CMatrix),
    /// The value of a functional (used to make scalar constraints tight).
    Functional(LinearFunctional),
}

/// Explicit values for the variables of a model.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WitnessAssignment {
    values: BTreeMap<VarId, CMatrix>,
}

impl WitnessAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: VarId, value: CMatrix) -> &mut Self {
        self.values.insert(var, value);
        self
    }

    pub fn set_hermitian(&mut self, var: VarId, value: &HermitianMatrix) -> &mut Self {
        self.set(var, value.as_matrix().clone())
    }

    pub fn set_scalar(&mut self, var: VarId, value: f64) -> &mut Self {
        self.set(var, CMatrix::from_element(1, 1, Complex64::new(value, 0.0)))
    }

    pub fn get(&self, var: VarId) -> Option<&CMatrix> {
        self.values.get(&var)
    }

    pub fn scalar(&self, var: VarId) -> Option<f64> {
        self.values.get(&var).map(|m| m[(0, 0)].re)
    }

    pub fn hermitian(&self, var: VarId) -> Option<HermitianMatrix> {
        self.values
            .get(&var)
            .and_then(|m| HermitianMatrix::hermitian_part(m).ok())
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.values.contains_key(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &CMatrix)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }
}

/// Multiset of LMI sizes plus the number of scalar inequalities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub lmis: BTreeMap<usize, usize>,
    pub scalars: usize,
}

impl Census {
    pub fn count(&self, size: usize) -> usize {
        self.lmis.get(&size).copied().unwrap_or(0)
    }

    pub fn total_lmis(&self) -> usize {
        self.lmis.values().sum()
    }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .lmis
            .iter()
            .rev()
            .map(|(size, count)| format!("{count}×(size {size})"))
            .collect();
        if self.scalars > 0 {
            parts.push(format!("{}×(scalar)", self.scalars));
        }
        if parts.is_empty() {
            write!(f, "empty")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}

/// A frozen semidefinite program.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpModel {
    name: String,
    vars: Vec<Variable>,
    data: Vec<DataEntry>,
    lmis: Vec<LmiConstraint>,
    scalars: Vec<ScalarConstraint>,
    objective: Option<Objective>,
    rules: Vec<(VarId, WitnessRule)>,
    realified: bool,
}

impl SdpModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.vars.iter().find(|v| v.name == name).map(|v| v.id)
    }

    pub fn data(&self, id: DataId) -> &CMatrix {
        &self.data[id.0].matrix
    }

    pub fn data_entries(&self) -> &[DataEntry] {
        &self.data
    }

    pub fn lmis(&self) -> &[LmiConstraint] {
        &self.lmis
    }

    pub fn scalars(&self) -> &[ScalarConstraint] {
        &self.scalars
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    pub fn witness_rules(&self) -> &[(VarId, WitnessRule)] {
        &self.rules
    }

    pub fn is_realified(&self) -> bool {
        self.realified
    }

    /// True when every variable is real and every constant and coefficient is real.
    pub fn is_real(&self) -> bool {
        let data_real = self.data.iter().all(|d| d.matrix.iter().all(|z| z.im == 0.0));
        let coefs_real = self
            .lmis
            .iter()
            .flat_map(|l| l.grid.iter().flatten())
            .flat_map(|b| b.terms.iter())
            .all(|t| t.coef.im == 0.0);
        let vars_real = self.vars.iter().all(|v| v.kind.is_real());
        data_real && coefs_real && vars_real
    }

    pub fn lmi_census(&self) -> Census {
        let mut census = Census {
            scalars: self.scalars.len(),
            ..Census::default()
        };
        for l in &self.lmis {
            *census.lmis.entry(l.size()).or_insert(0) += 1;
        }
        census
    }

    /// Number of real scalar coordinates once matrix variables are flattened.
    pub fn num_coords(&self) -> usize {
        self.vars.iter().map(|v| coord_count(v.kind, v.dim)).sum()
    }

    fn lookup(&self, w: &WitnessAssignment, id: VarId) -> Result<CMatrix> {
        let var = self.var(id);
        let value = w
            .get(id)
            .ok_or_else(|| Error::MissingAssignment(var.name.clone()))?;
        if value.shape() != (var.dim, var.dim) {
            return Err(Error::dims(var.dim, value.nrows()));
        }
        Ok(value.clone())
    }

    /// Evaluates an affine block under an assignment.
    pub fn eval_block(&self, block: &AffineBlock, w: &WitnessAssignment) -> Result<CMatrix> {
        let n = block.dim;
        let mut out = CMatrix::zeros(n, n);
        for term in &block.terms {
            let value = match &term.operand {
                Operand::Identity => CMatrix::identity(n, n),
                Operand::Data(d) => self.data(*d).clone(),
                Operand::Var { id, lift } => apply_lift(&self.lookup(w, *id)?, lift),
                Operand::ScaledData { var, data } => {
                    let x = self.lookup(w, *var)?;
                    self.data(*data).map(|z| z * x[(0, 0)])
                }
            };
            if value.shape() != (n, n) {
                return Err(Error::dims(n, value.nrows()));
            }
            out += value * term.coef;
        }
        Ok(out)
    }

    /// Assembles the full block matrix of an LMI.
    pub fn eval_lmi(&self, lmi: &LmiConstraint, w: &WitnessAssignment) -> Result<CMatrix> {
        let d = lmi.block_dim();
        let mut out = CMatrix::zeros(lmi.size(), lmi.size());
        for (i, row) in lmi.grid.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let v = self.eval_block(cell, w)?;
                out.view_mut((i * d, j * d), (d, d)).copy_from(&v);
            }
        }
        Ok(out)
    }

    pub fn eval_functional(&self, f: &LinearFunctional, w: &WitnessAssignment) -> Result<f64> {
        let mut total = f.constant;
        for term in &f.terms {
            let x = self.lookup(w, term.var)?;
            let v = match &term.weight {
                Weight::Trace => x.diagonal().iter().map(|z| z.re).sum::<f64>(),
                Weight::Matrix(m) => (self.data(*m) * &x).diagonal().iter().map(|z| z.re).sum(),
                Weight::Quadratic(v) => {
                    let v = self.data(*v);
                    (v.adjoint() * &x * v)[(0, 0)].re
                }
            };
            total += term.coef * v;
        }
        Ok(total)
    }

    pub fn objective_value(&self, w: &WitnessAssignment) -> Result<f64> {
        let obj = self.objective.as_ref().ok_or(Error::NoObjective)?;
        self.eval_functional(&obj.functional, w)
    }

    /// Fills every unassigned variable that has a witness rule, in creation order.
    pub fn complete_witness(&self, base: &WitnessAssignment) -> Result<WitnessAssignment> {
        let mut w = base.clone();
        for (var, rule) in &self.rules {
            if w.contains(*var) {
                continue;
            }
            let value = match rule {
                WitnessRule::GeoMean { a, b, t } => {
                    let a = HermitianMatrix::hermitian_part(&self.eval_block(a, &w)?)?;
                    let b = HermitianMatrix::hermitian_part(&self.eval_block(b, &w)?)?;
                    kernel::geometric_mean(&a, &b, *t)?.into_matrix()
                }
                WitnessRule::Fixed(m) => m.clone(),
                WitnessRule::Functional(f) => {
                    CMatrix::from_element(1, 1, Complex64::new(self.eval_functional(f, &w)?, 0.0))
                }
            };
            w.set(*var, value);
        }
        for v in &self.vars {
            if !w.contains(v.id) {
                return Err(Error::MissingAssignment(v.name.clone()));
            }
        }
        Ok(w)
    }
}

pub(crate) fn coord_count(kind: VarKind, d: usize) -> usize {
    match kind {
        VarKind::Hermitian => d * d,
        VarKind::Symmetric => d * (d + 1) / 2,
        VarKind::Antisymmetric => d * d.saturating_sub(1) / 2,
    }
}

pub(crate) fn apply_lift(x: &CMatrix, lift: &Lift) -> CMatrix {
    let base = if lift.conj { x.map(|z| z.conj()) } else { x.clone() };
    let mut m = base;
    if lift.left > 1 {
        m = kernel::kron(&CMatrix::identity(lift.left, lift.left), &m);
    }
    if lift.right > 1 {
        m = kernel::kron(&m, &CMatrix::identity(lift.right, lift.right));
    }
    match lift.embed {
        Embed::None => m,
        Embed::Re => kernel::kron(&CMatrix::identity(2, 2), &m),
        Embed::Im => kernel::kron(&j2(), &m),
    }
}

pub(crate) fn j2() -> CMatrix {
    let z = Complex64::new(0.0, 0.0);
    CMatrix::from_row_slice(2, 2, &[z, Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), z])
}

/// Mutable assembly of an [`SdpModel`].
#[derive(Clone, Debug, Default)]
pub struct ModelBuilder {
    name: String,
    vars: Vec<Variable>,
    data: Vec<DataEntry>,
    lmis: Vec<LmiConstraint>,
    scalars: Vec<ScalarConstraint>,
    objective: Option<Objective>,
    rules: Vec<(VarId, WitnessRule)>,
    realified: bool,
}

impl ModelBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ModelBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    fn unique_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.vars.iter().any(|v| v.name == name) {
            name.push('\'');
        }
        name
    }

    /// Adds a variable; the name is made unique by appending primes.
    pub fn var(&mut self, name: &str, dim: usize, kind: VarKind) -> VarId {
        assert!(dim >= 1, "variables need a positive dimension");
        let id = VarId(self.vars.len());
        let name = self.unique_name(name);
        self.vars.push(Variable { id, name, dim, kind });
        id
    }

    pub fn hermitian_var(&mut self, name: &str, dim: usize) -> VarId {
        self.var(name, dim, VarKind::Hermitian)
    }

    /// A real scalar variable (1×1 symmetric).
    pub fn scalar_var(&mut self, name: &str) -> VarId {
        self.var(name, 1, VarKind::Symmetric)
    }

    pub fn var_info(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn rule(&mut self, var: VarId, rule: WitnessRule) {
        self.rules.push((var, rule));
    }

    pub fn data(&mut self, name: &str, matrix: CMatrix) -> DataId {
        let id = DataId(self.data.len());
        self.data.push(DataEntry {
            name: name.to_string(),
            matrix,
        });
        id
    }

    pub fn data_matrix(&self, id: DataId) -> &CMatrix {
        &self.data[id.0].matrix
    }

    /// Block holding `X` itself.
    pub fn var_block(&self, id: VarId) -> AffineBlock {
        self.lifted_var_block(id, Lift::PLAIN)
    }

    pub fn lifted_var_block(&self, id: VarId, lift: Lift) -> AffineBlock {
        let dim = self.vars[id.0].dim * lift.factor();
        AffineBlock {
            dim,
            terms: vec![Term {
                coef: one(),
                operand: Operand::Var { id, lift },
            }],
        }
    }

    /// Stores `m` in the data table and returns a block holding it.
    pub fn const_block(&mut self, name: &str, m: CMatrix) -> AffineBlock {
        assert!(m.is_square());
        let dim = m.nrows();
        let id = self.data(name, m);
        AffineBlock {
            dim,
            terms: vec![Term {
                coef: one(),
                operand: Operand::Data(id),
            }],
        }
    }

    pub fn scaled_data_block(&mut self, var: VarId, name: &str, m: CMatrix) -> AffineBlock {
        let dim = m.nrows();
        let data = self.data(name, m);
        AffineBlock {
            dim,
            terms: vec![Term {
                coef: one(),
                operand: Operand::ScaledData { var, data },
            }],
        }
    }

    /// `I_left ⊗ op(block) ⊗ I_right`, with `op` entrywise conjugation when `conj` is set.
    pub fn lift(&mut self, block: &AffineBlock, left: usize, right: usize, conj: bool) -> AffineBlock {
        let dim = block.dim * left * right;
        let mut out = AffineBlock::zero(dim);
        for term in &block.terms {
            let coef = if conj { term.coef.conj() } else { term.coef };
            let operand = match &term.operand {
                Operand::Identity => Operand::Identity,
                Operand::Data(d) => {
                    let name = format!("{}⊗", self.data[d.0].name);
                    let m = apply_lift(&self.data[d.0].matrix, &Lift { left, right, conj, embed: Embed::None });
                    Operand::Data(self.data(&name, m))
                }
                Operand::Var { id, lift } => {
                    assert_eq!(lift.embed, Embed::None, "cannot lift a realified term");
                    Operand::Var {
                        id: *id,
                        lift: Lift {
                            left: lift.left * left,
                            right: lift.right * right,
                            conj: lift.conj ^ conj,
                            embed: Embed::None,
                        },
                    }
                }
                Operand::ScaledData { var, data } => {
                    let name = format!("{}⊗", self.data[data.0].name);
                    let m = apply_lift(&self.data[data.0].matrix, &Lift { left, right, conj, embed: Embed::None });
                    Operand::ScaledData {
                        var: *var,
                        data: self.data(&name, m),
                    }
                }
            };
            out.push(coef, operand);
        }
        out
    }

    /// Symbolic adjoint of a block.
    pub fn adjoint(&mut self, block: &AffineBlock) -> AffineBlock {
        let mut out = AffineBlock::zero(block.dim);
        for term in &block.terms {
            let mut coef = term.coef.conj();
            let operand = match &term.operand {
                Operand::Identity => Operand::Identity,
                Operand::Data(d) => {
                    let m = &self.data[d.0].matrix;
                    if *m == m.adjoint() {
                        Operand::Data(*d)
                    } else {
                        let name = format!("{}*", self.data[d.0].name);
                        let adj = m.adjoint();
                        Operand::Data(self.data(&name, adj))
                    }
                }
                Operand::Var { id, lift } => {
                    if self.vars[id.0].kind == VarKind::Antisymmetric {
                        coef = -coef;
                    }
                    if lift.embed == Embed::Im {
                        coef = -coef;
                    }
                    Operand::Var { id: *id, lift: *lift }
                }
                Operand::ScaledData { var, data } => {
                    let m = &self.data[data.0].matrix;
                    if *m == m.adjoint() {
                        Operand::ScaledData { var: *var, data: *data }
                    } else {
                        let name = format!("{}*", self.data[data.0].name);
                        let adj = m.adjoint();
                        Operand::ScaledData {
                            var: *var,
                            data: self.data(&name, adj),
                        }
                    }
                }
            };
            out.push(coef, operand);
        }
        out
    }

    /// `block ⪰ 0`.
    pub fn lmi1(&mut self, label: &str, block: AffineBlock) {
        self.lmis.push(LmiConstraint {
            label: label.to_string(),
            grid: vec![vec![block]],
        });
    }

    /// `[[a, b], [b*, c]] ⪰ 0`.
    pub fn lmi2(&mut self, label: &str, a: AffineBlock, b: AffineBlock, c: AffineBlock) {
        assert!(a.dim == b.dim && b.dim == c.dim, "LMI blocks of different dimension");
        let lower = self.adjoint(&b);
        self.lmis.push(LmiConstraint {
            label: label.to_string(),
            grid: vec![vec![a, b], vec![lower, c]],
        });
    }

    pub fn push_lmi(&mut self, lmi: LmiConstraint) {
        self.lmis.push(lmi);
    }

    pub fn scalar(&mut self, label: &str, sense: Sense, lhs: LinearFunctional) {
        self.scalars.push(ScalarConstraint {
            label: label.to_string(),
            sense,
            lhs,
        });
    }

    pub fn objective(&mut self, goal: Goal, functional: LinearFunctional) {
        self.objective = Some(Objective { goal, functional });
    }

    pub(crate) fn mark_realified(&mut self) {
        self.realified = true;
    }

    /// Validates dimensions and Hermitian structure and returns the immutable model.
    pub fn freeze(self) -> Result<SdpModel> {
        let model = SdpModel {
            name: self.name,
            vars: self.vars,
            data: self.data,
            lmis: self.lmis,
            scalars: self.scalars,
            objective: self.objective,
            rules: self.rules,
            realified: self.realified,
        };
        validate(&model)?;
        Ok(model)
    }
}

fn validate(model: &SdpModel) -> Result<()> {
    for lmi in &model.lmis {
        let rows = lmi.grid.len();
        if rows == 0 || rows > 2 || lmi.grid.iter().any(|r| r.len() != rows) {
            return Err(Error::InvalidModel(format!("LMI `{}` must be a 1×1 or 2×2 grid", lmi.label)));
        }
        let d = lmi.block_dim();
        for cell in lmi.grid.iter().flatten() {
            if cell.dim != d {
                return Err(Error::InvalidModel(format!("LMI `{}` mixes block sizes", lmi.label)));
            }
            for term in &cell.terms {
                let dim = match &term.operand {
                    Operand::Identity => d,
                    Operand::Data(id) => {
                        let m = model.data(*id);
                        if !m.is_square() {
                            return Err(Error::dims(d, m.ncols()));
                        }
                        m.nrows()
                    }
                    Operand::Var { id, lift } => model.var(*id).dim * lift.factor(),
                    Operand::ScaledData { var, data } => {
                        if model.var(*var).dim != 1 {
                            return Err(Error::InvalidModel(format!(
                                "scaled data needs a scalar variable, `{}` is not",
                                model.var(*var).name
                            )));
                        }
                        model.data(*data).nrows()
                    }
                };
                if dim != d {
                    return Err(Error::InvalidModel(format!(
                        "LMI `{}`: term of size {dim} in a block of size {d}",
                        lmi.label
                    )));
                }
            }
        }
    }
    // Hermitian structure: evaluate every LMI at a deterministic probe point.
    let probe = probe_assignment(model);
    for lmi in &model.lmis {
        let m = model.eval_lmi(lmi, &probe)?;
        let asym = kernel::hermitian::asymmetry(&m);
        if asym > 1e-10 * (1.0 + kernel::hermitian::max_abs(&m)) {
            return Err(Error::InvalidModel(format!("LMI `{}` is not Hermitian", lmi.label)));
        }
    }
    Ok(())
}

fn probe_assignment(model: &SdpModel) -> WitnessAssignment {
    let mut w = WitnessAssignment::new();
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for v in &model.vars {
        let d = v.dim;
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                match v.kind {
                    VarKind::Hermitian => {
                        let z = if i == j { Complex64::new(next(), 0.0) } else { Complex64::new(next(), next()) };
                        m[(i, j)] = z;
                        m[(j, i)] = z.conj();
                    }
                    VarKind::Symmetric => {
                        let x = Complex64::new(next(), 0.0);
                        m[(i, j)] = x;
                        m[(j, i)] = x;
                    }
                    VarKind::Antisymmetric => {
                        if i != j {
                            let x = Complex64::new(next(), 0.0);
                            m[(i, j)] = x;
                            m[(j, i)] = -x;
                        }
                    }
                }
            }
        }
        w.set(v.id, m);
    }
    w
}
