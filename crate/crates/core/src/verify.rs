//! Problem descriptions shared by the command-line tool, plus randomized end-to-end trials that
//! compare each construction with its numerical oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geomean::{self, CensusAudit, GeoMeanModel, GeoMeanTask, Mode, Role, TRole};
use crate::kernel::{self, CMatrix, HermitianMatrix, RationalExponent};
use crate::lieb::{self, CompiledModel, LiebTask, TauRole};
use crate::model::{check_feasible, Census, SdpModel, WitnessAssignment};
use crate::random::{self, Field};
use crate::solver::{solve_complex, SolveStatus, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Function {
    GeoMean,
    Lieb,
    KronPower,
    Multivariate,
    Tsallis,
    TsallisRel,
    Upsilon,
    Fidelity,
}

impl Function {
    pub const ALL: [Function; 8] = [
        Function::GeoMean,
        Function::Lieb,
        Function::KronPower,
        Function::Multivariate,
        Function::Tsallis,
        Function::TsallisRel,
        Function::Upsilon,
        Function::Fidelity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::GeoMean => "geomean",
            Function::Lieb => "lieb",
            Function::KronPower => "kron_power",
            Function::Multivariate => "multivariate",
            Function::Tsallis => "tsallis",
            Function::TsallisRel => "tsallis_rel",
            Function::Upsilon => "upsilon",
            Function::Fidelity => "fidelity",
        }
    }

    /// Names of the matrix inputs, in order. `K` is listed separately.
    pub fn matrix_inputs(self, factors: usize) -> Vec<String> {
        match self {
            Function::GeoMean | Function::Lieb | Function::KronPower | Function::TsallisRel | Function::Fidelity => {
                vec!["A".into(), "B".into()]
            }
            Function::Tsallis | Function::Upsilon => vec!["A".into()],
            Function::Multivariate => (1..=factors).map(|i| format!("A{i}")).collect(),
        }
    }

    pub fn needs_k(self) -> bool {
        matches!(self, Function::Lieb | Function::Upsilon)
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Function {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Function::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown function `{s}`")))
    }
}

/// Which function to compile, at which exponents and sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub function: Function,
    /// Main exponent; unused by `fidelity` and `multivariate`.
    pub t: Option<RationalExponent>,
    /// Exponent of the first factor for `kron_power`.
    pub s: Option<RationalExponent>,
    /// Factor weights for `multivariate`.
    pub weights: Vec<RationalExponent>,
    pub n: usize,
    pub m: usize,
    /// Overrides the natural mode for `geomean` and `lieb`.
    pub mode: Option<Mode>,
    /// Field of random instances.
    pub field: Field,
}

impl ProblemSpec {
    pub fn new(function: Function, t: Option<RationalExponent>, n: usize) -> Self {
        let field = match function {
            Function::GeoMean | Function::KronPower | Function::Multivariate => Field::Real,
            _ => Field::Complex,
        };
        ProblemSpec {
            function,
            t,
            s: None,
            weights: Vec::new(),
            n,
            m: n,
            mode: None,
            field,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    fn t(&self) -> Result<RationalExponent> {
        self.t
            .ok_or_else(|| Error::Domain(format!("{} needs an exponent t", self.function)))
    }

    fn mode(&self) -> Result<Mode> {
        Ok(self.mode.unwrap_or(Mode::natural(self.t()?)))
    }

    /// Dimensions of the matrix inputs, in the order of [`Function::matrix_inputs`].
    pub fn input_dims(&self) -> Vec<usize> {
        match self.function {
            Function::Lieb | Function::KronPower => vec![self.n, self.m],
            Function::Multivariate => vec![self.n; self.weights.len()],
            Function::Tsallis | Function::Upsilon => vec![self.n],
            _ => vec![self.n, self.n],
        }
    }

    /// Checks the spec by compiling it on identity data.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Domain("dimensions must be positive".into()));
        }
        let mats = self.input_dims().into_iter().map(HermitianMatrix::identity).collect();
        let k = self.function.needs_k().then(|| CMatrix::identity(self.n, self.m));
        self.build(&Inputs { k, mats }).map(|_| ())
    }

    /// A random well-conditioned instance.
    pub fn random_inputs(&self, rng: &mut impl Rng) -> Inputs {
        let k = self
            .function
            .needs_k()
            .then(|| random::gaussian(rng, self.n, self.m, self.field));
        let mats = self
            .input_dims()
            .into_iter()
            .map(|d| match self.function {
                Function::Tsallis | Function::TsallisRel => random::random_density(rng, d, self.field),
                _ => random::random_pd(rng, d, self.field),
            })
            .collect();
        Inputs { k, mats }
    }

    /// Compiles the model with every input fixed to data.
    pub fn build(&self, inputs: &Inputs) -> Result<Built> {
        let roles: Vec<Role> = inputs.mats.iter().cloned().map(Role::Datum).collect();
        self.build_roles(inputs.k.as_ref(), &roles)
    }

    /// Compiles the model; `Role::Free` inputs become variables where the construction allows it.
    pub fn build_roles(&self, k: Option<&CMatrix>, roles: &[Role]) -> Result<Built> {
        let dims = self.input_dims();
        if roles.len() != dims.len() {
            return Err(Error::dims(dims.len(), roles.len()));
        }
        let need_k = || {
            k.cloned()
                .ok_or_else(|| Error::Domain(format!("{} needs a weight matrix K", self.function)))
        };
        let datum = |i: usize| match &roles[i] {
            Role::Datum(m) => Ok(m.clone()),
            Role::Free => Err(Error::Domain(format!("{} needs data for every input", self.function))),
        };
        match self.function {
            Function::GeoMean => {
                let data = roles.iter().all(|r| matches!(r, Role::Datum(_)));
                let task = GeoMeanTask {
                    t: self.t()?,
                    n: self.n,
                    mode: self.mode()?,
                    a: roles[0].clone(),
                    b: roles[1].clone(),
                    t_role: if data { TRole::Objective } else { TRole::Free },
                };
                Ok(Built::GeoMean(geomean::build(&task)?))
            }
            Function::Lieb => {
                let k = need_k()?;
                if k.shape() != (self.n, self.m) {
                    return Err(Error::dims(self.n * self.m, k.nrows() * k.ncols()));
                }
                let task = LiebTask {
                    k,
                    t: self.t()?,
                    a: roles[0].clone(),
                    b: roles[1].clone(),
                    mode: self.mode()?,
                    tau: TauRole::Objective,
                };
                Ok(Built::Compiled(lieb::build_lieb(&task)?))
            }
            Function::KronPower => {
                let s = self
                    .s
                    .ok_or_else(|| Error::Domain("kron_power needs the exponent s".into()))?;
                Ok(Built::Compiled(lieb::build_kron_power(s, self.t()?, &roles[0], &roles[1], self.n, self.m)?))
            }
            Function::Multivariate => Ok(Built::Compiled(lieb::build_multivariate(&self.weights, roles, &dims)?)),
            Function::Tsallis => Ok(Built::Compiled(lieb::build_tsallis_entropy(self.t()?, &roles[0], self.n)?)),
            Function::TsallisRel => Ok(Built::Compiled(lieb::build_tsallis_rel_entropy(
                self.t()?,
                &roles[0],
                &roles[1],
                self.n,
                self.n,
            )?)),
            Function::Upsilon => {
                let k = need_k()?;
                if k.shape() != (self.n, self.m) {
                    return Err(Error::dims(self.n * self.m, k.nrows() * k.ncols()));
                }
                Ok(Built::Compiled(lieb::build_upsilon(&k, self.t()?, &datum(0)?)?))
            }
            Function::Fidelity => Ok(Built::Compiled(lieb::build_fidelity(&datum(0)?, &datum(1)?)?)),
        }
    }

    /// The value the optimized model should report, computed by eigendecomposition.
    pub fn oracle(&self, inputs: &Inputs) -> Result<f64> {
        let mats = &inputs.mats;
        let need_k = || {
            inputs
                .k
                .as_ref()
                .ok_or_else(|| Error::Domain(format!("{} needs a weight matrix K", self.function)))
        };
        match self.function {
            Function::GeoMean => Ok(kernel::geometric_mean(&mats[0], &mats[1], self.t()?.value())?.trace()),
            Function::Lieb => kernel::lieb_value(need_k()?, &mats[0], &mats[1], self.t()?.value()),
            Function::KronPower => {
                let s = self
                    .s
                    .ok_or_else(|| Error::Domain("kron_power needs the exponent s".into()))?;
                Ok(kernel::herm_power(&mats[0], s.value())?.trace() * kernel::herm_power(&mats[1], self.t()?.value())?.trace())
            }
            Function::Multivariate => self
                .weights
                .iter()
                .zip(mats)
                .try_fold(1.0, |acc, (w, a)| Ok(acc * kernel::herm_power(a, w.value())?.trace())),
            Function::Tsallis => kernel::tsallis_entropy(&mats[0], self.t()?.value()),
            Function::TsallisRel => kernel::tsallis_rel_entropy(&mats[0], &mats[1], self.t()?.value()),
            Function::Upsilon => kernel::upsilon_value(need_k()?, &mats[0], self.t()?.value()),
            Function::Fidelity => kernel::fidelity_value(&mats[0], &mats[1]),
        }
    }

    /// Largest admissible number of LMIs per block size, and the exact number of scalar
    /// inequalities, for the compiled model.
    pub fn census_limits(&self) -> Result<(BTreeMap<usize, usize>, usize)> {
        let mut lim = BTreeMap::new();
        let mut mean = |d: usize, w: RationalExponent, mode: Mode| {
            *lim.entry(2 * d).or_insert(0) += CensusAudit::bound(w, mode);
            *lim.entry(d).or_insert(0) += 1;
        };
        let (n, m) = (self.n, self.m);
        let scalars = match self.function {
            Function::GeoMean => {
                mean(n, self.t()?, self.mode()?);
                0
            }
            Function::Lieb => {
                mean(n * m, self.t()?, self.mode()?);
                1
            }
            Function::KronPower => {
                let t = self.t()?;
                let total = self.s.unwrap_or(RationalExponent::ZERO).add(t)?;
                if total.is_zero() {
                    return Err(Error::Domain("s + t must be positive".into()));
                }
                mean(n * m, t.div(total)?, Mode::Hypograph);
                if !total.is_one() {
                    mean(n * m, total, Mode::Hypograph);
                }
                0
            }
            Function::Multivariate => {
                let mut partial = RationalExponent::ZERO;
                let mut d = 1;
                for (j, w) in self.weights.iter().enumerate() {
                    partial = partial.add(*w)?;
                    d *= n;
                    if j > 0 && !partial.is_zero() {
                        mean(d, w.div(partial)?, Mode::Hypograph);
                    }
                }
                0
            }
            Function::Tsallis => {
                mean(n, self.t()?, Mode::Hypograph);
                0
            }
            Function::TsallisRel => {
                mean(n * n, self.t()?, Mode::Hypograph);
                1
            }
            Function::Upsilon => {
                let t = self.t()?;
                let mode = if t.concave_range() && !t.is_zero() {
                    Mode::Hypograph
                } else {
                    Mode::Epigraph
                };
                mean(n * m, t.one_minus()?, mode);
                1
            }
            Function::Fidelity => {
                lim.insert(2 * n, 1);
                0
            }
        };
        Ok((lim, scalars))
    }

    /// Whether `census` respects [`ProblemSpec::census_limits`].
    pub fn census_ok(&self, census: &Census) -> Result<bool> {
        let (lim, scalars) = self.census_limits()?;
        let sizes_ok = census
            .lmis
            .iter()
            .all(|(size, count)| lim.get(size).is_some_and(|max| count <= max));
        Ok(sizes_ok && census.scalars == scalars)
    }
}

/// Concrete inputs: the weight matrix (for `lieb` and `upsilon`) and the matrix arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct Inputs {
    pub k: Option<CMatrix>,
    pub mats: Vec<HermitianMatrix>,
}

/// A compiled model of either family.
#[derive(Clone, Debug)]
pub enum Built {
    GeoMean(GeoMeanModel),
    Compiled(CompiledModel),
}

impl Built {
    pub fn model(&self) -> &SdpModel {
        match self {
            Built::GeoMean(g) => &g.model,
            Built::Compiled(c) => &c.model,
        }
    }

    pub fn report(&self, objective: f64) -> f64 {
        match self {
            Built::GeoMean(_) => objective,
            Built::Compiled(c) => c.report(objective),
        }
    }

    /// Proof witness for a model whose inputs are all data.
    pub fn witness(&self) -> Result<WitnessAssignment> {
        match self {
            Built::GeoMean(g) => g.data_witness(),
            Built::Compiled(c) => c.witness(&[]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOptions {
    /// Feasibility tolerance for the proof witness.
    pub witness_tol: f64,
    /// Relative tolerance for the witness objective against the oracle.
    pub tight_tol: f64,
    /// Relative tolerance for the solver optimum against the oracle.
    pub value_tol: f64,
    pub solver: SolverOptions,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            witness_tol: 1e-9,
            tight_tol: 1e-8,
            value_tol: 1e-6,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub index: usize,
    pub oracle: f64,
    /// Worst constraint margin of the proof witness (negative means violated).
    pub witness_margin: f64,
    /// Reported value at the proof witness.
    pub witness_value: f64,
    pub witness_ok: bool,
    pub solver_status: SolveStatus,
    pub solver_value: f64,
    /// `|solver − oracle| / (1 + |oracle|)`.
    pub rel_error: f64,
    pub solver_ok: bool,
    pub census: Census,
    pub census_ok: bool,
}

impl TrialOutcome {
    pub fn passed(&self) -> bool {
        self.witness_ok && self.solver_ok && self.census_ok
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Checks one instance: witness feasibility and tightness, solver against oracle, census.
pub fn check_instance(spec: &ProblemSpec, inputs: &Inputs, index: usize, opts: &TrialOptions) -> Result<TrialOutcome> {
    let built = spec.build(inputs)?;
    let oracle = spec.oracle(inputs)?;
    let model = built.model();

    let w = built.witness()?;
    let report = check_feasible(model, &w, opts.witness_tol)?;
    let witness_value = built.report(model.objective_value(&w)?);
    let witness_ok = report.ok() && rel(witness_value, oracle) <= opts.tight_tol;

    let res = solve_complex(model, &opts.solver)?;
    let solver_value = built.report(res.objective);
    let rel_error = rel(solver_value, oracle);
    let solver_ok = res.is_optimal() && rel_error <= opts.value_tol;

    let census = model.lmi_census();
    let census_ok = spec.census_ok(&census)?;
    Ok(TrialOutcome {
        index,
        oracle,
        witness_margin: report.worst_margin(),
        witness_value,
        witness_ok,
        solver_status: res.status,
        solver_value,
        rel_error,
        solver_ok,
        census,
        census_ok,
    })
}

/// Seed of trial `index` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64)
}

/// Runs `trials` random instances; trial `i` draws from `random::rng(trial_seed(seed, i))`.
pub fn run_trials(spec: &ProblemSpec, trials: usize, seed: u64, opts: &TrialOptions) -> Result<Vec<TrialOutcome>> {
    spec.validate()?;
    (0..trials)
        .map(|i| {
            let mut rng = random::rng(trial_seed(seed, i));
            let inputs = spec.random_inputs(&mut rng);
            check_instance(spec, &inputs, i, opts)
        })
        .collect()
}
