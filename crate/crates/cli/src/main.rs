//! `liebsdp` command-line tool: emit SDPA files, evaluate oracles, run randomized verification,
//! and tabulate LMI counts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liebsdp::geomean::{audit_mode, Mode, Role};
use liebsdp::kernel::io::{read_hermitian, read_matrix};
use liebsdp::kernel::{CMatrix, HermitianMatrix, RationalExponent};
use liebsdp::random::{self, Field};
use liebsdp::verify::{self, Function, Inputs, ProblemSpec, TrialOptions};
use liebsdp::{export_sdpa, realify, solve_complex, Error, SolverOptions};

#[derive(Parser)]
#[command(name = "liebsdp", version, about = "Semidefinite representations of matrix means and trace functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a model, realify it and write it in SDPA sparse format.
    Emit {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the oracle value for the given data.
    Eval {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Also solve the compiled model and print its optimum.
        #[arg(long)]
        solve: bool,
    },
    /// Check witnesses, solver optima and LMI counts on random instances.
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tabulate geometric-mean LMI counts against the size bounds.
    Count {
        #[arg(long, default_value_t = 64)]
        qmax: i64,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hyp,
    Epi,
}

#[derive(Args)]
struct ProblemArgs {
    /// geomean, lieb, kron_power, multivariate, tsallis, tsallis_rel, upsilon or fidelity.
    #[arg(long)]
    function: String,
    /// Exponent as `p/q`.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// First exponent of `kron_power`, as `p/q`.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Comma-separated weights of `multivariate`.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Weight matrix (JSON).
    #[arg(long = "K")]
    k: Option<PathBuf>,
    #[arg(long = "A")]
    a: Option<PathBuf>,
    #[arg(long = "B")]
    b: Option<PathBuf>,
    /// Factor matrices of `multivariate`, in order (repeat the flag).
    #[arg(long = "factor")]
    factors: Vec<PathBuf>,
    /// Draw missing matrices at random from this seed instead.
    #[arg(long)]
    random: Option<u64>,
    /// Draw real instances (verify, --random).
    #[arg(long, conflicts_with = "complex")]
    real: bool,
    /// Draw complex instances (verify, --random).
    #[arg(long)]
    complex: bool,
}

enum Failure {
    Invalid(String),
    Io(String),
    Check(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Io(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn rational(s: &str) -> CliResult<RationalExponent> {
    s.parse().map_err(|e: Error| Failure::Invalid(e.to_string()))
}

fn read_file<T>(path: &Path, read: impl Fn(&Path) -> liebsdp::Result<T>) -> CliResult<T> {
    read(path).map_err(|e| match e {
        Error::Io(io) => Failure::Io(format!("cannot read {}: {io}", path.display())),
        other => Failure::Invalid(format!("{}: {other}", path.display())),
    })
}

/// A validated problem together with whatever data the user supplied.
struct Problem {
    spec: ProblemSpec,
    k: Option<CMatrix>,
    mats: Vec<Option<HermitianMatrix>>,
}

impl Problem {
    fn from_args(args: &ProblemArgs) -> CliResult<Self> {
        let function: Function = args.function.parse()?;
        let t = args.t.as_deref().map(rational).transpose()?;
        let s = args.s.as_deref().map(rational).transpose()?;
        let weights = args.weights.iter().map(|w| rational(w)).collect::<CliResult<Vec<_>>>()?;

        let k = args.k.as_deref().map(|p| read_file(p, |p| read_matrix(p))).transpose()?;
        let paths: Vec<Option<&PathBuf>> = match function {
            Function::Multivariate => args.factors.iter().map(Some).collect(),
            Function::Tsallis | Function::Upsilon => vec![args.a.as_ref()],
            _ => vec![args.a.as_ref(), args.b.as_ref()],
        };
        let mut mats = Vec::with_capacity(paths.len());
        for p in paths {
            mats.push(p.map(|p| read_file(p, |p| read_hermitian(p))).transpose()?);
        }

        let n = args
            .n
            .or_else(|| mats.first().and_then(|m| m.as_ref().map(HermitianMatrix::dim)))
            .or_else(|| k.as_ref().map(|k| k.nrows()))
            .unwrap_or(2);
        let m = args
            .m
            .or_else(|| k.as_ref().map(|k| k.ncols()))
            .or_else(|| match function {
                Function::Lieb | Function::KronPower => mats.get(1).and_then(|m| m.as_ref().map(HermitianMatrix::dim)),
                _ => None,
            })
            .unwrap_or(n);

        let mut spec = ProblemSpec::new(function, t, n).with_m(m);
        spec.s = s;
        spec.weights = weights;
        spec.mode = args.mode.map(|m| match m {
            ModeArg::Hyp => Mode::Hypograph,
            ModeArg::Epi => Mode::Epigraph,
        });
        if args.real {
            spec.field = Field::Real;
        } else if args.complex {
            spec.field = Field::Complex;
        }
        if function == Function::Multivariate && mats.is_empty() {
            mats = vec![None; spec.weights.len()];
        }
        spec.validate()?;

        let mut problem = Problem { spec, k, mats };
        if let Some(seed) = args.random {
            let drawn = problem.spec.random_inputs(&mut random::rng(seed));
            problem.k = problem.k.or(drawn.k);
            for (slot, d) in problem.mats.iter_mut().zip(drawn.mats) {
                slot.get_or_insert(d);
            }
        }
        Ok(problem)
    }

    fn inputs(&self) -> CliResult<Inputs> {
        let mats = self
            .mats
            .iter()
            .cloned()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Failure::Invalid(format!("{} needs every input matrix (or --random SEED)", self.spec.function)))?;
        if self.spec.function.needs_k() && self.k.is_none() {
            return Err(Failure::Invalid(format!("{} needs --K (or --random SEED)", self.spec.function)));
        }
        Ok(Inputs { k: self.k.clone(), mats })
    }
}

/// `v` to 12 significant digits with trailing zeros removed.
fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("scientific notation");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

fn emit(args: &ProblemArgs, out: &Path) -> CliResult<()> {
    let problem = Problem::from_args(args)?;
    let roles: Vec<Role> = problem
        .mats
        .iter()
        .map(|m| m.clone().map_or(Role::Free, Role::Datum))
        .collect();
    let built = problem.spec.build_roles(problem.k.as_ref(), &roles)?;
    let model = built.model();
    let real = realify(model);
    export_sdpa(&real, out).map_err(|e| match e {
        Error::Io(io) => Failure::Io(format!("cannot write {}: {io}", out.display())),
        other => Failure::from(other),
    })?;
    println!("model: {}", model.name());
    println!("census: {}", model.lmi_census());
    println!("sdpa census: {}", real.lmi_census());
    println!("wrote {}", out.display());
    Ok(())
}

fn eval(args: &ProblemArgs, solve: bool) -> CliResult<()> {
    let problem = Problem::from_args(args)?;
    let inputs = problem.inputs()?;
    println!("{}", sig12(problem.spec.oracle(&inputs)?));
    if solve {
        let built = problem.spec.build(&inputs)?;
        let res = solve_complex(built.model(), &SolverOptions::default())?;
        println!("solver {} ({})", sig12(built.report(res.objective)), res.status);
    }
    Ok(())
}

fn run_verify(args: &ProblemArgs, trials: usize, seed: u64) -> CliResult<()> {
    let problem = Problem::from_args(args)?;
    let spec = &problem.spec;
    let outcomes = verify::run_trials(spec, trials, seed, &TrialOptions::default())?;
    let t = spec.t.map_or_else(String::new, |t| format!(" t={t}"));
    println!("{}{t} n={} m={} trials={trials} seed={seed}", spec.function, spec.n, spec.m);
    println!(
        "{:>5}  {:>20}  {:>20}  {:>9}  {:>10}  {:<8}  {:<28}  result",
        "trial", "oracle", "solver", "rel err", "witness", "status", "census"
    );
    for o in &outcomes {
        println!(
            "{:>5}  {:>20}  {:>20}  {:>9.2e}  {:>10.2e}  {:<8}  {:<28}  {}",
            o.index,
            sig12(o.oracle),
            sig12(o.solver_value),
            o.rel_error,
            o.witness_margin,
            o.solver_status.to_string(),
            format!("{}{}", o.census, if o.census_ok { "" } else { " (over)" }),
            if o.passed() { "PASS" } else { "FAIL" }
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    if failed == 0 {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL ({failed} of {trials})");
        Err(Failure::Check(format!("{failed} of {trials} trials failed")))
    }
}

fn count(qmax: i64, n: usize) -> CliResult<()> {
    if qmax < 1 || n == 0 {
        return Err(Failure::Invalid("--qmax and --n must be positive".into()));
    }
    let ranges = [
        (Mode::Hypograph, (0, 1), (1, 1)),
        (Mode::Epigraph, (-1, 1), (0, 1)),
        (Mode::Epigraph, (1, 1), (2, 1)),
    ];
    println!("{:>7}  {:<4}  {:>9}  {:>7}  {:>9}  ok", "t", "mode", format!("size {}", 2 * n), format!("size {n}"), "bound");
    let mut bad = 0;
    let mut rows = 0;
    for (mode, lo, hi) in ranges {
        for t in RationalExponent::enumerate(qmax, lo, hi) {
            let a = audit_mode(t, n, mode)?;
            rows += 1;
            bad += usize::from(!a.ok);
            println!(
                "{:>7}  {:<4}  {:>9}  {:>7}  {:>9}  {}",
                t.to_string(),
                mode.to_string(),
                a.double,
                a.single,
                a.bound_double,
                if a.ok { "yes" } else { "NO" }
            );
        }
    }
    println!("{rows} exponents, {bad} over bound");
    if bad == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{bad} exponents over bound")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Emit { problem, out } => emit(problem, out),
        Command::Eval { problem, solve } => eval(problem, *solve),
        Command::Verify { problem, trials, seed } => run_verify(problem, *trials, *seed),
        Command::Count { qmax, n } => count(*qmax, *n),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
