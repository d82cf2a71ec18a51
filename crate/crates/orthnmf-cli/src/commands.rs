use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orthnmf::clustering::{
    assign_from_c, assign_words_from_b, entropy, fmeasure, mutual_information, purity,
    ContingencyTable,
};
use orthnmf::io::{read_factors, read_labels, read_matrix_market, write_factors, write_trace_csv};
use orthnmf::{solve, DataMatrix, IterationTrace, SolverConfig, SolverKind};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(orthnmf::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(err) => write!(f, "{err}"),
        }
    }
}

impl From<orthnmf::Error> for CliError {
    fn from(err: orthnmf::Error) -> Self {
        CliError::Lib(err)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "orthnmf",
    version,
    about = "Orthogonal nonnegative matrix factorization runner"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize a MatrixMarket file and write trace, factors, and manifest.
    Factorize(FactorizeArgs),
    /// Score saved factors against a label file.
    Evaluate(EvaluateArgs),
    /// Run one factorization per value of an orthogonality weight.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct FactorizeArgs {
    /// Input matrix (MatrixMarket coordinate or array, real general).
    #[arg(long)]
    input: PathBuf,
    /// Solver: ls, d-u, d-b, mu-u, au-u, mu-b, au-b.
    #[arg(long)]
    solver: String,
    /// Factorization rank.
    #[arg(long)]
    rank: usize,
    /// Orthogonality weight on C (penalty solvers; default 0.1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Orthogonality weight on B (bi-orthogonal penalty solvers; default 1).
    #[arg(long)]
    beta: Option<f64>,
    /// Denominator stabilizer and starting damping value.
    #[arg(long, default_value_t = 1e-8)]
    delta: f64,
    /// Zero-locking escape floor.
    #[arg(long, default_value_t = 1e-8)]
    sigma: f64,
    /// Damping growth factor.
    #[arg(long, default_value_t = 10.0)]
    step: f64,
    #[arg(long, default_value_t = 20)]
    max_iter: usize,
    /// Cap on damped retries per factor update.
    #[arg(long, default_value_t = 60)]
    max_inner_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rescale the input columns by the inverse square root of their
    /// weight before solving.
    #[arg(long)]
    normalize: bool,
    /// Rescale B to unit columns after each iteration (ls only).
    #[arg(long)]
    normalize_b: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory holding B.mtx / C.mtx (and S.mtx).
    #[arg(long)]
    factors: PathBuf,
    /// Reference class file, one label per line.
    #[arg(long)]
    labels: PathBuf,
    /// Which side to score: doc reads C, word reads B.
    #[arg(long, value_enum)]
    side: Side,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Doc,
    Word,
}

#[derive(Args)]
struct SweepArgs {
    /// Which weight to sweep.
    #[arg(long, value_enum)]
    param: SweepParam,
    /// Comma-separated list of values.
    #[arg(long)]
    values: String,
    #[command(flatten)]
    base: FactorizeArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    Alpha,
    Beta,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    input: String,
    normalize: bool,
    solver: String,
    rank: usize,
    alpha: f64,
    beta: f64,
    delta: f64,
    sigma: f64,
    step: f64,
    max_iter: usize,
    max_inner_iter: usize,
    seed: u64,
    normalize_b: bool,
    outputs: Vec<String>,
    final_objective: f64,
    violation_count: usize,
    inner_iters: usize,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Factorize(args) => factorize(&args),
        Command::Evaluate(args) => evaluate(&args),
        Command::Sweep(args) => sweep(&args),
    }
}

/// Resolves flags into a solver configuration, rejecting weights the solver
/// does not use.
fn resolve_config(args: &FactorizeArgs) -> CliResult<SolverConfig> {
    let solver: SolverKind = args.solver.parse().map_err(|e| usage(format!("{e}")))?;
    if args.alpha.is_some() && !solver.uses_alpha() {
        return Err(usage(format!("--alpha is not used by the {solver} solver")));
    }
    if args.beta.is_some() && !solver.uses_beta() {
        return Err(usage(format!("--beta is not used by the {solver} solver")));
    }
    if args.normalize_b && solver != SolverKind::Ls {
        return Err(usage("--normalize-b is only valid with --solver ls"));
    }
    let mut cfg = SolverConfig::new(solver, args.rank);
    cfg.alpha = args.alpha.unwrap_or(0.1);
    cfg.beta = args.beta.unwrap_or(1.0);
    cfg.delta = args.delta;
    cfg.sigma = args.sigma;
    cfg.step = args.step;
    cfg.max_iter = args.max_iter;
    cfg.max_inner_iter = args.max_inner_iter;
    cfg.seed = args.seed;
    cfg.normalize_b = args.normalize_b;
    Ok(cfg)
}

fn load_input(args: &FactorizeArgs) -> CliResult<DataMatrix> {
    let a = read_matrix_market(&args.input)?;
    if args.normalize {
        Ok(a.normalize_columns()?)
    } else {
        Ok(a)
    }
}

fn run_one(a: &DataMatrix, cfg: &SolverConfig) -> CliResult<(orthnmf::FactorSet, IterationTrace)> {
    Ok(solve(a, cfg)?)
}

fn factorize(args: &FactorizeArgs) -> CliResult<()> {
    let cfg = resolve_config(args)?;
    let a = load_input(args)?;
    let (factors, trace) = run_one(&a, &cfg)?;

    fs::create_dir_all(&args.out).map_err(orthnmf::Error::from)?;
    let trace_path = args.out.join("trace.csv");
    write_trace_csv(&trace, &trace_path)?;
    write_factors(&factors, &args.out)?;

    let mut outputs = vec!["trace.csv".into(), "B.mtx".into(), "C.mtx".into()];
    if factors.s.is_some() {
        outputs.push("S.mtx".into());
    }
    let manifest = Manifest {
        command: "factorize".into(),
        input: args.input.display().to_string(),
        normalize: args.normalize,
        solver: cfg.solver.token().into(),
        rank: cfg.rank,
        alpha: cfg.alpha,
        beta: cfg.beta,
        delta: cfg.delta,
        sigma: cfg.sigma,
        step: cfg.step,
        max_iter: cfg.max_iter,
        max_inner_iter: cfg.max_inner_iter,
        seed: cfg.seed,
        normalize_b: cfg.normalize_b,
        outputs,
        final_objective: trace.final_objective(),
        violation_count: trace.violation_count(),
        inner_iters: trace.total_inner_iters(),
    };
    write_manifest(&args.out.join("manifest.json"), &manifest)?;

    println!(
        "{} rank={} iters={} objective {:.6e} -> {:.6e} (violations {}, inner {})",
        cfg.solver,
        cfg.rank,
        trace.len() - 1,
        trace.error0(),
        trace.final_objective(),
        trace.violation_count(),
        trace.total_inner_iters()
    );
    Ok(())
}

fn write_manifest(path: &Path, manifest: &Manifest) -> CliResult<()> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serialization cannot fail");
    fs::write(path, json + "\n").map_err(orthnmf::Error::from)?;
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let factors = read_factors(&args.factors)?;
    let (truth, _names) = read_labels(&args.labels)?;
    let assignment = match args.side {
        Side::Doc => assign_from_c(&factors.c),
        Side::Word => assign_words_from_b(&factors.b),
    };
    if assignment.labels.len() != truth.len() {
        return Err(CliError::Lib(orthnmf::Error::Shape(format!(
            "{} samples in factors vs {} labels",
            assignment.labels.len(),
            truth.len()
        ))));
    }
    let table = ContingencyTable::from_assignments(&assignment, &truth)?;
    let scores = [
        ("mi", mutual_information(&table)?),
        ("entropy", entropy(&table)?),
        ("purity", purity(&table)?),
        ("fmeasure", fmeasure(&table)?),
    ];
    for (name, value) in &scores {
        println!("{name} {value:.6}");
    }
    let side = match args.side {
        Side::Doc => "doc",
        Side::Word => "word",
    };
    let mut csv = String::from("metric,value\n");
    for (name, value) in &scores {
        csv.push_str(&format!("{name},{value:.16e}\n"));
    }
    fs::write(args.factors.join(format!("metrics-{side}.csv")), csv)
        .map_err(orthnmf::Error::from)?;
    Ok(())
}

fn sweep(args: &SweepArgs) -> CliResult<()> {
    let base_cfg = resolve_config(&args.base)?;
    match args.param {
        SweepParam::Alpha => {
            if !base_cfg.solver.uses_alpha() {
                return Err(usage(format!(
                    "cannot sweep alpha: the {} solver does not use it",
                    base_cfg.solver
                )));
            }
            if args.base.alpha.is_some() {
                return Err(usage("--alpha conflicts with --param alpha; use --values"));
            }
        }
        SweepParam::Beta => {
            if !base_cfg.solver.uses_beta() {
                return Err(usage(format!(
                    "cannot sweep beta: the {} solver does not use it",
                    base_cfg.solver
                )));
            }
            if args.base.beta.is_some() {
                return Err(usage("--beta conflicts with --param beta; use --values"));
            }
        }
    }
    let tokens: Vec<&str> = args
        .values
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(usage("--values must list at least one value"));
    }
    let mut values = Vec::with_capacity(tokens.len());
    for tok in &tokens {
        let v: f64 = tok
            .parse()
            .map_err(|_| usage(format!("invalid sweep value '{tok}'")))?;
        if v < 0.0 || !v.is_finite() {
            return Err(usage(format!("sweep value '{tok}' must be nonnegative")));
        }
        values.push(v);
    }

    let a = load_input(&args.base)?;
    fs::create_dir_all(&args.base.out).map_err(orthnmf::Error::from)?;
    let param_name = match args.param {
        SweepParam::Alpha => "alpha",
        SweepParam::Beta => "beta",
    };
    let mut summary = String::from("value,final_objective,inner_iters,violations\n");
    for (tok, value) in tokens.iter().zip(values.iter()) {
        let mut cfg = base_cfg.clone();
        match args.param {
            SweepParam::Alpha => cfg.alpha = *value,
            SweepParam::Beta => cfg.beta = *value,
        }
        let (_, trace) = run_one(&a, &cfg)?;
        let trace_path = args.base.out.join(format!("trace_{param_name}_{tok}.csv"));
        write_trace_csv(&trace, &trace_path)?;
        summary.push_str(&format!(
            "{tok},{:.16e},{},{}\n",
            trace.final_objective(),
            trace.total_inner_iters(),
            trace.violation_count()
        ));
        println!(
            "{param_name}={tok}: objective {:.6e}, inner {}, violations {}",
            trace.final_objective(),
            trace.total_inner_iters(),
            trace.violation_count()
        );
    }
    fs::write(args.base.out.join("summary.csv"), summary).map_err(orthnmf::Error::from)?;
    Ok(())
}
