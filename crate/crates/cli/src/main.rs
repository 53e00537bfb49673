use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use ballotree::constructions::{self, BuildError};
use ballotree::f3::{compile, parse_expr, truth_table, Gate};
use ballotree::sexp::{self, DEFAULT_SHARING_THRESHOLD};
use ballotree::tournament::{ScaleGuard, TournamentError};
use ballotree::tree::TreeError;
use ballotree::verify::{
    self, Config, Lemma, Mode, PsiVariant, VerificationReport, VerifyError, DEFAULT_SAMPLES,
};
use ballotree::{Bindings, Candidate, Direction, Forest, Tournament, VotingTree};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "ballotree", version, about = "Build, evaluate and verify voting trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a named construction and print it as an s-expression.
    Build(BuildArgs),
    /// Evaluate a tree file on a tournament.
    Eval(EvalArgs),
    /// Run a verification check.
    Verify(VerifyArgs),
    /// Compile a GF(3) polynomial into a voting tree.
    Compile(CompileArgs),
    /// Print leaf count, depth and DAG size of a tree file as JSON.
    Stats {
        /// Tree file, or `-` for stdin.
        tree: PathBuf,
    },
}

#[derive(clap::Args)]
struct BuildArgs {
    /// match, baseline, lambda, lambda2, phi, psi, omega, or a gate name
    /// (yield, pair, neg_sum, negate, add, square_first_half,
    /// square_second_half, square, multiply).
    name: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    i: Option<Candidate>,
    #[arg(long)]
    j: Option<Candidate>,
    #[arg(long, value_enum, default_value_t = Variant::Substituted)]
    variant: Variant,
    /// Expanded leaf count above which shared `def` form is written.
    #[arg(long, default_value_t = DEFAULT_SHARING_THRESHOLD)]
    threshold: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Substituted,
    Virtual,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Tree file, or `-` for stdin.
    tree: PathBuf,
    /// Tournament file (`n=<k>` line then the bitstring).
    tournament: Option<PathBuf>,
    /// Use a 3-cycle instead of a tournament file.
    #[arg(long, conflicts_with = "tournament")]
    direction: Option<Direction>,
    /// Variable binding, `NAME=candidate`; repeatable.
    #[arg(long = "bind", value_parser = parse_binding, num_args = 1..)]
    bind: Vec<(String, Candidate)>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// match, baseline, guarantee, levels, against-set, phi, rotation,
    /// rotation2, manipulator, gates, compiler.
    check: String,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    j: Candidate,
    #[arg(long, value_enum, default_value_t = Variant::Substituted)]
    variant: Variant,
    /// Random tree shapes per (challenger, set) in the against-set check.
    #[arg(long, default_value_t = 10)]
    shapes: usize,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct CompileArgs {
    expr: String,
    /// Declared variables, comma separated; defaults to those used.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Print the truth table (JSON lines) after the tree.
    #[arg(long)]
    table: bool,
    #[arg(long, default_value_t = DEFAULT_SHARING_THRESHOLD)]
    threshold: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    /// Preformatted multi-line diagnostic.
    #[error("{0}")]
    Diagnostic(String),
    #[error("verification failed")]
    Failed,
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        CliError::Verify(e.into())
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        CliError::Verify(e.into())
    }
}

impl From<TournamentError> for CliError {
    fn from(e: TournamentError) -> Self {
        CliError::Verify(e.into())
    }
}

fn parse_binding(s: &str) -> Result<(String, Candidate), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=value, got {s:?}"))?;
    let value = value
        .trim()
        .parse()
        .map_err(|_| format!("binding value {value:?} is not a candidate"))?;
    Ok((name.trim().to_string(), value))
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            emit(text);
            Ok(())
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn need(value: Option<usize>, flag: &str, name: &str) -> Result<usize, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("{name} needs --{flag}")))
}

fn build_tree(args: &BuildArgs) -> Result<VotingTree, CliError> {
    let name = args.name.as_str();
    if let Some(gate) = Gate::from_name(name) {
        return Ok(gate.tree());
    }
    let mut forest = Forest::new();
    let root = match name {
        "match" => {
            let i = forest.candidate(args.i.unwrap_or(0));
            let j = forest.candidate(args.j.unwrap_or(1));
            forest.node(i, j)
        }
        "baseline" => constructions::baseline(&mut forest, need(args.n, "n", name)?)?,
        "lambda" => {
            constructions::lambda_full(&mut forest, need(args.n, "n", name)?, args.i.unwrap_or(0))?
        }
        "lambda2" => {
            constructions::lambda_sq(&mut forest, need(args.n, "n", name)?, args.i.unwrap_or(0))?
        }
        "phi" => constructions::phi_tree(&mut forest, need(args.n, "n", name)?)?,
        "psi" => {
            let n = need(args.n, "n", name)?;
            psi_variant(args.variant, args.j.unwrap_or(0)).build(&mut forest, n)?
        }
        "omega" => match (args.k, args.n) {
            (Some(k), _) => constructions::omega(&mut forest, k)?,
            (None, Some(n)) => constructions::omega_for_candidates(&mut forest, n)?.0,
            (None, None) => return Err(CliError::Usage("omega needs --k or --n".into())),
        },
        other => return Err(CliError::Usage(format!("unknown construction {other:?}"))),
    };
    Ok(forest.extract(root))
}

fn psi_variant(v: Variant, j: Candidate) -> PsiVariant {
    match v {
        Variant::Substituted => PsiVariant::Substituted { j },
        Variant::Virtual => PsiVariant::Virtual,
    }
}

fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    let tree = sexp::parse(&read_input(&args.tree)?)?;
    let t: Tournament = match (&args.tournament, args.direction) {
        (Some(path), _) => read_input(path)?.parse()?,
        (None, Some(d)) => d.tournament(),
        (None, None) => {
            return Err(CliError::Usage(
                "eval needs a tournament file or --direction".into(),
            ))
        }
    };
    let bindings: Bindings = args.bind.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    emit(&format!("{}\n", tree.evaluate(&t, &bindings)?));
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<VerificationReport, CliError> {
    let cfg = Config {
        jobs: args.jobs,
        guard: ScaleGuard::from_env(),
    };
    let sampled = Mode::Sampled {
        count: args.samples,
        seed: args.seed,
    };
    // Exhaustive unless asked otherwise or the guard would refuse.
    let mode_for = |n: usize| match args.mode {
        Some(ModeArg::Exhaustive) => Mode::Exhaustive,
        Some(ModeArg::Sampled) => sampled,
        None if cfg.guard.check(n).is_ok() => Mode::Exhaustive,
        None => sampled,
    };
    let report = match args.check.as_str() {
        "match" => verify::check_match()?,
        "baseline" => {
            let n = args.n.unwrap_or(8);
            verify::check_baseline(n, mode_for(n), &cfg)?
        }
        "guarantee" => {
            let k = need(args.k, "k", "guarantee")?;
            let n = constructions::omega_candidates(k);
            let tree = constructions::build(|f| constructions::omega(f, k))?;
            verify::check_guarantee("guarantee", &tree, n, k, mode_for(n), &cfg)?
        }
        "levels" => verify::check_levels(args.k.unwrap_or(4), args.samples, args.seed, &cfg)?,
        "against-set" | "phi" | "rotation" | "rotation2" => {
            let lemma = match args.check.as_str() {
                "against-set" => Lemma::AgainstSet {
                    random_shapes: args.shapes,
                },
                other => Lemma::from_name(other).expect("listed above"),
            };
            let n = args
                .n
                .unwrap_or(if args.check == "against-set" { 5 } else { 8 });
            verify::check_lemma(lemma, n, mode_for(n), &cfg)?
        }
        "manipulator" => {
            let n = args.n.unwrap_or(8);
            verify::check_manipulator(n, psi_variant(args.variant, args.j), mode_for(n), &cfg)?
        }
        "gates" => verify::check_gates(args.samples.min(10_000), args.seed)?,
        "compiler" => verify::check_compiler(args.samples.min(100_000), args.seed)?,
        other => return Err(CliError::Usage(format!("unknown check {other:?}"))),
    };
    if args.json {
        emit(&format!("{}\n", report.to_json()));
    } else {
        emit(&report.summary());
    }
    Ok(report)
}

fn run_compile(args: &CompileArgs) -> Result<(), CliError> {
    let annotated = |e: ballotree::f3::CompileError| CliError::Diagnostic(e.annotate(&args.expr));
    let expr = parse_expr(&args.expr).map_err(annotated)?;
    let declared: Vec<String> = match &args.vars {
        Some(v) => v.iter().map(|s| s.trim().to_string()).collect(),
        None => expr.variables().into_iter().collect(),
    };
    let declared: Vec<&str> = declared.iter().map(String::as_str).collect();
    let tree = compile(&expr, &declared).map_err(annotated)?;
    write_output(&args.out, &sexp::serialize_with_threshold(&tree, args.threshold))?;
    if args.table {
        for row in truth_table(&tree)? {
            emit(&format!("{}\n", serde_json::to_string(&row).expect("rows serialize")));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => {
            let tree = build_tree(&args)?;
            write_output(&args.out, &sexp::serialize_with_threshold(&tree, args.threshold))
        }
        Command::Eval(args) => run_eval(&args),
        Command::Verify(args) => {
            if run_verify(&args)?.passed {
                Ok(())
            } else {
                Err(CliError::Failed)
            }
        }
        Command::Compile(args) => run_compile(&args),
        Command::Stats { tree } => {
            let tree = sexp::parse(&read_input(&tree)?)?;
            emit(&format!(
                "{}\n",
                serde_json::to_string(&tree.stats()).expect("stats serialize")
            ));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed) => ExitCode::from(1),
        Err(CliError::Diagnostic(text)) => {
            eprintln!("{text}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
