mod output;
mod selftest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use whasym::analysis::merged_rows;
use whasym::problem::{DEFAULT_GRID_NODES, DEFAULT_GRID_SCALE};
use whasym::{FirstOrderModel, Preset, ProblemSpec};

#[derive(Parser)]
#[command(
    name = "whasym",
    version,
    about = "Asymptotic Wiener-Hopf factorization of 2x2 matrix functions"
)]
struct Cli {
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true, env = "WHASYM_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize G = G⁻G⁺ and write factors and diagnostics as JSON.
    Factorize(ProblemArgs),
    /// Tabulate first-order remainders as CSV.
    Analyze {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Source of the first-order factors.
        #[arg(long, value_enum, default_value_t = Model::Computed)]
        model: Model,
    },
    /// Run the oracle suite.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_GRID_NODES)]
        grid_n: usize,
        #[arg(long, default_value_t = DEFAULT_GRID_SCALE)]
        grid_l: f64,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem spec (JSON); the built-in example when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Vec<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    grid_l: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Computed,
    Published,
    Exact,
}

impl From<Model> for FirstOrderModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Computed => FirstOrderModel::Computed,
            Model::Published => FirstOrderModel::Published,
            Model::Exact => FirstOrderModel::Exact,
        }
    }
}

enum Failure {
    Validation(String),
    Divergence(String),
    Io(String),
    Selftest,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Selftest => 1,
            Failure::Validation(_) => 2,
            Failure::Divergence(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<whasym::Error> for Failure {
    fn from(e: whasym::Error) -> Self {
        match e {
            whasym::Error::Divergence { .. } => Failure::Divergence(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load_problem(args: &ProblemArgs) -> Result<ProblemSpec, Failure> {
    let mut problem = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
        }
        None => ProblemSpec::preset(Preset::PaperExample),
    };
    if let Some(&phi) = args.phi.first() {
        problem.phi = phi;
    }
    if let Some(order) = args.order {
        problem.order = order;
    }
    if let Some(n) = args.grid_n {
        problem.grid.nodes = n;
    }
    if let Some(l) = args.grid_l {
        problem.grid.scale = l;
    }
    if let Some(tol) = args.tol {
        problem.tol = tol;
    }
    problem.validate()?;
    Ok(problem)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| io_failure(path, e)),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn factorize(args: &ProblemArgs) -> Result<(), Failure> {
    if args.phi.len() > 1 {
        return Err(Failure::Validation("factorize takes a single --phi".into()));
    }
    let problem = load_problem(args)?;
    let result = whasym::factorize(&problem)?;
    let bytes = output::factorization_json(&result).map_err(|e| Failure::Io(e.to_string()))?;
    emit(args.out.as_deref(), &bytes)
}

fn analyze(args: &ProblemArgs, model: Model) -> Result<(), Failure> {
    let problem = load_problem(args)?;
    let phis = if args.phi.is_empty() {
        vec![problem.phi]
    } else {
        args.phi.clone()
    };
    let reports = whasym::analyze(&problem, &phis, model.into())?;
    let bytes = output::rows_csv(&merged_rows(&reports)).map_err(|e| Failure::Io(e.to_string()))?;
    emit(args.out.as_deref(), &bytes)
}

fn selftest(out: Option<&Path>, grid_n: usize, grid_l: f64) -> Result<(), Failure> {
    let report = selftest::run(grid_l, grid_n)?;
    let mut text = String::new();
    for check in &report.checks {
        text.push_str(&format!("{check}\n"));
    }
    for line in &report.alpha_table {
        text.push_str(&format!("{line}\n"));
    }
    let verdict = if report.passed() {
        "all checks passed"
    } else {
        "some checks failed"
    };
    text.push_str(&format!("selftest: {verdict}\n"));
    emit(out, text.as_bytes())?;
    if out.is_some() {
        print!("{text}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Selftest)
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Validation("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Factorize(args) => factorize(args),
        Command::Analyze { problem, model } => analyze(problem, *model),
        Command::Selftest { out, grid_n, grid_l } => selftest(out.as_deref(), *grid_n, *grid_l),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (kind, message) = match &failure {
                Failure::Validation(m) => ("validation", m.as_str()),
                Failure::Divergence(m) => ("divergence", m.as_str()),
                Failure::Io(m) => ("io", m.as_str()),
                Failure::Selftest => ("selftest", "one or more oracle checks failed"),
            };
            let body = serde_json::json!({
                "error": { "kind": kind, "code": failure.code(), "message": message }
            });
            eprintln!("{body}");
            ExitCode::from(failure.code())
        }
    }
}
