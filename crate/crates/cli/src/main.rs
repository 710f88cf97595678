//! `depbound` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use depbound::bounds::{coskewness_bounds, product_bounds, ProductMethod};
use depbound::bra::{run_bra, BraConfig, Direction, SubsetMode};
use depbound::copulas::{sample_copula, CopulaKind};
use depbound::marginals::parse_marginal_list;
use depbound::stats::{coskewness, rank_coskewness_with_error, SampleTriple};
use depbound::{Error, Grid};

mod repro;

#[derive(Parser)]
#[command(
    name = "depbound",
    version,
    about = "Bounds on expected products and coskewness under dependence uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form, quadrature or rearrangement bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Run the block rearrangement algorithm.
    Bra(BraArgs),
    /// Draw from a copula construction and write the uniforms as CSV.
    SampleCopula(SampleArgs),
    /// Empirical standardized rank coskewness of a three-column CSV file.
    RankCoskewness(DataArgs),
    /// Sample coskewness of a three-column CSV file.
    Coskewness(DataArgs),
    /// Reproduction runs.
    #[command(subcommand)]
    Repro(repro::ReproCmd),
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Bounds on E(X1...Xd).
    Product {
        #[arg(long)]
        marginals: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Grid size for the rearrangement fallback.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Bounds on the coskewness of three symmetric marginals.
    Coskewness {
        #[arg(long)]
        marginals: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Analytic,
    Bra,
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum DirectionArg {
    Max,
    Min,
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum GridArg {
    Stratified,
    Iid,
}

impl From<GridArg> for Grid {
    fn from(g: GridArg) -> Grid {
        match g {
            GridArg::Stratified => Grid::Stratified,
            GridArg::Iid => Grid::Iid,
        }
    }
}

#[derive(Args)]
struct BraArgs {
    #[arg(long)]
    marginals: String,
    #[arg(long, value_enum)]
    direction: DirectionArg,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sweep all bipartitions instead of random blocks.
    #[arg(long)]
    exhaustive: bool,
    /// Force random blocks.
    #[arg(long, conflicts_with = "exhaustive")]
    random: bool,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, default_value_t = 50)]
    window: usize,
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = GridArg::Stratified)]
    grid: GridArg,
    /// Write the final scenario matrix as CSV.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    MaxOdd,
    MaxEven,
    MinOdd,
    MinEven,
    StrongPositive,
    StrongNegative,
    Comonotonic,
    AntimonotonicLast,
    Independent,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Split point of the shifted constructions.
    #[arg(long)]
    c: Option<f64>,
    /// Derive `c` from the support `[a, b]` of the uniform marginals.
    #[arg(long, requires = "b", conflicts_with = "c", allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, requires = "a")]
    b: Option<f64>,
    #[arg(long, value_enum, default_value_t = GridArg::Stratified)]
    grid: GridArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row and three numeric columns.
    #[arg(long)]
    data: PathBuf,
}

/// A failure tied to the flag that caused it.
pub(crate) struct Failure {
    flag: Option<&'static str>,
    msg: String,
    code: u8,
}

impl Failure {
    pub(crate) fn new(flag: Option<&'static str>, err: Error) -> Self {
        let code = match err {
            Error::Integration(_) | Error::ConditionNotMet(_) | Error::DegenerateSample(_) => 3,
            _ => 2,
        };
        Failure {
            flag,
            msg: err.to_string(),
            code,
        }
    }

    pub(crate) fn io(path: &Path, err: io::Error) -> Self {
        Failure {
            flag: None,
            msg: format!("{}: {err}", path.display()),
            code: 2,
        }
    }

    pub(crate) fn numerical(msg: String) -> Self {
        Failure {
            flag: None,
            msg,
            code: 3,
        }
    }
}

pub(crate) type CmdResult = Result<Outcome, Failure>;

/// JSON document for stdout and whether the run converged.
pub(crate) const NOT_CONVERGED: &str = "the rearrangement stopped at the iteration limit before converging";

pub(crate) struct Outcome {
    pub(crate) json: serde_json::Value,
    /// Printed to stderr with exit code 3 after the result.
    pub(crate) warning: Option<&'static str>,
}

impl Outcome {
    pub(crate) fn ok(json: serde_json::Value) -> Self {
        Outcome { json, warning: None }
    }
}

pub(crate) fn flag<T>(name: &'static str, r: depbound::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::new(Some(name), e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

fn bounds(cmd: BoundsCmd) -> CmdResult {
    match cmd {
        BoundsCmd::Product {
            marginals,
            method,
            n,
            seed,
        } => {
            let ms = flag("--marginals", parse_marginal_list(&marginals))?;
            let method = match method {
                MethodArg::Auto => ProductMethod::Auto,
                MethodArg::Analytic => ProductMethod::Analytic,
                MethodArg::Bra => ProductMethod::Bra,
            };
            let cfg = BraConfig::new(n, Direction::Max).seed(seed);
            let r = flag("--marginals", product_bounds(&ms, method, &cfg))?;
            Ok(Outcome::ok(serde_json::to_value(r).expect("serializable")))
        }
        BoundsCmd::Coskewness { marginals } => {
            let ms = flag("--marginals", parse_marginal_list(&marginals))?;
            let r = flag("--marginals", coskewness_bounds(&ms))?;
            Ok(Outcome::ok(serde_json::to_value(r).expect("serializable")))
        }
    }
}

fn bra(a: BraArgs) -> CmdResult {
    let ms = flag("--marginals", parse_marginal_list(&a.marginals))?;
    let direction = match a.direction {
        DirectionArg::Max => Direction::Max,
        DirectionArg::Min => Direction::Min,
    };
    let mut cfg = BraConfig::new(a.n, direction).seed(a.seed);
    cfg.subset_mode = if a.exhaustive {
        Some(SubsetMode::Exhaustive)
    } else if a.random {
        Some(SubsetMode::Random)
    } else {
        None
    };
    cfg.restarts = a.restarts;
    cfg.window = a.window;
    cfg.rel_tol = a.rel_tol;
    cfg.max_iters = a.max_iters;
    cfg.grid = a.grid.into();
    let bad = |name: &'static str, msg: String| {
        Err(Failure {
            flag: Some(name),
            msg,
            code: 2,
        })
    };
    if a.n < 2 {
        return bad("--n", format!("must be at least 2, got {}", a.n));
    }
    if !(a.rel_tol > 0.0) {
        return bad("--rel-tol", format!("must be positive, got {}", a.rel_tol));
    }
    if a.window == 0 {
        return bad("--window", "must be at least 1".into());
    }
    if a.restarts == Some(0) {
        return bad("--restarts", "must be at least 1".into());
    }
    if a.exhaustive && ms.len() > depbound::bra::MAX_EXHAUSTIVE_D {
        return bad(
            "--exhaustive",
            format!("not supported for d = {}; drop the flag", ms.len()),
        );
    }
    let r = flag("--marginals", run_bra(&ms, &cfg))?;
    if let Some(path) = &a.dump_matrix {
        let mut w = create(path)?;
        r.matrix
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::io(path, e))?;
    }
    Ok(Outcome {
        json: json!({
            "lambda": r.lambda,
            "iterations": r.iterations,
            "converged": r.converged,
            "block_optimal": r.block_optimal,
            "se_estimate": r.se_estimate,
            "restart": r.restart,
            "n": a.n,
            "d": ms.len(),
            "direction": direction,
        }),
        warning: (!r.converged).then_some(NOT_CONVERGED),
    })
}

fn sample(a: SampleArgs) -> CmdResult {
    let c = match (a.c, a.a, a.b) {
        (Some(c), _, _) => Some(Ok(c)),
        (None, Some(lo), Some(hi)) => Some(
            match a.kind {
                KindArg::StrongNegative => CopulaKind::strong_negative_for(lo, hi),
                _ => CopulaKind::strong_positive_for(lo, hi),
            }
            .map(|k| match k {
                CopulaKind::StrongPositive { c } | CopulaKind::StrongNegative { c } => c,
                _ => unreachable!(),
            }),
        ),
        _ => None,
    };
    let needs_c = |c: Option<depbound::Result<f64>>| -> Result<f64, Failure> {
        match c {
            Some(r) => flag("--a", r),
            None => Err(Failure {
                flag: Some("--c"),
                msg: "this kind needs --c or --a/--b".into(),
                code: 2,
            }),
        }
    };
    let kind = match a.kind {
        KindArg::MaxOdd => CopulaKind::MaxOdd,
        KindArg::MaxEven => CopulaKind::MaxEven,
        KindArg::MinOdd => CopulaKind::MinOdd,
        KindArg::MinEven => CopulaKind::MinEven,
        KindArg::StrongPositive => CopulaKind::StrongPositive { c: needs_c(c)? },
        KindArg::StrongNegative => CopulaKind::StrongNegative { c: needs_c(c)? },
        KindArg::Comonotonic => CopulaKind::Comonotonic,
        KindArg::AntimonotonicLast => CopulaKind::AntimonotonicLast,
        KindArg::Independent => CopulaKind::Independent,
    };
    let rows = flag("--d", sample_copula(kind, a.d, a.n, a.seed, a.grid.into()))?;
    let mut w = create(&a.out)?;
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        let header: Vec<String> = (1..=a.d).map(|i| format!("u{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for r in &rows {
            let line: Vec<String> = r.0.iter().map(f64::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Failure::io(&a.out, e))?;
    Ok(Outcome::ok(json!({
        "kind": kind.name(),
        "d": a.d,
        "n": a.n,
        "seed": a.seed,
        "out": a.out.display().to_string(),
    })))
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Bounds(cmd) => bounds(cmd),
        Command::Bra(a) => bra(a),
        Command::SampleCopula(a) => sample(a),
        Command::RankCoskewness(a) => {
            let s = flag("--data", SampleTriple::from_csv(&a.data))?;
            let e = rank_coskewness_with_error(&s);
            Ok(Outcome::ok(json!({ "rs": e.value, "se": e.se, "n": e.n })))
        }
        Command::Coskewness(a) => {
            let s = flag("--data", SampleTriple::from_csv(&a.data))?;
            let v = flag("--data", coskewness(&s))?;
            Ok(Outcome::ok(json!({ "coskewness": v, "n": s.n() })))
        }
        Command::Repro(cmd) => repro::run(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let text = match &out.json {
                serde_json::Value::String(s) => s.clone(),
                v => serde_json::to_string_pretty(v).expect("serializable"),
            };
            println!("{text}");
            match out.warning {
                None => ExitCode::SUCCESS,
                Some(w) => {
                    eprintln!("error: {w}");
                    ExitCode::from(3)
                }
            }
        }
        Err(f) => {
            match f.flag {
                Some(name) => eprintln!("error: {name}: {}", f.msg),
                None => eprintln!("error: {}", f.msg),
            }
            ExitCode::from(f.code)
        }
    }
}
