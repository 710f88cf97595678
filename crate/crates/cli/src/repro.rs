use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use depbound::bounds::{coskewness_bounds, table2_closed_form, wang_wang_min_uniform01};
use depbound::bra::{run_bra, BraConfig, Direction};
use depbound::copulas::CopulaKind;
use depbound::marginals::Marginal;
use depbound::stats::mc_expect_product;

use crate::{create, flag, CmdResult, Failure, GridArg, Outcome, NOT_CONVERGED};

#[derive(Subcommand)]
pub(crate) enum ReproCmd {
    /// Minimum of E(U1...Ud) for standard uniforms: closed form against rearrangement.
    Table1(Table1Args),
    /// Maximum coskewness per symmetric family: closed form against quadrature.
    Table2(Common),
    /// Coskewness bounds for three lognormals, and the cross-product constructions.
    Lognormal(LognormalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub(crate) struct Common {
    /// Format of the result on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the table as CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub(crate) struct Table1Args {
    #[arg(long, value_delimiter = ',', default_values_t = vec![3usize, 5, 10])]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![100_000usize])]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    experiments: usize,
    #[arg(long, value_enum, default_value_t = GridArg::Stratified)]
    grid: GridArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub(crate) struct LognormalArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct Table1Row {
    d: usize,
    n: usize,
    analytic: f64,
    bra_mean: f64,
    bra_se: f64,
    seconds: f64,
    converged: bool,
}

#[derive(Serialize)]
struct Table2Row {
    family: String,
    closed: f64,
    quadrature: f64,
    abs_diff: f64,
}

#[derive(Serialize)]
struct LognormalRow {
    n: usize,
    seed: u64,
    max: f64,
    min: f64,
    maxodd_copula: f64,
    maxodd_se: f64,
    minodd_copula: f64,
    minodd_se: f64,
    maxodd_uncentered: f64,
    minodd_uncentered: f64,
    converged: bool,
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DEPBOUND_THREADS") {
        let k: usize = v.parse().ok().filter(|&k| k > 0).ok_or(Failure {
            flag: Some("DEPBOUND_THREADS"),
            msg: format!("expected a positive integer, got {v:?}"),
            code: 2,
        })?;
        b = b.num_threads(k);
    }
    b.build().map_err(|e| Failure::numerical(e.to_string()))
}

fn emit<R: Serialize>(rows: &[R], common: &Common, warning: Option<&'static str>) -> CmdResult {
    let csv_text = || -> Result<String, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Failure::numerical(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    };
    if let Some(path) = &common.out {
        use std::io::Write;
        let text = csv_text()?;
        let mut f = create(path)?;
        f.write_all(text.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| Failure::io(path, e))?;
    }
    let json = match common.format {
        Format::Json => serde_json::to_value(rows).expect("serializable"),
        Format::Csv => serde_json::Value::String(csv_text()?.trim_end().to_string()),
    };
    Ok(Outcome { json, warning })
}

fn table1(a: Table1Args) -> CmdResult {
    if let Some(&d) = a.d.iter().find(|&&d| d < 2) {
        return Err(Failure {
            flag: Some("--d"),
            msg: format!("dimensions must be at least 2, got {d}"),
            code: 2,
        });
    }
    if let Some(&n) = a.n.iter().find(|&&n| n < 2) {
        return Err(Failure {
            flag: Some("--n"),
            msg: format!("grid sizes must be at least 2, got {n}"),
            code: 2,
        });
    }
    if a.experiments == 0 {
        return Err(Failure {
            flag: Some("--experiments"),
            msg: "need at least one experiment".into(),
            code: 2,
        });
    }
    let pool = thread_pool()?;
    let mut rows = Vec::new();
    for &d in &a.d {
        let analytic = flag("--d", wang_wang_min_uniform01(d))?;
        let ms = vec![Marginal::uniform(0.0, 1.0).expect("valid"); d];
        for &n in &a.n {
            let start = Instant::now();
            let runs: Vec<depbound::Result<(f64, bool)>> = pool.install(|| {
                (0..a.experiments)
                    .into_par_iter()
                    .map(|r| {
                        let mut cfg = BraConfig::new(n, Direction::Min).seed(a.seed + r as u64);
                        cfg.grid = a.grid.into();
                        run_bra(&ms, &cfg).map(|res| (res.lambda, res.converged))
                    })
                    .collect()
            });
            let runs = runs
                .into_iter()
                .collect::<depbound::Result<Vec<_>>>()
                .map_err(|e| Failure::new(None, e))?;
            let lambdas: Vec<f64> = runs.iter().map(|r| r.0).collect();
            let est = depbound::stats::EstimateWithError::from_values(&lambdas);
            rows.push(Table1Row {
                d,
                n,
                analytic,
                bra_mean: est.value,
                bra_se: est.se,
                seconds: start.elapsed().as_secs_f64() / a.experiments as f64,
                converged: runs.iter().all(|r| r.1),
            });
        }
    }
    let ok = rows.iter().all(|r| r.converged);
    emit(&rows, &a.common, (!ok).then_some(NOT_CONVERGED))
}

/// Families with a closed-form maximum coskewness.
pub(crate) fn table2_families() -> Vec<(String, Marginal)> {
    let mut v = vec![("normal".to_string(), Marginal::normal(0.0, 1.0).expect("valid"))];
    for nu in [4.0, 5.0, 10.0] {
        v.push((format!("student(nu={nu})"), Marginal::student_t(nu).expect("valid")));
    }
    v.push(("laplace".into(), Marginal::laplace(0.0, 1.0).expect("valid")));
    v.push(("uniform".into(), Marginal::uniform(0.0, 1.0).expect("valid")));
    v
}

fn table2(common: Common) -> CmdResult {
    let mut rows = Vec::new();
    for (family, m) in table2_families() {
        let closed = table2_closed_form(&m).map_err(|e| Failure::new(None, e))?;
        let quad = coskewness_bounds(&vec![m; 3]).map_err(|e| Failure::new(None, e))?.upper;
        rows.push(Table2Row {
            family,
            closed,
            quadrature: quad,
            abs_diff: (closed - quad).abs(),
        });
    }
    let ok = rows.iter().all(|r| r.abs_diff <= 1e-8);
    emit(
        &rows,
        &common,
        (!ok).then_some("closed form and quadrature differ by more than 1e-8"),
    )
}

fn lognormal(a: LognormalArgs) -> CmdResult {
    if a.n < 2 {
        return Err(Failure {
            flag: Some("--n"),
            msg: format!("n must be at least 2, got {}", a.n),
            code: 2,
        });
    }
    if a.restarts == 0 {
        return Err(Failure {
            flag: Some("--restarts"),
            msg: "need at least one restart".into(),
            code: 2,
        });
    }
    let z = Marginal::lognormal(0.0, 1.0)
        .expect("valid")
        .standardize()
        .expect("nondegenerate");
    let ms = vec![z; 3];
    let pool = thread_pool()?;
    let bra = |dir| {
        let cfg = BraConfig::new(a.n, dir).seed(a.seed).restarts(a.restarts);
        run_bra(&ms, &cfg)
    };
    let (hi, lo) = pool.install(|| rayon::join(|| bra(Direction::Max), || bra(Direction::Min)));
    let (hi, lo) = (
        hi.map_err(|e| Failure::new(None, e))?,
        lo.map_err(|e| Failure::new(None, e))?,
    );
    let maxodd = mc_expect_product(&ms, CopulaKind::MaxOdd, a.n, a.seed).map_err(|e| Failure::new(None, e))?;
    let minodd = mc_expect_product(&ms, CopulaKind::MinOdd, a.n, a.seed).map_err(|e| Failure::new(None, e))?;
    // E[X1 X2 X3] / σ³ on the raw lognormals, without centering.
    let raw = vec![Marginal::lognormal(0.0, 1.0).expect("valid"); 3];
    let s3 = ((1f64.exp() - 1.0) * 1f64.exp()).powf(1.5);
    let uncentered = |kind| mc_expect_product(&raw, kind, a.n, a.seed).map(|e| e.value / s3);
    let maxodd_raw = uncentered(CopulaKind::MaxOdd).map_err(|e| Failure::new(None, e))?;
    let minodd_raw = uncentered(CopulaKind::MinOdd).map_err(|e| Failure::new(None, e))?;
    let row = LognormalRow {
        n: a.n,
        seed: a.seed,
        max: hi.lambda,
        min: lo.lambda,
        maxodd_copula: maxodd.value,
        maxodd_se: maxodd.se,
        minodd_copula: minodd.value,
        minodd_se: minodd.se,
        maxodd_uncentered: maxodd_raw,
        minodd_uncentered: minodd_raw,
        converged: hi.converged && lo.converged,
    };
    let warning = (!row.converged).then_some(NOT_CONVERGED);
    let mut out = emit(std::slice::from_ref(&row), &a.common, warning)?;
    if a.common.format == Format::Json {
        out.json = json!(row);
    }
    Ok(out)
}

pub(crate) fn run(cmd: ReproCmd) -> CmdResult {
    match cmd {
        ReproCmd::Table1(a) => table1(a),
        ReproCmd::Table2(c) => table2(c),
        ReproCmd::Lognormal(a) => lognormal(a),
    }
}
