//! Block rearrangement algorithm.
//!
//! An optimal coupling for `max E∏Xᵢ` (resp. `min`) has the property that for
//! every split of the columns into a block `I` and its complement, the row
//! products `∏_{i∈I} Xᵢ` and `∏_{i∉I} Xᵢ` are comonotonic (resp.
//! antimonotonic). The algorithm discretizes each marginal into a column of
//! an `n × d` scenario matrix and repeatedly enforces this condition: it
//! reorders the rows of one block so that its products are sorted like (or
//! against) the products of the other block. Rows move as whole rows of the
//! block, so every column keeps its multiset of values.
//!
//! ```
//! use depbound::bra::{run_bra, BraConfig, Direction};
//! use depbound::marginals::Marginal;
//!
//! let ms = vec![Marginal::uniform(0.0, 1.0)?; 3];
//! let res = run_bra(&ms, &BraConfig::new(2_000, Direction::Min))?;
//! // The exact minimum for three standard uniforms is 5.4803e-2.
//! assert!((res.lambda - 5.4803e-2).abs() < 5e-4);
//! # Ok::<(), depbound::Error>(())
//! ```

use std::io::Write;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::Univariate;
use crate::rng::{seeded, Grid, RowStream};

/// Column-major `n × d` matrix of scenarios. Column `i` holds a discretized
/// copy of marginal `i`; row `j` is one joint outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    n: usize,
    cols: Vec<Vec<f64>>,
}

impl ScenarioMatrix {
    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self> {
        let n = cols.first().map_or(0, Vec::len);
        if cols.is_empty() || n == 0 {
            return Err(Error::InvalidConfig(
                "scenario matrix needs at least one row and column".into(),
            ));
        }
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidConfig("columns have different lengths".into()));
        }
        if cols.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("scenario matrix entries must be finite".into()));
        }
        Ok(ScenarioMatrix { n, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidConfig("rows have different lengths".into()));
        }
        Self::from_columns((0..d).map(|i| rows.iter().map(|r| r[i]).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.cols[i]
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        self.cols.iter().map(|c| c[j]).collect()
    }

    pub fn row_products(&self) -> Vec<f64> {
        let mut p = self.cols[0].clone();
        for c in &self.cols[1..] {
            for (pj, x) in p.iter_mut().zip(c) {
                *pj *= x;
            }
        }
        p
    }

    /// `Λ = (1/n) Σⱼ ∏ᵢ x_{ji}`.
    pub fn lambda(&self) -> f64 {
        neumaier_sum(self.row_products().into_iter()) / self.n as f64
    }

    /// Writes the matrix as CSV with header `x1,...,xd`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.d()).map(|i| format!("x{i}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for j in 0..self.n {
            let row: Vec<String> = self.cols.iter().map(|c| c[j].to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn neumaier_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetMode {
    /// Random blocks of size `1..=⌊d/2⌋`, stopped after `window` steps
    /// without relative progress.
    Random,
    /// Sweeps over all `2^(d−1) − 1` bipartitions, stopped after a sweep
    /// without relative progress.
    Exhaustive,
}

/// Largest dimension for which exhaustive sweeps are accepted.
pub const MAX_EXHAUSTIVE_D: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraConfig {
    pub n: usize,
    pub seed: u64,
    pub direction: Direction,
    /// `None` picks exhaustive sweeps for `d ≤ 8` and random blocks above.
    pub subset_mode: Option<SubsetMode>,
    pub window: usize,
    pub rel_tol: f64,
    pub max_iters: usize,
    pub grid: Grid,
    /// `None` uses 3 restarts for minimization over asymmetric marginals, 1 otherwise.
    pub restarts: Option<usize>,
    /// Keep the value of `Λ` after every accepted step of the returned run.
    pub record_trace: bool,
}

impl BraConfig {
    pub fn new(n: usize, direction: Direction) -> Self {
        BraConfig {
            n,
            seed: 0,
            direction,
            subset_mode: None,
            window: 50,
            rel_tol: 1e-4,
            max_iters: 10_000,
            grid: Grid::Stratified,
            restarts: None,
            record_trace: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn subset_mode(mut self, mode: SubsetMode) -> Self {
        self.subset_mode = Some(mode);
        self
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = Some(restarts);
        self
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if d < 2 {
            return Err(Error::InvalidConfig(format!("need at least two marginals, got {d}")));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if self.restarts == Some(0) {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.resolved_mode(d) == SubsetMode::Exhaustive && d > MAX_EXHAUSTIVE_D {
            return Err(Error::InvalidConfig(format!(
                "exhaustive sweeps over 2^{} bipartitions are not supported; use random blocks",
                d - 1
            )));
        }
        Ok(())
    }

    pub fn resolved_mode(&self, d: usize) -> SubsetMode {
        self.subset_mode.unwrap_or(if d <= 8 {
            SubsetMode::Exhaustive
        } else {
            SubsetMode::Random
        })
    }
}

#[derive(Debug, Clone)]
pub struct BraResult {
    pub lambda: f64,
    pub matrix: ScenarioMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub block_optimal: bool,
    /// Standard deviation of the row products over `√n`.
    pub se_estimate: f64,
    /// Index of the restart that produced the result.
    pub restart: usize,
    pub trace: Vec<f64>,
}

/// Discretizes the marginals on a shared `u`-grid (a comonotonic start).
pub fn init_matrix<M: Univariate>(ms: &[M], n: usize, grid: Grid, seed: u64) -> Result<ScenarioMatrix> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    let us: Vec<f64> = match grid {
        Grid::Stratified => (0..n).map(|j| Grid::midpoint(j, n)).collect(),
        Grid::Iid => {
            let stream = RowStream::new(seed, 0, 1);
            (0..n).map(|j| stream.row(j).open01()).collect()
        }
    };
    let cols = ms.iter().map(|m| us.iter().map(|&u| m.inv_cdf(u)).collect()).collect();
    ScenarioMatrix::from_columns(cols)
}

/// Scratch buffers reused across rearrangement steps.
struct Workspace {
    p1: Vec<f64>,
    p2: Vec<f64>,
    o1: Vec<(f64, u32)>,
    o2: Vec<(f64, u32)>,
    scratch: Vec<f64>,
}

struct Candidate {
    current: f64,
    proposed: f64,
    guard: f64,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            p1: vec![0.0; n],
            p2: vec![0.0; n],
            o1: Vec::with_capacity(n),
            o2: Vec::with_capacity(n),
            scratch: vec![0.0; n],
        }
    }

    /// Computes block products and the row pairing that sorts block
    /// products like (`Max`) or against (`Min`) the complement products.
    fn propose(&mut self, mx: &ScenarioMatrix, block: &[bool], direction: Direction) -> Candidate {
        self.p1.fill(1.0);
        self.p2.fill(1.0);
        for (col, &inside) in mx.cols.iter().zip(block) {
            let target = if inside { &mut self.p1 } else { &mut self.p2 };
            for (p, x) in target.iter_mut().zip(col) {
                *p *= x;
            }
        }
        // `+ 0.0` folds -0.0 into +0.0 so that signed zeros tie.
        let sign = match direction {
            Direction::Max => 1.0,
            Direction::Min => -1.0,
        };
        self.o1.clear();
        self.o1
            .extend(self.p1.iter().enumerate().map(|(j, &p)| (sign * p + 0.0, j as u32)));
        self.o2.clear();
        self.o2
            .extend(self.p2.iter().enumerate().map(|(j, &p)| (p + 0.0, j as u32)));
        // Stable on index-ordered input: ties keep ascending row index.
        radsort::sort_by_key(&mut self.o1, |e| e.0);
        radsort::sort_by_key(&mut self.o2, |e| e.0);

        let current = neumaier_sum(self.p1.iter().zip(&self.p2).map(|(a, b)| a * b));
        let proposed = neumaier_sum(
            self.o1
                .iter()
                .zip(&self.o2)
                .map(|(a, b)| self.p1[a.1 as usize] * self.p2[b.1 as usize]),
        );
        let abs_sum: f64 = self.p1.iter().zip(&self.p2).map(|(a, b)| (a * b).abs()).sum();
        let guard = 4.0 * (mx.d() as f64 + 2.0) * f64::EPSILON * abs_sum;
        Candidate {
            current,
            proposed,
            guard,
        }
    }

    /// Moves block row `o1[k]` to row `o2[k]`.
    fn apply(&mut self, mx: &mut ScenarioMatrix, block: &[bool]) {
        for (col, &inside) in mx.cols.iter_mut().zip(block) {
            if !inside {
                continue;
            }
            for (a, b) in self.o1.iter().zip(&self.o2) {
                self.scratch[b.1 as usize] = col[a.1 as usize];
            }
            std::mem::swap(col, &mut self.scratch);
        }
    }
}

fn improves(direction: Direction, c: &Candidate) -> bool {
    match direction {
        Direction::Max => c.proposed > c.current + c.guard,
        Direction::Min => c.proposed < c.current - c.guard,
    }
}

fn block_mask(d: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; d];
    for &i in subset {
        if i >= d {
            return Err(Error::InvalidSubset(format!("column {i} out of range for d = {d}")));
        }
        if mask[i] {
            return Err(Error::InvalidSubset(format!("column {i} listed twice")));
        }
        mask[i] = true;
    }
    if subset.is_empty() || subset.len() == d {
        return Err(Error::InvalidSubset(
            "block must be a nonempty proper subset of the columns".into(),
        ));
    }
    Ok(mask)
}

/// Reorders the rows of the block `subset` so that its row products are
/// similarly (`Max`) or oppositely (`Min`) ordered to the products of the
/// remaining columns. The matrix is left unchanged when the reordering would
/// not move `Λ` in the requested direction. Returns the new `Λ`.
pub fn rearrange_block(mx: &mut ScenarioMatrix, subset: &[usize], direction: Direction) -> Result<f64> {
    let mask = block_mask(mx.d(), subset)?;
    let mut ws = Workspace::new(mx.n);
    let cand = ws.propose(mx, &mask, direction);
    if improves(direction, &cand) {
        ws.apply(mx, &mask);
    }
    Ok(mx.lambda())
}

/// True iff no listed block can move `Λ` by `rel_tol·|Λ|` or more.
/// Empty or full subsets cannot be rearranged and are skipped.
pub fn check_block_optimality(mx: &ScenarioMatrix, direction: Direction, subsets: &[Vec<usize>], rel_tol: f64) -> bool {
    let mut ws = Workspace::new(mx.n);
    let scale = (mx.lambda() * mx.n as f64).abs();
    subsets.iter().all(|s| {
        let Ok(mask) = block_mask(mx.d(), s) else { return true };
        let c = ws.propose(mx, &mask, direction);
        let gain = match direction {
            Direction::Max => c.proposed - c.current,
            Direction::Min => c.current - c.proposed,
        };
        gain < rel_tol * scale || gain <= c.guard
    })
}

/// All `2^(d−1) − 1` bipartitions, each given by its smaller side.
pub fn all_bipartitions(d: usize) -> Vec<Vec<usize>> {
    assert!((2..=63).contains(&d), "bipartitions are enumerated for 2 ≤ d ≤ 63");
    (1u64..(1u64 << (d - 1)))
        .map(|mask| {
            let side: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
            if side.len() * 2 > d {
                (0..d).filter(|&i| mask >> i & 1 == 0).collect()
            } else {
                side
            }
        })
        .collect()
}

/// A block of uniformly drawn size in `1..=⌊d/2⌋`, then a uniform subset of that size.
pub fn random_block<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<usize> {
    let k = rng.random_range(1..=(d / 2).max(1));
    let mut s = index::sample(rng, d, k).into_vec();
    s.sort_unstable();
    s
}

struct RunOutcome {
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn to_mask(d: usize, subset: &[usize]) -> Vec<bool> {
    let mut m = vec![false; d];
    for &i in subset {
        m[i] = true;
    }
    m
}

fn optimize(mx: &mut ScenarioMatrix, cfg: &BraConfig, rng: &mut ChaCha8Rng) -> RunOutcome {
    let d = mx.d();
    let n = mx.n as f64;
    let mut ws = Workspace::new(mx.n);
    let mut lambda = mx.lambda();
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(lambda);
    }
    let mut iterations = 0;
    let progressed = |from: f64, to: f64| match cfg.direction {
        Direction::Max => to - from > cfg.rel_tol * from.abs(),
        Direction::Min => from - to > cfg.rel_tol * from.abs(),
    };
    let mut step = |mx: &mut ScenarioMatrix, mask: &[bool], lambda: &mut f64, trace: &mut Vec<f64>| {
        let cand = ws.propose(mx, mask, cfg.direction);
        if improves(cfg.direction, &cand) {
            ws.apply(mx, mask);
            *lambda = cand.proposed / n;
            if cfg.record_trace {
                trace.push(*lambda);
            }
        }
    };

    match cfg.resolved_mode(d) {
        SubsetMode::Exhaustive => {
            let masks: Vec<Vec<bool>> = all_bipartitions(d).iter().map(|s| to_mask(d, s)).collect();
            loop {
                let start = lambda;
                for mask in &masks {
                    if iterations >= cfg.max_iters {
                        return RunOutcome {
                            iterations,
                            converged: false,
                            trace,
                        };
                    }
                    step(mx, mask, &mut lambda, &mut trace);
                    iterations += 1;
                }
                if !progressed(start, lambda) {
                    return RunOutcome {
                        iterations,
                        converged: true,
                        trace,
                    };
                }
            }
        }
        SubsetMode::Random => {
            let mut reference = lambda;
            let mut stale = 0;
            while iterations < cfg.max_iters {
                let block = random_block(d, rng);
                step(mx, &to_mask(d, &block), &mut lambda, &mut trace);
                iterations += 1;
                if progressed(reference, lambda) {
                    reference = lambda;
                    stale = 0;
                } else {
                    stale += 1;
                    if stale >= cfg.window {
                        return RunOutcome {
                            iterations,
                            converged: true,
                            trace,
                        };
                    }
                }
            }
            RunOutcome {
                iterations,
                converged: false,
                trace,
            }
        }
    }
}

fn shuffle_columns(mx: &mut ScenarioMatrix, rng: &mut ChaCha8Rng) {
    for col in &mut mx.cols {
        col.shuffle(rng);
    }
}

/// Runs the algorithm on the given marginals. The matrix starts comonotonic;
/// minimization starts from independently shuffled columns instead.
pub fn run_bra<M: Univariate>(ms: &[M], cfg: &BraConfig) -> Result<BraResult> {
    cfg.validate(ms.len())?;
    let start = init_matrix(ms, cfg.n, cfg.grid, cfg.seed)?;
    let default_restarts = if cfg.direction == Direction::Min && ms.iter().any(|m| !m.is_symmetric()) {
        3
    } else {
        1
    };
    let restarts = cfg.restarts.unwrap_or(default_restarts);
    run_restarts(start, cfg, restarts, cfg.direction == Direction::Min)
}

/// Runs the algorithm from a given matrix. Restart 0 starts from `mx` as is;
/// later restarts shuffle its columns first.
pub fn run_bra_on_matrix(mx: ScenarioMatrix, cfg: &BraConfig) -> Result<BraResult> {
    cfg.validate(mx.d())?;
    let restarts = cfg.restarts.unwrap_or(1);
    run_restarts(mx, cfg, restarts, false)
}

fn run_restarts(start: ScenarioMatrix, cfg: &BraConfig, restarts: usize, shuffle_first: bool) -> Result<BraResult> {
    let d = start.d();
    let mut best: Option<(ScenarioMatrix, RunOutcome, f64, usize)> = None;
    for r in 0..restarts {
        let mut mx = start.clone();
        let mut rng = seeded(cfg.seed, 1 + r as u64);
        if shuffle_first || r > 0 {
            shuffle_columns(&mut mx, &mut rng);
        }
        let outcome = optimize(&mut mx, cfg, &mut rng);
        let lambda = mx.lambda();
        let better = match &best {
            None => true,
            Some((_, _, l, _)) => match cfg.direction {
                Direction::Max => lambda > *l,
                Direction::Min => lambda < *l,
            },
        };
        if better {
            best = Some((mx, outcome, lambda, r));
        }
    }
    let (matrix, outcome, lambda, restart) = best.expect("at least one restart");

    let subsets = if d <= 12 {
        all_bipartitions(d)
    } else {
        let mut rng = seeded(cfg.seed, 0);
        (0..200).map(|_| random_block(d, &mut rng)).collect()
    };
    let block_optimal = check_block_optimality(&matrix, cfg.direction, &subsets, cfg.rel_tol);
    let se_estimate = row_product_se(&matrix);
    Ok(BraResult {
        lambda,
        matrix,
        iterations: outcome.iterations,
        converged: outcome.converged,
        block_optimal,
        se_estimate,
        restart,
        trace: outcome.trace,
    })
}

fn row_product_se(mx: &ScenarioMatrix) -> f64 {
    let p = mx.row_products();
    let n = p.len() as f64;
    if p.len() < 2 {
        return 0.0;
    }
    let mean = p.iter().sum::<f64>() / n;
    let var = p.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}
