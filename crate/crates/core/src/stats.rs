//! Sample coskewness, standardized rank coskewness and Monte Carlo product
//! moments.
//!
//! Moments use the population convention (divide by `n`). Ranks are average
//! ranks scaled by `1/(n + 1)`, so any strictly increasing transform of a
//! column leaves the rank coskewness unchanged bit for bit.
//!
//! ```
//! use depbound::stats::{rank_coskewness, SampleTriple};
//!
//! let s = SampleTriple::new(vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 30.0], vec![-1.0, 0.0, 5.0])?;
//! let e = SampleTriple::new(
//!     s.x1().iter().map(|x| x.exp()).collect(),
//!     s.x2().to_vec(),
//!     s.x3().iter().map(|x| x * x * x).collect(),
//! )?;
//! assert_eq!(rank_coskewness(&s).to_bits(), rank_coskewness(&e).to_bits());
//! # Ok::<(), depbound::Error>(())
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::copulas::{apply_marginals, sample_copula, CopulaKind};
use crate::error::{Error, Result};
use crate::marginals::Univariate;
use crate::rng::Grid;

/// Three equal-length columns of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTriple {
    cols: [Vec<f64>; 3],
}

impl SampleTriple {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>, x3: Vec<f64>) -> Result<Self> {
        let n = x1.len();
        if x2.len() != n || x3.len() != n {
            return Err(Error::DegenerateSample(format!(
                "columns have lengths {}, {}, {}",
                n,
                x2.len(),
                x3.len()
            )));
        }
        if n < 2 {
            return Err(Error::DegenerateSample(format!("need at least 2 rows, got {n}")));
        }
        let cols = [x1, x2, x3];
        if cols.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateSample("sample contains non-finite values".into()));
        }
        Ok(SampleTriple { cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != 3) {
            return Err(Error::DegenerateSample(format!("expected 3 columns, got {}", r.len())));
        }
        let col = |i: usize| rows.iter().map(|r| r[i]).collect();
        Self::new(col(0), col(1), col(2))
    }

    /// Reads a comma-separated file with a header row and three numeric columns.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let data_err = |msg: String| Error::Data {
            path: path.to_path_buf(),
            msg,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| data_err(e.to_string()))?;
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| data_err(e.to_string()))?;
            if rec.len() != 3 {
                return Err(data_err(format!(
                    "line {}: expected 3 columns, got {}",
                    i + 2,
                    rec.len()
                )));
            }
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| data_err(format!("line {}: {e}", i + 2)))?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.cols[0].len()
    }

    pub fn x1(&self) -> &[f64] {
        &self.cols[0]
    }

    pub fn x2(&self) -> &[f64] {
        &self.cols[1]
    }

    pub fn x3(&self) -> &[f64] {
        &self.cols[2]
    }
}

/// A Monte Carlo mean with its standard error `sd/√n` (sample sd, `n − 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

impl EstimateWithError {
    pub fn from_values(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        EstimateWithError { value: mean, se, n }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `E[(X₁−μ₁)(X₂−μ₂)(X₃−μ₃)] / (σ₁σ₂σ₃)` with population moments.
pub fn coskewness(s: &SampleTriple) -> Result<f64> {
    let mut centered = Vec::with_capacity(3);
    let mut scale = 1.0;
    for (i, c) in s.cols.iter().enumerate() {
        let mu = mean(c);
        let z: Vec<f64> = c.iter().map(|x| x - mu).collect();
        let sd = (z.iter().map(|v| v * v).sum::<f64>() / c.len() as f64).sqrt();
        if !(sd > 0.0) {
            return Err(Error::DegenerateSample(format!("column {} has zero variance", i + 1)));
        }
        scale *= sd;
        centered.push(z);
    }
    let m3 = (0..s.n())
        .map(|j| centered[0][j] * centered[1][j] * centered[2][j])
        .sum::<f64>()
        / s.n() as f64;
    Ok(m3 / scale)
}

/// Average ranks `1..=n`; tied values share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && xs[idx[end]] == xs[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

/// Per-row terms `32 ∏ (r_i/(n+1) − 1/2)`.
fn rank_terms(s: &SampleTriple) -> Vec<f64> {
    let scale = 1.0 / (s.n() + 1) as f64;
    let r: Vec<Vec<f64>> = s.cols.iter().map(|c| average_ranks(c)).collect();
    (0..s.n())
        .map(|j| 32.0 * (r[0][j] * scale - 0.5) * (r[1][j] * scale - 0.5) * (r[2][j] * scale - 0.5))
        .collect()
}

/// Empirical standardized rank coskewness, in `[−1, 1]` up to sampling error.
pub fn rank_coskewness(s: &SampleTriple) -> f64 {
    mean(&rank_terms(s))
}

/// [`rank_coskewness`] with the standard error of its per-row terms.
pub fn rank_coskewness_with_error(s: &SampleTriple) -> EstimateWithError {
    EstimateWithError::from_values(&rank_terms(s))
}

/// `32 E ∏ (U_i − 1/2)` for a three-dimensional copula, by simulation.
pub fn rank_coskewness_population(kind: CopulaKind, n: usize, seed: u64) -> Result<EstimateWithError> {
    let rows = sample_copula(kind, 3, n, seed, Grid::Iid)?;
    let terms: Vec<f64> = rows
        .iter()
        .map(|r| 32.0 * r.0.iter().map(|u| u - 0.5).product::<f64>())
        .collect();
    Ok(EstimateWithError::from_values(&terms))
}

/// Mean of `∏ F_i⁻¹(U_i)` over `n` draws of the copula.
pub fn mc_expect_product<M: Univariate>(ms: &[M], kind: CopulaKind, n: usize, seed: u64) -> Result<EstimateWithError> {
    let rows = sample_copula(kind, ms.len(), n, seed, Grid::Iid)?;
    let x = apply_marginals(&rows, ms)?;
    let prods: Vec<f64> = x.iter().map(|r| r.iter().product()).collect();
    Ok(EstimateWithError::from_values(&prods))
}
