//! Explicit dependence constructions driven by a pair `(U, V)` of independent
//! uniforms.
//!
//! The cross-product constructions keep `|Xᵢ − median|` comonotonic while
//! steering the sign of the product: with `I = 1{U > 1/2}` and
//! `J = 1{V > 1/2}`, the last two coordinates are `U` or `1 − U` depending on
//! `(I, J)`. Every pairwise projection lies on the two diagonals of the unit
//! square.
//!
//! ```
//! use depbound::copulas::cross_product_max;
//!
//! assert_eq!(cross_product_max(3, 0.8, 0.3).0, vec![0.8, 0.19999999999999996, 0.19999999999999996]);
//! assert_eq!(cross_product_max(4, 0.3, 0.9).0, vec![0.3; 4]);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::Univariate;
use crate::rng::{Grid, RowStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CopulaKind {
    MaxOdd,
    MaxEven,
    MinOdd,
    MinEven,
    /// Maximizing construction for `Uniform(a, b)` marginals with `|a| < b`.
    StrongPositive {
        c: f64,
    },
    /// Minimizing construction for `Uniform(a, b)` marginals with `|a| > b`.
    StrongNegative {
        c: f64,
    },
    Comonotonic,
    AntimonotonicLast,
    Independent,
}

impl CopulaKind {
    /// `StrongPositive` with `c = −2a/(b − a)`.
    pub fn strong_positive_for(a: f64, b: f64) -> Result<Self> {
        if !(a < 0.0 && 0.0 < b && -a < b) {
            return Err(Error::InvalidParameter(format!(
                "need a < 0 < b and |a| < b, got a = {a}, b = {b}"
            )));
        }
        Ok(CopulaKind::StrongPositive { c: -2.0 * a / (b - a) })
    }

    /// `StrongNegative` with `c = (−b − a)/(b − a)`.
    pub fn strong_negative_for(a: f64, b: f64) -> Result<Self> {
        if !(a < 0.0 && 0.0 < b && -a > b) {
            return Err(Error::InvalidParameter(format!(
                "need a < 0 < b and |a| > b, got a = {a}, b = {b}"
            )));
        }
        Ok(CopulaKind::StrongNegative { c: (-b - a) / (b - a) })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CopulaKind::MaxOdd => "max-odd",
            CopulaKind::MaxEven => "max-even",
            CopulaKind::MinOdd => "min-odd",
            CopulaKind::MinEven => "min-even",
            CopulaKind::StrongPositive { .. } => "strong-positive",
            CopulaKind::StrongNegative { .. } => "strong-negative",
            CopulaKind::Comonotonic => "comonotonic",
            CopulaKind::AntimonotonicLast => "antimonotonic-last",
            CopulaKind::Independent => "independent",
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(format!("need d >= 2, got {d}")));
        }
        let odd = d % 2 == 1;
        let parity_ok = match self {
            CopulaKind::MaxOdd | CopulaKind::MinOdd => odd,
            CopulaKind::StrongPositive { .. } | CopulaKind::StrongNegative { .. } => odd,
            CopulaKind::MaxEven | CopulaKind::MinEven => !odd,
            _ => true,
        };
        if !parity_ok {
            let want = if odd { "even" } else { "odd" };
            return Err(Error::UnsupportedDimension(format!(
                "{} needs {want} d, got {d}",
                self.name()
            )));
        }
        if let CopulaKind::StrongPositive { c } | CopulaKind::StrongNegative { c } = *self {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::InvalidParameter(format!("c must lie in (0, 1), got {c}")));
            }
        }
        Ok(())
    }
}

/// One draw of a `d`-dimensional copula.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformVector(pub Vec<f64>);

fn with_tail(d: usize, u: f64, second_last: f64, last: f64) -> UniformVector {
    let mut x = vec![u; d];
    x[d - 2] = second_last;
    x[d - 1] = last;
    UniformVector(x)
}

/// Maximizing cross-product construction; `(u, …, u)` for even `d`.
pub fn cross_product_max(d: usize, u: f64, v: f64) -> UniformVector {
    assert!(d >= 2);
    if d % 2 == 0 {
        return UniformVector(vec![u; d]);
    }
    let (i, j) = (u > 0.5, v > 0.5);
    let flip = 1.0 - u;
    let second_last = if j { u } else { flip };
    let last = if i == j { u } else { flip };
    with_tail(d, u, second_last, last)
}

/// Minimizing cross-product construction; `(u, …, u, 1 − u)` for even `d`.
pub fn cross_product_min(d: usize, u: f64, v: f64) -> UniformVector {
    assert!(d >= 2);
    if d % 2 == 0 {
        return with_tail(d, u, u, 1.0 - u);
    }
    let (i, j) = (u > 0.5, v > 0.5);
    let flip = 1.0 - u;
    let second_last = if j { u } else { flip };
    let last = match (i, j) {
        (true, false) | (false, true) => u,
        _ => flip,
    };
    with_tail(d, u, second_last, last)
}

/// Construction for shifted uniforms with more mass above zero. Coordinates
/// coincide for `u > c`; below `c` the sign flips around `c/2`.
pub fn strong_positive(d: usize, u: f64, v: f64, c: f64) -> Result<UniformVector> {
    CopulaKind::StrongPositive { c }.check(d)?;
    if u > c {
        return Ok(UniformVector(vec![u; d]));
    }
    let (k, j) = (u > 0.5 * c, v > 0.5);
    let mirror = c - u;
    let second_last = if j { u } else { mirror };
    let last = match (k, j) {
        (true, true) | (false, false) => u,
        _ => mirror,
    };
    Ok(with_tail(d, u, second_last, last))
}

/// Construction for shifted uniforms with more mass below zero. Coordinates
/// coincide for `u < c`; above `c` the sign flips around `(1 + c)/2`.
pub fn strong_negative(d: usize, u: f64, v: f64, c: f64) -> Result<UniformVector> {
    CopulaKind::StrongNegative { c }.check(d)?;
    if u < c {
        return Ok(UniformVector(vec![u; d]));
    }
    let (k, j) = (u > 0.5 * (1.0 + c), v > 0.5);
    let mirror = 1.0 + c - u;
    let second_last = if j { u } else { mirror };
    let last = match (k, j) {
        (true, true) | (false, false) => mirror,
        _ => u,
    };
    Ok(with_tail(d, u, second_last, last))
}

fn evaluate(kind: CopulaKind, d: usize, u: f64, v: f64) -> UniformVector {
    match kind {
        CopulaKind::MaxOdd | CopulaKind::MaxEven => cross_product_max(d, u, v),
        CopulaKind::MinOdd | CopulaKind::MinEven => cross_product_min(d, u, v),
        CopulaKind::StrongPositive { c } => strong_positive(d, u, v, c).expect("checked"),
        CopulaKind::StrongNegative { c } => strong_negative(d, u, v, c).expect("checked"),
        CopulaKind::Comonotonic => UniformVector(vec![u; d]),
        CopulaKind::AntimonotonicLast => with_tail(d, u, u, 1.0 - u),
        CopulaKind::Independent => unreachable!(),
    }
}

/// `n` draws from `kind` in dimension `d`. Row `j` depends only on
/// `(seed, j)`, so any split of the rows reproduces the same sample.
pub fn sample_copula(kind: CopulaKind, d: usize, n: usize, seed: u64, grid: Grid) -> Result<Vec<UniformVector>> {
    kind.check(d)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let stream = RowStream::new(seed, 0, d + 1);
    let rows = (0..n)
        .map(|j| {
            let mut rng = stream.row(j);
            let u = match grid {
                Grid::Stratified => Grid::midpoint(j, n),
                Grid::Iid => rng.open01(),
            };
            if kind == CopulaKind::Independent {
                let mut x = Vec::with_capacity(d);
                x.push(u);
                x.extend((1..d).map(|_| rng.open01()));
                return UniformVector(x);
            }
            // Only J = 1{V > 1/2} matters; draw it as a fair coin.
            let v = if rng.coin() { 0.75 } else { 0.25 };
            evaluate(kind, d, u, v)
        })
        .collect();
    Ok(rows)
}

/// Maps each coordinate through the matching quantile function.
pub fn apply_marginals<M: Univariate>(rows: &[UniformVector], ms: &[M]) -> Result<Vec<Vec<f64>>> {
    if rows.first().is_some_and(|r| r.0.len() != ms.len()) {
        return Err(Error::InvalidParameter(format!(
            "sample has dimension {} but {} marginals were given",
            rows[0].0.len(),
            ms.len()
        )));
    }
    Ok(rows
        .iter()
        .map(|r| r.0.iter().zip(ms).map(|(&u, m)| m.inv_cdf(u)).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::Marginal;

    fn close(a: &UniformVector, b: &[f64]) -> bool {
        a.0.len() == b.len() && a.0.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn max_examples() {
        assert!(close(&cross_product_max(3, 0.8, 0.3), &[0.8, 0.2, 0.2]));
        assert!(close(&cross_product_max(3, 0.8, 0.7), &[0.8, 0.8, 0.8]));
        assert!(close(&cross_product_max(3, 0.3, 0.7), &[0.3, 0.3, 0.7]));
        assert!(close(&cross_product_max(3, 0.3, 0.2), &[0.3, 0.7, 0.3]));
        assert!(close(&cross_product_max(4, 0.3, 0.123), &[0.3; 4]));
        assert!(close(&cross_product_max(5, 0.8, 0.3), &[0.8, 0.8, 0.8, 0.2, 0.2]));
    }

    #[test]
    fn min_examples() {
        assert!(close(&cross_product_min(3, 0.8, 0.3), &[0.8, 0.2, 0.8]));
        assert!(close(&cross_product_min(3, 0.8, 0.7), &[0.8, 0.8, 0.2]));
        assert!(close(&cross_product_min(2, 0.3, 0.9), &[0.3, 0.7]));
        assert!(close(&cross_product_min(4, 0.3, 0.9), &[0.3, 0.3, 0.3, 0.7]));
    }

    #[test]
    fn boundary_half_counts_as_lower() {
        // I = 1{u > 1/2} is strict.
        assert!(close(&cross_product_max(3, 0.5, 0.2), &[0.5, 0.5, 0.5]));
        assert!(close(&cross_product_min(3, 0.5, 0.7), &[0.5, 0.5, 0.5]));
    }

    #[test]
    fn strong_positive_examples() {
        assert!(close(&strong_positive(3, 0.8, 0.1, 0.5).unwrap(), &[0.8, 0.8, 0.8]));
        assert!(close(&strong_positive(3, 0.4, 0.7, 0.5).unwrap(), &[0.4, 0.4, 0.4]));
        assert!(close(&strong_positive(3, 0.4, 0.3, 0.5).unwrap(), &[0.4, 0.1, 0.1]));
        assert!(close(&strong_positive(3, 0.1, 0.3, 0.5).unwrap(), &[0.1, 0.4, 0.1]));
        assert!(close(&strong_positive(3, 0.1, 0.7, 0.5).unwrap(), &[0.1, 0.1, 0.4]));
        assert!(matches!(
            strong_positive(4, 0.1, 0.7, 0.5),
            Err(Error::UnsupportedDimension(_))
        ));
    }

    #[test]
    fn strong_negative_examples() {
        assert!(close(&strong_negative(3, 0.3, 0.9, 0.5).unwrap(), &[0.3, 0.3, 0.3]));
        assert!(close(&strong_negative(3, 0.9, 0.7, 0.5).unwrap(), &[0.9, 0.9, 0.6]));
        assert!(close(&strong_negative(3, 0.6, 0.3, 0.5).unwrap(), &[0.6, 0.9, 0.9]));
        assert!(matches!(
            strong_negative(2, 0.6, 0.3, 0.5),
            Err(Error::UnsupportedDimension(_))
        ));
    }

    #[test]
    fn strong_constructions_fix_the_sign() {
        let (a, b) = (-1.0, 3.0);
        let m = vec![Marginal::uniform(a, b).unwrap(); 3];
        let rows = sample_copula(CopulaKind::strong_positive_for(a, b).unwrap(), 3, 20_000, 4, Grid::Iid).unwrap();
        let x = apply_marginals(&rows, &m).unwrap();
        assert!(x.iter().all(|r| r.iter().product::<f64>() >= -1e-12));

        let (a, b) = (-3.0, 1.0);
        let m = vec![Marginal::uniform(a, b).unwrap(); 3];
        let rows = sample_copula(CopulaKind::strong_negative_for(a, b).unwrap(), 3, 20_000, 4, Grid::Iid).unwrap();
        let x = apply_marginals(&rows, &m).unwrap();
        assert!(x.iter().all(|r| r.iter().product::<f64>() <= 1e-12));
    }

    #[test]
    fn comonotonic_stratified_rows() {
        let rows = sample_copula(CopulaKind::Comonotonic, 3, 4, 0, Grid::Stratified).unwrap();
        let want = [0.125, 0.375, 0.625, 0.875];
        for (r, w) in rows.iter().zip(want) {
            assert_eq!(r.0, vec![w; 3]);
        }
    }

    #[test]
    fn parity_and_size_errors() {
        assert!(sample_copula(CopulaKind::MaxOdd, 4, 10, 0, Grid::Iid).is_err());
        assert!(sample_copula(CopulaKind::MinEven, 3, 10, 0, Grid::Iid).is_err());
        assert!(sample_copula(CopulaKind::Comonotonic, 3, 0, 0, Grid::Iid).is_err());
        assert!(sample_copula(CopulaKind::StrongPositive { c: 1.5 }, 3, 10, 0, Grid::Iid).is_err());
        assert!(CopulaKind::strong_positive_for(-3.0, 1.0).is_err());
        assert!(CopulaKind::strong_negative_for(-1.0, 3.0).is_err());
    }

    #[test]
    fn pair_projections_lie_on_diagonals() {
        let rows = sample_copula(CopulaKind::MaxOdd, 5, 5000, 11, Grid::Iid).unwrap();
        for r in &rows {
            for a in 0..5 {
                for b in 0..5 {
                    let (x, y) = (r.0[a], r.0[b]);
                    assert!(x == y || (x + y - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn samples_are_reproducible() {
        let a = sample_copula(CopulaKind::MinOdd, 3, 1000, 8, Grid::Iid).unwrap();
        let b = sample_copula(CopulaKind::MinOdd, 3, 1000, 8, Grid::Iid).unwrap();
        assert_eq!(a, b);
        let c = sample_copula(CopulaKind::MinOdd, 3, 1000, 9, Grid::Iid).unwrap();
        assert_ne!(a, c);
    }
}
