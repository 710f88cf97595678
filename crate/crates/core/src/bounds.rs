//! Bounds on `E(X₁⋯X_d)` over all dependence structures with the given marginals.
//!
//! For marginals symmetric about zero the maximum is `∫₀¹ ∏ G_i⁻¹(u) du`,
//! where `G_i` is the law of `|X_i|`, and the minimum is its negative. Both
//! are attained by the cross-product constructions in [`crate::copulas`].
//! Uniform special cases have closed forms; one-signed marginals get the
//! comonotonic value on one side and a Jensen-type bound on the other.
//! Everything else falls back to the rearrangement algorithm.
//!
//! ```
//! use depbound::bounds::{solve_cd, wang_wang_min_uniform01};
//!
//! let c = solve_cd(3)?;
//! assert!((c - 0.0945415777881).abs() < 1e-12);
//! assert!((wang_wang_min_uniform01(3)? - 5.4803e-2).abs() < 1e-6);
//! # Ok::<(), depbound::Error>(())
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bra::{run_bra, BraConfig, Direction};
use crate::error::{Error, Result};
use crate::integrals::{product_integral, Factor};
use crate::marginals::{abs_quantile, AbsQuantile, DomainSign, Kind, Marginal, StandardizedMarginal, Univariate};
use crate::quadrature::QuadOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Analytic,
    Quadrature,
    MixingAssumed,
    NotSharp,
    /// Approximated by the rearrangement algorithm on a finite grid.
    Rearrangement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub lower_attainable: bool,
    pub upper_attainable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundsResult {
    fn sharp(lower: f64, upper: f64, method: Method) -> Self {
        BoundsResult {
            lower,
            upper,
            method,
            lower_attainable: true,
            upper_attainable: true,
            note: None,
        }
    }
}

const MIXING_NOTE: &str = "the Jensen-type side is sharp only if the logarithms of the marginals admit a mixing dependence, which is not verified";

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("need at least two marginals, got {d}")));
    }
    Ok(())
}

/// `±∫₀¹ ∏ G_i⁻¹(u) du` for symmetric marginals. With `standardized` each
/// marginal is first mapped to mean 0 and variance 1; otherwise the means
/// must already be zero.
pub fn symmetric_product_bounds(ms: &[Marginal], standardized: bool) -> Result<BoundsResult> {
    check_dim(ms.len())?;
    if let Some(m) = ms.iter().find(|m| !m.is_symmetric()) {
        return Err(Error::UnsupportedMarginal(format!(
            "{m} is not symmetric; bounds for asymmetric marginals need the rearrangement algorithm"
        )));
    }
    let opts = QuadOptions::default();
    let upper = if standardized {
        let gs: Vec<AbsQuantile<StandardizedMarginal>> = ms.iter().map(|m| m.abs_quantile()).collect::<Result<_>>()?;
        let fs: Vec<Factor<'_>> = gs.iter().map(Factor::abs_quantile).collect();
        product_integral(&fs, &opts)?
    } else {
        let gs: Vec<AbsQuantile<&Marginal>> = ms.iter().map(abs_quantile).collect::<Result<_>>()?;
        let fs: Vec<Factor<'_>> = gs.iter().map(Factor::abs_quantile).collect();
        product_integral(&fs, &opts)?
    };
    Ok(BoundsResult::sharp(-upper, upper, Method::Quadrature))
}

/// `±3^{d/2}/(d + 1)` for `d` copies of `Uniform(−√3, √3)`.
pub fn uniform_symmetric_bounds(d: usize) -> Result<BoundsResult> {
    check_dim(d)?;
    let upper = (0.5 * d as f64 * 3f64.ln() - ((d + 1) as f64).ln()).exp();
    Ok(BoundsResult::sharp(-upper, upper, Method::Analytic))
}

/// `log(1 − d + 1/c) − d + d²c`.
fn cd_residual(d: f64, c: f64) -> f64 {
    (1.0 / c - (d - 1.0)).ln() - d + d * d * c
}

/// Root `c_d ∈ (0, 1/(d − 1))` of `log(1 − d + 1/c) = d − d²c`.
///
/// The root underflows any fixed linear bracket for large `d` (about
/// `1.9e-22` at `d = 50`), so the bisection runs on `ln c`.
pub fn solve_cd(d: usize) -> Result<f64> {
    check_dim(d)?;
    if d == 2 {
        // Exact root; f has a stationary point there, which bisection resolves poorly.
        return Ok(0.5);
    }
    let df = d as f64;
    let f = |s: f64| cd_residual(df, s.exp());
    let (mut lo, mut hi) = (-700.0f64, -(df - 1.0).ln() - 1e-15);
    while f(hi) > 0.0 {
        hi -= 1e-15f64.max(hi.abs() * f64::EPSILON);
    }
    debug_assert!(f(lo) > 0.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut c = (0.5 * (lo + hi)).exp();
    for _ in 0..2 {
        let slope = df * df - 1.0 / (c * (1.0 - (df - 1.0) * c));
        let next = c - cd_residual(df, c) / slope;
        if next > 0.0 && next * (df - 1.0) < 1.0 {
            c = next;
        }
    }
    Ok(c)
}

/// `∫₀^ε d·s(1 − s)^{d−1} ds`, the bracketed polynomial term of the minimum
/// written without its cancellation.
fn bracket_term(d: usize, eps: f64) -> f64 {
    let df = d as f64;
    if df * eps >= 0.5 {
        let tail = (df * (-eps).ln_1p()).exp() * (1.0 + df * eps);
        return (1.0 - tail) / (df + 1.0);
    }
    // Σ_k (−1)^k C(d−1, k) ε^{k+2}/(k+2)
    let mut coef = 1.0;
    let mut sum = 0.0;
    for k in 0..d {
        let term = coef * eps * eps / (k as f64 + 2.0);
        sum += if k % 2 == 0 { term } else { -term };
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        coef *= (df - 1.0 - k as f64) / (k as f64 + 1.0) * eps;
    }
    df * sum
}

/// Minimum of `E(U₁⋯U_d)` over standard uniform marginals.
pub fn wang_wang_min_uniform01(d: usize) -> Result<f64> {
    let c = solve_cd(d)?;
    let df = d as f64;
    let eps = (df - 1.0) * c;
    let ln_x = (-eps).ln_1p();
    let head = bracket_term(d, eps) / ((df - 1.0) * (df - 1.0));
    let tail = ((1.0 - df * c) * c).ln() + (df - 1.0) * ln_x;
    Ok(head + tail.exp())
}

/// Minimum of `E(X₁⋯X_d)` for `d` copies of `Uniform(a, b)`, `0 < a < b`,
/// available when the closed form's feasibility inequality holds.
pub fn bignozzi_min_uniform(a: f64, b: f64, d: usize) -> Result<f64> {
    check_dim(d)?;
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a < b < inf, got a = {a}, b = {b}"
        )));
    }
    let df = d as f64;
    let ln_m = df * (b * (b.ln() - 1.0) - a * (a.ln() - 1.0)) / (b - a);
    let ln_rhs = a.ln() + (df - 1.0) * b.ln();
    if ln_m > ln_rhs {
        return Err(Error::ConditionNotMet(format!(
            "closed form not valid for a = {a}, b = {b}, d = {d}; use the rearrangement algorithm"
        )));
    }
    Ok(ln_m.exp())
}

/// `∫₀¹ ∏ F_i⁻¹(u) du`, the expectation under comonotonic dependence.
pub fn comonotonic_expectation(ms: &[Marginal]) -> Result<f64> {
    let fs: Vec<Factor<'_>> = ms.iter().map(Factor::quantile).collect();
    product_integral(&fs, &QuadOptions::default())
}

fn require_sign(ms: &[Marginal], sign: DomainSign, what: &str) -> Result<()> {
    if let Some(m) = ms.iter().find(|m| m.domain_sign() != sign) {
        return Err(Error::Precondition(format!("{m} does not have a {what} domain")));
    }
    Ok(())
}

/// `Σ_i E ln|X_i|`.
fn sum_log_abs(ms: &[Marginal]) -> Result<f64> {
    let opts = QuadOptions::default();
    ms.iter()
        .map(|m| product_integral(&[Factor::quantile(m).map(|x| x.abs().ln())], &opts))
        .sum()
}

/// Nonnegative marginals: comonotonic maximum and the lower bound
/// `exp(Σ E ln X_i)`, which is sharp under a mixing dependence of the logs.
pub fn mixing_lower_bound_nonneg(ms: &[Marginal]) -> Result<BoundsResult> {
    check_dim(ms.len())?;
    require_sign(ms, DomainSign::NonNegative, "nonnegative")?;
    let lower = sum_log_abs(ms)?.exp();
    let upper = comonotonic_expectation(ms)?;
    Ok(BoundsResult {
        lower,
        upper,
        method: Method::MixingAssumed,
        lower_attainable: false,
        upper_attainable: true,
        note: Some(MIXING_NOTE.into()),
    })
}

/// Nonpositive marginals. For odd `d` the comonotonic value is the minimum
/// and `−exp(Σ E ln|X_i|)` bounds the maximum; for even `d` the roles swap.
pub fn nonpositive_domain_bounds(ms: &[Marginal]) -> Result<BoundsResult> {
    check_dim(ms.len())?;
    require_sign(ms, DomainSign::NonPositive, "nonpositive")?;
    let jensen = sum_log_abs(ms)?.exp();
    let como = comonotonic_expectation(ms)?;
    let odd = ms.len() % 2 == 1;
    let (lower, upper) = if odd { (como, -jensen) } else { (jensen, como) };
    Ok(BoundsResult {
        lower,
        upper,
        method: Method::MixingAssumed,
        lower_attainable: odd,
        upper_attainable: !odd,
        note: Some(MIXING_NOTE.into()),
    })
}

/// `d` copies of `Uniform(a, b)` with `a < 0 < b` and odd `d`. The side
/// favoured by the larger half of the support equals `±E|X|^d` and is
/// attained by the shifted constructions; the other side is `∓E|X|^d`, a
/// valid but generally loose bound.
pub fn uniform_shifted_bounds(a: f64, b: f64, d: usize) -> Result<BoundsResult> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::UnsupportedDimension(format!("need odd d >= 3, got {d}")));
    }
    if !(a < 0.0 && 0.0 < b && b.is_finite() && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("need a < 0 < b, got a = {a}, b = {b}")));
    }
    let e = abs_moment_uniform(a, b, d);
    let positive = -a < b;
    let mut r = BoundsResult {
        lower: -e,
        upper: e,
        method: Method::Analytic,
        lower_attainable: !positive,
        upper_attainable: positive,
        note: None,
    };
    if -a == b {
        r.lower_attainable = true;
        r.upper_attainable = true;
    } else {
        let side = if positive { "lower" } else { "upper" };
        r.note = Some(format!("the {side} side is ∓E|X|^d and is not sharp in general"));
    }
    Ok(r)
}

/// `E|X|^d = (|a|^{d+1} + b^{d+1}) / ((d + 1)(b − a))` for `X ~ Uniform(a, b)`, `a < 0 < b`.
fn abs_moment_uniform(a: f64, b: f64, d: usize) -> f64 {
    let p = (d + 1) as f64;
    let (la, lb) = (p * (-a).ln(), p * b.ln());
    let top = la.max(lb);
    let ln_sum = top + ((la - top).exp() + (lb - top).exp()).ln();
    (ln_sum - p.ln() - (b - a).ln()).exp()
}

/// Sharp coskewness bounds for three symmetric marginals.
pub fn coskewness_bounds(ms: &[Marginal]) -> Result<BoundsResult> {
    if ms.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "coskewness needs three marginals, got {}",
            ms.len()
        )));
    }
    symmetric_product_bounds(ms, true)
}

/// Closed-form maximum coskewness of three copies of one symmetric family.
/// The minimum is its negative. Parameters do not matter: coskewness is
/// location-scale invariant.
pub fn table2_closed_form(m: &Marginal) -> Result<f64> {
    match m.kind() {
        Kind::Normal { .. } => Ok(2.0 * (2.0 * PI).sqrt() / PI),
        Kind::Laplace { .. } => Ok(3.0 * 2f64.sqrt() / 2.0),
        Kind::Uniform { .. } => Ok(3.0 * 3f64.sqrt() / 4.0),
        &Kind::StudentT { nu } => {
            let ln = (4.0 * (nu - 2.0)).ln() + 0.5 * ((nu - 2.0) * PI).ln() + ln_gamma((nu + 1.0) / 2.0)
                - (nu * nu - 4.0 * nu + 3.0).ln()
                - PI.ln()
                - ln_gamma(nu / 2.0);
            Ok(ln.exp())
        }
        _ => Err(Error::UnsupportedMarginal(format!("no closed form for {m}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductMethod {
    /// Closed form or quadrature when a result applies, else rearrangement.
    #[default]
    Auto,
    Analytic,
    Bra,
}

/// Closed-form or quadrature bounds, if any result covers these marginals.
fn analytic_bounds(ms: &[Marginal]) -> Result<Option<BoundsResult>> {
    let d = ms.len();
    let identical = ms.windows(2).all(|w| w[0] == w[1]);
    let uniform = match ms[0].kind() {
        &Kind::Uniform { a, b } if identical => Some((a, b)),
        _ => None,
    };

    if ms.iter().all(|m| m.is_symmetric()) {
        let zero_mean = ms.iter().all(|m| {
            let (mu, sd) = m.mean_sd();
            mu.abs() <= 1e-12 * sd.max(1.0)
        });
        if zero_mean {
            return symmetric_product_bounds(ms, false).map(Some);
        }
    }
    if let Some((a, b)) = uniform {
        if a == 0.0 && b == 1.0 {
            let lower = wang_wang_min_uniform01(d)?;
            return Ok(Some(BoundsResult::sharp(
                lower,
                1.0 / (d as f64 + 1.0),
                Method::Analytic,
            )));
        }
        if a < 0.0 && b > 0.0 && d % 2 == 1 {
            return uniform_shifted_bounds(a, b, d).map(Some);
        }
    }
    if ms.iter().all(|m| m.domain_sign() == DomainSign::NonNegative) {
        if let Some((a, b)) = uniform {
            if let Ok(lower) = bignozzi_min_uniform(a, b, d) {
                let upper = comonotonic_expectation(ms)?;
                return Ok(Some(BoundsResult::sharp(lower, upper, Method::Analytic)));
            }
        }
        return mixing_lower_bound_nonneg(ms).map(Some);
    }
    if ms.iter().all(|m| m.domain_sign() == DomainSign::NonPositive) {
        return nonpositive_domain_bounds(ms).map(Some);
    }
    Ok(None)
}

/// Bounds from both directions of the rearrangement algorithm.
pub fn rearrangement_bounds(ms: &[Marginal], cfg: &BraConfig) -> Result<BoundsResult> {
    let mut cfg = cfg.clone();
    cfg.direction = Direction::Max;
    let hi = run_bra(ms, &cfg)?;
    cfg.direction = Direction::Min;
    let lo = run_bra(ms, &cfg)?;
    Ok(BoundsResult {
        lower: lo.lambda,
        upper: hi.lambda,
        method: Method::Rearrangement,
        lower_attainable: false,
        upper_attainable: false,
        note: Some(format!(
            "approximation on an n = {} grid; standard errors {:.1e} (lower), {:.1e} (upper)",
            cfg.n, lo.se_estimate, hi.se_estimate
        )),
    })
}

/// Dispatches to the most specific applicable result.
pub fn product_bounds(ms: &[Marginal], method: ProductMethod, cfg: &BraConfig) -> Result<BoundsResult> {
    check_dim(ms.len())?;
    match method {
        ProductMethod::Bra => rearrangement_bounds(ms, cfg),
        ProductMethod::Analytic => analytic_bounds(ms)?.ok_or_else(|| {
            Error::UnsupportedMarginal("no closed-form or quadrature result covers these marginals".into())
        }),
        ProductMethod::Auto => match analytic_bounds(ms)? {
            Some(r) => Ok(r),
            None => rearrangement_bounds(ms, cfg),
        },
    }
}
