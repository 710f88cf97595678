//! One-dimensional marginal distributions.
//!
//! Every bound in this crate is expressed through quantile functions, so the
//! central abstraction is [`Univariate`]: a left-continuous generalized
//! inverse `F⁻¹(u) = inf{x : F(x) ≥ u}` plus the metadata (symmetry, sign of
//! the support, location of jumps) that decides which closed form applies.
//!
//! Heavy-tailed quantiles are evaluated in two coordinates. [`Univariate::inv_cdf`]
//! takes the lower-tail probability `u` and [`Univariate::inv_cdf_upper`] takes
//! the upper-tail probability `q = 1 − u` directly, so that `F⁻¹(1 − 10⁻⁸⁰)`
//! is computable even though `1 − 10⁻⁸⁰` rounds to one.

mod parse;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::path::PathBuf;

use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub use parse::{parse_marginal, parse_marginal_list};

/// Sign of the support of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainSign {
    NonNegative,
    NonPositive,
    Mixed,
}

/// Quantile-based view of a one-dimensional distribution.
pub trait Univariate {
    /// Generalized inverse at `u`. Callers guarantee `0 < u < 1`.
    fn inv_cdf(&self, u: f64) -> f64;

    /// `F⁻¹(1 − q)`, evaluated without forming `1 − q` where possible.
    fn inv_cdf_upper(&self, q: f64) -> f64 {
        self.inv_cdf(1.0 - q)
    }

    fn cdf(&self, x: f64) -> f64;

    fn mean_sd(&self) -> (f64, f64);

    fn is_symmetric(&self) -> bool;

    /// Closure of the support as `(lower, upper)`; infinite ends allowed.
    fn support(&self) -> (f64, f64);

    /// Probability levels in (0, 1) where the quantile function jumps.
    fn jumps(&self) -> Vec<f64> {
        Vec::new()
    }

    /// True when the quantile function is piecewise constant.
    fn is_step(&self) -> bool {
        false
    }

    /// Checked quantile: rejects `u` outside the open unit interval.
    fn quantile(&self, u: f64) -> Result<f64> {
        if u > 0.0 && u < 1.0 {
            Ok(self.inv_cdf(u))
        } else {
            Err(Error::Domain(u))
        }
    }

    fn domain_sign(&self) -> DomainSign {
        let (lo, hi) = self.support();
        if lo >= 0.0 {
            DomainSign::NonNegative
        } else if hi <= 0.0 {
            DomainSign::NonPositive
        } else {
            DomainSign::Mixed
        }
    }
}

impl<T: Univariate + ?Sized> Univariate for &T {
    fn inv_cdf(&self, u: f64) -> f64 {
        (**self).inv_cdf(u)
    }
    fn inv_cdf_upper(&self, q: f64) -> f64 {
        (**self).inv_cdf_upper(q)
    }
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn mean_sd(&self) -> (f64, f64) {
        (**self).mean_sd()
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn jumps(&self) -> Vec<f64> {
        (**self).jumps()
    }
    fn is_step(&self) -> bool {
        (**self).is_step()
    }
}

/// Parametric family and parameters of a [`Marginal`].
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Uniform {
        a: f64,
        b: f64,
    },
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// Standard Student t with `nu > 3` degrees of freedom.
    StudentT {
        nu: f64,
    },
    Laplace {
        mu: f64,
        b: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Finite distribution; `points` strictly increasing.
    Discrete {
        points: Vec<f64>,
        probs: Vec<f64>,
    },
    /// Equally weighted sorted sample. `source` remembers the file it came from.
    Empirical {
        samples: Vec<f64>,
        source: Option<PathBuf>,
    },
}

/// Parameter that failed validation, with the reason.
pub(crate) struct InvalidParam {
    pub(crate) name: &'static str,
    pub(crate) msg: String,
}

fn invalid(name: &'static str, msg: impl Into<String>) -> InvalidParam {
    InvalidParam { name, msg: msg.into() }
}

const PROB_SUM_TOL: f64 = 1e-12;
const MIRROR_TOL: f64 = 1e-12;

impl Kind {
    pub(crate) fn validate(&self) -> Result<(), InvalidParam> {
        let finite = |name, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("{name} must be finite, got {v}")))
            }
        };
        match *self {
            Kind::Uniform { a, b } => {
                finite("a", a)?;
                finite("b", b)?;
                if a >= b {
                    return Err(invalid("b", format!("uniform requires a < b, got a={a}, b={b}")));
                }
            }
            Kind::Normal { mu, sigma } | Kind::LogNormal { mu, sigma } => {
                finite("mu", mu)?;
                finite("sigma", sigma)?;
                if sigma <= 0.0 {
                    return Err(invalid("sigma", format!("sigma must be positive, got {sigma}")));
                }
            }
            Kind::StudentT { nu } => {
                finite("nu", nu)?;
                if nu <= 3.0 {
                    return Err(invalid("nu", format!("nu must exceed 3, got {nu}")));
                }
            }
            Kind::Laplace { mu, b } => {
                finite("mu", mu)?;
                finite("b", b)?;
                if b <= 0.0 {
                    return Err(invalid("b", format!("laplace scale must be positive, got {b}")));
                }
            }
            Kind::Discrete { ref points, ref probs } => {
                if points.is_empty() {
                    return Err(invalid("points", "at least one mass point is required"));
                }
                if points.len() != probs.len() {
                    return Err(invalid(
                        "probs",
                        format!("{} points but {} probabilities", points.len(), probs.len()),
                    ));
                }
                for &x in points {
                    finite("points", x)?;
                }
                if points.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("points", "points must be strictly increasing"));
                }
                if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                    return Err(invalid("probs", "probabilities must be finite and non-negative"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > PROB_SUM_TOL {
                    return Err(invalid("probs", format!("probabilities sum to {total}, not 1")));
                }
            }
            Kind::Empirical { ref samples, .. } => {
                if samples.is_empty() {
                    return Err(invalid("samples", "empirical sample is empty"));
                }
                if samples.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("samples", "empirical sample contains non-finite values"));
                }
                if samples.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid("samples", "empirical sample must be sorted"));
                }
            }
        }
        Ok(())
    }
}

/// A validated marginal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    kind: Kind,
    /// Cumulative probabilities for `Discrete`, last entry pinned to 1.
    cum: Vec<f64>,
}

impl Marginal {
    pub fn new(kind: Kind) -> Result<Self> {
        kind.validate().map_err(|e| Error::InvalidParameter(e.msg))?;
        let cum = match &kind {
            Kind::Discrete { probs, .. } => {
                let mut acc = 0.0;
                let mut cum: Vec<f64> = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                *cum.last_mut().unwrap() = 1.0;
                cum
            }
            _ => Vec::new(),
        };
        Ok(Marginal { kind, cum })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(Kind::Uniform { a, b })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Kind::Normal { mu, sigma })
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        Self::new(Kind::StudentT { nu })
    }

    pub fn laplace(mu: f64, b: f64) -> Result<Self> {
        Self::new(Kind::Laplace { mu, b })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Kind::LogNormal { mu, sigma })
    }

    pub fn discrete(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::new(Kind::Discrete { points, probs })
    }

    /// Empirical distribution of `samples`; the input need not be sorted.
    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidParameter("empirical sample contains NaN".into()));
        }
        samples.sort_by(f64::total_cmp);
        Self::new(Kind::Empirical { samples, source: None })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Location-scale standardization `(F⁻¹ − μ)/σ`.
    pub fn standardize(&self) -> Result<StandardizedMarginal> {
        standardize(self)
    }

    /// Quantile function of `|X|` for the standardized version of `self`.
    pub fn abs_quantile(&self) -> Result<AbsQuantile<StandardizedMarginal>> {
        abs_quantile(self.standardize()?)
    }
}

// Student t helpers. All take the standard (location 0, scale 1) law.

fn student_ln_norm(nu: f64) -> f64 {
    ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * PI).ln()
}

fn student_pdf(nu: f64, t: f64) -> f64 {
    (student_ln_norm(nu) - (nu + 1.0) / 2.0 * (t * t / nu).ln_1p()).exp()
}

/// Upper tail `P(T > t)` for `t ≥ 0`.
fn student_sf_pos(nu: f64, t: f64) -> f64 {
    let t2 = t * t;
    if t2 < nu {
        0.5 - 0.5 * beta_reg(0.5, nu / 2.0, t2 / (nu + t2))
    } else {
        0.5 * beta_reg(nu / 2.0, 0.5, nu / (nu + t2))
    }
}

fn student_cdf(nu: f64, t: f64) -> f64 {
    if t >= 0.0 {
        1.0 - student_sf_pos(nu, t)
    } else {
        student_sf_pos(nu, -t)
    }
}

/// Solves `P(T > t) = q` for `0 < q ≤ 1/2`.
fn student_upper_quantile(nu: f64, q: f64) -> f64 {
    if q >= 0.5 {
        return 0.0;
    }
    let mut t = if q > 0.25 {
        let y = inv_beta_reg(0.5, nu / 2.0, 1.0 - 2.0 * q);
        (nu * y / (1.0 - y)).sqrt()
    } else if q > 1e-12 {
        let x = inv_beta_reg(nu / 2.0, 0.5, 2.0 * q);
        (nu * (1.0 - x) / x).sqrt()
    } else {
        // P(T > t) ~ C t^-nu in the far tail.
        let ln_c = student_ln_norm(nu) + (nu - 1.0) / 2.0 * nu.ln() - nu.ln();
        ((ln_c - q.ln()) / nu).exp()
    };
    if !t.is_finite() || t <= 0.0 {
        t = 1.0;
    }
    for _ in 0..50 {
        let resid = student_sf_pos(nu, t) - q;
        let step = resid / student_pdf(nu, t);
        let mut next = t + step;
        if next <= 0.0 {
            next = t / 2.0;
        }
        let done = (next - t).abs() <= 1e-15 * t.abs();
        t = next;
        if done {
            break;
        }
    }
    t
}

// Standard normal helpers.

fn norm_inv(u: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * u)
}

fn norm_inv_upper(q: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * q)
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

impl Univariate for Marginal {
    fn inv_cdf(&self, u: f64) -> f64 {
        match self.kind {
            Kind::Uniform { a, b } => a + (b - a) * u,
            Kind::Normal { mu, sigma } => mu + sigma * norm_inv(u),
            Kind::StudentT { nu } => {
                if u < 0.5 {
                    -student_upper_quantile(nu, u)
                } else {
                    student_upper_quantile(nu, 1.0 - u)
                }
            }
            Kind::Laplace { mu, b } => {
                if u < 0.5 {
                    mu + b * (2.0 * u).ln()
                } else {
                    mu - b * (2.0 * (1.0 - u)).ln()
                }
            }
            Kind::LogNormal { mu, sigma } => (mu + sigma * norm_inv(u)).exp(),
            Kind::Discrete { ref points, .. } => {
                let idx = self.cum.partition_point(|&c| c < u);
                points[idx.min(points.len() - 1)]
            }
            Kind::Empirical { ref samples, .. } => {
                let n = samples.len();
                let k = (n as f64 * u).ceil() as usize;
                samples[k.clamp(1, n) - 1]
            }
        }
    }

    fn inv_cdf_upper(&self, q: f64) -> f64 {
        match self.kind {
            Kind::Uniform { a, b } => b - (b - a) * q,
            Kind::Normal { mu, sigma } => mu + sigma * norm_inv_upper(q),
            Kind::StudentT { nu } => {
                if q <= 0.5 {
                    student_upper_quantile(nu, q)
                } else {
                    -student_upper_quantile(nu, 1.0 - q)
                }
            }
            Kind::Laplace { mu, b } => {
                if q <= 0.5 {
                    mu - b * (2.0 * q).ln()
                } else {
                    mu + b * (2.0 * (1.0 - q)).ln()
                }
            }
            Kind::LogNormal { mu, sigma } => (mu + sigma * norm_inv_upper(q)).exp(),
            _ => self.inv_cdf(1.0 - q),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Kind::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            Kind::StudentT { nu } => student_cdf(nu, x),
            Kind::Laplace { mu, b } => {
                if x < mu {
                    0.5 * ((x - mu) / b).exp()
                } else {
                    1.0 - 0.5 * (-(x - mu) / b).exp()
                }
            }
            Kind::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - mu) / sigma)
                }
            }
            Kind::Discrete { ref points, .. } => {
                let idx = points.partition_point(|&p| p <= x);
                if idx == 0 {
                    0.0
                } else {
                    self.cum[idx - 1]
                }
            }
            Kind::Empirical { ref samples, .. } => samples.partition_point(|&s| s <= x) as f64 / samples.len() as f64,
        }
    }

    fn mean_sd(&self) -> (f64, f64) {
        match self.kind {
            Kind::Uniform { a, b } => ((a + b) / 2.0, (b - a) / 12f64.sqrt()),
            Kind::Normal { mu, sigma } => (mu, sigma),
            Kind::StudentT { nu } => (0.0, (nu / (nu - 2.0)).sqrt()),
            Kind::Laplace { mu, b } => (mu, SQRT_2 * b),
            Kind::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                let mean = (mu + s2 / 2.0).exp();
                (mean, (s2.exp_m1() * (2.0 * mu + s2).exp()).sqrt())
            }
            Kind::Discrete { ref points, ref probs } => weighted_mean_sd(points, |i| probs[i]),
            Kind::Empirical { ref samples, .. } => {
                let w = 1.0 / samples.len() as f64;
                weighted_mean_sd(samples, |_| w)
            }
        }
    }

    fn is_symmetric(&self) -> bool {
        match self.kind {
            Kind::Uniform { .. } | Kind::Normal { .. } | Kind::StudentT { .. } | Kind::Laplace { .. } => true,
            Kind::LogNormal { .. } => false,
            Kind::Discrete { ref points, ref probs } => mirror_symmetric(points, |i| probs[i]),
            Kind::Empirical { ref samples, .. } => mirror_symmetric(samples, |_| 1.0),
        }
    }

    fn support(&self) -> (f64, f64) {
        match self.kind {
            Kind::Uniform { a, b } => (a, b),
            Kind::Normal { .. } | Kind::StudentT { .. } | Kind::Laplace { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Kind::LogNormal { .. } => (0.0, f64::INFINITY),
            Kind::Discrete { ref points, .. } => (points[0], points[points.len() - 1]),
            Kind::Empirical { ref samples, .. } => (samples[0], samples[samples.len() - 1]),
        }
    }

    fn jumps(&self) -> Vec<f64> {
        match self.kind {
            Kind::Discrete { .. } => {
                let mut out: Vec<f64> = self.cum[..self.cum.len() - 1].to_vec();
                out.retain(|&c| c > 0.0 && c < 1.0);
                out.dedup();
                out
            }
            Kind::Empirical { ref samples, .. } => {
                let n = samples.len();
                (1..n)
                    .filter(|&k| samples[k - 1] != samples[k])
                    .map(|k| k as f64 / n as f64)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    fn is_step(&self) -> bool {
        matches!(self.kind, Kind::Discrete { .. } | Kind::Empirical { .. })
    }
}

fn weighted_mean_sd(xs: &[f64], w: impl Fn(usize) -> f64) -> (f64, f64) {
    let mean: f64 = xs.iter().enumerate().map(|(i, x)| w(i) * x).sum();
    let var: f64 = xs.iter().enumerate().map(|(i, x)| w(i) * (x - mean) * (x - mean)).sum();
    (mean, var.max(0.0).sqrt())
}

/// Point masses mirror around the mean: `x_k + x_{n-1-k} = 2μ` with equal weights.
fn mirror_symmetric(xs: &[f64], w: impl Fn(usize) -> f64) -> bool {
    let n = xs.len();
    let (mean, _) = weighted_mean_sd(xs, &w);
    let scale = xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    (0..n / 2 + 1).all(|k| {
        let j = n - 1 - k;
        (xs[k] + xs[j] - 2.0 * mean).abs() <= MIRROR_TOL * scale && (w(k) - w(j)).abs() <= MIRROR_TOL
    })
}

impl fmt::Display for Marginal {
    /// Canonical text form, accepted back by [`parse_marginal`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        match &self.kind {
            Kind::Uniform { a, b } => write!(f, "uniform:a={a},b={b}"),
            Kind::Normal { mu, sigma } => write!(f, "normal:mu={mu},sigma={sigma}"),
            Kind::StudentT { nu } => write!(f, "student:nu={nu}"),
            Kind::Laplace { mu, b } => write!(f, "laplace:mu={mu},b={b}"),
            Kind::LogNormal { mu, sigma } => write!(f, "lognormal:mu={mu},sigma={sigma}"),
            Kind::Discrete { points, probs } => {
                write!(f, "discrete:points={},probs={}", join(points), join(probs))
            }
            Kind::Empirical { source: Some(path), .. } => write!(f, "empirical:{}", path.display()),
            Kind::Empirical { samples, source: None } => {
                write!(f, "empirical:<{} in-memory samples>", samples.len())
            }
        }
    }
}

/// A marginal shifted and scaled to mean 0 and standard deviation 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMarginal {
    base: Marginal,
    mu: f64,
    sigma: f64,
}

impl StandardizedMarginal {
    pub fn base(&self) -> &Marginal {
        &self.base
    }

    /// Mean and standard deviation of the original marginal.
    pub fn location_scale(&self) -> (f64, f64) {
        (self.mu, self.sigma)
    }
}

pub fn standardize(m: &Marginal) -> Result<StandardizedMarginal> {
    let (mu, sigma) = m.mean_sd();
    if !(sigma > 0.0) {
        return Err(Error::DegenerateMarginal);
    }
    Ok(StandardizedMarginal {
        base: m.clone(),
        mu,
        sigma,
    })
}

impl Univariate for StandardizedMarginal {
    fn inv_cdf(&self, u: f64) -> f64 {
        (self.base.inv_cdf(u) - self.mu) / self.sigma
    }
    fn inv_cdf_upper(&self, q: f64) -> f64 {
        (self.base.inv_cdf_upper(q) - self.mu) / self.sigma
    }
    fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(self.mu + self.sigma * x)
    }
    fn mean_sd(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn is_symmetric(&self) -> bool {
        self.base.is_symmetric()
    }
    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        ((lo - self.mu) / self.sigma, (hi - self.mu) / self.sigma)
    }
    fn jumps(&self) -> Vec<f64> {
        self.base.jumps()
    }
    fn is_step(&self) -> bool {
        self.base.is_step()
    }
}

/// Quantile function `G⁻¹` of `|X|` for a distribution symmetric about zero:
/// `G⁻¹(u) = F⁻¹((1 + u)/2)`.
#[derive(Debug, Clone)]
pub struct AbsQuantile<M> {
    inner: M,
}

/// Builds the absolute-value quantile of a symmetric, zero-mean marginal.
/// Asymmetric inputs are rejected; their bounds need the rearrangement engine.
pub fn abs_quantile<M: Univariate>(m: M) -> Result<AbsQuantile<M>> {
    if !m.is_symmetric() {
        return Err(Error::UnsupportedMarginal(
            "absolute-value quantile requires a symmetric marginal; use the rearrangement algorithm".into(),
        ));
    }
    let (mean, sd) = m.mean_sd();
    if mean.abs() > 1e-12 * sd.max(1.0) {
        return Err(Error::Precondition(format!(
            "absolute-value quantile requires a zero mean, got {mean}"
        )));
    }
    Ok(AbsQuantile { inner: m })
}

impl<M: Univariate> AbsQuantile<M> {
    pub fn eval(&self, u: f64) -> f64 {
        self.inner.inv_cdf_upper((1.0 - u) / 2.0).abs()
    }

    /// `G⁻¹(1 − q) = F⁻¹(1 − q/2)`.
    pub fn eval_upper(&self, q: f64) -> f64 {
        self.inner.inv_cdf_upper(q / 2.0).abs()
    }

    pub(crate) fn jumps(&self) -> Vec<f64> {
        // F⁻¹ jumps at p > 1/2 map to G⁻¹ jumps at 2p − 1.
        self.inner
            .jumps()
            .into_iter()
            .filter(|&p| p > 0.5)
            .map(|p| 2.0 * p - 1.0)
            .collect()
    }

    pub(crate) fn is_step(&self) -> bool {
        self.inner.is_step()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(Marginal::uniform(0.0, 1.0).unwrap().quantile(0.25).unwrap(), 0.25);
        assert_eq!(Marginal::normal(0.0, 1.0).unwrap().quantile(0.5).unwrap(), 0.0);
        let two_point = Marginal::discrete(vec![-1.0, 10.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(two_point.quantile(0.7).unwrap(), 10.0);
        assert_eq!(two_point.quantile(0.5).unwrap(), -1.0);
    }

    #[test]
    fn quantile_rejects_endpoints() {
        let m = Marginal::normal(0.0, 1.0).unwrap();
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(m.quantile(u), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(Marginal::uniform(0.0, 1.0).unwrap().cdf(0.25), 0.25);
        assert!(close(Marginal::normal(0.0, 1.0).unwrap().cdf(0.0), 0.5, 1e-15));
        assert!(close(Marginal::lognormal(0.0, 1.0).unwrap().cdf(1.0), 0.5, 1e-15));
    }

    #[test]
    fn known_normal_quantiles() {
        let m = Marginal::normal(0.0, 1.0).unwrap();
        assert!(close(m.inv_cdf(0.975), 1.959963984540054, 1e-12));
        assert!(close(m.inv_cdf(1e-10), -6.361340902404056, 1e-9));
        assert!(close(m.inv_cdf_upper(1e-100), 21.273453560965322, 1e-9));
    }

    #[test]
    fn known_student_quantiles() {
        // Reference values from standard t tables (scipy.stats.t.ppf).
        let t5 = Marginal::student_t(5.0).unwrap();
        assert!(close(t5.inv_cdf(0.975), 2.570581835636314, 1e-10));
        assert!(close(t5.inv_cdf(0.6), 0.2671808657039658, 1e-12));
        let t4 = Marginal::student_t(4.0).unwrap();
        assert!(close(t4.inv_cdf(0.999), 7.173182219782318, 1e-9));
        // Far tail: t4 has a closed-form sf, P(T > t) ≈ 2/t^4 asymptotically.
        let q = 1e-60;
        let t = t4.inv_cdf_upper(q);
        assert!(close(student_sf_pos(4.0, t) / q, 1.0, 1e-9));
    }

    #[test]
    fn mean_sd_examples() {
        let (m, s) = Marginal::uniform(-3f64.sqrt(), 3f64.sqrt()).unwrap().mean_sd();
        assert!(close(m, 0.0, 1e-15) && close(s, 1.0, 1e-15));
        let (m, s) = Marginal::student_t(5.0).unwrap().mean_sd();
        assert_eq!(m, 0.0);
        assert!(close(s, (5.0f64 / 3.0).sqrt(), 1e-15));
        let (m, s) = Marginal::discrete(vec![-1.0, 10.0], vec![0.5, 0.5]).unwrap().mean_sd();
        assert_eq!((m, s), (4.5, 5.5));
    }

    #[test]
    fn student_variance_by_integration() {
        // Independent check of nu/(nu-2): integrate t^2 f(t) with Simpson on a
        // substituted variable t = tan(θ) over (-π/2, π/2).
        let nu = 5.0;
        let n = 200_000;
        let (a, b) = (-PI / 2.0, PI / 2.0);
        let h = (b - a) / n as f64;
        let g = |th: f64| {
            let t = th.tan();
            let jac = 1.0 + t * t;
            t * t * student_pdf(nu, t) * jac
        };
        let mut acc = 0.0;
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g(a + i as f64 * h);
        }
        let var = acc * h / 3.0;
        assert!(close(var, 5.0 / 3.0, 1e-6), "var = {var}");
    }

    #[test]
    fn standardize_examples() {
        let s = Marginal::uniform(2.0, 7.0).unwrap().standardize().unwrap();
        let r3 = 3f64.sqrt();
        assert!(close(s.inv_cdf(0.25), -r3 / 2.0, 1e-14));
        assert!(close(s.inv_cdf_upper(0.0), r3, 1e-14));
        let s = Marginal::normal(3.0, 2.0).unwrap().standardize().unwrap();
        let z = Marginal::normal(0.0, 1.0).unwrap();
        for u in [0.01, 0.3, 0.77] {
            assert!(close(s.inv_cdf(u), z.inv_cdf(u), 1e-14));
        }
        let s = Marginal::discrete(vec![-1.0, 10.0], vec![0.5, 0.5])
            .unwrap()
            .standardize()
            .unwrap();
        assert_eq!(s.inv_cdf(0.25), -1.0);
        assert_eq!(s.inv_cdf(0.75), 1.0);
    }

    #[test]
    fn standardize_degenerate() {
        let m = Marginal::discrete(vec![2.0], vec![1.0]).unwrap();
        assert!(matches!(m.standardize(), Err(Error::DegenerateMarginal)));
    }

    #[test]
    fn abs_quantile_examples() {
        let r3 = 3f64.sqrt();
        let g = abs_quantile(Marginal::uniform(-r3, r3).unwrap()).unwrap();
        assert!(close(g.eval(0.5), r3 / 2.0, 1e-15));
        let z = Marginal::normal(0.0, 1.0).unwrap();
        let g = abs_quantile(&z).unwrap();
        for u in [0.1, 0.5, 0.9] {
            assert!(close(g.eval(u), z.inv_cdf((1.0 + u) / 2.0), 1e-12));
        }
        let g = abs_quantile(Marginal::laplace(0.0, 1.0).unwrap()).unwrap();
        assert!(close(g.eval(0.5), 2f64.ln(), 1e-14));
    }

    #[test]
    fn laplace_abs_median_by_simulation() {
        use rand::{Rng, SeedableRng};
        let m = Marginal::laplace(0.0, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut xs: Vec<f64> = (0..200_001)
            .map(|_| m.inv_cdf(rng.random_range(1e-12..1.0 - 1e-12)).abs())
            .collect();
        xs.sort_by(f64::total_cmp);
        assert!(close(xs[100_000], 2f64.ln(), 0.01));
    }

    #[test]
    fn abs_quantile_rejects_asymmetric() {
        let m = Marginal::lognormal(0.0, 1.0).unwrap();
        assert!(matches!(m.abs_quantile(), Err(Error::UnsupportedMarginal(_))));
    }

    #[test]
    fn discrete_symmetry_and_sign() {
        let sym = Marginal::discrete(vec![-2.0, 1.0, 4.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert!(sym.is_symmetric());
        let asym = Marginal::discrete(vec![-1.0, 10.0], vec![0.4, 0.6]).unwrap();
        assert!(!asym.is_symmetric());
        assert_eq!(
            Marginal::uniform(0.0, 1.0).unwrap().domain_sign(),
            DomainSign::NonNegative
        );
        assert_eq!(
            Marginal::uniform(-1.0, 0.0).unwrap().domain_sign(),
            DomainSign::NonPositive
        );
        assert_eq!(
            Marginal::lognormal(0.0, 1.0).unwrap().domain_sign(),
            DomainSign::NonNegative
        );
        assert_eq!(Marginal::normal(5.0, 1.0).unwrap().domain_sign(), DomainSign::Mixed);
    }

    #[test]
    fn invariant_violations() {
        assert!(Marginal::uniform(1.0, 1.0).is_err());
        assert!(Marginal::student_t(3.0).is_err());
        assert!(Marginal::normal(0.0, 0.0).is_err());
        assert!(Marginal::discrete(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(Marginal::discrete(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn empirical_quantile_is_order_statistic() {
        let m = Marginal::empirical(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.inv_cdf(0.25), 1.0);
        assert_eq!(m.inv_cdf(0.26), 2.0);
        assert_eq!(m.inv_cdf(0.99), 4.0);
        assert_eq!(m.cdf(2.0), 0.5);
        assert_eq!(m.jumps(), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn continuous_cdf_inverts_quantile() {
        let ms = [
            Marginal::uniform(-2.0, 5.0).unwrap(),
            Marginal::normal(1.0, 2.0).unwrap(),
            Marginal::student_t(3.5).unwrap(),
            Marginal::student_t(10.0).unwrap(),
            Marginal::laplace(-1.0, 0.5).unwrap(),
            Marginal::lognormal(0.0, 1.0).unwrap(),
        ];
        for m in &ms {
            for i in 0..1000 {
                let u = 0.001 + 0.998 * i as f64 / 999.0;
                let x = m.inv_cdf(u);
                assert!(close(m.cdf(x), u, 1e-10), "{m}: u={u}, cdf={}", m.cdf(x));
                if m.is_symmetric() {
                    let (mu, _) = m.mean_sd();
                    assert!(close(x + m.inv_cdf(1.0 - u), 2.0 * mu, 1e-10), "{m}: u={u}");
                }
            }
        }
    }
}
