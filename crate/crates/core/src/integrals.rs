//! Integrals of products of quantile functions over (0, 1).
//!
//! `∫₀¹ ∏ᵢ Qᵢ(u) du` is split at every jump of any factor and at 1/2. The two
//! end pieces use a power substitution (`u = b·t¹²` near 0, `1 − u = b·t¹²`
//! near 1) which flattens the algebraic and logarithmic endpoint growth of
//! heavy-tailed quantiles; the upper piece evaluates factors through their
//! upper-tail argument so no precision is lost to `1 − q` rounding.

use crate::error::Result;
use crate::marginals::{AbsQuantile, Univariate};
use crate::quadrature::{integrate_pieces, QuadOptions};

const TAIL_POWER: i32 = 12;

/// One factor `Q(u)` of an integrand, evaluable from either tail.
pub(crate) struct Factor<'a> {
    lower: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    upper: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    jumps: Vec<f64>,
    step: bool,
}

impl<'a> Factor<'a> {
    pub(crate) fn quantile<M: Univariate + Sync>(m: &'a M) -> Self {
        Factor {
            lower: Box::new(move |u| m.inv_cdf(u)),
            upper: Box::new(move |q| m.inv_cdf_upper(q)),
            jumps: m.jumps(),
            step: m.is_step(),
        }
    }

    pub(crate) fn abs_quantile<M: Univariate + Sync>(g: &'a AbsQuantile<M>) -> Self {
        Factor {
            lower: Box::new(move |u| g.eval(u)),
            upper: Box::new(move |q| g.eval_upper(q)),
            jumps: g.jumps(),
            step: g.is_step(),
        }
    }

    /// Composes `f ∘ Q`.
    pub(crate) fn map(self, f: fn(f64) -> f64) -> Self {
        let Factor {
            lower,
            upper,
            jumps,
            step,
        } = self;
        Factor {
            lower: Box::new(move |u| f(lower(u))),
            upper: Box::new(move |q| f(upper(q))),
            jumps,
            step,
        }
    }
}

fn breakpoints(factors: &[Factor<'_>]) -> Vec<f64> {
    let mut b: Vec<f64> = factors
        .iter()
        .flat_map(|f| f.jumps.iter().copied())
        .filter(|&p| p > 0.0 && p < 1.0)
        .collect();
    b.push(0.5);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// `∫₀¹ ∏ Qᵢ(u) du` to relative tolerance `opts.rel_tol`.
pub(crate) fn product_integral(factors: &[Factor<'_>], opts: &QuadOptions) -> Result<f64> {
    let breaks = breakpoints(factors);
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(0.0);
    edges.extend_from_slice(&breaks);
    edges.push(1.0);

    if factors.iter().all(|f| f.step) {
        // Piecewise constant: exact midpoint sum.
        let total = edges
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let v: f64 = factors.iter().map(|f| (f.lower)(mid)).product();
                (w[1] - w[0]) * v
            })
            .sum();
        return Ok(total);
    }

    let last = edges.len() - 2;
    let p = TAIL_POWER as f64;
    let integrand = |piece: usize, x: f64| -> f64 {
        if piece == 0 {
            let width = edges[1];
            let tp = x.powi(TAIL_POWER - 1);
            let u = width * tp * x;
            if u == 0.0 {
                return 0.0;
            }
            let v: f64 = factors.iter().map(|f| (f.lower)(u)).product();
            v * p * width * tp
        } else if piece == last {
            let width = 1.0 - edges[last];
            let tp = x.powi(TAIL_POWER - 1);
            let q = width * tp * x;
            if q == 0.0 {
                return 0.0;
            }
            let v: f64 = factors.iter().map(|f| (f.upper)(q)).product();
            v * p * width * tp
        } else {
            factors.iter().map(|f| (f.lower)(x)).product()
        }
    };
    let pieces: Vec<(f64, f64)> = (0..=last)
        .map(|i| {
            if i == 0 || i == last {
                (0.0, 1.0)
            } else {
                (edges[i], edges[i + 1])
            }
        })
        .collect();
    Ok(integrate_pieces(&integrand, &pieces, opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::{abs_quantile, Marginal};

    #[test]
    fn normal_third_absolute_moment() {
        let z = Marginal::normal(0.0, 1.0).unwrap();
        let g = abs_quantile(&z).unwrap();
        let f = [
            Factor::abs_quantile(&g),
            Factor::abs_quantile(&g),
            Factor::abs_quantile(&g),
        ];
        let v = product_integral(&f, &QuadOptions::default()).unwrap();
        let exact = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn lognormal_cube_moment() {
        let m = Marginal::lognormal(0.0, 1.0).unwrap();
        let f = [Factor::quantile(&m), Factor::quantile(&m), Factor::quantile(&m)];
        let v = product_integral(&f, &QuadOptions::default()).unwrap();
        assert!((v / 4.5f64.exp() - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn mean_log_uniform() {
        let m = Marginal::uniform(0.0, 1.0).unwrap();
        let v = product_integral(&[Factor::quantile(&m).map(f64::ln)], &QuadOptions::default()).unwrap();
        assert!((v + 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn mixed_step_and_continuous() {
        // ∫ u · 1{u > 1/4 ? 2 : -1} du = -1/32 + 2·15/32
        let m = Marginal::uniform(0.0, 1.0).unwrap();
        let d = Marginal::discrete(vec![-1.0, 2.0], vec![0.25, 0.75]).unwrap();
        let v = product_integral(&[Factor::quantile(&m), Factor::quantile(&d)], &QuadOptions::default()).unwrap();
        assert!((v - 29.0 / 32.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn divergent_product_errors() {
        // E|T|^5 is infinite for nu = 4.
        let t = Marginal::student_t(4.0).unwrap();
        let g = abs_quantile(&t).unwrap();
        let f: Vec<_> = (0..5).map(|_| Factor::abs_quantile(&g)).collect();
        assert!(product_integral(&f, &QuadOptions::default()).is_err());
    }
}
