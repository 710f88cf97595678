//! Derived reference values, each checked against an oracle computed here.

use depbound::bounds::{
    comonotonic_expectation, coskewness_bounds, nonpositive_domain_bounds, symmetric_product_bounds,
    table2_closed_form, uniform_symmetric_bounds,
};
use depbound::bra::{run_bra, BraConfig, Direction};
use depbound::copulas::CopulaKind;
use depbound::marginals::{abs_quantile, Marginal, Univariate};
use depbound::stats::mc_expect_product;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

const PI: f64 = std::f64::consts::PI;

/// Composite Simpson on `[a, b]` with `steps` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for k in 1..steps {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn student_variance_by_density() {
    let nu: f64 = 5.0;
    let norm = gamma((nu + 1.0) / 2.0) / ((nu * PI).sqrt() * gamma(nu / 2.0));
    let pdf = |x: f64| norm * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    // x = tan θ keeps the heavy tail on a finite interval.
    let half = PI / 2.0 - 1e-9;
    let var = simpson(
        |t| {
            let x = t.tan();
            x * x * pdf(x) / t.cos().powi(2)
        },
        -half,
        half,
        200_000,
    );
    let m = Marginal::student_t(nu).unwrap();
    let (mu, sd) = m.mean_sd();
    assert_eq!(mu, 0.0);
    assert!((sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert!((var.sqrt() - sd).abs() < 1e-6, "{} vs {sd}", var.sqrt());
}

#[test]
fn laplace_abs_median_by_simulation() {
    let m = Marginal::laplace(0.0, 1.0).unwrap();
    let q = abs_quantile(&m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut xs: Vec<f64> = (0..200_001)
        .map(|_| m.inv_cdf(rng.random_range(1e-300..1.0)).abs())
        .collect();
    xs.sort_by(f64::total_cmp);
    let median = xs[100_000];
    assert!((q.eval(0.5) - std::f64::consts::LN_2).abs() < 1e-14);
    assert!((median - std::f64::consts::LN_2).abs() < 0.01, "{median}");
}

#[test]
fn laplace_coskewness_matches_closed_form() {
    let b = coskewness_bounds(&vec![Marginal::laplace(1.0, 2.0).unwrap(); 3]).unwrap();
    assert!((b.upper - 3.0 * 2f64.sqrt() / 2.0).abs() < 1e-8);
    assert!((b.lower + 3.0 * 2f64.sqrt() / 2.0).abs() < 1e-8);
}

#[test]
fn uniform_five_by_quadrature() {
    let r = uniform_symmetric_bounds(5).unwrap();
    let s3 = 3f64.sqrt();
    assert!((r.upper - 3f64.powf(2.5) / 6.0).abs() < 1e-13);
    assert!((r.upper - 3.0 * s3 / 2.0).abs() < 1e-13);
    // E|X|^5 for X ~ U(−√3, √3).
    let oracle = simpson(|x| x.abs().powi(5) / (2.0 * s3), -s3, s3, 2_000);
    assert!((r.upper - oracle).abs() < 1e-9);
    let q = symmetric_product_bounds(&vec![Marginal::uniform(-s3, s3).unwrap(); 5], false).unwrap();
    assert!((q.upper - oracle).abs() < 1e-9);
}

#[test]
fn lognormal_comonotone_moment() {
    let ms = vec![Marginal::lognormal(0.0, 1.0).unwrap(); 3];
    let got = comonotonic_expectation(&ms).unwrap();
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let oracle = simpson(|z| (3.0 * z).exp() * phi(z), -12.0, 18.0, 60_000);
    assert!((got - 4.5f64.exp()).abs() < 1e-8 * got);
    assert!((oracle - 4.5f64.exp()).abs() < 1e-8 * oracle);
}

#[test]
fn nonpositive_pair_by_rearrangement() {
    let ms = vec![Marginal::uniform(-1.0, 0.0).unwrap(); 2];
    let b = nonpositive_domain_bounds(&ms).unwrap();
    assert!((b.upper - 1.0 / 3.0).abs() < 1e-12);
    assert!((b.lower - (-2f64).exp()).abs() < 1e-10);
    let hi = run_bra(&ms, &BraConfig::new(100_000, Direction::Max)).unwrap();
    let lo = run_bra(&ms, &BraConfig::new(100_000, Direction::Min)).unwrap();
    assert!((hi.lambda - b.upper).abs() < 1e-5, "{}", hi.lambda);
    // The pair attains 1/6 by the antimonotone pairing, so the bound holds
    // but is not reached.
    assert!((lo.lambda - 1.0 / 6.0).abs() < 1e-5, "{}", lo.lambda);
    assert!(lo.lambda >= b.lower && !b.lower_attainable);
}

#[test]
fn student_five_row() {
    let m = Marginal::student_t(5.0).unwrap();
    let nu: f64 = 5.0;
    let formula = 4.0 * (nu - 2.0) * ((nu - 2.0) * PI).sqrt() * gamma((nu + 1.0) / 2.0)
        / ((3.0 - 4.0 * nu + nu * nu) * PI * gamma(nu / 2.0));
    let closed = table2_closed_form(&m).unwrap();
    let quad = coskewness_bounds(&vec![m; 3]).unwrap();
    assert!((closed - formula).abs() < 1e-13);
    assert!((formula - 2.2053).abs() < 5e-5);
    assert!((quad.upper - formula).abs() < 1e-8 && (quad.lower + formula).abs() < 1e-8);
}

#[test]
fn two_point_cross_product_by_enumeration() {
    // Four equally likely branches of the construction for d = 3.
    let x = |hi: bool| if hi { 10.0 } else { -1.0 };
    let mut oracle = 0.0;
    for i in [false, true] {
        for j in [false, true] {
            let x2 = if j { x(i) } else { x(!i) };
            let x3 = if i == j { x(i) } else { x(!i) };
            oracle += 0.25 * x(i) * x2 * x3;
        }
    }
    assert_eq!(oracle, 257.5);
    let ms = vec![Marginal::discrete(vec![-1.0, 10.0], vec![0.5, 0.5]).unwrap(); 3];
    let mc = mc_expect_product(&ms, CopulaKind::MaxOdd, 200_000, 9).unwrap();
    assert!((mc.value - oracle).abs() < 4.0 * mc.se, "{mc:?}");
}
