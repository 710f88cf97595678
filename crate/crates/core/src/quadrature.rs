//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate falls below `rel_tol · ∫|f|` (or `abs_tol`). An interval that would
//! need splitting beyond `max_depth` bisections makes the integral fail; this
//! is how divergent integrands surface.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_depth: 20,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    piece: usize,
    a: f64,
    b: f64,
    depth: u32,
    value: f64,
    abs_value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod(f: &dyn Fn(usize, f64) -> f64, piece: usize, a: f64, b: f64, depth: u32) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(piece, center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(piece, center - dx);
        let f2 = f(piece, center + dx);
        if !(f1.is_finite() && f2.is_finite()) {
            return Err(Error::Integration(format!("non-finite integrand near [{a}, {b}]")));
        }
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !fc.is_finite() {
        return Err(Error::Integration(format!("non-finite integrand near [{a}, {b}]")));
    }
    // QUADPACK-style error scaling.
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let asc = asc * half.abs();
    let value = kronrod * half;
    let abs_value = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * abs_value;
    if roundoff > error {
        error = roundoff;
    }
    Ok(Segment {
        piece,
        a,
        b,
        depth,
        value,
        abs_value,
        error,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<Integral> {
    integrate_pieces(&|_, x| f(x), &[(a, b)], opts)
}

/// Integrates `f(piece, x)` over each `pieces[piece]` and returns the total,
/// refining all pieces against one shared tolerance.
pub fn integrate_pieces(f: &dyn Fn(usize, f64) -> f64, pieces: &[(f64, f64)], opts: &QuadOptions) -> Result<Integral> {
    let mut heap = BinaryHeap::with_capacity(pieces.len() * 4);
    let (mut abs_value, mut error) = (0.0, 0.0);
    let mut evaluations = 0;
    for (i, &(a, b)) in pieces.iter().enumerate() {
        let seg = gauss_kronrod(f, i, a, b, 0)?;
        evaluations += 15;
        abs_value += seg.abs_value;
        error += seg.error;
        heap.push(seg);
    }
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * abs_value);
        if error <= tol {
            break;
        }
        let worst = heap.pop().expect("at least one segment");
        if worst.depth >= opts.max_depth || heap.len() + 2 > opts.max_intervals {
            return Err(Error::Integration(format!(
                "no convergence: error estimate {error:e} above tolerance {tol:e} near [{}, {}]",
                worst.a, worst.b
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod(f, worst.piece, worst.a, mid, worst.depth + 1)?;
        let right = gauss_kronrod(f, worst.piece, mid, worst.b, worst.depth + 1)?;
        evaluations += 30;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let value = heap.iter().map(|s| s.value).sum();
    let abs_error = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        abs_error,
        evaluations,
    })
}
