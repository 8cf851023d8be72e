//! Adaptive Gauss–Kronrod integration on finite intervals.
//!
//! The integrands used by the moment constants have integrable
//! singularities at 0 and 1 (quantile functions diverge there), so the rule
//! only evaluates interior nodes and the caller may flag endpoints that need
//! geometric pre-refinement.

use crate::error::{MtmError, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default relative tolerance; the looser of the two bounds applies.
pub const DEFAULT_REL_TOL: f64 = 1e-12;
/// Default cap on the number of subintervals.
pub const DEFAULT_BUDGET: usize = 1 << 16;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Endpoints that need geometric refinement before adaptive bisection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Singular {
    pub lo: bool,
    pub hi: bool,
}

impl Singular {
    pub const NONE: Singular = Singular {
        lo: false,
        hi: false,
    };
    pub const BOTH: Singular = Singular { lo: true, hi: true };
}

/// Integration settings.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub tol: f64,
    pub rel_tol: f64,
    pub budget: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            tol: DEFAULT_TOL,
            rel_tol: DEFAULT_REL_TOL,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Evaluates `f` at `x` moved strictly inside `(lo, hi)`; nodes of very
/// short intervals next to an endpoint can round onto it.
fn eval_inside<F: Fn(f64) -> f64>(f: &F, x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo {
        f(lo.next_up())
    } else if x >= hi {
        f(hi.next_down())
    } else {
        f(x)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let f = |x: f64| eval_inside(f, x, a, b);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    let mut fv = [0.0; 14];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kron * h;
    let asc = asc * h.abs();
    let mut error = ((kron - gauss) * h).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * abs_sum * h.abs();
    if round > f64::MIN_POSITIVE {
        error = error.max(round);
    }
    Piece { a, b, value, error }
}

impl Quadrature {
    /// Integrates `f` over `[a, b]`; `a == b` gives 0.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        singular: Singular,
    ) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(MtmError::Quadrature(format!(
                "non-finite limits [{a}, {b}]"
            )));
        }
        if a > b {
            return self
                .integrate(
                    f,
                    b,
                    a,
                    Singular {
                        lo: singular.hi,
                        hi: singular.lo,
                    },
                )
                .map(|v| -v);
        }

        let mut cuts = vec![a, b];
        let width = b - a;
        if singular.lo {
            let mut h = 0.5 * width;
            while h > 1e-14 * width {
                h *= 0.25;
                cuts.push(a + h);
            }
        }
        if singular.hi {
            let mut h = 0.5 * width;
            while h > 1e-14 * width {
                h *= 0.25;
                cuts.push(b - h);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut heap = BinaryHeap::new();
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                heap.push(kronrod(&f, w[0], w[1]));
            }
        }
        let mut pieces = heap.len();
        let mut err: f64 = heap.iter().map(|p| p.error).sum();
        let mut value: f64 = heap.iter().map(|p| p.value).sum();
        loop {
            let bound = self.tol.max(self.rel_tol * value.abs());
            if !err.is_finite() {
                return Err(MtmError::Quadrature(format!(
                    "non-finite integrand on [{a}, {b}]"
                )));
            }
            if err <= bound {
                let total: f64 = heap.iter().map(|p| p.value).sum();
                if !total.is_finite() {
                    return Err(MtmError::Quadrature(format!(
                        "non-finite integrand on [{a}, {b}]"
                    )));
                }
                return Ok(total);
            }
            if pieces >= self.budget {
                return Err(MtmError::Quadrature(format!(
                    "tolerance {} not reached on [{a}, {b}] after {pieces} subintervals (error {err:e})",
                    self.tol
                )));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Interval cannot be split further in floating point.
                err -= worst.error;
                heap.push(Piece {
                    error: 0.0,
                    ..worst
                });
                continue;
            }
            let left = kronrod(&f, worst.a, mid);
            let right = kronrod(&f, mid, worst.b);
            err += left.error + right.error - worst.error;
            value += left.value + right.value - worst.value;
            // Re-sum occasionally so cancellation in the running total cannot
            // stall convergence.
            if pieces % 256 == 0 || err <= bound {
                err = heap.iter().map(|p| p.error).sum::<f64>() + left.error + right.error;
                value = heap.iter().map(|p| p.value).sum::<f64>() + left.value + right.value;
            }
            heap.push(left);
            heap.push(right);
            pieces += 1;
        }
    }
}

/// Integrates with the default tolerance and budget.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, singular: Singular) -> Result<f64> {
    Quadrature::default().integrate(f, a, b, singular)
}
