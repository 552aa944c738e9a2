//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

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
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_evals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 0.0, rel: 1e-8, max_evals: 200_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Segment { a, b, value: k * h, error: ((k - g) * h).abs() }
}

/// Integrate `f` over [a, b]. The tolerance is checked against the summed
/// segment error estimates.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_breakpoints(&mut f, &[a, b], tol)
}

/// Same as [`integrate`], starting from the given sorted breakpoints.
pub fn integrate_breakpoints<F: FnMut(f64) -> f64>(f: &mut F, points: &[f64], tol: Tolerance) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in points.windows(2) {
        heap.push(kronrod(f, w[0], w[1]));
        evals += 15;
    }
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Estimate { value, error, evaluations: evals });
        }
        if evals >= tol.max_evals {
            return Err(Error::Quadrature { estimate: value, error, evaluations: evals });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            return Err(Error::Quadrature { estimate: value, error, evaluations: evals });
        }
        heap.push(kronrod(f, worst.a, mid));
        heap.push(kronrod(f, mid, worst.b));
        evals += 30;
    }
}

/// Integrate over the whole real line with x = scale * t / (1 - t^2).
/// `scale` should be about the width of the integrand's main feature.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(mut f: F, center: f64, scale: f64, tol: Tolerance) -> Result<Estimate> {
    let mut g = |t: f64| {
        let d = 1.0 - t * t;
        if d <= 0.0 {
            return 0.0;
        }
        let x = center + scale * t / d;
        let jac = scale * (1.0 + t * t) / (d * d);
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let pts: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
    integrate_breakpoints(&mut g, &pts, tol)
}
