//! Small complex solvers for ring chains.
//!
//! The signal (or idler) block of the coupled-mode matrix is tridiagonal;
//! the full 2N x 2N system becomes block tridiagonal with 2x2 blocks once the
//! signal and idler amplitudes of each ring are interleaved.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

/// Thomas algorithm. `sub[i]` couples row i+1 to column i, `sup[i]` row i to
/// column i+1. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(sub: &[C64], diag: &[C64], sup: &[C64], rhs: &[C64]) -> Option<Vec<C64>> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    debug_assert!(n == 0 || (sub.len() == n - 1 && sup.len() == n - 1));
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    let mut pivot = diag[0];
    if pivot.norm_sqr() == 0.0 {
        return None;
    }
    if n > 1 {
        c[0] = sup[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * c[i - 1];
        if pivot.norm_sqr() == 0.0 {
            return None;
        }
        if i < n - 1 {
            c[i] = sup[i] / pivot;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    Some(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Block2 {
    pub fn diag(a: C64, d: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self { a, b: z, c: z, d }
    }

    fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm_sqr() == 0.0 {
            return None;
        }
        Some(Self { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det })
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    fn sub(&self, o: &Self) -> Self {
        Self { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }

    fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }
}

/// Block Thomas for 2x2 blocks: `lower[i]` couples block row i+1 to column
/// i, `upper[i]` block row i to column i+1.
pub fn solve_block_tridiagonal(
    lower: &[Block2],
    diag: &[Block2],
    upper: &[Block2],
    rhs: &[[C64; 2]],
) -> Option<Vec<[C64; 2]>> {
    let n = diag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let zero = C64::new(0.0, 0.0);
    let mut c: Vec<Block2> = vec![Block2::diag(zero, zero); n];
    let mut d: Vec<[C64; 2]> = vec![[zero, zero]; n];
    let mut inv = diag[0].inverse()?;
    if n > 1 {
        c[0] = inv.mul(&upper[0]);
    }
    d[0] = inv.apply(rhs[0]);
    for i in 1..n {
        let pivot = diag[i].sub(&lower[i - 1].mul(&c[i - 1]));
        inv = pivot.inverse()?;
        if i < n - 1 {
            c[i] = inv.mul(&upper[i]);
        }
        let l = lower[i - 1].apply(d[i - 1]);
        d[i] = inv.apply([rhs[i][0] - l[0], rhs[i][1] - l[1]]);
    }
    for i in (0..n - 1).rev() {
        let t = c[i].apply(d[i + 1]);
        d[i] = [d[i][0] - t[0], d[i][1] - t[1]];
    }
    Some(d)
}

/// Eigenvalue spread (max - min) of the real symmetric tridiagonal matrix
/// with zero diagonal and the given off-diagonal hopping rates.
pub fn hopping_spectrum_width(hopping: &[f64]) -> f64 {
    let n = hopping.len() + 1;
    if n == 1 {
        return 0.0;
    }
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, &j) in hopping.iter().enumerate() {
        h[(i, i + 1)] = j;
        h[(i + 1, i)] = j;
    }
    let eig = SymmetricEigen::new(h);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}
