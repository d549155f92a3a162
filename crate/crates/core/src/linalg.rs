//! Small dense complex linear-algebra helpers shared across modules.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `max |A - A^dagger|`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d
}

/// `max |A - B|`.
pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// `max |Phi^dagger Phi - 1|`.
pub fn unitarity_defect(phi: &CMat) -> f64 {
    let g = phi.adjoint() * phi;
    let mut d: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((g[(i, j)] - target).norm());
        }
    }
    d
}

/// `u^dagger A v`.
pub fn sandwich(u: &[C64], a: &CMat, v: &[C64]) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += a[(i, j)] * v[j];
        }
        s += u[i].conj() * row;
    }
    s
}

/// Real part of `sum_c phi_c^dagger A phi_c` over the first `ncols` columns.
pub fn trace_quadratic(a: &CMat, phi: &CMat, ncols: usize) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for c in 0..ncols {
        let col = phi.column(c);
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += a[(i, j)] * col[j];
            }
            s += (col[i].conj() * row).re;
        }
    }
    s
}

/// Pauli decomposition `H = h0 + hx sx + hy sy + hz sz` of a 2x2 Hermitian matrix.
#[inline]
pub fn pauli_components(h: &CMat) -> [f64; 4] {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let c = h[(1, 0)];
    [0.5 * (a + d), c.re, c.im, 0.5 * (a - d)]
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequence in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}
