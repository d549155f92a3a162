use crate::lattice::{Lattice2D, Vec2};
use crate::linalg::{CMat, C64};

use super::{BlochModel, FourierTerm, HoppingList, TbModel};

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Nearest-neighbour bond vectors `delta_1..3` of the honeycomb lattice.
pub const HALDANE_DELTAS: [Vec2; 3] = [
    Vec2::new(INV_SQRT3, 0.0),
    Vec2::new(-0.5 * INV_SQRT3, 0.5),
    Vec2::new(-0.5 * INV_SQRT3, -0.5),
];

/// On-site mass `g` and second-neighbour amplitude `t2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaldaneParams {
    pub g: f64,
    pub t2: f64,
}

/// Second-neighbour vectors `a1`, `a2`, `a1 - a2` entering the mass term.
fn second_neighbours() -> [Vec2; 3] {
    let s = 3f64.sqrt() / 2.0;
    let a1 = Vec2::new(s, 0.5);
    let a2 = Vec2::new(s, -0.5);
    [a1, a2, a1 - a2]
}

#[inline]
fn mass_and_bond(k: &Vec2, p: &HaldaneParams) -> (f64, C64) {
    let v = second_neighbours();
    let m = p.g + 2.0 * p.t2 * (k.dot(&v[0]).sin() + k.dot(&v[1]).sin() + k.dot(&v[2]).sin());
    let mut f = C64::new(0.0, 0.0);
    for d in HALDANE_DELTAS.iter() {
        f += C64::from_polar(1.0, k.dot(d));
    }
    (m, f)
}

/// `H_k = [[m(k), conj f(k)], [f(k), -m(k)]]` with
/// `m(k) = g + 2 t2 (sin k.a1 + sin k.a2 + sin k.(a1 - a2))` and `f(k) = sum_i e^{i k.delta_i}`.
///
/// ```
/// use crystal_current::models::{haldane_fiber, HaldaneParams};
/// use crystal_current::lattice::Vec2;
/// let h = haldane_fiber(&Vec2::zeros(), &HaldaneParams { g: 1.0, t2: 0.0 });
/// assert_eq!(h[(0, 1)].re, 3.0);
/// assert_eq!(h[(1, 1)].re, -1.0);
/// ```
pub fn haldane_fiber(k: &Vec2, p: &HaldaneParams) -> CMat {
    let (m, f) = mass_and_bond(k, p);
    CMat::from_row_slice(2, 2, &[C64::new(m, 0.0), f.conj(), f, C64::new(-m, 0.0)])
}

/// Exact directional derivative `e . grad_k` of [`haldane_fiber`].
pub fn haldane_deriv(k: &Vec2, e: &Vec2, p: &HaldaneParams) -> CMat {
    let v = second_neighbours();
    let dm = 2.0
        * p.t2
        * (k.dot(&v[0]).cos() * e.dot(&v[0])
            + k.dot(&v[1]).cos() * e.dot(&v[1])
            + k.dot(&v[2]).cos() * e.dot(&v[2]));
    let mut df = C64::new(0.0, 0.0);
    for d in HALDANE_DELTAS.iter() {
        df += C64::new(0.0, e.dot(d)) * C64::from_polar(1.0, k.dot(d));
    }
    CMat::from_row_slice(2, 2, &[C64::new(dm, 0.0), df.conj(), df, C64::new(-dm, 0.0)])
}

/// The Haldane-type two-band model on the honeycomb lattice.
#[derive(Debug, Clone)]
pub struct HaldaneModel {
    pub params: HaldaneParams,
    lattice: Lattice2D,
    tau: [Vec2; 2],
}

impl HaldaneModel {
    pub fn new(params: HaldaneParams) -> Self {
        Self {
            params,
            lattice: Lattice2D::honeycomb(),
            tau: [Vec2::zeros(), -HALDANE_DELTAS[0]],
        }
    }
}

impl BlochModel for HaldaneModel {
    fn dim(&self) -> usize {
        2
    }

    fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }

    fn tau(&self) -> &[Vec2] {
        &self.tau
    }

    fn fiber(&self, k: &Vec2) -> CMat {
        haldane_fiber(k, &self.params)
    }

    fn deriv(&self, k: &Vec2, e: &Vec2) -> CMat {
        haldane_deriv(k, e, &self.params)
    }

    fn fourier_terms(&self) -> Option<Vec<FourierTerm>> {
        TbModel::new(HoppingList::haldane(&self.params)).fourier_terms()
    }

    fn fiber_into(&self, k: &Vec2, out: &mut CMat) {
        let (m, f) = mass_and_bond(k, &self.params);
        out[(0, 0)] = C64::new(m, 0.0);
        out[(0, 1)] = f.conj();
        out[(1, 0)] = f;
        out[(1, 1)] = C64::new(-m, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_defect, max_diff};
    use crate::models::quasi_period_unitary;
    use proptest::prelude::*;

    fn fd(p: &HaldaneParams, k: &Vec2, e: &Vec2, h: f64) -> CMat {
        (haldane_fiber(&(k + e * h), p) - haldane_fiber(&(k - e * h), p)) / C64::new(2.0 * h, 0.0)
    }

    #[test]
    fn fiber_at_gamma() {
        let h = haldane_fiber(&Vec2::zeros(), &HaldaneParams { g: 1.0, t2: 0.0 });
        let expected = CMat::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0),
            C64::new(3.0, 0.0),
            C64::new(3.0, 0.0),
            C64::new(-1.0, 0.0),
        ]);
        assert!(max_diff(&h, &expected) < 1e-15);
    }

    #[test]
    fn derivative_at_gamma_along_x() {
        let p = HaldaneParams { g: 1.0, t2: 0.0 };
        let d = haldane_deriv(&Vec2::zeros(), &Vec2::new(1.0, 0.0), &p);
        let sx: f64 = HALDANE_DELTAS.iter().map(|d| d.x).sum();
        assert_eq!(d[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(d[(1, 1)], C64::new(0.0, 0.0));
        assert!((d[(1, 0)] - C64::new(0.0, sx)).norm() < 1e-15);
        assert!((d[(0, 1)] - C64::new(0.0, -sx)).norm() < 1e-15);
    }

    #[test]
    fn time_reversal_without_t2() {
        let p = HaldaneParams { g: 0.7, t2: 0.0 };
        for i in 0..50 {
            let k = Vec2::new(0.37 * i as f64 - 4.0, 1.3 - 0.21 * i as f64);
            let a = haldane_fiber(&-k, &p);
            let b = haldane_fiber(&k, &p).map(|z| z.conj());
            assert!(max_diff(&a, &b) < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn fiber_hermitian(kx in -10.0..10.0f64, ky in -10.0..10.0f64, g in -3.0..3.0f64, t2 in -2.0..2.0f64) {
            let h = haldane_fiber(&Vec2::new(kx, ky), &HaldaneParams { g, t2 });
            prop_assert!(hermitian_defect(&h) <= 1e-14);
        }

        #[test]
        fn derivative_matches_central_difference(
            kx in -10.0..10.0f64, ky in -10.0..10.0f64, theta in 0.0..6.3f64,
            g in -2.0..2.0f64, t2 in -1.0..1.0f64,
        ) {
            let p = HaldaneParams { g, t2 };
            let k = Vec2::new(kx, ky);
            let e = Vec2::new(theta.cos(), theta.sin());
            let d = haldane_deriv(&k, &e, &p);
            prop_assert!(hermitian_defect(&d) <= 1e-14);
            prop_assert!(max_diff(&d, &fd(&p, &k, &e, 1e-4)) <= 1e-7);
        }

        #[test]
        fn quasi_periodicity(
            kx in -5.0..5.0f64, ky in -5.0..5.0f64, n1 in -2i32..3, n2 in -2i32..3,
            g in -3.0..3.0f64, t2 in -2.0..2.0f64,
        ) {
            let m = HaldaneModel::new(HaldaneParams { g, t2 });
            let kk = m.lattice().from_fractional(n1 as f64, n2 as f64);
            let k = Vec2::new(kx, ky);
            let t = quasi_period_unitary(&m, &kk).unwrap();
            let lhs = m.fiber(&(k + kk));
            let rhs = &t * m.fiber(&k) * t.adjoint();
            prop_assert!(max_diff(&lhs, &rhs) <= 1e-10);
        }

        #[test]
        fn fiber_into_agrees(kx in -5.0..5.0f64, ky in -5.0..5.0f64) {
            let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: -1.0 });
            let k = Vec2::new(kx, ky);
            let mut out = CMat::zeros(2, 2);
            m.fiber_into(&k, &mut out);
            prop_assert_eq!(out, m.fiber(&k));
        }
    }
}
