use crate::lattice::{Lattice2D, Vec2};
use crate::linalg::{CMat, C64};

use super::BlochModel;

/// `H^D_k = vF (k1 sx + k2 sy)`.
pub fn dirac_fiber(k: &Vec2, vf: f64) -> CMat {
    let z = C64::new(vf * k.x, vf * k.y);
    CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), z.conj(), z, C64::new(0.0, 0.0)])
}

/// Local conical model around a Dirac point. It has no reciprocal-lattice
/// periodicity; the attached square lattice only fixes units.
#[derive(Debug, Clone)]
pub struct DiracModel {
    pub vf: f64,
    lattice: Lattice2D,
    tau: [Vec2; 2],
}

impl DiracModel {
    pub fn new(vf: f64) -> Self {
        Self {
            vf,
            lattice: Lattice2D::square(),
            tau: [Vec2::zeros(); 2],
        }
    }
}

impl BlochModel for DiracModel {
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
        dirac_fiber(k, self.vf)
    }

    fn deriv(&self, _k: &Vec2, e: &Vec2) -> CMat {
        dirac_fiber(e, self.vf)
    }

    fn is_periodic(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_diff;
    use proptest::prelude::*;

    #[test]
    fn zero_at_origin() {
        assert_eq!(dirac_fiber(&Vec2::zeros(), 2.0), CMat::zeros(2, 2));
    }

    proptest! {
        #[test]
        fn derivative_is_exact(kx in -3.0..3.0f64, ky in -3.0..3.0f64, ex in -2.0..2.0f64, ey in -2.0..2.0f64, vf in 0.1..3.0f64) {
            let m = DiracModel::new(vf);
            let k = Vec2::new(kx, ky);
            let e = Vec2::new(ex, ey);
            let h = 1e-4;
            let fd = (m.fiber(&(k + e * h)) - m.fiber(&(k - e * h))) / C64::new(2.0 * h, 0.0);
            prop_assert!(max_diff(&m.deriv(&k, &e), &fd) <= 1e-10);
        }
    }
}
