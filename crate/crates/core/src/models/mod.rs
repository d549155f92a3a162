//! Bloch Hamiltonian families `k -> H_k`.
//!
//! Every model exposes its fiber, the exact directional derivative
//! `e . grad_k H_k` (minus the current-operator fiber), the orbital positions
//! used in the phase convention, and its lattice. Fibers are written in the
//! orbital-embedded gauge `H(k)_ab = sum_R t_ab(R) e^{i k.(R + tau_b - tau_a)}`,
//! so translation by a reciprocal vector `K` acts by the diagonal unitary
//! `T_K = diag(e^{-i K.tau_a})`.

mod dirac;
mod haldane;
mod tb;

pub use dirac::{dirac_fiber, DiracModel};
pub use haldane::{haldane_deriv, haldane_fiber, HaldaneModel, HaldaneParams, HALDANE_DELTAS};
pub use tb::{tb_fiber, Hopping, HoppingList, TbModel};

use crate::error::{Error, Result};
use crate::lattice::{Lattice2D, Vec2};
use crate::linalg::{CMat, C64};

/// A family of `M x M` Hermitian fibers over the Brillouin zone.
pub trait BlochModel: Send + Sync {
    /// Matrix size `M`.
    fn dim(&self) -> usize;

    fn lattice(&self) -> &Lattice2D;

    /// Orbital positions `tau_a` within the unit cell.
    fn tau(&self) -> &[Vec2];

    fn fiber(&self, k: &Vec2) -> CMat;

    /// Directional derivative `e . grad_k H_k`.
    fn deriv(&self, k: &Vec2, e: &Vec2) -> CMat;

    /// Writes `fiber(k)` into a preallocated matrix.
    fn fiber_into(&self, k: &Vec2, out: &mut CMat) {
        *out = self.fiber(k);
    }

    /// Whether the fiber is quasi-periodic over the reciprocal lattice.
    fn is_periodic(&self) -> bool {
        true
    }

    /// Expansion `H(k)_ab = sum t e^{i k.d}` if the model is a finite Fourier sum.
    /// Enables fast evaluation along straight lines in `k`.
    fn fourier_terms(&self) -> Option<Vec<FourierTerm>> {
        None
    }
}

/// One term `t e^{i k.d}` of the `(a, b)` fiber entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierTerm {
    pub a: usize,
    pub b: usize,
    pub d: Vec2,
    pub t: C64,
}

impl<T: BlochModel + ?Sized> BlochModel for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn lattice(&self) -> &Lattice2D {
        (**self).lattice()
    }
    fn tau(&self) -> &[Vec2] {
        (**self).tau()
    }
    fn fiber(&self, k: &Vec2) -> CMat {
        (**self).fiber(k)
    }
    fn deriv(&self, k: &Vec2, e: &Vec2) -> CMat {
        (**self).deriv(k, e)
    }
    fn fiber_into(&self, k: &Vec2, out: &mut CMat) {
        (**self).fiber_into(k, out)
    }
    fn is_periodic(&self) -> bool {
        (**self).is_periodic()
    }
    fn fourier_terms(&self) -> Option<Vec<FourierTerm>> {
        (**self).fourier_terms()
    }
}

impl<T: BlochModel + ?Sized> BlochModel for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn lattice(&self) -> &Lattice2D {
        (**self).lattice()
    }
    fn tau(&self) -> &[Vec2] {
        (**self).tau()
    }
    fn fiber(&self, k: &Vec2) -> CMat {
        (**self).fiber(k)
    }
    fn deriv(&self, k: &Vec2, e: &Vec2) -> CMat {
        (**self).deriv(k, e)
    }
    fn fiber_into(&self, k: &Vec2, out: &mut CMat) {
        (**self).fiber_into(k, out)
    }
    fn is_periodic(&self) -> bool {
        (**self).is_periodic()
    }
    fn fourier_terms(&self) -> Option<Vec<FourierTerm>> {
        (**self).fourier_terms()
    }
}

/// Diagonal unitary `T_K` with `fiber(k + K) = T_K fiber(k) T_K^dagger`.
pub fn quasi_period_unitary<M: BlochModel + ?Sized>(model: &M, k_vec: &Vec2) -> Result<CMat> {
    if !model.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    model.lattice().reciprocal_index(k_vec)?;
    let tau = model.tau();
    let mut t = CMat::zeros(tau.len(), tau.len());
    for (a, ta) in tau.iter().enumerate() {
        t[(a, a)] = C64::from_polar(1.0, -k_vec.dot(ta));
    }
    Ok(t)
}
