use crate::dynamics::PropagationFrame;
use crate::error::{Error, Result};
use crate::lattice::{Direction, Vec2};
use crate::linalg::{CMat, C64};
use crate::models::BlochModel;
use crate::spectral::{liouvillian_pinv, projector_derivative, FiberSpectrum};

use super::current_integrand;

/// Splitting of the per-fiber current into the adiabatic, static and
/// oscillatory first-order contributions plus the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticTerms {
    /// `-d_alpha (sum of occupied bands)` at the shifted fiber.
    pub adiabatic: f64,
    /// `eps Re(i Tr(d_alpha H L^+ d_beta P))` at the shifted fiber.
    pub static_term: f64,
    /// `-eps Re(i Tr(d_alpha H U X U^*))` with `X = L^+ d_beta P` at the initial fiber.
    pub oscillatory: f64,
    /// Current integrand minus the three terms above; `O(eps^2 t)`.
    pub residual: f64,
}

fn lp_dp<M: BlochModel + ?Sized>(model: &M, k: &Vec2, eb: &Vec2, n_occ: usize) -> Result<(FiberSpectrum, CMat)> {
    let s = FiberSpectrum::compute(model, k, f64::NEG_INFINITY)?;
    let dp = projector_derivative(&s, n_occ, &model.deriv(k, eb))?;
    let x = liouvillian_pinv(&s, n_occ, &dp)?;
    Ok((s, x))
}

/// Decomposes `current_integrand` at fiber `k` and time `t`.
///
/// `frame` must hold the full propagator applied to the initial eigenbasis
/// (see [`propagate_frame_full`](crate::dynamics::propagate_frame_full)); its
/// first `n_occ` columns are the occupied states.
#[allow(clippy::too_many_arguments)]
pub fn adiabatic_decomposition<M: BlochModel + ?Sized>(
    model: &M,
    k: &Vec2,
    eps: f64,
    e_alpha: &Direction,
    e_beta: &Direction,
    mu_f: f64,
    t: f64,
    frame: &PropagationFrame,
) -> Result<AdiabaticTerms> {
    let m = model.dim();
    if frame.phi.shape() != (m, m) {
        return Err(Error::Shape(format!("decomposition needs the full {m}x{m} frame, got {:?}", frame.phi.shape())));
    }
    let n_occ = frame.n_occ;
    let s0 = FiberSpectrum::compute(model, k, mu_f)?;
    if s0.n_occ != n_occ {
        return Err(Error::InvalidArgument(format!("frame has {n_occ} occupied states, mu_F gives {}", s0.n_occ)));
    }
    let (ea, eb) = (e_alpha.vec(), e_beta.vec());
    let ks = k - eb * (eps * t);
    let dha = model.deriv(&ks, &ea);
    let (ss, xs) = lp_dp(model, &ks, &eb, n_occ)?;
    let adiabatic = -(0..n_occ)
        .map(|n| (ss.vectors.column(n).adjoint() * &dha * ss.vectors.column(n))[(0, 0)].re)
        .sum::<f64>();
    let i = C64::new(0.0, 1.0);
    let static_term = (i * eps * (&dha * &xs).trace()).re;
    let (s0, x0) = lp_dp(model, k, &eb, n_occ)?;
    let x_tilde = s0.vectors.adjoint() * x0 * &s0.vectors;
    let evolved = &frame.phi * x_tilde * frame.phi.adjoint();
    let oscillatory = -(i * eps * (&dha * evolved).trace()).re;
    let total = current_integrand(model, k, t, eps, e_alpha, e_beta, frame);
    Ok(AdiabaticTerms {
        adiabatic,
        static_term,
        oscillatory,
        residual: total - adiabatic - static_term - oscillatory,
    })
}
