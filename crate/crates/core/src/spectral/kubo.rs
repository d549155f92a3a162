use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, max_abs, sandwich, CMat, C64};

use super::liouvillian::check_gap;
use super::FiberSpectrum;

/// One occupied/unoccupied pair `(n, m)` of the spectral Kubo sum.
#[derive(Debug, Clone, Copy)]
pub struct KuboMode {
    /// `omega = lambda_n - lambda_m` (negative).
    pub omega: f64,
    /// `<n|dH_beta|m><m|dH_alpha|n> / (lambda_m - lambda_n)^2`.
    pub coeff: C64,
    /// `<m|dH_beta|n><n|dH_alpha|m> / (lambda_m - lambda_n)^2`.
    pub coeff_rev: C64,
}

/// Kernel `e^{-ix} - 1`, or its running time average
/// `(e^{-ix} - 1)/(-ix) - 1` when `averaged`.
pub fn kubo_kernel(x: f64, averaged: bool) -> C64 {
    if x == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let s = (0.5 * x).sin();
    if averaged {
        C64::new(x.sin() / x - 1.0, -2.0 * s * s / x)
    } else {
        C64::new(-2.0 * s * s, -x.sin())
    }
}

/// Mode decomposition of the per-fiber Kubo response for the lowest `n_occ` states.
pub fn kubo_modes(s: &FiberSpectrum, dha: &CMat, dhb: &CMat, n_occ: usize) -> Result<Vec<KuboMode>> {
    let m = s.dim();
    if dha.shape() != (m, m) || dhb.shape() != (m, m) {
        return Err(Error::Shape(format!("derivatives {:?}, {:?} vs dimension {m}", dha.shape(), dhb.shape())));
    }
    for d in [dha, dhb] {
        let defect = hermitian_defect(d);
        if defect > 1e-8 * max_abs(d) {
            return Err(Error::NonHermitian { defect, scale: max_abs(d) });
        }
    }
    if n_occ == 0 || n_occ == m {
        return Ok(Vec::new());
    }
    check_gap(s, n_occ)?;
    let cols: Vec<Vec<C64>> = (0..m).map(|c| s.vectors.column(c).iter().copied().collect()).collect();
    let mut modes = Vec::with_capacity(n_occ * (m - n_occ));
    for n in 0..n_occ {
        for mm in n_occ..m {
            let d2 = (s.lambdas[mm] - s.lambdas[n]).powi(2);
            let b_nm = sandwich(&cols[n], dhb, &cols[mm]);
            let a_mn = sandwich(&cols[mm], dha, &cols[n]);
            let b_mn = sandwich(&cols[mm], dhb, &cols[n]);
            let a_nm = sandwich(&cols[n], dha, &cols[mm]);
            modes.push(KuboMode {
                omega: s.lambdas[n] - s.lambdas[mm],
                coeff: b_nm * a_mn / d2,
                coeff_rev: b_mn * a_nm / d2,
            });
        }
    }
    Ok(modes)
}

/// Evaluates `i Tr(dH_alpha (e^{-itL} - 1) L^+ dH_beta-derivative of the projector)`
/// from precomputed modes; errors if the imaginary residual exceeds `1e-10`.
pub fn kubo_from_modes(modes: &[KuboMode], t: f64, averaged: bool) -> Result<f64> {
    let mut z = C64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for md in modes {
        let x = md.omega * t;
        z += kubo_kernel(x, averaged) * md.coeff - kubo_kernel(-x, averaged) * md.coeff_rev;
        scale = scale.max(md.coeff.norm());
    }
    let v = C64::new(0.0, 1.0) * z;
    if v.im.abs() > 1e-10 * (1.0 + scale) {
        return Err(Error::Inconsistent(format!("Kubo trace has imaginary part {:e}", v.im)));
    }
    Ok(v.re)
}

/// Per-fiber linear-response current contribution
/// `i Tr(dH_alpha (e^{-itL} - 1) L^+ d_beta gamma)` as a spectral double sum over
/// occupied `n` and empty `m`. With `averaged`, the oscillating factor is
/// replaced by its mean over `[0, t]`.
pub fn kubo_current(
    s: &FiberSpectrum,
    dha: &CMat,
    dhb: &CMat,
    mu_f: f64,
    t: f64,
    averaged: bool,
) -> Result<f64> {
    let n_occ = s.lambdas.iter().filter(|&&l| l <= mu_f).count();
    let modes = kubo_modes(s, dha, dhb, n_occ)?;
    kubo_from_modes(&modes, t, averaged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Vec2;
    use crate::models::{BlochModel, HaldaneModel, HaldaneParams};
    use crate::spectral::{eigensystem, liouvillian_pinv, projector_derivative};
    use proptest::prelude::*;

    fn matrix_route(s: &FiberSpectrum, dha: &CMat, dhb: &CMat, n_occ: usize, t: f64) -> C64 {
        // e^{-itL} X = e^{-itH} X e^{itH}, built from the spectrum
        let v = &s.vectors;
        let u = v * CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            s.dim(),
            s.lambdas.iter().map(|l| C64::from_polar(1.0, -l * t)),
        )) * v.adjoint();
        let dp = projector_derivative(s, n_occ, dhb).unwrap();
        let x = liouvillian_pinv(s, n_occ, &dp).unwrap();
        let evolved = &u * &x * u.adjoint() - &x;
        C64::new(0.0, 1.0) * (dha * evolved).trace()
    }

    #[test]
    fn vanishes_at_time_zero() {
        let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: -1.0 });
        let k = Vec2::new(0.3, 0.9);
        let s = FiberSpectrum::compute(&m, &k, 0.0).unwrap();
        let e = m.lattice().b1;
        for avg in [false, true] {
            assert_eq!(kubo_current(&s, &m.deriv(&k, &e), &m.deriv(&k, &e), 0.0, 0.0, avg).unwrap(), 0.0);
        }
    }

    #[test]
    fn filled_fiber_gives_zero() {
        let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: 0.0 });
        let k = Vec2::new(0.3, 0.9);
        let s = FiberSpectrum::compute(&m, &k, 50.0).unwrap();
        let d = m.deriv(&k, &Vec2::new(1.0, 0.0));
        assert_eq!(kubo_current(&s, &d, &d, 50.0, 3.0, false).unwrap(), 0.0);
    }

    #[test]
    fn two_level_closed_form() {
        // H = diag(0, delta), dH_alpha = dH_beta = sigma_1:
        // i Tr(...) = -2 Im[(e^{i delta t} - 1)] / delta^2 = -2 sin(delta t) / delta^2
        let delta = 1.7;
        let h = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(delta, 0.0)]);
        let s = FiberSpectrum::from_eigensystem(Vec2::zeros(), eigensystem(&h).unwrap(), 0.5);
        let sx = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        for t in [0.3, 1.0, 2.2, 7.5] {
            let v = kubo_current(&s, &sx, &sx, 0.5, t, false).unwrap();
            assert!((v + 2.0 * (delta * t).sin() / (delta * delta)).abs() < 1e-14);
            let period = 2.0 * std::f64::consts::PI / delta;
            let w = kubo_current(&s, &sx, &sx, 0.5, t + period, false).unwrap();
            assert!((v - w).abs() < 1e-13);
        }
    }

    #[test]
    fn averaged_kernel_is_time_mean() {
        for x in [0.1, 1.0, 3.7, 40.0] {
            let n = 20000;
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                let y = x * (i as f64 + 0.5) / n as f64;
                acc += kubo_kernel(y, false);
            }
            acc /= n as f64;
            assert!((acc - kubo_kernel(x, true)).norm() < 1e-7 * (1.0 + x));
        }
    }

    proptest! {
        #[test]
        fn spectral_sum_matches_matrix_route(
            kx in -4.0..4.0f64, ky in -4.0..4.0f64, t in 0.0..20.0f64,
            g in 0.5..2.0f64, t2 in -1.0..1.0f64,
            ea in 0.0..6.3f64, eb in 0.0..6.3f64,
        ) {
            let m = HaldaneModel::new(HaldaneParams { g, t2 });
            let k = Vec2::new(kx, ky);
            let s = FiberSpectrum::compute(&m, &k, 0.0).unwrap();
            let dha = m.deriv(&k, &Vec2::new(ea.cos(), ea.sin()));
            let dhb = m.deriv(&k, &Vec2::new(eb.cos(), eb.sin()));
            let direct = matrix_route(&s, &dha, &dhb, 1, t);
            let v = kubo_current(&s, &dha, &dhb, 0.0, t, false).unwrap();
            prop_assert!(direct.im.abs() < 1e-10);
            prop_assert!((direct.re - v).abs() < 1e-10 * (1.0 + v.abs()));
        }
    }
}
