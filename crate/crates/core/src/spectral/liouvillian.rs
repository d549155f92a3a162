use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

use super::FiberSpectrum;

/// `L A = [H, A]`.
pub fn liouvillian_apply(h: &CMat, a: &CMat) -> Result<CMat> {
    if h.nrows() != h.ncols() || a.shape() != h.shape() {
        return Err(Error::Shape(format!("H is {:?}, A is {:?}", h.shape(), a.shape())));
    }
    Ok(h * a - a * h)
}

pub(crate) fn check_gap(s: &FiberSpectrum, n_occ: usize) -> Result<()> {
    if n_occ > s.dim() {
        return Err(Error::InvalidArgument(format!("n_occ = {n_occ} exceeds dimension {}", s.dim())));
    }
    let scale = s.lambdas.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let gap = s.gap_above(n_occ);
    if gap <= 1e-12 * scale {
        return Err(Error::GapClosure { k: [s.k.x, s.k.y], gap });
    }
    Ok(())
}

/// Applies `f(lambda_i, lambda_j)` to the off-diagonal blocks of `A` in the
/// eigenbasis and zeroes the diagonal blocks.
fn off_diagonal_map(s: &FiberSpectrum, n_occ: usize, a: &CMat, f: impl Fn(usize, usize) -> f64) -> CMat {
    let v = &s.vectors;
    let mut t = v.adjoint() * a * v;
    let m = s.dim();
    for i in 0..m {
        for j in 0..m {
            if (i < n_occ) != (j < n_occ) {
                t[(i, j)] *= f(i, j);
            } else {
                t[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    v * t * v.adjoint()
}

/// Partial inverse of the Liouvillian relative to the lowest `n_occ` states:
/// off-diagonal block entries `A_ij` become `A_ij / (lambda_i - lambda_j)`,
/// diagonal blocks are mapped to zero.
pub fn liouvillian_pinv(s: &FiberSpectrum, n_occ: usize, a: &CMat) -> Result<CMat> {
    if a.shape() != (s.dim(), s.dim()) {
        return Err(Error::Shape(format!("A is {:?}, spectrum has dimension {}", a.shape(), s.dim())));
    }
    check_gap(s, n_occ)?;
    let l = &s.lambdas;
    Ok(off_diagonal_map(s, n_occ, a, |i, j| 1.0 / (l[i] - l[j])))
}

/// First-order perturbation of the projector on the lowest `n_occ` states
/// along the derivative `dh` of the Hamiltonian.
pub fn projector_derivative(s: &FiberSpectrum, n_occ: usize, dh: &CMat) -> Result<CMat> {
    check_gap(s, n_occ)?;
    // (dP)_ij = dH_ij / (lambda_occ - lambda_empty) across the blocks
    let l = &s.lambdas;
    Ok(off_diagonal_map(s, n_occ, dh, |i, j| if i < n_occ { 1.0 / (l[i] - l[j]) } else { 1.0 / (l[j] - l[i]) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Vec2;
    use crate::linalg::max_diff;
    use crate::spectral::{eigensystem, ground_projector};
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
    }

    fn spectrum(h: &CMat, n_occ: usize) -> FiberSpectrum {
        let e = eigensystem(h).unwrap();
        let mu = e.lambdas[n_occ.max(1) - 1];
        let mut s = FiberSpectrum::from_eigensystem(Vec2::zeros(), e, mu);
        s.n_occ = n_occ;
        s
    }

    fn random_matrix(m: usize, seed: &[f64]) -> CMat {
        let mut it = seed.iter().cycle();
        CMat::from_fn(m, m, |_, _| C64::new(*it.next().unwrap(), *it.next().unwrap()))
    }

    fn random_hermitian(m: usize, seed: &[f64]) -> CMat {
        let a = random_matrix(m, seed);
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn commutator_basics() {
        let h = diag(&[0.0, 1.0]);
        assert_eq!(liouvillian_apply(&h, &CMat::identity(2, 2)).unwrap(), CMat::zeros(2, 2));
        assert_eq!(liouvillian_apply(&h, &h).unwrap(), CMat::zeros(2, 2));
        let mut a = CMat::zeros(2, 2);
        a[(1, 0)] = C64::new(1.0, 0.0);
        assert_eq!(liouvillian_apply(&h, &a).unwrap(), a);
        assert!(liouvillian_apply(&h, &CMat::zeros(3, 3)).is_err());
    }

    #[test]
    fn two_level_inverse() {
        let delta = 2.5;
        let s = spectrum(&diag(&[0.0, delta]), 1);
        let sx = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let x = liouvillian_pinv(&s, 1, &sx).unwrap();
        // -i sigma_2 / delta
        let expected = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0),
            C64::new(-1.0 / delta, 0.0),
            C64::new(1.0 / delta, 0.0),
            C64::new(0.0, 0.0),
        ]);
        assert!(max_diff(&x, &expected) < 1e-15);
        let sv = x.singular_values();
        assert!((sv.max() - 1.0 / delta).abs() < 1e-14);
    }

    #[test]
    fn block_diagonal_maps_to_zero() {
        let s = spectrum(&diag(&[-1.0, 0.5, 2.0]), 1);
        let a = diag(&[3.0, -2.0, 7.0]);
        assert!(crate::linalg::max_abs(&liouvillian_pinv(&s, 1, &a).unwrap()) < 1e-15);
    }

    #[test]
    fn zero_gap_rejected() {
        let s = spectrum(&diag(&[0.0, 0.0]), 1);
        assert!(matches!(liouvillian_pinv(&s, 1, &CMat::identity(2, 2)), Err(Error::GapClosure { .. })));
    }

    #[test]
    fn projector_derivative_matches_finite_difference() {
        let h0 = random_hermitian(4, &[0.3, -1.1, 0.7, 2.0, -0.4, 0.9, 1.3, -0.2, 0.05]);
        let dh = random_hermitian(4, &[1.0, 0.2, -0.3, 0.6, 0.8, -1.4]);
        let s = spectrum(&h0, 2);
        let step = 1e-5;
        let proj = |h: &CMat| {
            let e = eigensystem(h).unwrap();
            let occ = e.vectors.columns(0, 2).into_owned();
            &occ * occ.adjoint()
        };
        let fd = (proj(&(&h0 + &dh * C64::new(step, 0.0))) - proj(&(&h0 - &dh * C64::new(step, 0.0))))
            / C64::new(2.0 * step, 0.0);
        assert!(max_diff(&projector_derivative(&s, 2, &dh).unwrap(), &fd) < 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn inverse_identities(
            m in 2usize..6, n_occ in 1usize..5,
            hs in proptest::collection::vec(-2.0..2.0f64, 50),
            as_ in proptest::collection::vec(-2.0..2.0f64, 50),
        ) {
            prop_assume!(n_occ < m);
            let h = random_hermitian(m, &hs);
            let s = spectrum(&h, n_occ);
            prop_assume!(s.gap_above(n_occ) > 1e-2);
            let a = random_matrix(m, &as_);
            let x = liouvillian_pinv(&s, n_occ, &a).unwrap();
            let p = ground_projector(&s, s.lambdas[n_occ - 1]).p;
            let q = CMat::identity(m, m) - &p;
            let off = &p * &a * &q + &q * &a * &p;
            let scale = 1.0 + crate::linalg::max_abs(&a);
            prop_assert!(max_diff(&liouvillian_apply(&h, &x).unwrap(), &off) <= 1e-10 * scale);
            let y = liouvillian_pinv(&s, n_occ, &liouvillian_apply(&h, &a).unwrap()).unwrap();
            prop_assert!(max_diff(&y, &off) <= 1e-10 * scale * (1.0 + crate::linalg::max_abs(&h)));
            let rank = x.rank(1e-9 * (1.0 + crate::linalg::max_abs(&x)));
            prop_assert!(rank <= 2 * n_occ);
        }

        #[test]
        fn liouvillian_is_self_adjoint(
            m in 2usize..6,
            hs in proptest::collection::vec(-2.0..2.0f64, 50),
            as_ in proptest::collection::vec(-2.0..2.0f64, 50),
            bs in proptest::collection::vec(-2.0..2.0f64, 50),
        ) {
            let h = random_hermitian(m, &hs);
            let a = random_matrix(m, &as_);
            let b = random_matrix(m, &bs);
            let la = liouvillian_apply(&h, &a).unwrap();
            let lb = liouvillian_apply(&h, &b).unwrap();
            let lhs = (la.adjoint() * &b).trace();
            let rhs = (a.adjoint() * &lb).trace();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }
    }
}
