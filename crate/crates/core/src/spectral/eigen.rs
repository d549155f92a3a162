use crate::error::{Error, Result};
use crate::lattice::Vec2;
use crate::linalg::{hermitian_defect, max_abs, CMat, C64};
use crate::models::BlochModel;

/// Ascending eigenvalues and matching orthonormal eigencolumns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub lambdas: Vec<f64>,
    pub vectors: CMat,
}

/// Eigenstructure of one fiber together with its occupation at a Fermi level.
#[derive(Debug, Clone)]
pub struct FiberSpectrum {
    pub k: Vec2,
    pub lambdas: Vec<f64>,
    pub vectors: CMat,
    /// Number of eigenvalues `<= mu_F`.
    pub n_occ: usize,
    /// `lambda_{N+1} - lambda_N`; infinite when all or no states are occupied.
    pub gap: f64,
}

impl FiberSpectrum {
    pub fn from_eigensystem(k: Vec2, eig: Eigensystem, mu_f: f64) -> Self {
        let n_occ = eig.lambdas.iter().filter(|&&l| l <= mu_f).count();
        let m = eig.lambdas.len();
        let gap = if n_occ == 0 || n_occ == m {
            f64::INFINITY
        } else {
            eig.lambdas[n_occ] - eig.lambdas[n_occ - 1]
        };
        Self { k, lambdas: eig.lambdas, vectors: eig.vectors, n_occ, gap }
    }

    /// Diagonalizes `model.fiber(k)`.
    pub fn compute<M: BlochModel + ?Sized>(model: &M, k: &Vec2, mu_f: f64) -> Result<Self> {
        Ok(Self::from_eigensystem(*k, eigensystem(&model.fiber(k))?, mu_f))
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Gap between bands `n` and `n + 1` (one-based `n`), infinite at the edges.
    pub fn gap_above(&self, n: usize) -> f64 {
        if n == 0 || n >= self.lambdas.len() {
            f64::INFINITY
        } else {
            self.lambdas[n] - self.lambdas[n - 1]
        }
    }

    /// Sum of the lowest `n` eigenvalues.
    pub fn band_sum(&self, n: usize) -> f64 {
        self.lambdas[..n].iter().sum()
    }
}

fn fix_phases(v: &mut CMat) {
    for c in 0..v.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for r in 0..v.nrows() {
            let a = v[(r, c)].norm();
            if a > best_abs {
                best_abs = a;
                best = r;
            }
        }
        if best_abs > 0.0 {
            let z = v[(best, c)];
            let phase = z.conj() / z.norm();
            for r in 0..v.nrows() {
                v[(r, c)] *= phase;
            }
            v[(best, c)] = C64::new(v[(best, c)].norm(), 0.0);
        }
    }
}

fn eigen2(h: &CMat) -> Eigensystem {
    let [h0, hx, hy, hz] = crate::linalg::pauli_components(h);
    let c = C64::new(hx, hy);
    let r = (hz * hz + c.norm_sqr()).sqrt();
    let mut v = CMat::identity(2, 2);
    if r > 0.0 {
        // Upper eigenvector, built from the better-conditioned row.
        let (x, y) = if hz >= 0.0 {
            (C64::new(hz + r, 0.0), c)
        } else {
            (c.conj(), C64::new(r - hz, 0.0))
        };
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (x, y) = (x / n, y / n);
        v[(0, 1)] = x;
        v[(1, 1)] = y;
        v[(0, 0)] = -y.conj();
        v[(1, 0)] = x.conj();
    }
    Eigensystem { lambdas: vec![h0 - r, h0 + r], vectors: v }
}

/// Hermitian eigendecomposition with ascending eigenvalues. Each eigenvector is
/// normalized so that its largest-modulus component is real and positive.
///
/// ```
/// use crystal_current::linalg::{CMat, C64};
/// use crystal_current::spectral::eigensystem;
/// let s3 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
/// assert_eq!(eigensystem(&s3).unwrap().lambdas, vec![-1.0, 1.0]);
/// ```
pub fn eigensystem(h: &CMat) -> Result<Eigensystem> {
    if h.nrows() != h.ncols() {
        return Err(Error::Shape(format!("{}x{} is not square", h.nrows(), h.ncols())));
    }
    let scale = max_abs(h);
    let defect = hermitian_defect(h);
    if defect > 1e-8 * scale {
        return Err(Error::NonHermitian { defect, scale });
    }
    let mut eig = if h.nrows() == 2 {
        eigen2(h)
    } else {
        let sym = nalgebra::linalg::SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..h.nrows()).collect();
        order.sort_by(|&a, &b| sym.eigenvalues[a].total_cmp(&sym.eigenvalues[b]));
        let lambdas = order.iter().map(|&i| sym.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(h.nrows(), h.ncols(), |r, c| sym.eigenvectors[(r, order[c])]);
        Eigensystem { lambdas, vectors }
    };
    fix_phases(&mut eig.vectors);
    Ok(eig)
}

/// Spectral projector onto eigenvalues `<= mu_F`.
#[derive(Debug, Clone)]
pub struct GroundProjector {
    pub p: CMat,
    pub rank: usize,
}

/// `P = sum_{lambda_n <= mu_F} u_n u_n^dagger`.
pub fn ground_projector(s: &FiberSpectrum, mu_f: f64) -> GroundProjector {
    let rank = s.lambdas.iter().filter(|&&l| l <= mu_f).count();
    let occ = s.vectors.columns(0, rank);
    GroundProjector { p: occ * occ.adjoint(), rank }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice2D;
    use crate::linalg::{max_diff, unitarity_defect};
    use crate::models::{dirac_fiber, haldane_fiber, HaldaneModel, HaldaneParams};
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn random_hermitian(m: usize, seed: &[f64]) -> CMat {
        let mut h = CMat::zeros(m, m);
        let mut it = seed.iter().cycle();
        for i in 0..m {
            h[(i, i)] = C64::new(*it.next().unwrap(), 0.0);
            for j in i + 1..m {
                let z = C64::new(*it.next().unwrap(), *it.next().unwrap());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    fn check_spectrum(h: &CMat, e: &Eigensystem) -> Result<()> {
        let scale = max_abs(h).max(1e-300);
        assert!(unitarity_defect(&e.vectors) < 1e-10);
        for w in e.lambdas.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for n in 0..h.nrows() {
            let u = e.vectors.column(n);
            let r = h * u - u * C64::new(e.lambdas[n], 0.0);
            assert!(r.norm() <= 1e-10 * scale * h.nrows() as f64);
        }
        Ok(())
    }

    #[test]
    fn sigma3() {
        let h = CMat::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        assert_eq!(eigensystem(&h).unwrap().lambdas, vec![-1.0, 1.0]);
    }

    #[test]
    fn haldane_gamma() {
        let h = haldane_fiber(&Vec2::zeros(), &HaldaneParams { g: 1.0, t2: 0.0 });
        let e = eigensystem(&h).unwrap();
        assert!((e.lambdas[0] + 10f64.sqrt()).abs() < 1e-14);
        assert!((e.lambdas[1] - 10f64.sqrt()).abs() < 1e-14);
        let h = haldane_fiber(&Vec2::zeros(), &HaldaneParams { g: 0.0, t2: 0.0 });
        assert_eq!(eigensystem(&h).unwrap().lambdas, vec![-3.0, 3.0]);
    }

    #[test]
    fn dirac_eigenvalues_and_vectors() {
        let r = 0.7;
        let e = eigensystem(&dirac_fiber(&Vec2::new(r, 0.0), 1.0)).unwrap();
        assert!((e.lambdas[0] + r).abs() < 1e-15 && (e.lambdas[1] - r).abs() < 1e-15);
        let theta: f64 = 1.1;
        let e = eigensystem(&dirac_fiber(&Vec2::new(theta.cos(), theta.sin()), 1.0)).unwrap();
        let up = e.vectors.column(1);
        // u_+ = (1, e^{i theta}) / sqrt 2 up to a global phase
        let ratio = up[1] / up[0];
        assert!((ratio - C64::from_polar(1.0, theta)).norm() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMat::identity(3, 3);
        h[(0, 2)] = C64::new(1.0, 0.0);
        assert!(matches!(eigensystem(&h), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn phase_convention_is_deterministic() {
        let h = random_hermitian(4, &[0.3, -1.2, 0.8, 0.1, 0.5, -0.7, 1.9, 0.2, -0.4]);
        let e = eigensystem(&h).unwrap();
        for c in 0..4 {
            let col = e.vectors.column(c);
            let imax = (0..4).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap();
            assert!(col[imax].im == 0.0 && col[imax].re > 0.0);
        }
    }

    #[test]
    fn zero_matrix() {
        let e = eigensystem(&CMat::zeros(2, 2)).unwrap();
        assert_eq!(e.lambdas, vec![0.0, 0.0]);
        assert_eq!(e.vectors, CMat::identity(2, 2));
    }

    #[test]
    fn projector_occupations() {
        let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: 0.0 });
        let l = Lattice2D::honeycomb();
        let grid = crate::lattice::make_grid(&l, 12, Vec2::zeros()).unwrap();
        let mut ranks = std::collections::BTreeSet::new();
        for k in &grid.points {
            let s = FiberSpectrum::compute(&m, k, 0.0).unwrap();
            assert_eq!(ground_projector(&s, 0.0).rank, 1);
            let s = FiberSpectrum::compute(&m, k, -2.0).unwrap();
            ranks.insert(ground_projector(&s, -2.0).rank);
            assert_eq!(ground_projector(&s, -100.0).p, CMat::zeros(2, 2));
        }
        assert_eq!(ranks.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    proptest! {
        #[test]
        fn random_hermitian_spectra(m in 2usize..6, seed in proptest::collection::vec(-2.0..2.0f64, 40)) {
            let h = random_hermitian(m, &seed);
            let e = eigensystem(&h).unwrap();
            check_spectrum(&h, &e).unwrap();
        }

        #[test]
        fn projector_is_idempotent_and_gauge_invariant(
            m in 2usize..6, seed in proptest::collection::vec(-2.0..2.0f64, 40),
            mu in -2.0..2.0f64, phases in proptest::collection::vec(0.0..6.3f64, 6),
        ) {
            let h = random_hermitian(m, &seed);
            let s = FiberSpectrum::from_eigensystem(Vec2::zeros(), eigensystem(&h).unwrap(), mu);
            let gp = ground_projector(&s, mu);
            prop_assert!(max_diff(&(&gp.p * &gp.p), &gp.p) <= 1e-10);
            prop_assert!(max_diff(&gp.p.adjoint(), &gp.p) <= 1e-14);
            prop_assert!((gp.p.trace().re - gp.rank as f64).abs() <= 1e-10);
            let mut s2 = s.clone();
            for (c, &phase) in phases.iter().enumerate().take(m) {
                let ph = C64::from_polar(1.0, phase);
                for r in 0..m {
                    s2.vectors[(r, c)] *= ph;
                }
            }
            prop_assert!(max_diff(&ground_projector(&s2, mu).p, &gp.p) <= 1e-10);
        }
    }
}
