//! Runtime classification of a Fermi level as insulating, metallic or
//! semimetallic, and location of conical band touchings.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{BZGrid, Vec2};
use crate::models::BlochModel;

use super::{eigensystem, FiberSpectrum};

/// An isolated touching of bands `band` and `band + 1` (one-based).
#[derive(Debug, Clone)]
pub struct GapClosing {
    pub k: Vec2,
    /// Residual gap after polishing.
    pub gap: f64,
    /// Energy at the touching point.
    pub energy: f64,
    /// Smallest and largest cone slope `gap / (2 |dk|)` over sampled directions.
    pub v_min: f64,
    pub v_max: f64,
}

impl GapClosing {
    /// Mean cone slope, the Fermi velocity of an isotropic cone.
    pub fn v_f(&self) -> f64 {
        0.5 * (self.v_min + self.v_max)
    }
}

#[derive(Debug, Clone)]
pub enum PhaseKind {
    /// Constant occupation with a spectral gap around the Fermi level.
    Insulator { n_occ: usize, min_gap: f64 },
    /// Occupation varies over the zone. `bands` lists the (one-based) bands cut by the Fermi level.
    Metal { bands: Vec<usize> },
    /// Constant occupation, bands `n_occ` and `n_occ + 1` touch at the Fermi level.
    Semimetal { n_occ: usize, points: Vec<GapClosing> },
}

impl PhaseKind {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseKind::Insulator { .. } => "insulator",
            PhaseKind::Metal { .. } => "metal",
            PhaseKind::Semimetal { .. } => "semimetal",
        }
    }
}

fn gap_and_gradient<M: BlochModel + ?Sized>(model: &M, k: &Vec2, band: usize) -> Result<(f64, Vec2, f64)> {
    let e = eigensystem(&model.fiber(k))?;
    let lo = e.vectors.column(band - 1).into_owned();
    let hi = e.vectors.column(band).into_owned();
    let mut grad = Vec2::zeros();
    for (c, dir) in [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)].iter().enumerate() {
        let d = model.deriv(k, dir);
        let dl = (lo.adjoint() * &d * &lo)[(0, 0)].re;
        let dh = (hi.adjoint() * &d * &hi)[(0, 0)].re;
        grad[c] = dh - dl;
    }
    let gap = e.lambdas[band] - e.lambdas[band - 1];
    let energy = 0.5 * (e.lambdas[band] + e.lambdas[band - 1]);
    Ok((gap, grad, energy))
}

/// Newton iteration on `gap^2`, analytic gradient and finite-difference Hessian.
fn polish<M: BlochModel + ?Sized>(model: &M, band: usize, start: Vec2, scale: f64) -> Result<(Vec2, f64, f64)> {
    let phi_grad = |k: &Vec2| -> Result<(f64, Vec2, f64)> {
        let (g, dg, en) = gap_and_gradient(model, k, band)?;
        Ok((g * g, dg * (2.0 * g), en))
    };
    let mut k = start;
    let (mut phi, mut grad, mut energy) = phi_grad(&k)?;
    let h = 1e-6 * scale;
    for _ in 0..100 {
        if phi.sqrt() < 1e-13 * scale {
            break;
        }
        let (_, gx1, _) = phi_grad(&(k + Vec2::new(h, 0.0)))?;
        let (_, gx0, _) = phi_grad(&(k - Vec2::new(h, 0.0)))?;
        let (_, gy1, _) = phi_grad(&(k + Vec2::new(0.0, h)))?;
        let (_, gy0, _) = phi_grad(&(k - Vec2::new(0.0, h)))?;
        let hx = (gx1 - gx0) / (2.0 * h);
        let hy = (gy1 - gy0) / (2.0 * h);
        let hess = nalgebra::Matrix2::new(hx.x, hy.x, hx.y, hy.y);
        let hess = (hess + hess.transpose()) * 0.5;
        let step = match hess.try_inverse() {
            Some(inv) => -(inv * grad),
            None => -grad,
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = k + step * alpha;
            let (p, g, en) = phi_grad(&trial)?;
            if p < phi {
                k = trial;
                phi = p;
                grad = g;
                energy = en;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted || step.norm() * alpha < 1e-16 * scale {
            break;
        }
    }
    Ok((k, phi.sqrt(), energy))
}

/// Locates touchings between bands `band` and `band + 1` (one-based) by
/// polishing every local gap minimum of the grid; touchings equivalent modulo
/// the reciprocal lattice are reported once. Accepted points have residual gap
/// below `1e-9`.
pub fn find_gap_closings<M: BlochModel + ?Sized>(model: &M, band: usize, grid: &BZGrid) -> Result<Vec<GapClosing>> {
    if band == 0 || band >= model.dim() {
        return Ok(Vec::new());
    }
    let n = grid.n_per_dim;
    let gaps: Vec<f64> = grid
        .points
        .par_iter()
        .map(|k| eigensystem(&model.fiber(k)).map(|e| e.lambdas[band] - e.lambdas[band - 1]))
        .collect::<Result<_>>()?;
    let l = model.lattice();
    let scale = l.b1.norm();
    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let g = gaps[grid.index(i, j)];
            let mut is_min = true;
            for di in [n - 1, 0, 1] {
                for dj in [n - 1, 0, 1] {
                    if (di, dj) != (0, 0) && gaps[grid.index(i + di, j + dj)] < g {
                        is_min = false;
                    }
                }
            }
            if is_min && n > 2 {
                seeds.push(grid.points[grid.index(i, j)]);
            }
        }
    }
    if n <= 2 {
        seeds = grid.points.clone();
    }
    let mut found: Vec<GapClosing> = Vec::new();
    for seed in seeds {
        let (k, gap, energy) = polish(model, band, seed, scale)?;
        if gap > 1e-9 {
            continue;
        }
        let (c1, c2) = l.to_fractional(&k);
        let dup = found.iter().any(|p| {
            let (d1, d2) = l.to_fractional(&p.k);
            let w = |x: f64| (x - x.round()).abs();
            w(c1 - d1) < 1e-6 && w(c2 - d2) < 1e-6
        });
        if dup {
            continue;
        }
        let r = 1e-5 * scale;
        let mut v_min = f64::INFINITY;
        let mut v_max: f64 = 0.0;
        for a in 0..16 {
            let th = a as f64 * std::f64::consts::PI / 8.0;
            let (g, _, _) = gap_and_gradient(model, &(k + Vec2::new(th.cos(), th.sin()) * r), band)?;
            let v = g / (2.0 * r);
            v_min = v_min.min(v);
            v_max = v_max.max(v);
        }
        found.push(GapClosing { k, gap, energy, v_min, v_max });
    }
    Ok(found)
}

/// Classifies the Fermi level `mu_F` on `grid`.
///
/// A grid point with an eigenvalue within `1e-10` of `mu_F` is an error: the
/// occupation there is ill-defined.
pub fn classify<M: BlochModel + ?Sized>(model: &M, mu_f: f64, grid: &BZGrid) -> Result<PhaseKind> {
    let spectra: Vec<FiberSpectrum> = grid
        .points
        .par_iter()
        .map(|k| FiberSpectrum::compute(model, k, mu_f))
        .collect::<Result<_>>()?;
    let m = model.dim();
    let mut n_min = usize::MAX;
    let mut n_max = 0;
    let mut min_gap = f64::INFINITY;
    for s in &spectra {
        if s.lambdas.iter().any(|l| (l - mu_f).abs() < 1e-10) {
            return Err(Error::FermiOnEigenvalue { k: [s.k.x, s.k.y], mu: mu_f });
        }
        n_min = n_min.min(s.n_occ);
        n_max = n_max.max(s.n_occ);
        min_gap = min_gap.min(s.gap);
    }
    if n_min != n_max {
        return Ok(PhaseKind::Metal { bands: (n_min + 1..=n_max).collect() });
    }
    let n_occ = n_min;
    if n_occ == 0 || n_occ == m {
        return Ok(PhaseKind::Insulator { n_occ, min_gap });
    }
    let points: Vec<GapClosing> = find_gap_closings(model, n_occ, grid)?
        .into_iter()
        .filter(|p| (p.energy - mu_f).abs() < 1e-8)
        .collect();
    if points.is_empty() {
        Ok(PhaseKind::Insulator { n_occ, min_gap })
    } else {
        Ok(PhaseKind::Semimetal { n_occ, points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_half_shifted_grid;
    use crate::models::{haldane_fiber, HaldaneModel, HaldaneParams};

    fn phase(g: f64, t2: f64, mu: f64) -> PhaseKind {
        let m = HaldaneModel::new(HaldaneParams { g, t2 });
        let grid = make_half_shifted_grid(m.lattice(), 30).unwrap();
        classify(&m, mu, &grid).unwrap()
    }

    #[test]
    fn table_phases_are_classified() {
        assert!(matches!(phase(1.0, 0.0, 0.0), PhaseKind::Insulator { n_occ: 1, .. }));
        assert!(matches!(phase(1.0, -1.0, 0.0), PhaseKind::Insulator { n_occ: 1, .. }));
        match phase(1.0, 0.0, -2.0) {
            PhaseKind::Metal { bands } => assert_eq!(bands, vec![1]),
            other => panic!("{other:?}"),
        }
        match phase(0.0, 0.0, 0.0) {
            PhaseKind::Semimetal { n_occ, points } => {
                assert_eq!(n_occ, 1);
                assert_eq!(points.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn graphene_touchings_are_conical_zeros_of_f() {
        let p = HaldaneParams { g: 0.0, t2: 0.0 };
        let m = HaldaneModel::new(p);
        let grid = make_half_shifted_grid(m.lattice(), 24).unwrap();
        let pts = find_gap_closings(&m, 1, &grid).unwrap();
        assert_eq!(pts.len(), 2);
        for pt in &pts {
            let f = haldane_fiber(&pt.k, &p)[(1, 0)];
            assert!(f.norm() < 1e-10);
            // |f| = (3/2) a_cc |dk| with bond length a_cc = 1/sqrt 3
            let v = 3f64.sqrt() / 2.0;
            assert!((pt.v_min - v).abs() < 1e-3 && (pt.v_max - v).abs() < 1e-3, "{pt:?}");
            for r in [1e-3, 1e-2, 0.05, 0.099] {
                for a in 0..12 {
                    let th = a as f64 * std::f64::consts::FRAC_PI_6;
                    let k = pt.k + Vec2::new(th.cos(), th.sin()) * r;
                    let e = eigensystem(&m.fiber(&k)).unwrap();
                    let gap = e.lambdas[1] - e.lambdas[0];
                    assert!(gap >= 2.0 * 0.7 * r && gap <= 2.0 * 1.0 * r, "r = {r}: gap {gap}");
                }
            }
        }
    }
}
