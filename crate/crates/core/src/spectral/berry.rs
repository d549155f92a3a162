use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{cross, BZGrid};
use crate::linalg::{CMat, C64};
use crate::models::{quasi_period_unitary, BlochModel};

use super::FiberSpectrum;

/// Plaquette Berry curvature and the resulting Chern number.
#[derive(Debug, Clone)]
pub struct BerryChern {
    /// Berry curvature per plaquette, `plaquette flux / plaquette area`,
    /// indexed like the grid points at the plaquette's lower corner.
    pub curvature: Vec<f64>,
    /// Berry flux through each plaquette.
    pub flux: Vec<f64>,
    pub chern: i64,
    pub n_occ: usize,
}

fn occupied_frames<M: BlochModel + ?Sized>(model: &M, mu_f: f64, grid: &BZGrid) -> Result<(usize, Vec<CMat>)> {
    let spectra: Vec<Result<FiberSpectrum>> =
        grid.points.par_iter().map(|k| FiberSpectrum::compute(model, k, mu_f)).collect();
    let mut frames = Vec::with_capacity(spectra.len());
    let mut n_occ = None;
    for s in spectra {
        let s = s?;
        let n = *n_occ.get_or_insert(s.n_occ);
        if s.n_occ != n {
            return Err(Error::BandCondition(format!(
                "occupation varies over the grid ({} at k = ({}, {}) vs {n}); not an insulator",
                s.n_occ, s.k.x, s.k.y
            )));
        }
        if s.gap < 1e-8 {
            return Err(Error::GapClosure { k: [s.k.x, s.k.y], gap: s.gap });
        }
        frames.push(s.vectors.columns(0, n).into_owned());
    }
    Ok((n_occ.unwrap_or(0), frames))
}

fn link(a: &CMat, b: &CMat) -> C64 {
    if a.ncols() == 0 {
        return C64::new(1.0, 0.0);
    }
    (a.adjoint() * b).determinant()
}

/// Chern number of the occupied bundle by the link-variable plaquette method.
///
/// Links crossing the zone boundary use the quasi-periodicity unitaries, so the
/// plaquette fluxes sum to exactly `2 pi` times an integer. The sign convention is
/// `Ch = (2 pi)^{-1} int i Tr(P [d_x P, d_y P]) dk_x dk_y`.
pub fn berry_chern<M: BlochModel + ?Sized>(model: &M, mu_f: f64, grid: &BZGrid) -> Result<BerryChern> {
    let (n_occ, frames) = occupied_frames(model, mu_f, grid)?;
    let n = grid.n_per_dim;
    let l = model.lattice();
    let t1 = quasi_period_unitary(model, &l.b1)?;
    let t2 = quasi_period_unitary(model, &l.b2)?;
    let frame = |i: usize, j: usize| -> CMat {
        let mut f = frames[grid.index(i, j)].clone();
        if i >= n {
            f = &t1 * f;
        }
        if j >= n {
            f = &t2 * f;
        }
        f
    };
    let orientation = -cross(&l.b1, &l.b2).signum();
    let area = grid.weight;
    let flux: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let f00 = frame(i, j);
            let f10 = frame(i + 1, j);
            let f11 = frame(i + 1, j + 1);
            let f01 = frame(i, j + 1);
            let w = link(&f00, &f10) * link(&f10, &f11) * link(&f11, &f01) * link(&f01, &f00);
            orientation * w.arg()
        })
        .collect();
    let total = crate::linalg::compensated_sum(flux.iter().copied()) / (2.0 * PI);
    let chern = total.round();
    if (total - chern).abs() > 1e-6 {
        return Err(Error::Inconsistent(format!("plaquette fluxes sum to {total} x 2 pi")));
    }
    Ok(BerryChern {
        curvature: flux.iter().map(|f| f / area).collect(),
        flux,
        chern: chern as i64,
        n_occ,
    })
}

/// Index of the plaquette that is the point reflection `k -> -k` of plaquette
/// `(i, j)` on an unshifted grid.
pub fn mirrored_plaquette(grid: &BZGrid, i: usize, j: usize) -> usize {
    let n = grid.n_per_dim;
    grid.index(2 * n - 1 - i, 2 * n - 1 - j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_grid, Vec2};
    use crate::models::{HaldaneModel, HaldaneParams, HoppingList, TbModel};

    fn chern(g: f64, t2: f64, n: usize) -> i64 {
        let m = HaldaneModel::new(HaldaneParams { g, t2 });
        let grid = make_grid(m.lattice(), n, Vec2::zeros()).unwrap();
        berry_chern(&m, 0.0, &grid).unwrap().chern
    }

    #[test]
    fn table_phases() {
        assert_eq!(chern(1.0, 0.0, 50), 0);
        assert_eq!(chern(1.0, -1.0, 50), 1);
        assert_eq!(chern(1.0, 1.0, 50), -1);
    }

    #[test]
    fn stable_under_refinement() {
        for n in [7, 8, 9, 16, 17] {
            assert_eq!(chern(1.0, -1.0, n), 1);
        }
    }

    #[test]
    fn curvature_is_odd_without_t2() {
        let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: 0.0 });
        let grid = make_grid(m.lattice(), 30, Vec2::zeros()).unwrap();
        let bc = berry_chern(&m, 0.0, &grid).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let a = bc.curvature[grid.index(i, j)];
                let b = bc.curvature[mirrored_plaquette(&grid, i, j)];
                assert!((a + b).abs() <= 1e-10, "{a} {b}");
            }
        }
    }

    #[test]
    fn gap_closure_rejected() {
        let m = HaldaneModel::new(HaldaneParams { g: 0.0, t2: 0.0 });
        let grid = make_grid(m.lattice(), 30, Vec2::zeros()).unwrap();
        assert!(matches!(berry_chern(&m, 0.0, &grid), Err(Error::GapClosure { .. })));
    }

    #[test]
    fn metal_rejected() {
        let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: 0.0 });
        let grid = make_grid(m.lattice(), 20, Vec2::zeros()).unwrap();
        assert!(matches!(berry_chern(&m, -2.0, &grid), Err(Error::BandCondition(_))));
    }

    #[test]
    fn hopping_model_agrees() {
        let m = TbModel::new(HoppingList::haldane(&HaldaneParams { g: 1.0, t2: -1.0 }));
        let grid = make_grid(m.lattice(), 20, Vec2::zeros()).unwrap();
        assert_eq!(berry_chern(&m, 0.0, &grid).unwrap().chern, 1);
    }
}
