use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{cross, make_grid, BZGrid, Direction, Vec2};
use crate::linalg::{sandwich, CompensatedSum, C64};
use crate::models::BlochModel;
use crate::spectral::{berry_chern, eigensystem, FiberSpectrum};

use super::{ordered_fold, INV_TWO_PI_SQ};

/// Transverse conductivity of an insulator.
#[derive(Debug, Clone, Copy)]
pub struct HallSigma {
    /// Real antisymmetric matrix in Cartesian components.
    pub sigma: [[f64; 2]; 2],
    /// `e_alpha^T sigma e_beta`.
    pub contracted: f64,
    /// Chern number of the occupied bundle on the same grid.
    pub chern: i64,
}

/// `sigma_ij = (2 pi)^{-2} int -i Tr(P [d_i P, d_j P]) dk` by direct quadrature of
/// the spectral curvature, cross-checked against the plaquette Chern number:
/// `sigma_12 = -chern / (2 pi)` with `chern` in the convention of
/// [`berry_chern`].
pub fn hall_sigma<M: BlochModel + ?Sized>(
    model: &M,
    mu_f: f64,
    grid: &BZGrid,
    e_alpha: &Direction,
    e_beta: &Direction,
) -> Result<HallSigma> {
    let chern = berry_chern(model, mu_f, grid)?.chern;
    let (ex, ey) = (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
    let mut acc = CompensatedSum::new();
    ordered_fold(
        grid.len(),
        |idx| {
            let k = grid.points[idx];
            let s = FiberSpectrum::compute(model, &k, mu_f)?;
            let (d1, d2) = (model.deriv(&k, &ex), model.deriv(&k, &ey));
            let cols: Vec<Vec<C64>> = (0..s.dim()).map(|c| s.vectors.column(c).iter().copied().collect()).collect();
            let mut x = 0.0;
            for n in 0..s.n_occ {
                for m in s.n_occ..s.dim() {
                    let d = s.lambdas[m] - s.lambdas[n];
                    x += 2.0 * (sandwich(&cols[n], &d1, &cols[m]) * sandwich(&cols[m], &d2, &cols[n])).im / (d * d);
                }
            }
            Ok(x)
        },
        |_, x| acc.add(x),
    )?;
    let s12 = acc.value() * grid.weight * INV_TWO_PI_SQ;
    let defect = (2.0 * PI * s12 + chern as f64).abs();
    if defect > 1e-3 {
        return Err(Error::Inconsistent(format!(
            "curvature quadrature gives 2 pi sigma_12 = {} but the plaquette Chern number is {chern}; refine the grid",
            2.0 * PI * s12
        )));
    }
    Ok(HallSigma {
        sigma: [[0.0, s12], [-s12, 0.0]],
        contracted: s12 * cross(&e_alpha.vec(), &e_beta.vec()),
        chern,
    })
}

/// Graphene-type conductivity `(n_dirac / 16) e_alpha . e_beta` of a semimetal
/// with `n_dirac` conical points.
pub fn semimetal_sigma(n_dirac: usize, e_alpha: &Vec2, e_beta: &Vec2) -> f64 {
    n_dirac as f64 / 16.0 * e_alpha.dot(e_beta)
}

/// Ballistic coefficient of a metal together with its internal cross-check.
#[derive(Debug, Clone, Copy)]
pub struct BallisticD {
    /// Volume form with finite-difference second derivatives.
    pub value: f64,
    /// Slope of the adiabatic Hellmann-Feynman current.
    pub slope_route: f64,
    /// `|value - value on the half-cell shifted grid|`.
    pub error_estimate: f64,
}

fn lambdas<M: BlochModel + ?Sized>(model: &M, k: &Vec2) -> Result<Vec<f64>> {
    Ok(eigensystem(&model.fiber(k))?.lambdas)
}

fn check_fermi(s: &[f64], k: &Vec2, mu_f: f64) -> Result<()> {
    if s.iter().any(|l| (l - mu_f).abs() < 1e-10) {
        return Err(Error::FermiOnEigenvalue { k: [k.x, k.y], mu: mu_f });
    }
    Ok(())
}

/// Routes (i) and (ii) of [`ballistic_d`] on one grid.
fn ballistic_routes<M: BlochModel + ?Sized>(model: &M, mu_f: f64, grid: &BZGrid, ea: Vec2, eb: Vec2) -> Result<(f64, f64)> {
    let emax = ea.norm().max(eb.norm());
    let h = model.lattice().b1.norm() / (8.0 * grid.n_per_dim as f64 * emax);
    let (mut fd, mut slope) = (CompensatedSum::new(), CompensatedSum::new());
    ordered_fold(
        grid.len(),
        |idx| -> Result<(f64, f64)> {
            let k = grid.points[idx];
            let l0 = lambdas(model, &k)?;
            check_fermi(&l0, &k, mu_f)?;
            let occ = l0.iter().filter(|&&l| l <= mu_f).count();
            if occ == 0 {
                return Ok((0.0, 0.0));
            }
            let pp = lambdas(model, &(k + (ea + eb) * h))?;
            let pm = lambdas(model, &(k + (ea - eb) * h))?;
            let mp = lambdas(model, &(k - (ea - eb) * h))?;
            let mm = lambdas(model, &(k - (ea + eb) * h))?;
            let second: f64 = (0..occ).map(|n| (pp[n] - pm[n] - mp[n] + mm[n]) / (4.0 * h * h)).sum();
            let hf = |kk: Vec2| -> Result<f64> {
                let e = eigensystem(&model.fiber(&kk))?;
                let d = model.deriv(&kk, &ea);
                Ok((0..occ)
                    .map(|n| {
                        let u: Vec<C64> = e.vectors.column(n).iter().copied().collect();
                        sandwich(&u, &d, &u).re
                    })
                    .sum())
            };
            Ok((second, (hf(k + eb * h)? - hf(k - eb * h)?) / (2.0 * h)))
        },
        |_, (a, b)| {
            fd.add(a);
            slope.add(b);
        },
    )?;
    let w = grid.weight * INV_TWO_PI_SQ;
    Ok((fd.value() * w, slope.value() * w))
}

/// `D = (2 pi)^{-2} int sum_n 1(lambda_n <= mu_f) d_alpha d_beta lambda_n dk`, so that
/// the current of a metal grows as `D eps t` before Bloch oscillations set in.
///
/// Computed by mixed central differences of the bands with step
/// `|b1| / (8 n max|e|)` and independently as the slope of the adiabatic
/// current `-(2 pi)^{-2} int 1(lambda_n(k) <= mu_f) d_alpha lambda_n(k - s e_beta) dk` at `s = 0`.
/// The two must agree within three times the shifted-grid error estimate.
pub fn ballistic_d<M: BlochModel + ?Sized>(
    model: &M,
    mu_f: f64,
    grid: &BZGrid,
    e_alpha: &Direction,
    e_beta: &Direction,
) -> Result<BallisticD> {
    let (ea, eb) = (e_alpha.vec(), e_beta.vec());
    let (value, slope_route) = ballistic_routes(model, mu_f, grid, ea, eb)?;
    let l = model.lattice();
    let half = (l.b1 + l.b2) * (0.5 / grid.n_per_dim as f64);
    let shifted = make_grid(l, grid.n_per_dim, grid.shift + half)?;
    let (value_shifted, _) = ballistic_routes(model, mu_f, &shifted, ea, eb)?;
    let error_estimate = (value - value_shifted).abs();
    let tol = 3.0 * error_estimate + 1e-9 * (1.0 + value.abs());
    if (value - slope_route).abs() > tol {
        return Err(Error::Inconsistent(format!(
            "ballistic coefficient routes disagree: {value} vs {slope_route} (tolerance {tol:e})"
        )));
    }
    Ok(BallisticD { value, slope_route, error_estimate })
}

/// Index (zero-based) of the single band crossing `mu_f`, with the gaps to
/// its neighbours checked on the grid.
fn fermi_band(spectra: &[Vec<f64>], grid: &BZGrid, mu_f: f64) -> Result<usize> {
    let m = spectra.first().map_or(0, |s| s.len());
    let partial: Vec<usize> = (0..m)
        .filter(|&n| {
            let below = spectra.iter().filter(|s| s[n] <= mu_f).count();
            below > 0 && below < spectra.len()
        })
        .collect();
    let band = match partial.as_slice() {
        [b] => *b,
        [] => return Err(Error::BandCondition(format!("no band crosses mu_F = {mu_f}"))),
        _ => return Err(Error::BandCondition(format!("bands {partial:?} all cross mu_F = {mu_f}"))),
    };
    for (idx, s) in spectra.iter().enumerate() {
        let below = if band > 0 { s[band] - s[band - 1] } else { f64::INFINITY };
        let above = if band + 1 < m { s[band + 1] - s[band] } else { f64::INFINITY };
        if below.min(above) < 1e-8 {
            let k = grid.points[idx];
            return Err(Error::GapClosure { k: [k.x, k.y], gap: below.min(above) });
        }
    }
    Ok(band)
}

/// Values of the Bloch-oscillation predictor
/// `-(2 pi)^{-2} int 1(lambda_N(k) <= mu_f) d_alpha lambda_N(k - eps e_beta t) dk`
/// at each of `times`, for the single band `N` crossing the Fermi level.
#[allow(clippy::too_many_arguments)]
pub fn bloch_predictor_trace<M: BlochModel + ?Sized>(
    model: &M,
    mu_f: f64,
    grid: &BZGrid,
    eps: f64,
    e_beta: &Direction,
    e_alpha: &Direction,
    times: &[f64],
) -> Result<Vec<f64>> {
    let mut spectra = Vec::with_capacity(grid.len());
    ordered_fold(grid.len(), |idx| lambdas(model, &grid.points[idx]), |_, s| spectra.push(s))?;
    let band = fermi_band(&spectra, grid, mu_f)?;
    let (ea, eb) = (e_alpha.vec(), e_beta.vec());
    let mut acc = vec![CompensatedSum::new(); times.len()];
    ordered_fold(
        grid.len(),
        |idx| -> Result<Vec<f64>> {
            if spectra[idx][band] > mu_f {
                return Ok(Vec::new());
            }
            let k = grid.points[idx];
            times
                .iter()
                .map(|&t| {
                    let ks = k - eb * (eps * t);
                    let e = eigensystem(&model.fiber(&ks))?;
                    let u: Vec<C64> = e.vectors.column(band).iter().copied().collect();
                    Ok(sandwich(&u, &model.deriv(&ks, &ea), &u).re)
                })
                .collect()
        },
        |_, v| {
            for (a, x) in acc.iter_mut().zip(v) {
                a.add(x);
            }
        },
    )?;
    let w = -grid.weight * INV_TWO_PI_SQ;
    Ok(acc.iter().map(|a| a.value() * w).collect())
}

/// Single-time form of [`bloch_predictor_trace`].
#[allow(clippy::too_many_arguments)]
pub fn bloch_predictor<M: BlochModel + ?Sized>(
    model: &M,
    mu_f: f64,
    grid: &BZGrid,
    eps: f64,
    e_beta: &Direction,
    e_alpha: &Direction,
    t: f64,
) -> Result<f64> {
    Ok(bloch_predictor_trace(model, mu_f, grid, eps, e_beta, e_alpha, &[t])?[0])
}
