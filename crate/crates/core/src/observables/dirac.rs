use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::Vec2;
use crate::linalg::{sandwich, CMat, C64};
use crate::models::dirac_fiber;
use crate::spectral::{eigensystem, kubo_kernel};

// 8-point Gauss-Legendre rule on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Time average `(1/t) int_0^t I^D(delta, t') dt'` of the conical-point
/// response matrix
///
/// `I^D_ij = int_{|k| < delta} K <u_-|d_j H|u_+><u_+|d_i H|u_->/(lambda_+ - lambda_-)^2 dk - c.c.`
///
/// for `H = vF k . sigma`, where `K` is the averaged kernel at
/// `(lambda_- - lambda_+) t`. The disc is integrated with composite 8-point
/// Gauss-Legendre panels in `r` (`n_radial` nodes, rounded up to a multiple of
/// 8) and the trapezoid rule in the angle. The diagonal tends to `i pi^2 / 4`.
pub fn dirac_timeavg(delta: f64, vf: f64, t: f64, n_radial: usize, n_angular: usize) -> Result<CMat> {
    if !(delta > 0.0 && t > 0.0 && vf > 0.0 && delta.is_finite() && t.is_finite() && vf.is_finite()) {
        return Err(Error::InvalidArgument(format!("need delta, vF, t > 0; got {delta}, {vf}, {t}")));
    }
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::InvalidArgument("quadrature sizes must be positive".into()));
    }
    let panels = n_radial.div_ceil(8);
    let width = delta / panels as f64;
    let dtheta = 2.0 * PI / n_angular as f64;
    let e = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    let d: Vec<CMat> = e.iter().map(|ei| dirac_fiber(ei, vf)).collect();
    let mut z = [[C64::new(0.0, 0.0); 2]; 2];
    for p in 0..panels {
        let a = p as f64 * width;
        for &(x, w) in &GL8 {
            let r = a + 0.5 * width * (x + 1.0);
            let wr = 0.5 * width * w * r * dtheta;
            for q in 0..n_angular {
                let th = q as f64 * dtheta;
                let k = Vec2::new(r * th.cos(), r * th.sin());
                let es = eigensystem(&dirac_fiber(&k, vf))?;
                let um: Vec<C64> = es.vectors.column(0).iter().copied().collect();
                let up: Vec<C64> = es.vectors.column(1).iter().copied().collect();
                let gap = es.lambdas[1] - es.lambdas[0];
                let ker = kubo_kernel(-gap * t, true) * (wr / (gap * gap));
                for (i, row) in z.iter_mut().enumerate() {
                    for (j, zij) in row.iter_mut().enumerate() {
                        *zij += ker * sandwich(&um, &d[j], &up) * sandwich(&up, &d[i], &um);
                    }
                }
            }
        }
    }
    Ok(CMat::from_fn(2, 2, |i, j| z[i][j] - z[i][j].conj()))
}
