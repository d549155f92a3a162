use crate::error::{Error, Result};
use crate::lattice::{BZGrid, Direction, Vec2};
use crate::linalg::CompensatedSum;
use crate::models::BlochModel;
use crate::spectral::{kubo_from_modes, kubo_modes, FiberSpectrum, KuboMode};

use super::current::{trapezoid_running_mean, CurrentTrace, TraceKind};
use super::{ordered_fold, INV_TWO_PI_SQ};

/// Local subdivision of grid cells whose gap is small on the scale of the
/// observation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    /// A cell is refined when `gap * t_max < gap_time`.
    pub gap_time: f64,
    /// Each refined cell is replaced by `factor x factor` subcells.
    pub factor: usize,
}

impl Default for Refinement {
    fn default() -> Self {
        Self { gap_time: 50.0, factor: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KuboOptions {
    /// Report the exact running mean in `j_runavg` instead of the trapezoid
    /// average of the sampled instantaneous response.
    pub averaged: bool,
    pub refinement: Option<Refinement>,
}

/// First-order response `j^LR(t) = lim_{eps -> 0} j^eps(t) / eps` from the
/// spectral Kubo sum, with no time stepping.
///
/// Valid for occupations made of whole bands on each fiber (insulators and
/// semimetals with `mu_f` at the touching energy). Every sampled fiber must
/// have a gap at `mu_f`.
pub fn kubo_trace<M: BlochModel + ?Sized>(
    model: &M,
    grid: &BZGrid,
    mu_f: f64,
    e_alpha: &Direction,
    e_beta: &Direction,
    times: &[f64],
    averaged: bool,
) -> Result<CurrentTrace> {
    kubo_trace_with(model, grid, mu_f, e_alpha, e_beta, times, &KuboOptions { averaged, refinement: None })
}

/// [`kubo_trace`] with optional local refinement near gap closings.
pub fn kubo_trace_with<M: BlochModel + ?Sized>(
    model: &M,
    grid: &BZGrid,
    mu_f: f64,
    e_alpha: &Direction,
    e_beta: &Direction,
    times: &[f64],
    opts: &KuboOptions,
) -> Result<CurrentTrace> {
    if times.windows(2).any(|w| !(w[1] >= w[0])) || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("times must be finite, non-negative and ascending".into()));
    }
    if let Some(r) = opts.refinement {
        if r.factor == 0 || !(r.gap_time >= 0.0) {
            return Err(Error::InvalidArgument(format!("invalid refinement {r:?}")));
        }
    }
    let t_max = times.last().copied().unwrap_or(0.0);
    let (ea, eb) = (e_alpha.vec(), e_beta.vec());
    let n = grid.n_per_dim as f64;
    let lat = model.lattice();
    let (c1, c2) = (lat.b1 / n, lat.b2 / n);

    let fiber_modes = |k: &Vec2| -> Result<(FiberSpectrum, Vec<KuboMode>)> {
        let s = FiberSpectrum::compute(model, k, mu_f)?;
        let modes = kubo_modes(&s, &model.deriv(k, &ea), &model.deriv(k, &eb), s.n_occ)?;
        Ok((s, modes))
    };
    let per_k = |idx: usize| -> Result<Vec<(f64, Vec<KuboMode>)>> {
        let k = grid.points[idx];
        let (s, modes) = fiber_modes(&k)?;
        match opts.refinement {
            Some(r) if s.gap * t_max < r.gap_time => {
                let f = r.factor;
                let w = 1.0 / (f * f) as f64;
                let mut out = Vec::with_capacity(f * f);
                for a in 0..f {
                    for b in 0..f {
                        let (u, v) = ((a as f64 + 0.5) / f as f64 - 0.5, (b as f64 + 0.5) / f as f64 - 0.5);
                        out.push((w, fiber_modes(&(k + c1 * u + c2 * v))?.1));
                    }
                }
                Ok(out)
            }
            _ => Ok(vec![(1.0, modes)]),
        }
    };
    let eval = |cells: &[(f64, Vec<KuboMode>)], averaged: bool| -> Result<Vec<f64>> {
        times
            .iter()
            .map(|&t| {
                let mut acc = CompensatedSum::new();
                for (w, modes) in cells {
                    acc.add(w * kubo_from_modes(modes, t, averaged)?);
                }
                Ok(acc.value())
            })
            .collect()
    };
    let mut inst = vec![CompensatedSum::new(); times.len()];
    let mut avg = vec![CompensatedSum::new(); times.len()];
    ordered_fold(
        grid.len(),
        |idx| {
            let cells = per_k(idx)?;
            let a = if opts.averaged { eval(&cells, true)? } else { Vec::new() };
            Ok((eval(&cells, false)?, a))
        },
        |_, (vi, va)| {
            for (acc, x) in inst.iter_mut().zip(vi) {
                acc.add(x);
            }
            for (acc, x) in avg.iter_mut().zip(va) {
                acc.add(x);
            }
        },
    )?;
    let scale = -grid.weight * INV_TWO_PI_SQ;
    let j_inst: Vec<f64> = inst.iter().map(|a| a.value() * scale).collect();
    let (j_runavg, kind) = if opts.averaged {
        (avg.iter().map(|a| a.value() * scale).collect(), TraceKind::LinearResponseAveraged)
    } else {
        (trapezoid_running_mean(times, &j_inst), TraceKind::LinearResponse)
    };
    Ok(CurrentTrace {
        times: times.to_vec(),
        j_inst,
        j_runavg,
        eps: 0.0,
        e_alpha: ea,
        e_beta: eb,
        mu_f,
        grid_n: grid.n_per_dim,
        kind,
    })
}
