use crate::dynamics::{IntegratorOptions, PropagationFrame, Propagator};
use crate::error::{Error, Result};
use crate::lattice::{BZGrid, Direction, Vec2};
use crate::linalg::{trace_quadratic, CompensatedSum};
use crate::models::BlochModel;

use super::{ordered_fold, INV_TWO_PI_SQ};

/// Origin of a [`CurrentTrace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// Full dynamics at field strength `eps`.
    Dynamics,
    /// First-order response per unit field; `j_runavg` is the trapezoid mean.
    LinearResponse,
    /// First-order response per unit field; `j_runavg` is the exact running
    /// mean from the time-averaged kernel.
    LinearResponseAveraged,
}

/// Time series of the current per unit volume and its running average.
#[derive(Debug, Clone)]
pub struct CurrentTrace {
    pub times: Vec<f64>,
    pub j_inst: Vec<f64>,
    pub j_runavg: Vec<f64>,
    pub eps: f64,
    pub e_alpha: Vec2,
    pub e_beta: Vec2,
    pub mu_f: f64,
    pub grid_n: usize,
    pub kind: TraceKind,
}

impl CurrentTrace {
    /// `j_inst / eps`, or the series itself for linear-response traces.
    pub fn inst_over_eps(&self) -> Vec<f64> {
        self.scaled(&self.j_inst)
    }

    pub fn runavg_over_eps(&self) -> Vec<f64> {
        self.scaled(&self.j_runavg)
    }

    fn scaled(&self, v: &[f64]) -> Vec<f64> {
        match self.kind {
            TraceKind::Dynamics => v.iter().map(|x| x / self.eps).collect(),
            _ => v.to_vec(),
        }
    }

    /// Value of the running average at the last sample.
    pub fn final_runavg(&self) -> f64 {
        *self.j_runavg.last().unwrap_or(&0.0)
    }
}

/// Trapezoidal cumulative mean `(1/t) int_0^t f` on the sample times; the
/// first entry equals the first sample.
pub fn trapezoid_running_mean(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = CompensatedSum::new();
    for i in 0..values.len() {
        if i > 0 {
            acc.add(0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]));
        }
        let span = times[i] - times[0];
        out.push(if span > 0.0 { acc.value() / span } else { values[i] });
    }
    out
}

/// Recomputes `j_runavg` from `j_inst` by the trapezoid rule.
pub fn running_average(trace: &CurrentTrace) -> CurrentTrace {
    let mut t = trace.clone();
    t.j_runavg = trapezoid_running_mean(&t.times, &t.j_inst);
    t
}

/// Per-fiber current `-Tr(d_alpha H_{k - eps e_beta t} phi phi^dagger)` over the
/// occupied columns of `frame`.
pub fn current_integrand<M: BlochModel + ?Sized>(
    model: &M,
    k: &Vec2,
    t: f64,
    eps: f64,
    e_alpha: &Direction,
    e_beta: &Direction,
    frame: &PropagationFrame,
) -> f64 {
    let ks = k - e_beta.vec() * (eps * t);
    -trace_quadratic(&model.deriv(&ks, &e_alpha.vec()), &frame.phi, frame.n_occ)
}

/// Zone-integrated current `j(t) = (2 pi)^{-2} sum_k w current_integrand(k, t)`.
///
/// Each fiber is propagated independently (in parallel); the reduction is a
/// fixed-order compensated sum.
#[allow(clippy::too_many_arguments)]
pub fn current_trace<M: BlochModel + ?Sized>(
    model: &M,
    grid: &BZGrid,
    eps: f64,
    e_alpha: &Direction,
    e_beta: &Direction,
    mu_f: f64,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<CurrentTrace> {
    if times.first() != Some(&0.0) || times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("output times must start at 0 and be ascending".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be non-negative, got {eps}")));
    }
    let dt = opts.resolve_dt(model)?;
    let ea = e_alpha.vec();
    let drift = e_beta.vec() * eps;
    let per_k = |idx: usize| -> Result<Vec<f64>> {
        let k = grid.points[idx];
        let mut p = Propagator::new(model, k, eps, e_beta, mu_f, dt, opts.scheme, false)?;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            p.advance_to(t)?;
            p.check_unitarity(opts.unitarity_tol)?;
            let d = model.deriv(&(k - drift * t), &ea);
            out.push(-trace_quadratic(&d, p.phi(), p.n_occ()));
        }
        Ok(out)
    };
    let mut acc = vec![CompensatedSum::new(); times.len()];
    ordered_fold(grid.len(), per_k, |_, v| {
        for (a, x) in acc.iter_mut().zip(v) {
            a.add(x);
        }
    })?;
    let scale = grid.weight * INV_TWO_PI_SQ;
    let j_inst: Vec<f64> = acc.iter().map(|a| a.value() * scale).collect();
    Ok(CurrentTrace {
        j_runavg: trapezoid_running_mean(times, &j_inst),
        times: times.to_vec(),
        j_inst,
        eps,
        e_alpha: ea,
        e_beta: e_beta.vec(),
        mu_f,
        grid_n: grid.n_per_dim,
        kind: TraceKind::Dynamics,
    })
}
