//! Propagation of the occupied frame under `H_{k - eps e_beta t}`.
//!
//! Each fiber is evolved independently by `i d phi/dt = H_{k - eps e_beta t} phi`
//! starting from the occupied eigencolumns at `k`. Steps land exactly on the
//! requested output times.

use crate::error::{Error, Result};
use crate::lattice::{make_grid, Direction, Vec2};
use crate::linalg::{pauli_components, unitarity_defect, CMat, C64};
use crate::models::{BlochModel, FourierTerm};
use crate::spectral::{eigensystem, FiberSpectrum};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `phi <- exp(-i dt H(t + dt/2)) phi`. Second order, exactly unitary.
    ExpMidpoint,
    /// Fourth-order commutator-free Magnus scheme with two exponentials at the
    /// Gauss nodes. Exactly unitary.
    Magnus4,
    /// Classical fourth-order Runge-Kutta, not norm preserving. Cross-check only.
    Rk4,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ExpMidpoint => "exp-midpoint",
            Scheme::Magnus4 => "magnus4",
            Scheme::Rk4 => "rk-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exp-midpoint" => Some(Scheme::ExpMidpoint),
            "magnus4" => Some(Scheme::Magnus4),
            "rk-check" | "rk4" => Some(Scheme::Rk4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Base step. `None` selects `min(0.01, 0.1 / |H|)` from the model.
    pub dt: Option<f64>,
    pub scheme: Scheme,
    pub unitarity_tol: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { dt: None, scheme: Scheme::ExpMidpoint, unitarity_tol: 1e-9 }
    }
}

impl IntegratorOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt: Some(dt), ..Self::default() }
    }

    /// Step to use for `model`, resolving the automatic choice.
    pub fn resolve_dt<M: BlochModel + ?Sized>(&self, model: &M) -> Result<f64> {
        match self.dt {
            Some(dt) if dt > 0.0 && dt.is_finite() => Ok(dt),
            Some(dt) => Err(Error::InvalidArgument(format!("dt must be positive, got {dt}"))),
            None => default_dt(model),
        }
    }
}

/// `min(0.01, 0.1 / |H|_max)` with the spectral radius sampled on an 8x8 grid.
pub fn default_dt<M: BlochModel + ?Sized>(model: &M) -> Result<f64> {
    let grid = make_grid(model.lattice(), 8, Vec2::zeros())?;
    let mut norm: f64 = 0.0;
    for k in &grid.points {
        let e = eigensystem(&model.fiber(k))?;
        norm = norm.max(e.lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs())));
    }
    Ok(if norm > 0.0 { 0.01f64.min(0.1 / norm) } else { 0.01 })
}

/// Propagated frame at one output time. The first `n_occ` columns are the
/// evolved occupied states; full frames carry all `M` columns.
#[derive(Debug, Clone)]
pub struct PropagationFrame {
    pub k: Vec2,
    pub t: f64,
    pub phi: CMat,
    pub n_occ: usize,
}

impl PropagationFrame {
    /// `phi_occ phi_occ^dagger`.
    pub fn projector(&self) -> CMat {
        let occ = self.phi.columns(0, self.n_occ);
        occ * occ.adjoint()
    }
}

/// Applies `exp(-i tau H)` to the columns of `phi` in place.
pub fn apply_exp(h: &CMat, tau: f64, phi: &mut CMat) -> Result<()> {
    if h.nrows() == 2 {
        apply_exp2(pauli_components(h), tau, phi);
        return Ok(());
    }
    let e = eigensystem(h)?;
    let v = &e.vectors;
    let mut w = v.adjoint() * &*phi;
    for (i, l) in e.lambdas.iter().enumerate() {
        let ph = C64::from_polar(1.0, -l * tau);
        for c in 0..w.ncols() {
            w[(i, c)] *= ph;
        }
    }
    *phi = v * w;
    Ok(())
}

/// One exponential-midpoint step `phi' = exp(-i dt H_mid) phi`.
pub fn step_exp_midpoint(h_mid: &CMat, dt: f64, phi: &CMat) -> Result<CMat> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if h_mid.ncols() != phi.nrows() {
        return Err(Error::Shape(format!("H is {:?}, frame is {:?}", h_mid.shape(), phi.shape())));
    }
    let mut out = phi.clone();
    apply_exp(h_mid, dt, &mut out)?;
    Ok(out)
}

/// Fiber evaluation along a straight line in `k` by phasor recurrences:
/// each Fourier term `t e^{i k.d}` advances by a constant rotation per step.
struct LinePath {
    dim: usize,
    disp: Vec<Vec2>,
    terms: Vec<(usize, usize, usize, C64)>,
    z: Vec<C64>,
    rot: Vec<C64>,
}

impl LinePath {
    fn new(dim: usize, fourier: Vec<FourierTerm>) -> Self {
        let mut disp: Vec<Vec2> = Vec::new();
        let mut terms = Vec::with_capacity(fourier.len());
        for f in fourier {
            let idx = match disp.iter().position(|d| *d == f.d) {
                Some(i) => i,
                None => {
                    disp.push(f.d);
                    disp.len() - 1
                }
            };
            terms.push((f.a, f.b, idx, f.t));
        }
        let n = disp.len();
        Self { dim, disp, terms, z: vec![C64::new(1.0, 0.0); n], rot: vec![C64::new(1.0, 0.0); n] }
    }

    fn start(&mut self, k: &Vec2, dk: &Vec2) {
        for (i, d) in self.disp.iter().enumerate() {
            self.z[i] = C64::from_polar(1.0, k.dot(d));
            self.rot[i] = C64::from_polar(1.0, dk.dot(d));
        }
    }

    #[inline]
    fn advance(&mut self) {
        for (z, r) in self.z.iter_mut().zip(self.rot.iter()) {
            *z *= r;
        }
    }

    #[inline]
    fn eval2(&self) -> [f64; 4] {
        let mut h = [C64::new(0.0, 0.0); 4];
        for &(a, b, i, t) in &self.terms {
            h[2 * a + b] += t * self.z[i];
        }
        let c = h[2];
        [0.5 * (h[0].re + h[3].re), c.re, c.im, 0.5 * (h[0].re - h[3].re)]
    }

    fn eval(&self, out: &mut CMat) {
        out.fill(C64::new(0.0, 0.0));
        for &(a, b, i, t) in &self.terms {
            out[(a, b)] += t * self.z[i];
        }
        debug_assert_eq!(out.nrows(), self.dim);
    }
}

#[inline]
fn apply_exp2(p: [f64; 4], tau: f64, phi: &mut CMat) {
    let [h0, hx, hy, hz] = p;
    let r = (hx * hx + hy * hy + hz * hz).sqrt();
    let (s, c) = (r * tau).sin_cos();
    let (u00, u01, u10, u11) = if r > 0.0 {
        let q = s / r;
        (C64::new(c, -q * hz), C64::new(-q * hy, -q * hx), C64::new(q * hy, -q * hx), C64::new(c, q * hz))
    } else {
        (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    };
    let g = if h0 == 0.0 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, -h0 * tau) };
    for col in 0..phi.ncols() {
        let a = phi[(0, col)];
        let b = phi[(1, col)];
        phi[(0, col)] = g * (u00 * a + u01 * b);
        phi[(1, col)] = g * (u10 * a + u11 * b);
    }
}

/// Stateful single-fiber integrator.
pub struct Propagator<'a, M: BlochModel + ?Sized> {
    model: &'a M,
    k: Vec2,
    drift: Vec2,
    phi: CMat,
    n_occ: usize,
    t: f64,
    dt: f64,
    scheme: Scheme,
    h1: CMat,
    h2: CMat,
    path: Option<LinePath>,
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
const CF4_A1: f64 = 0.25 - 0.288_675_134_594_812_9 * 0.5; // (3 - 2 sqrt 3)/12
const CF4_A2: f64 = 0.25 + 0.288_675_134_594_812_9 * 0.5; // (3 + 2 sqrt 3)/12

impl<'a, M: BlochModel + ?Sized> Propagator<'a, M> {
    /// Starts from the occupied eigencolumns of `H_k` (all columns if `full`).
    #[allow(clippy::too_many_arguments)]
    pub fn new(model: &'a M, k: Vec2, eps: f64, e_beta: &Direction, mu_f: f64, dt: f64, scheme: Scheme, full: bool) -> Result<Self> {
        let s = FiberSpectrum::compute(model, &k, mu_f)?;
        let ncols = if full { s.dim() } else { s.n_occ };
        let phi = s.vectors.columns(0, ncols).into_owned();
        Ok(Self::from_frame(model, k, eps, e_beta, phi, s.n_occ, dt, scheme))
    }

    /// Starts from an arbitrary initial frame.
    #[allow(clippy::too_many_arguments)]
    pub fn from_frame(model: &'a M, k: Vec2, eps: f64, e_beta: &Direction, phi: CMat, n_occ: usize, dt: f64, scheme: Scheme) -> Self {
        let m = model.dim();
        Self {
            model,
            k,
            drift: e_beta.vec() * eps,
            phi,
            n_occ,
            t: 0.0,
            dt,
            scheme,
            h1: CMat::zeros(m, m),
            h2: CMat::zeros(m, m),
            path: model.fourier_terms().map(|f| LinePath::new(m, f)),
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn phi(&self) -> &CMat {
        &self.phi
    }

    pub fn n_occ(&self) -> usize {
        self.n_occ
    }

    /// Shifted momentum `k - eps e_beta t`.
    pub fn k_at(&self, t: f64) -> Vec2 {
        self.k - self.drift * t
    }

    fn hamiltonian_into(&self, t: f64, out: &mut CMat) {
        self.model.fiber_into(&(self.k - self.drift * t), out);
    }

    fn step(&mut self, h: f64) -> Result<()> {
        let t = self.t;
        match self.scheme {
            Scheme::ExpMidpoint => {
                let mut hm = std::mem::replace(&mut self.h1, CMat::zeros(0, 0));
                self.hamiltonian_into(t + 0.5 * h, &mut hm);
                apply_exp(&hm, h, &mut self.phi)?;
                self.h1 = hm;
            }
            Scheme::Magnus4 => {
                let mut ha = std::mem::replace(&mut self.h1, CMat::zeros(0, 0));
                let mut hb = std::mem::replace(&mut self.h2, CMat::zeros(0, 0));
                self.hamiltonian_into(t + (0.5 - GAUSS_OFFSET) * h, &mut ha);
                self.hamiltonian_into(t + (0.5 + GAUSS_OFFSET) * h, &mut hb);
                let first = &ha * C64::new(CF4_A2, 0.0) + &hb * C64::new(CF4_A1, 0.0);
                let second = &ha * C64::new(CF4_A1, 0.0) + &hb * C64::new(CF4_A2, 0.0);
                apply_exp(&first, h, &mut self.phi)?;
                apply_exp(&second, h, &mut self.phi)?;
                self.h1 = ha;
                self.h2 = hb;
            }
            Scheme::Rk4 => {
                let mi = C64::new(0.0, -1.0);
                let model = self.model;
                let f = |tt: f64, y: &CMat| -> CMat { model.fiber(&(self.k - self.drift * tt)) * y * mi };
                let k1 = f(t, &self.phi);
                let k2 = f(t + 0.5 * h, &(&self.phi + &k1 * C64::new(0.5 * h, 0.0)));
                let k3 = f(t + 0.5 * h, &(&self.phi + &k2 * C64::new(0.5 * h, 0.0)));
                let k4 = f(t + h, &(&self.phi + &k3 * C64::new(h, 0.0)));
                self.phi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
            }
        }
        self.t = t + h;
        Ok(())
    }

    /// Integrates up to `t_target` with equal steps no longer than `dt`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let span = t_target - self.t;
        if span < 0.0 {
            return Err(Error::InvalidArgument(format!("times must be ascending ({} after {})", t_target, self.t)));
        }
        if span == 0.0 {
            return Ok(());
        }
        let n = ((span / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let t0 = self.t;
        if self.scheme == Scheme::ExpMidpoint {
            if let Some(mut path) = self.path.take() {
                path.start(&self.k_at(t0 + 0.5 * h), &(-self.drift * h));
                let two = self.model.dim() == 2;
                for _ in 0..n {
                    if two {
                        apply_exp2(path.eval2(), h, &mut self.phi);
                    } else {
                        path.eval(&mut self.h1);
                        apply_exp(&self.h1, h, &mut self.phi)?;
                    }
                    path.advance();
                }
                self.path = Some(path);
                self.t = t_target;
                return Ok(());
            }
        }
        for i in 0..n {
            self.t = t0 + h * i as f64;
            self.step(h)?;
        }
        self.t = t_target;
        Ok(())
    }

    /// Checks `phi^dagger phi = 1` against `tol`.
    pub fn check_unitarity(&self, tol: f64) -> Result<f64> {
        let defect = unitarity_defect(&self.phi);
        if !(defect <= tol) {
            return Err(Error::UnitarityBreach { k: [self.k.x, self.k.y], t: self.t, defect });
        }
        Ok(defect)
    }

    pub fn frame(&self) -> PropagationFrame {
        PropagationFrame { k: self.k, t: self.t, phi: self.phi.clone(), n_occ: self.n_occ }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidArgument("output times must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("output times must be ascending".into()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn propagate<M: BlochModel + ?Sized>(
    model: &M,
    k: &Vec2,
    eps: f64,
    e_beta: &Direction,
    mu_f: f64,
    times: &[f64],
    opts: &IntegratorOptions,
    full: bool,
) -> Result<Vec<PropagationFrame>> {
    check_times(times)?;
    let dt = opts.resolve_dt(model)?;
    let mut p = Propagator::new(model, *k, eps, e_beta, mu_f, dt, opts.scheme, full)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        p.advance_to(t)?;
        p.check_unitarity(opts.unitarity_tol)?;
        out.push(p.frame());
    }
    Ok(out)
}

/// Evolves the occupied eigencolumns of `H_k` under `H_{k - eps e_beta t}` and
/// returns the frame at each requested time (`times[0]` must be 0).
pub fn propagate_frame<M: BlochModel + ?Sized>(
    model: &M,
    k: &Vec2,
    eps: f64,
    e_beta: &Direction,
    mu_f: f64,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<PropagationFrame>> {
    propagate(model, k, eps, e_beta, mu_f, times, opts, false)
}

/// Like [`propagate_frame`] but evolves every eigencolumn, which gives the
/// full propagator applied to the initial eigenbasis.
pub fn propagate_frame_full<M: BlochModel + ?Sized>(
    model: &M,
    k: &Vec2,
    eps: f64,
    e_beta: &Direction,
    mu_f: f64,
    times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<PropagationFrame>> {
    propagate(model, k, eps, e_beta, mu_f, times, opts, true)
}
