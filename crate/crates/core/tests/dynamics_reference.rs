//! Propagation against an independent reference integrator, gauge covariance,
//! adiabatic limit and the three-term decomposition.

use crystal_current::linalg::max_diff;
use crystal_current::observables::{adiabatic_decomposition, hall_sigma, INV_TWO_PI_SQ};
use crystal_current::prelude::*;

/// `exp(-i tau H)` by scaling and squaring of a Taylor series.
fn expm(h: &CMat, tau: f64) -> CMat {
    let a = h * C64::new(0.0, -tau);
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let a = a / C64::new(2f64.powi(s), 0.0);
    let m = a.nrows();
    let mut term = CMat::identity(m, m);
    let mut sum = CMat::identity(m, m);
    for j in 1..30 {
        term = &term * &a / C64::new(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn reference(model: &HaldaneModel, k: Vec2, eps: f64, eb: Vec2, t: f64) -> CMat {
    let s = FiberSpectrum::compute(model, &k, 0.0).unwrap();
    let mut phi = s.vectors.columns(0, s.n_occ).into_owned();
    let dt = 1e-4;
    let steps = (t / dt).round() as usize;
    for i in 0..steps {
        let tm = (i as f64 + 0.5) * dt;
        phi = expm(&model.fiber(&(k - eb * (eps * tm))), dt) * phi;
    }
    phi
}

fn projector(phi: &CMat) -> CMat {
    phi * phi.adjoint()
}

#[test]
fn matches_fine_midpoint_reference() {
    let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: -1.0 });
    let l = m.lattice().clone();
    let eb = Direction::new(l.b1).unwrap();
    for (k, eps) in [(Vec2::new(0.3, 1.1), 1e-2), (Vec2::new(-2.0, 0.4), 1e-1)] {
        let reference = reference(&m, k, eps, eb.vec(), 5.0);
        for scheme in [Scheme::ExpMidpoint, Scheme::Magnus4, Scheme::Rk4] {
            let opts = IntegratorOptions { dt: Some(2e-3), scheme, ..Default::default() };
            let f = propagate_frame(&m, &k, eps, &eb, 0.0, &[0.0, 5.0], &opts).unwrap();
            let d = max_diff(&f[1].phi, &reference);
            assert!(d < 1e-6, "{scheme:?} at k={k:?}, eps={eps}: {d:e}");
        }
    }
}

#[test]
fn frames_are_covariant_under_reciprocal_translation() {
    let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: -1.0 });
    let l = m.lattice().clone();
    let eb = Direction::new(l.b2).unwrap();
    let opts = IntegratorOptions::default();
    let k = Vec2::new(0.7, -0.2);
    let t = [0.0, 3.0, 7.5];
    let a = propagate_frame(&m, &k, 1e-2, &eb, 0.0, &t, &opts).unwrap();
    let b = propagate_frame(&m, &(k + l.b1), 1e-2, &eb, 0.0, &t, &opts).unwrap();
    let tk = quasi_period_unitary(&m, &l.b1).unwrap();
    for (fa, fb) in a.iter().zip(&b) {
        let pa = &tk * projector(&fa.phi) * tk.adjoint();
        assert!(max_diff(&pa, &projector(&fb.phi)) < 1e-10);
    }
}

#[test]
fn adiabatic_limit_follows_instantaneous_projector() {
    let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: 0.0 });
    let eb = Direction::new(Vec2::new(1.0, 0.0)).unwrap();
    let k = Vec2::new(0.4, 0.9);
    let s_final = 0.5;
    let mut errs = Vec::new();
    for eps in [1e-2, 5e-3, 2.5e-3] {
        let t = s_final / eps;
        let f = propagate_frame(&m, &k, eps, &eb, 0.0, &[0.0, t], &IntegratorOptions::default()).unwrap();
        let ks = k - eb.vec() * s_final;
        let inst = FiberSpectrum::compute(&m, &ks, 0.0).unwrap();
        let u = inst.vectors.columns(0, 1).into_owned();
        errs.push(max_diff(&projector(&f[1].phi), &projector(&u)));
    }
    for (e, eps) in errs.iter().zip([1e-2, 5e-3, 2.5e-3]) {
        assert!(*e < 0.1 * eps, "{errs:?}");
    }
}

fn decomposition(m: &HaldaneModel, k: Vec2, eps: f64, t: f64) -> crystal_current::observables::AdiabaticTerms {
    let l = m.lattice();
    let (ea, eb) = (Direction::new(l.b1).unwrap(), Direction::new(l.b1).unwrap());
    let f = propagate_frame_full(m, &k, eps, &eb, 0.0, &[0.0, t], &IntegratorOptions::default()).unwrap();
    adiabatic_decomposition(m, &k, eps, &ea, &eb, 0.0, t, &f[1]).unwrap()
}

#[test]
fn residual_is_second_order_in_eps() {
    let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: 0.0 });
    let t = 10.0;
    for k in [Vec2::new(0.2, 0.5), Vec2::new(1.9, -2.2)] {
        let mut res = Vec::new();
        for eps in [1e-3, 1e-4] {
            let d = decomposition(&m, k, eps, t);
            assert!(d.residual.abs() <= 10.0 * eps * eps * t, "eps={eps}: {d:?}");
            res.push(d.residual.abs());
        }
        assert!(res[0] / res[1] > 30.0, "{res:?}");
    }
}

#[test]
fn decomposition_without_field() {
    let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: -1.0 });
    let k = Vec2::new(0.3, -0.8);
    let d = decomposition(&m, k, 0.0, 4.0);
    assert_eq!((d.static_term, d.oscillatory), (0.0, 0.0));
    assert!(d.residual.abs() < 1e-12);
    let e = m.lattice().b1;
    let h = 1e-5;
    let band = |q: Vec2| FiberSpectrum::compute(&m, &q, 0.0).unwrap().lambdas[0];
    let hf = -(band(k + e * h) - band(k - e * h)) / (2.0 * h);
    assert!((d.adiabatic - hf).abs() < 1e-6);
}

#[test]
fn occupied_only_frame_is_rejected() {
    let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: 0.0 });
    let e = Direction::new(m.lattice().b1).unwrap();
    let k = Vec2::new(0.1, 0.1);
    let f = propagate_frame(&m, &k, 1e-3, &e, 0.0, &[0.0, 1.0], &IntegratorOptions::default()).unwrap();
    assert!(adiabatic_decomposition(&m, &k, 1e-3, &e, &e, 0.0, 1.0, &f[1]).is_err());
}

#[test]
fn static_term_integrates_to_hall_conductivity() {
    let m = HaldaneModel::new(HaldaneParams { g: 1.0, t2: -1.0 });
    let l = m.lattice().clone();
    let grid = make_grid(&l, 60, Vec2::zeros()).unwrap();
    let (ea, eb) = (Direction::new(l.b2).unwrap(), Direction::new(l.b1).unwrap());
    let eps = 1e-3;
    let mut acc = 0.0;
    for &k in &grid.points {
        let f = propagate_frame_full(&m, &k, 0.0, &eb, 0.0, &[0.0], &IntegratorOptions::default()).unwrap();
        acc += adiabatic_decomposition(&m, &k, eps, &ea, &eb, 0.0, 0.0, &f[0]).unwrap().static_term;
    }
    let integral = acc * grid.weight * INV_TWO_PI_SQ;
    let hs = hall_sigma(&m, 0.0, &grid, &ea, &eb).unwrap();
    assert!((integral - eps * hs.contracted).abs() < 1e-9, "{integral} vs {}", eps * hs.contracted);
}
