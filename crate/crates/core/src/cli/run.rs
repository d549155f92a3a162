use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::dynamics::IntegratorOptions;
use crate::error::{Error, Result};
use crate::lattice::{make_grid, BZGrid, Direction};
use crate::models::{BlochModel, DiracModel, HaldaneModel, HaldaneParams, HoppingList, TbModel};
use crate::observables::{
    ballistic_d, bloch_predictor_trace, current_trace, dirac_timeavg, hall_sigma, kubo_trace_with, semimetal_sigma,
    CurrentTrace, KuboOptions,
};
use crate::spectral::{berry_chern, classify, PhaseKind};

use super::config::{Mode, ModelSpec, RunConfig, Threads};
use super::output::{svg_plot, write_table, Series};

/// Files written by [`run`] and the headline numbers for the terminal.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub values: Vec<(String, String)>,
}

pub fn build_model(spec: &ModelSpec) -> Result<Box<dyn BlochModel>> {
    Ok(match spec {
        ModelSpec::Haldane { g, t2 } => Box::new(HaldaneModel::new(HaldaneParams { g: *g, t2: *t2 })),
        ModelSpec::Dirac { vf } => Box::new(DiracModel::new(*vf)),
        ModelSpec::Tb { file } => Box::new(TbModel::new(HoppingList::load(file)?)),
    })
}

/// Shortest round-trip representation, in exponent form outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    model: Box<dyn BlochModel>,
    comments: Vec<String>,
    summary: RunSummary,
}

impl Ctx<'_> {
    fn grid(&self) -> Result<BZGrid> {
        let l = self.model.lattice();
        let n = self.cfg.grid_n as f64;
        let [s1, s2] = self.cfg.grid_shift;
        make_grid(l, self.cfg.grid_n, l.from_fractional(s1 / n, s2 / n))
    }

    fn directions(&self) -> Result<(Direction, Direction)> {
        let l = self.model.lattice();
        let d = |c: [f64; 2]| Direction::new(l.from_fractional(c[0], c[1]));
        Ok((d(self.cfg.e_alpha)?, d(self.cfg.e_beta)?))
    }

    fn table(&mut self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = with_suffix(&self.cfg.output, suffix);
        write_table(&path, &self.comments, header, rows)?;
        self.summary.files.push(path);
        Ok(())
    }

    fn plot(&mut self, suffix: &str, title: &str, series: &[Series]) -> Result<()> {
        if !self.cfg.plot {
            return Ok(());
        }
        let path = with_suffix(&self.cfg.output, suffix);
        std::fs::write(&path, svg_plot(title, "t", series))?;
        self.summary.files.push(path);
        Ok(())
    }

    fn value(&mut self, key: &str, v: String) {
        self.summary.values.push((key.into(), v));
    }

    fn trace_output(&mut self, tr: &CurrentTrace, dynamics: bool) -> Result<()> {
        let inst = tr.inst_over_eps();
        let avg = tr.runavg_over_eps();
        let rows: Vec<Vec<String>> = (0..tr.times.len())
            .map(|i| {
                let mut r = vec![num(tr.times[i]), num(tr.j_inst[i]), num(tr.j_runavg[i])];
                if dynamics {
                    r.push(num(inst[i]));
                    r.push(num(avg[i]));
                }
                r
            })
            .collect();
        if dynamics {
            self.table(".csv", &["t", "j_inst", "j_runavg", "j_inst_over_eps", "j_runavg_over_eps"], &rows)?;
        } else {
            self.table(".csv", &["t", "j_lr_inst", "j_lr_runavg"], &rows)?;
        }
        self.value("final_runavg_per_eps", num(*avg.last().unwrap_or(&f64::NAN)));
        self.plot(
            ".svg",
            if dynamics { "instantaneous and running-average j / eps" } else { "linear-response current" },
            &[
                Series { label: "instantaneous", x: &tr.times, y: &inst, dashed: false },
                Series { label: "running average", x: &tr.times, y: &avg, dashed: true },
            ],
        )
    }

    fn dynamics(&mut self) -> Result<()> {
        let grid = self.grid()?;
        let (ea, eb) = self.directions()?;
        let opts: IntegratorOptions = self.cfg.integrator;
        let tr = current_trace(&*self.model, &grid, self.cfg.eps, &ea, &eb, self.cfg.mu_f, &self.cfg.sample_times(), &opts)?;
        self.trace_output(&tr, true)
    }

    fn kubo(&mut self) -> Result<()> {
        let grid = self.grid()?;
        let (ea, eb) = self.directions()?;
        let opts = KuboOptions { averaged: self.cfg.kubo.averaged, refinement: self.cfg.kubo.refinement };
        let tr = kubo_trace_with(&*self.model, &grid, self.cfg.mu_f, &ea, &eb, &self.cfg.sample_times(), &opts)?;
        self.trace_output(&tr, false)
    }

    fn chern(&mut self) -> Result<()> {
        let grid = self.grid()?;
        let (ea, eb) = self.directions()?;
        let bc = berry_chern(&*self.model, self.cfg.mu_f, &grid)?;
        let hs = hall_sigma(&*self.model, self.cfg.mu_f, &grid, &ea, &eb)?;
        let rows = vec![
            vec!["chern".into(), bc.chern.to_string()],
            vec!["n_occ".into(), bc.n_occ.to_string()],
            vec!["sigma_12".into(), num(hs.sigma[0][1])],
            vec!["sigma_contracted".into(), num(hs.contracted)],
        ];
        self.value("chern", bc.chern.to_string());
        self.value("sigma_contracted", num(hs.contracted));
        self.table(".csv", &["quantity", "value"], &rows)
    }

    fn predictors(&mut self) -> Result<()> {
        let grid = self.grid()?;
        let (ea, eb) = self.directions()?;
        let m = &*self.model;
        let mu = self.cfg.mu_f;
        let phase = classify(m, mu, &grid)?;
        let mut rows = vec![vec!["phase".to_string(), phase.name().to_string()]];
        match &phase {
            PhaseKind::Insulator { n_occ, min_gap } => {
                let hs = hall_sigma(m, mu, &grid, &ea, &eb)?;
                rows.push(vec!["n_occ".into(), n_occ.to_string()]);
                rows.push(vec!["min_gap".into(), num(*min_gap)]);
                rows.push(vec!["chern".into(), hs.chern.to_string()]);
                rows.push(vec!["sigma_contracted".into(), num(hs.contracted)]);
            }
            PhaseKind::Semimetal { n_occ, points } => {
                rows.push(vec!["n_occ".into(), n_occ.to_string()]);
                rows.push(vec!["n_dirac".into(), points.len().to_string()]);
                for (i, p) in points.iter().enumerate() {
                    rows.push(vec![format!("dirac_{i}_kx"), num(p.k.x)]);
                    rows.push(vec![format!("dirac_{i}_ky"), num(p.k.y)]);
                    rows.push(vec![format!("dirac_{i}_vF"), num(p.v_f())]);
                }
                rows.push(vec!["semimetal_sigma".into(), num(semimetal_sigma(points.len(), &ea.vec(), &eb.vec()))]);
            }
            PhaseKind::Metal { .. } => {
                let d = ballistic_d(m, mu, &grid, &ea, &eb)?;
                rows.push(vec!["ballistic_D".into(), num(d.value)]);
                rows.push(vec!["ballistic_D_slope_route".into(), num(d.slope_route)]);
                rows.push(vec!["ballistic_D_error_estimate".into(), num(d.error_estimate)]);
                let times = self.cfg.sample_times();
                let b = bloch_predictor_trace(m, mu, &grid, self.cfg.eps, &eb, &ea, &times)?;
                let per_eps: Vec<f64> = b.iter().map(|x| x / self.cfg.eps).collect();
                let brows: Vec<Vec<String>> =
                    (0..times.len()).map(|i| vec![num(times[i]), num(b[i]), num(per_eps[i])]).collect();
                self.table("_bloch.csv", &["t", "bloch", "bloch_over_eps"], &brows)?;
                self.plot("_bloch.svg", "Bloch-oscillation predictor / eps", &[Series {
                    label: "predictor",
                    x: &times,
                    y: &per_eps,
                    dashed: false,
                }])?;
            }
        }
        for r in &rows {
            self.value(&r[0], r[1].clone());
        }
        self.table(".csv", &["quantity", "value"], &rows)
    }

    fn dirac_check(&mut self) -> Result<()> {
        let d = self.cfg.dirac;
        let m = dirac_timeavg(d.delta, d.vf, d.t, d.n_radial, d.n_angular)?;
        let target = PI * PI / 4.0;
        let mut rows = Vec::new();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            rows.push(vec![format!("I_{}{}", i + 1, j + 1), num(m[(i, j)].re), num(m[(i, j)].im)]);
        }
        let rel = ((m[(0, 0)].im - target).abs()).max((m[(1, 1)].im - target).abs()) / target;
        rows.push(vec!["target_diagonal".into(), "0".into(), num(target)]);
        rows.push(vec!["max_rel_err_diagonal".into(), num(rel), "0".into()]);
        self.value("I_11", format!("{}i", m[(0, 0)].im));
        self.value("max_rel_err_diagonal", num(rel));
        self.table(".csv", &["entry", "re", "im"], &rows)
    }
}

/// Executes the configured experiment and writes its artifacts.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let model = build_model(&cfg.model)?;
    let mut comments = vec![format!("crystal-current {}", env!("CARGO_PKG_VERSION"))];
    comments.extend(cfg.echo());
    let mut ctx = Ctx { cfg, model, comments, summary: RunSummary::default() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(match cfg.threads {
            Threads::Auto => 0,
            Threads::Fixed(n) => n,
        })
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.mode {
        Mode::Dynamics => ctx.dynamics(),
        Mode::Kubo => ctx.kubo(),
        Mode::Chern => ctx.chern(),
        Mode::Predictors => ctx.predictors(),
        Mode::DiracCheck => ctx.dirac_check(),
    })?;
    Ok(ctx.summary)
}
