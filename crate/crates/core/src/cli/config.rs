//! INI-style run configuration.
//!
//! ```text
//! [model]
//! preset = phase-b          # or: kind = haldane | dirac | tb
//!
//! [run]
//! mode = dynamics           # dynamics | kubo | chern | predictors | dirac-check
//! eps = 1e-4
//! e_alpha = 0 1             # coordinates in the reciprocal basis (b1, b2)
//! e_beta = 1 0
//! grid_n = 150
//! t_max = 800
//! ```

use std::path::{Path, PathBuf};

use ini::{Ini, Properties};

use crate::dynamics::{IntegratorOptions, Scheme};
use crate::error::{Error, Result};
use crate::observables::Refinement;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Dynamics,
    Kubo,
    Chern,
    Predictors,
    DiracCheck,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Dynamics => "dynamics",
            Mode::Kubo => "kubo",
            Mode::Chern => "chern",
            Mode::Predictors => "predictors",
            Mode::DiracCheck => "dirac-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "dynamics" => Mode::Dynamics,
            "kubo" => Mode::Kubo,
            "chern" => Mode::Chern,
            "predictors" | "predict" => Mode::Predictors,
            "dirac-check" => Mode::DiracCheck,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Haldane { g: f64, t2: f64 },
    Dirac { vf: f64 },
    Tb { file: PathBuf },
}

/// Worker count for Brillouin-zone sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl Threads {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "auto" {
            return Some(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) => Some(Threads::Auto),
            Ok(n) => Some(Threads::Fixed(n)),
            Err(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracSettings {
    pub delta: f64,
    pub vf: f64,
    pub t: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for DiracSettings {
    fn default() -> Self {
        Self { delta: 1.0, vf: 1.0, t: 200.0, n_radial: 2048, n_angular: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KuboSettings {
    pub averaged: bool,
    pub refinement: Option<Refinement>,
}

impl Default for KuboSettings {
    fn default() -> Self {
        Self { averaged: true, refinement: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub preset: Option<String>,
    pub mode: Mode,
    pub mu_f: f64,
    pub eps: f64,
    /// Reciprocal-basis coordinates of `e_alpha`.
    pub e_alpha: [f64; 2],
    pub e_beta: [f64; 2],
    pub grid_n: usize,
    /// Grid offset in units of one grid cell along `b1 / n` and `b2 / n`.
    pub grid_shift: [f64; 2],
    pub t_max: f64,
    pub dt_sample: f64,
    pub output: PathBuf,
    pub threads: Threads,
    pub plot: bool,
    pub integrator: IntegratorOptions,
    pub dirac: DiracSettings,
    pub kubo: KuboSettings,
}

/// Named phases as `(g, mu_F, t2)`.
pub fn preset(name: &str) -> Option<(f64, f64, f64)> {
    Some(match name {
        "phase-a" => (1.0, 0.0, 0.0),
        "phase-b" => (1.0, 0.0, -1.0),
        "phase-c" => (1.0, -2.0, 0.0),
        "phase-d" => (0.0, 0.0, 0.0),
        _ => return None,
    })
}

const KEYS: &[(&str, &[&str])] = &[
    ("model", &["preset", "kind", "g", "t2", "vF", "file"]),
    (
        "run",
        &["mode", "mu_F", "eps", "e_alpha", "e_beta", "grid_n", "grid_shift", "t_max", "dt_sample", "output", "threads", "plot"],
    ),
    ("integrator", &["dt", "scheme", "unitarity_tol"]),
    ("dirac", &["delta", "vF", "t", "n_radial", "n_angular"]),
    ("kubo", &["averaged", "refine", "gap_time", "factor"]),
];

fn config_err(field: String, msg: impl Into<String>) -> Error {
    Error::Config { field, msg: msg.into() }
}

struct Section<'a> {
    name: &'static str,
    props: Option<&'a Properties>,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn parse<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => f(s).map(Some).ok_or_else(|| config_err(self.field(key), format!("expected {what}, got `{s}`"))),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse(key, "a finite number", |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse(key, "a non-negative integer", |s| s.parse().ok())
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.parse(key, "true or false", |s| match s {
            "true" | "yes" | "on" | "1" => Some(true),
            "false" | "no" | "off" | "0" => Some(false),
            _ => None,
        })
    }

    fn vec2(&self, key: &str) -> Result<Option<[f64; 2]>> {
        self.parse(key, "two numbers", |s| {
            let v: Vec<f64> = s
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|p| !p.is_empty())
                .map(|p| p.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<_>>()?;
            (v.len() == 2).then(|| [v[0], v[1]])
        })
    }
}

/// Reads and validates a configuration file. Relative paths inside it
/// (hopping files) are resolved against the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text, &path.display().to_string())?;
    if let ModelSpec::Tb { file } = &mut cfg.model {
        if file.is_relative() {
            if let Some(dir) = path.parent() {
                *file = dir.join(&*file);
            }
        }
    }
    if cfg.output.as_os_str().is_empty() {
        cfg.output = path.with_extension("");
    }
    Ok(cfg)
}

/// Line-level syntax: section headers, `key = value` pairs, comments, blanks.
fn check_lines(text: &str, origin: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        let msg = if l.is_empty() || l.starts_with('#') || l.starts_with(';') {
            continue;
        } else if l.starts_with('[') {
            match l.strip_suffix(']').map(|n| n[1..].trim()) {
                Some(n) if !n.is_empty() => continue,
                Some(_) => "empty section name",
                None => "unterminated section header",
            }
        } else if l.contains('=') || l.contains(':') {
            continue;
        } else {
            "expected `key = value`"
        };
        return Err(Error::Parse { path: origin.into(), line: i + 1, msg: msg.into() });
    }
    Ok(())
}

/// Parses configuration text; `origin` names the source in error messages.
/// An empty `output` in the result means no prefix was given.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig> {
    check_lines(text, origin)?;
    let ini = Ini::load_from_str(text).map_err(|e| Error::Parse { path: origin.into(), line: e.line, msg: e.msg.into_owned() })?;
    for (sec, props) in ini.iter() {
        let Some(name) = sec else {
            if let Some((k, _)) = props.iter().next() {
                return Err(config_err(k.into(), "key outside of any section"));
            }
            continue;
        };
        let Some((_, keys)) = KEYS.iter().find(|(s, _)| *s == name) else {
            return Err(config_err(name.into(), "unknown section"));
        };
        for (k, _) in props.iter() {
            if !keys.contains(&k) {
                return Err(config_err(format!("{name}.{k}"), "unknown key"));
            }
        }
    }
    let sec = |name: &'static str| Section { name, props: ini.section(Some(name)) };
    let (model_s, run, integ, dirac_s, kubo_s) = (sec("model"), sec("run"), sec("integrator"), sec("dirac"), sec("kubo"));

    if model_s.props.is_none() {
        return Err(config_err("model".into(), "missing [model] section"));
    }
    let preset_name = model_s.raw("preset").map(str::to_string);
    let (model, preset_mu) = match &preset_name {
        Some(p) => {
            let (g, mu, t2) = preset(p).ok_or_else(|| config_err("model.preset".into(), format!("unknown preset `{p}` (phase-a..phase-d)")))?;
            for k in ["kind", "g", "t2", "vF", "file"] {
                if model_s.raw(k).is_some() {
                    return Err(config_err(model_s.field(k), "cannot be combined with a preset"));
                }
            }
            (ModelSpec::Haldane { g, t2 }, Some(mu))
        }
        None => {
            let kind = model_s.raw("kind").ok_or_else(|| config_err("model.kind".into(), "need `preset` or `kind`"))?;
            let model = match kind {
                "haldane" => ModelSpec::Haldane {
                    g: model_s.f64("g")?.unwrap_or(0.0),
                    t2: model_s.f64("t2")?.unwrap_or(0.0),
                },
                "dirac" => ModelSpec::Dirac { vf: model_s.f64("vF")?.unwrap_or(1.0) },
                "tb" => ModelSpec::Tb {
                    file: model_s.raw("file").map(PathBuf::from).ok_or_else(|| config_err("model.file".into(), "required for kind = tb"))?,
                },
                other => return Err(config_err("model.kind".into(), format!("unknown model kind `{other}`"))),
            };
            (model, None)
        }
    };
    if let ModelSpec::Dirac { vf } = model {
        if vf <= 0.0 {
            return Err(config_err("model.vF".into(), "must be positive"));
        }
    }

    let mode = run.parse("mode", "a mode name", Mode::parse)?.unwrap_or(Mode::Dynamics);
    let mu_f = run.f64("mu_F")?.or(preset_mu).unwrap_or(0.0);
    let eps = run.f64("eps")?.unwrap_or(1e-4);
    if eps < 0.0 {
        return Err(config_err("run.eps".into(), format!("must be non-negative, got {eps}")));
    }
    let e_alpha = run.vec2("e_alpha")?.unwrap_or([1.0, 0.0]);
    let e_beta = run.vec2("e_beta")?.unwrap_or([1.0, 0.0]);
    for (k, v) in [("e_alpha", e_alpha), ("e_beta", e_beta)] {
        if v == [0.0, 0.0] {
            return Err(config_err(run.field(k), "direction must be nonzero"));
        }
    }
    let grid_n = run.usize("grid_n")?.unwrap_or(60);
    if grid_n == 0 {
        return Err(config_err("run.grid_n".into(), "must be at least 1"));
    }
    let grid_shift = run.vec2("grid_shift")?.unwrap_or([0.0, 0.0]);
    let t_max = run.f64("t_max")?.unwrap_or(100.0);
    if t_max < 0.0 {
        return Err(config_err("run.t_max".into(), "must be non-negative"));
    }
    let dt_sample = run.f64("dt_sample")?.unwrap_or(0.5);
    if dt_sample <= 0.0 {
        return Err(config_err("run.dt_sample".into(), "must be positive"));
    }
    let output = run.raw("output").map(PathBuf::from).unwrap_or_default();
    let threads = run.parse("threads", "`auto` or a thread count", Threads::parse)?.unwrap_or(Threads::Auto);
    let plot = run.bool("plot")?.unwrap_or(false);

    let mut integrator = IntegratorOptions::default();
    if let Some(dt) = integ.f64("dt")? {
        if dt <= 0.0 {
            return Err(config_err("integrator.dt".into(), "must be positive"));
        }
        integrator.dt = Some(dt);
    }
    if let Some(s) = integ.parse("scheme", "exp-midpoint, magnus4 or rk-check", Scheme::parse)? {
        integrator.scheme = s;
    }
    if let Some(tol) = integ.f64("unitarity_tol")? {
        if tol <= 0.0 {
            return Err(config_err("integrator.unitarity_tol".into(), "must be positive"));
        }
        integrator.unitarity_tol = tol;
    }

    let d = DiracSettings::default();
    let dirac = DiracSettings {
        delta: dirac_s.f64("delta")?.unwrap_or(d.delta),
        vf: dirac_s.f64("vF")?.unwrap_or(d.vf),
        t: dirac_s.f64("t")?.unwrap_or(d.t),
        n_radial: dirac_s.usize("n_radial")?.unwrap_or(d.n_radial),
        n_angular: dirac_s.usize("n_angular")?.unwrap_or(d.n_angular),
    };
    for (k, v) in [("delta", dirac.delta), ("vF", dirac.vf), ("t", dirac.t)] {
        if v <= 0.0 {
            return Err(config_err(dirac_s.field(k), "must be positive"));
        }
    }
    for (k, v) in [("n_radial", dirac.n_radial), ("n_angular", dirac.n_angular)] {
        if v == 0 {
            return Err(config_err(dirac_s.field(k), "must be positive"));
        }
    }

    let r = Refinement::default();
    let refinement = if kubo_s.bool("refine")?.unwrap_or(false) {
        let gap_time = kubo_s.f64("gap_time")?.unwrap_or(r.gap_time);
        let factor = kubo_s.usize("factor")?.unwrap_or(r.factor);
        if gap_time < 0.0 {
            return Err(config_err("kubo.gap_time".into(), "must be non-negative"));
        }
        if factor == 0 {
            return Err(config_err("kubo.factor".into(), "must be positive"));
        }
        Some(Refinement { gap_time, factor })
    } else {
        None
    };
    let kubo = KuboSettings { averaged: kubo_s.bool("averaged")?.unwrap_or(true), refinement };

    Ok(RunConfig {
        model,
        preset: preset_name,
        mode,
        mu_f,
        eps,
        e_alpha,
        e_beta,
        grid_n,
        grid_shift,
        t_max,
        dt_sample,
        output,
        threads,
        plot,
        integrator,
        dirac,
        kubo,
    })
}

impl RunConfig {
    /// Resolved settings as `key = value` lines, in a fixed order. Output
    /// location, thread count and plotting are left out so that results do
    /// not depend on them.
    pub fn echo(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: String| out.push(format!("{k} = {v}"));
        match &self.model {
            ModelSpec::Haldane { g, t2 } => {
                put("model.kind", "haldane".into());
                put("model.g", g.to_string());
                put("model.t2", t2.to_string());
            }
            ModelSpec::Dirac { vf } => {
                put("model.kind", "dirac".into());
                put("model.vF", vf.to_string());
            }
            ModelSpec::Tb { file } => {
                put("model.kind", "tb".into());
                put("model.file", file.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned()));
            }
        }
        if let Some(p) = &self.preset {
            put("model.preset", p.clone());
        }
        put("run.mode", self.mode.name().into());
        if self.mode == Mode::DiracCheck {
            put("dirac.delta", self.dirac.delta.to_string());
            put("dirac.vF", self.dirac.vf.to_string());
            put("dirac.t", self.dirac.t.to_string());
            put("dirac.n_radial", self.dirac.n_radial.to_string());
            put("dirac.n_angular", self.dirac.n_angular.to_string());
            return out;
        }
        let v2 = |v: [f64; 2]| format!("{} {}", v[0], v[1]);
        put("run.mu_F", self.mu_f.to_string());
        if matches!(self.mode, Mode::Dynamics | Mode::Predictors) {
            put("run.eps", self.eps.to_string());
        }
        put("run.e_alpha", v2(self.e_alpha));
        put("run.e_beta", v2(self.e_beta));
        put("run.grid_n", self.grid_n.to_string());
        put("run.grid_shift", v2(self.grid_shift));
        if self.mode != Mode::Chern {
            put("run.t_max", self.t_max.to_string());
            put("run.dt_sample", self.dt_sample.to_string());
        }
        if self.mode == Mode::Dynamics {
            put("integrator.dt", self.integrator.dt.map_or("auto".into(), |d| d.to_string()));
            put("integrator.scheme", self.integrator.scheme.name().into());
            put("integrator.unitarity_tol", self.integrator.unitarity_tol.to_string());
        }
        if self.mode == Mode::Kubo {
            put("kubo.averaged", self.kubo.averaged.to_string());
            match self.kubo.refinement {
                Some(r) => {
                    put("kubo.refine", "true".into());
                    put("kubo.gap_time", r.gap_time.to_string());
                    put("kubo.factor", r.factor.to_string());
                }
                None => put("kubo.refine", "false".into()),
            }
        }
        out
    }

    /// Output sample times `0, dt_sample, ...` up to and including `t_max`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt_sample + 1e-9).floor() as usize;
        let mut t: Vec<f64> = (0..=n).map(|i| i as f64 * self.dt_sample).collect();
        if let Some(&last) = t.last() {
            if self.t_max - last > 1e-9 * self.t_max.max(1.0) {
                t.push(self.t_max);
            } else {
                *t.last_mut().unwrap() = last.min(self.t_max);
            }
        }
        t
    }
}
