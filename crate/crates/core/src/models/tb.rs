//! Generic tight-binding fibers built from a hopping list.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! lattice a1x a1y a2x a2y
//! orbital x y            # one line per orbital, in order
//! a b R1 R2 re im        # hopping <a| H |b, R> = re + i im
//! ```
//!
//! Header lines (`lattice`, `orbital`) must precede the hopping records.
//! Orbital indices are zero-based and `(R1, R2)` are integer coordinates in the
//! direct basis.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{Lattice2D, Vec2};
use crate::linalg::{CMat, C64};

use super::{BlochModel, FourierTerm, HaldaneParams, HALDANE_DELTAS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hopping {
    pub a: usize,
    pub b: usize,
    pub r: [i64; 2],
    pub t: C64,
}

#[derive(Debug, Clone)]
pub struct HoppingList {
    pub lattice: Lattice2D,
    pub tau: Vec<Vec2>,
    pub entries: Vec<Hopping>,
}

impl HoppingList {
    /// Validates orbital indices and closure under Hermitian conjugation.
    pub fn new(lattice: Lattice2D, tau: Vec<Vec2>, entries: Vec<Hopping>) -> Result<Self> {
        let m = tau.len();
        let mut acc: BTreeMap<(usize, usize, i64, i64), C64> = BTreeMap::new();
        for h in &entries {
            if h.a >= m || h.b >= m {
                return Err(Error::NonHermitianHoppings(format!(
                    "orbital index out of range in ({}, {}) with {} orbitals",
                    h.a, h.b, m
                )));
            }
            *acc.entry((h.a, h.b, h.r[0], h.r[1])).or_default() += h.t;
        }
        let scale = acc.values().fold(0.0f64, |s, t| s.max(t.norm())).max(1.0);
        for (&(a, b, r1, r2), &t) in &acc {
            let partner = acc.get(&(b, a, -r1, -r2)).copied().unwrap_or_default();
            if (t - partner.conj()).norm() > 1e-12 * scale {
                return Err(Error::NonHermitianHoppings(format!(
                    "({a}, {b}, [{r1}, {r2}]) = {t} has partner {partner}"
                )));
            }
        }
        Ok(Self { lattice, tau, entries })
    }

    /// Hoppings reproducing the Haldane-type fiber on the honeycomb lattice.
    pub fn haldane(p: &HaldaneParams) -> Self {
        let lattice = Lattice2D::honeycomb();
        let tau = vec![Vec2::zeros(), -HALDANE_DELTAS[0]];
        let mut e = vec![
            Hopping { a: 0, b: 0, r: [0, 0], t: C64::new(p.g, 0.0) },
            Hopping { a: 1, b: 1, r: [0, 0], t: C64::new(-p.g, 0.0) },
        ];
        for r in [[0, 0], [0, -1], [-1, 0]] {
            e.push(Hopping { a: 1, b: 0, r, t: C64::new(1.0, 0.0) });
            e.push(Hopping { a: 0, b: 1, r: [-r[0], -r[1]], t: C64::new(1.0, 0.0) });
        }
        // 2 t2 sin(k.v) = -i t2 e^{ik.v} + i t2 e^{-ik.v}
        for v in [[1, 0], [0, 1], [1, -1]] {
            let mv = [-v[0], -v[1]];
            e.push(Hopping { a: 0, b: 0, r: v, t: C64::new(0.0, -p.t2) });
            e.push(Hopping { a: 0, b: 0, r: mv, t: C64::new(0.0, p.t2) });
            e.push(Hopping { a: 1, b: 1, r: v, t: C64::new(0.0, p.t2) });
            e.push(Hopping { a: 1, b: 1, r: mv, t: C64::new(0.0, -p.t2) });
        }
        Self::new(lattice, tau, e).expect("Haldane hoppings are Hermitian")
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { path: origin.to_string(), line, msg };
        let mut lattice = None;
        let mut tau = Vec::new();
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().unwrap_or("");
            let floats = |ws: std::str::SplitWhitespace, n: usize| -> Result<Vec<f64>> {
                let v = ws
                    .map(|w| w.parse::<f64>().map_err(|_| err(line_no, format!("invalid number `{w}`"))))
                    .collect::<Result<Vec<_>>>()?;
                if v.len() != n {
                    return Err(err(line_no, format!("expected {n} numbers, found {}", v.len())));
                }
                Ok(v)
            };
            match head {
                "lattice" => {
                    if !entries.is_empty() {
                        return Err(err(line_no, "header after hopping records".into()));
                    }
                    let v = floats(words, 4)?;
                    let l = Lattice2D::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]))
                        .map_err(|e| err(line_no, e.to_string()))?;
                    lattice = Some(l);
                }
                "orbital" => {
                    if !entries.is_empty() {
                        return Err(err(line_no, "header after hopping records".into()));
                    }
                    let v = floats(words, 2)?;
                    tau.push(Vec2::new(v[0], v[1]));
                }
                _ => {
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    if fields.len() != 6 {
                        return Err(err(line_no, format!("expected `a b R1 R2 re im`, found {} fields", fields.len())));
                    }
                    let int = |w: &str| w.parse::<i64>().map_err(|_| err(line_no, format!("invalid integer `{w}`")));
                    let a = int(fields[0])?;
                    let b = int(fields[1])?;
                    if a < 0 || b < 0 || a as usize >= tau.len() || b as usize >= tau.len() {
                        return Err(err(line_no, format!("orbital index out of range ({} orbitals declared)", tau.len())));
                    }
                    let r = [int(fields[2])?, int(fields[3])?];
                    let num = |w: &str| w.parse::<f64>().map_err(|_| err(line_no, format!("invalid number `{w}`")));
                    let t = C64::new(num(fields[4])?, num(fields[5])?);
                    entries.push(Hopping { a: a as usize, b: b as usize, r, t });
                }
            }
        }
        let lattice = lattice.ok_or_else(|| err(0, "missing `lattice` header".into()))?;
        if tau.is_empty() {
            return Err(err(0, "no `orbital` declared".into()));
        }
        Self::new(lattice, tau, entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Serializes in the format accepted by [`HoppingList::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let l = &self.lattice;
        s.push_str(&format!("lattice {:e} {:e} {:e} {:e}\n", l.a1.x, l.a1.y, l.a2.x, l.a2.y));
        for t in &self.tau {
            s.push_str(&format!("orbital {:e} {:e}\n", t.x, t.y));
        }
        for h in &self.entries {
            s.push_str(&format!("{} {} {} {} {:e} {:e}\n", h.a, h.b, h.r[0], h.r[1], h.t.re, h.t.im));
        }
        s
    }
}

/// `H(k)_ab = sum_R t_ab(R) e^{i k.(R + tau_b - tau_a)}`.
pub fn tb_fiber(h: &HoppingList, k: &Vec2) -> CMat {
    TbModel::new(h.clone()).fiber(k)
}

/// Model evaluating a [`HoppingList`] with precomputed bond vectors.
#[derive(Debug, Clone)]
pub struct TbModel {
    list: HoppingList,
    terms: Vec<(usize, usize, Vec2, C64)>,
}

impl TbModel {
    pub fn new(list: HoppingList) -> Self {
        let terms = list
            .entries
            .iter()
            .map(|h| {
                let r = list.lattice.direct(h.r[0] as f64, h.r[1] as f64);
                (h.a, h.b, r + list.tau[h.b] - list.tau[h.a], h.t)
            })
            .collect();
        Self { list, terms }
    }

    pub fn hoppings(&self) -> &HoppingList {
        &self.list
    }
}

impl BlochModel for TbModel {
    fn dim(&self) -> usize {
        self.list.tau.len()
    }

    fn lattice(&self) -> &Lattice2D {
        &self.list.lattice
    }

    fn tau(&self) -> &[Vec2] {
        &self.list.tau
    }

    fn fiber(&self, k: &Vec2) -> CMat {
        let m = self.dim();
        let mut out = CMat::zeros(m, m);
        self.fiber_into(k, &mut out);
        out
    }

    fn fiber_into(&self, k: &Vec2, out: &mut CMat) {
        let m = self.dim();
        if out.nrows() != m || out.ncols() != m {
            *out = CMat::zeros(m, m);
        } else {
            out.fill(C64::new(0.0, 0.0));
        }
        for (a, b, d, t) in &self.terms {
            out[(*a, *b)] += t * C64::from_polar(1.0, k.dot(d));
        }
    }

    fn fourier_terms(&self) -> Option<Vec<FourierTerm>> {
        Some(self.terms.iter().map(|&(a, b, d, t)| FourierTerm { a, b, d, t }).collect())
    }

    fn deriv(&self, k: &Vec2, e: &Vec2) -> CMat {
        let m = self.dim();
        let mut out = CMat::zeros(m, m);
        for (a, b, d, t) in &self.terms {
            out[(*a, *b)] += t * C64::new(0.0, e.dot(d)) * C64::from_polar(1.0, k.dot(d));
        }
        out
    }
}
