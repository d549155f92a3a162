//! Direct and reciprocal lattice geometry and Brillouin-zone sampling.
//!
//! Reciprocal vectors satisfy `a_i . b_j = 2 pi delta_ij`. A [`BZGrid`] is the
//! uniform `n x n` sampling `k = (i/n) b1 + (j/n) b2 + shift`; integrals over the
//! zone are approximated by the periodic trapezoid rule with equal weights
//! `bz_area / n^2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Two-dimensional real vector.
pub type Vec2 = nalgebra::Vector2<f64>;

/// z-component of the planar cross product.
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Reciprocal basis of `(a1, a2)`.
///
/// ```
/// use crystal_current::lattice::{reciprocal_basis, Vec2};
/// let (b1, b2) = reciprocal_basis(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
/// assert!((b1 - Vec2::new(2.0 * std::f64::consts::PI, 0.0)).norm() < 1e-15);
/// assert!((b2 - Vec2::new(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-15);
/// ```
pub fn reciprocal_basis(a1: Vec2, a2: Vec2) -> Result<(Vec2, Vec2)> {
    let c = cross(&a1, &a2);
    if !(c.abs() >= 1e-14) {
        return Err(Error::DegenerateBasis(c.abs()));
    }
    let b1 = Vec2::new(a2.y, -a2.x) * (2.0 * PI / c);
    let b2 = Vec2::new(-a1.y, a1.x) * (2.0 * PI / c);
    Ok((b1, b2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice2D {
    pub a1: Vec2,
    pub a2: Vec2,
    pub b1: Vec2,
    pub b2: Vec2,
    pub cell_area: f64,
    pub bz_area: f64,
}

impl Lattice2D {
    pub fn new(a1: Vec2, a2: Vec2) -> Result<Self> {
        let (b1, b2) = reciprocal_basis(a1, a2)?;
        Ok(Self {
            a1,
            a2,
            b1,
            b2,
            cell_area: cross(&a1, &a2).abs(),
            bz_area: cross(&b1, &b2).abs(),
        })
    }

    /// Honeycomb Bravais lattice with `a1 = (sqrt3/2, 1/2)`, `a2 = (sqrt3/2, -1/2)`.
    pub fn honeycomb() -> Self {
        let s = 3f64.sqrt() / 2.0;
        Self::new(Vec2::new(s, 0.5), Vec2::new(s, -0.5)).expect("honeycomb basis is regular")
    }

    /// Unit square lattice.
    pub fn square() -> Self {
        Self::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).expect("square basis is regular")
    }

    /// Cartesian vector from reciprocal-basis coordinates.
    pub fn from_fractional(&self, c1: f64, c2: f64) -> Vec2 {
        self.b1 * c1 + self.b2 * c2
    }

    /// Reciprocal-basis coordinates of `k`.
    pub fn to_fractional(&self, k: &Vec2) -> (f64, f64) {
        (k.dot(&self.a1) / (2.0 * PI), k.dot(&self.a2) / (2.0 * PI))
    }

    /// Cartesian vector from direct-basis coordinates.
    pub fn direct(&self, r1: f64, r2: f64) -> Vec2 {
        self.a1 * r1 + self.a2 * r2
    }

    /// Integer coordinates of `k` if it lies in the reciprocal lattice (tolerance 1e-8).
    pub fn reciprocal_index(&self, k: &Vec2) -> Result<(i64, i64)> {
        let (c1, c2) = self.to_fractional(k);
        let (r1, r2) = (c1.round(), c2.round());
        if (c1 - r1).abs() > 1e-8 || (c2 - r2).abs() > 1e-8 {
            return Err(Error::NotReciprocal(k.x, k.y));
        }
        Ok((r1 as i64, r2 as i64))
    }

    /// Largest deviation of `a_i . b_j` from `2 pi delta_ij`.
    pub fn duality_defect(&self) -> f64 {
        let a = [self.a1, self.a2];
        let b = [self.b1, self.b2];
        let mut d: f64 = 0.0;
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                let target = if i == j { 2.0 * PI } else { 0.0 };
                d = d.max((ai.dot(bj) - target).abs());
            }
        }
        d
    }
}

/// A field or measurement direction. Not necessarily normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vec2);

impl Direction {
    pub fn new(e: Vec2) -> Result<Self> {
        if !(e.x.is_finite() && e.y.is_finite()) || e.norm() == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(Self(e))
    }

    pub fn vec(&self) -> Vec2 {
        self.0
    }
}

impl From<Direction> for Vec2 {
    fn from(d: Direction) -> Vec2 {
        d.0
    }
}

/// Uniform Brillouin-zone sampling.
#[derive(Debug, Clone)]
pub struct BZGrid {
    pub n_per_dim: usize,
    pub shift: Vec2,
    pub points: Vec<Vec2>,
    pub weight: f64,
}

impl BZGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Linear index of grid point `(i, j)`, periodic in both arguments.
    pub fn index(&self, i: usize, j: usize) -> usize {
        (i % self.n_per_dim) * self.n_per_dim + (j % self.n_per_dim)
    }

    pub fn total_weight(&self) -> f64 {
        self.weight * self.points.len() as f64
    }
}

/// Grid of `n x n` points `k = (i/n) b1 + (j/n) b2 + shift`, ordered with `j` fastest.
pub fn make_grid(lattice: &Lattice2D, n: usize, shift: Vec2) -> Result<BZGrid> {
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    let nf = n as f64;
    let mut points = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            points.push(lattice.b1 * (i as f64 / nf) + lattice.b2 * (j as f64 / nf) + shift);
        }
    }
    Ok(BZGrid {
        n_per_dim: n,
        shift,
        points,
        weight: lattice.bz_area / (nf * nf),
    })
}

/// Grid shifted by fractional coordinates `(s1, s2)` of the reciprocal basis.
pub fn make_grid_fractional(lattice: &Lattice2D, n: usize, s1: f64, s2: f64) -> Result<BZGrid> {
    make_grid(lattice, n, lattice.from_fractional(s1, s2))
}

/// Grid shifted by half a cell in both directions.
pub fn make_half_shifted_grid(lattice: &Lattice2D, n: usize) -> Result<BZGrid> {
    let h = 0.5 / n.max(1) as f64;
    make_grid_fractional(lattice, n, h, h)
}
