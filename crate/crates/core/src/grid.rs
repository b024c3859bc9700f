//! Uniform grids in exponential coordinates, value layers, multilinear
//! interpolation with a far-field constant, and horizontal finite
//! differences along the group frame.

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{Group, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::linalg::{HorizontalVector, SymMatrix};
use crate::math;

/// Snapping tolerance (in cells) for points that sit on a grid plane.
const SNAP: f64 = 1e-9;

/// Axis-aligned box `[lo, hi]` with spacing `h` per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridBox {
    lo: [f64; MAX_DIM],
    hi: [f64; MAX_DIM],
    h: [f64; MAX_DIM],
    nodes: [usize; MAX_DIM],
    strides: [usize; MAX_DIM],
    dim: usize,
    horizontal: usize,
}

impl GridBox {
    pub fn new(lo: &[f64], hi: &[f64], h: &[f64]) -> Result<Self> {
        let dim = lo.len();
        if hi.len() != dim || h.len() != dim {
            return Err(Error::Config("lo, hi and h must have the same length".into()));
        }
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!("grid dimension {dim} not in 1..={MAX_DIM}")));
        }
        let mut b = GridBox {
            lo: [0.0; MAX_DIM],
            hi: [0.0; MAX_DIM],
            h: [0.0; MAX_DIM],
            nodes: [1; MAX_DIM],
            strides: [0; MAX_DIM],
            dim,
            horizontal: dim,
        };
        for a in 0..dim {
            if !(lo[a] < hi[a]) || !(h[a] > 0.0) {
                return Err(Error::Config(format!(
                    "axis {a}: need lo < hi and h > 0 (lo={}, hi={}, h={})",
                    lo[a], hi[a], h[a]
                )));
            }
            let cells = (hi[a] - lo[a]) / h[a];
            let rounded = math::round(cells);
            if (cells - rounded).abs() > 1e-6 * rounded.max(1.0) {
                return Err(Error::Config(format!(
                    "axis {a}: (hi - lo)/h = {cells} is not an integer"
                )));
            }
            b.lo[a] = lo[a];
            b.hi[a] = hi[a];
            b.h[a] = h[a];
            b.nodes[a] = rounded as usize + 1;
        }
        let mut stride = 1;
        for a in (0..dim).rev() {
            b.strides[a] = stride;
            stride *= b.nodes[a];
        }
        Ok(b)
    }

    /// Same bounds and spacing on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, h: f64) -> Result<Self> {
        let lo_v: Vec<f64> = alloc::vec![lo; dim];
        let hi_v: Vec<f64> = alloc::vec![hi; dim];
        let h_v: Vec<f64> = alloc::vec![h; dim];
        Self::new(&lo_v, &hi_v, &h_v)
    }

    /// Marks only the first `m1` axes as horizontal. Outside the box along a
    /// horizontal axis the far field applies; along the remaining axes
    /// samples are clamped to the nearest face, which is exact for data
    /// independent of those coordinates (vertical cylinders).
    pub fn with_horizontal_axes(mut self, m1: usize) -> Result<Self> {
        if m1 == 0 || m1 > self.dim {
            return Err(Error::Config(format!("horizontal axes {m1} not in 1..={}", self.dim)));
        }
        self.horizontal = m1;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizontal_axes(&self) -> usize {
        self.horizontal
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes[..self.dim]
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().iter().product()
    }

    /// Multi-index of flat node `idx` (last axis fastest).
    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        for a in 0..self.dim {
            out[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides[..self.dim]).map(|(i, s)| i * s).sum()
    }

    pub fn node_point(&self, idx: usize) -> Point {
        let mi = self.multi_index(idx);
        let mut p = Point::zeros(self.dim);
        for a in 0..self.dim {
            p[a] = self.lo[a] + mi[a] as f64 * self.h[a];
        }
        p
    }

    /// Whether node `idx` lies on the outermost shell of the box across a
    /// horizontal axis.
    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let mi = self.multi_index(idx);
        (0..self.horizontal).any(|a| mi[a] == 0 || mi[a] + 1 == self.nodes[a])
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| {
            let s = (p[a] - self.lo[a]) / self.h[a];
            s >= -SNAP && s <= (self.nodes[a] - 1) as f64 + SNAP
        })
    }

    /// Distance from `p` to the horizontal faces of the box in units of
    /// cells (negative outside).
    pub fn cells_to_boundary(&self, p: &Point) -> f64 {
        (0..self.horizontal)
            .map(|a| {
                let s = (p[a] - self.lo[a]) / self.h[a];
                s.min((self.nodes[a] - 1) as f64 - s)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Values of `u^ε(t, ·)` on a grid plus the far-field constant used outside.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueLayer {
    grid: GridBox,
    values: Vec<f64>,
    t: f64,
    far_field: f64,
    bound: f64,
}

impl ValueLayer {
    /// Samples `ψ` at every node. `ψ` must equal `far_field` on the boundary
    /// shell of the box, otherwise truncating to the box would be
    /// inconsistent.
    pub fn build<F>(grid: GridBox, psi: F, far_field: f64) -> Result<Self>
    where
        F: Fn(&Point) -> f64,
    {
        let n = grid.node_count();
        let mut values = Vec::with_capacity(n);
        let tol = 1e-12 * far_field.abs().max(1.0);
        for idx in 0..n {
            let p = grid.node_point(idx);
            let v = psi(&p);
            if !v.is_finite() {
                return Err(Error::Config(format!("initial datum is not finite at {p:?}")));
            }
            if grid.is_boundary_node(idx) && (v - far_field).abs() > tol {
                return Err(Error::Config(format!(
                    "initial datum {v} differs from the far-field value {far_field} on the box boundary at {p:?}"
                )));
            }
            values.push(v);
        }
        let bound = values.iter().fold(far_field.abs(), |m, v| m.max(v.abs()));
        Ok(Self { grid, values, t: 0.0, far_field, bound })
    }

    pub(crate) fn from_parts(grid: GridBox, values: Vec<f64>, t: f64, far_field: f64, bound: f64) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid, values, t, far_field, bound }
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn far_field(&self) -> f64 {
        self.far_field
    }

    /// `‖ψ‖∞` of the datum this layer descends from.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Multilinear interpolation inside the box, `far_field` outside.
    #[inline]
    pub fn sample(&self, p: &Point) -> f64 {
        self.sample_checked(p).0
    }

    /// Like [`sample`](Self::sample) but also reports whether `p` was inside.
    pub fn sample_checked(&self, p: &Point) -> (f64, bool) {
        let g = &self.grid;
        let mut base = 0usize;
        let mut active = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        let mut n_active = 0;
        let mut inside = true;
        for a in 0..g.dim {
            let mut s = (p[a] - g.lo[a]) / g.h[a];
            let r = math::round(s);
            if (s - r).abs() < SNAP {
                s = r;
            }
            let last = (g.nodes[a] - 1) as f64;
            if !(s >= 0.0 && s <= last) {
                if a < g.horizontal || s.is_nan() {
                    return (self.far_field, false);
                }
                s = s.clamp(0.0, last);
                inside = false;
            }
            let i = math::floor(s);
            let f = s - i;
            let i = i as usize;
            base += i * g.strides[a];
            if f > 0.0 {
                active[n_active] = a;
                frac[n_active] = f;
                n_active += 1;
            }
        }
        if n_active == 0 {
            return (self.values[base], inside);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n_active) {
            let mut w = 1.0;
            let mut idx = base;
            for k in 0..n_active {
                if corner & (1 << k) != 0 {
                    w *= frac[k];
                    idx += g.strides[active[k]];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            acc += w * self.values[idx];
        }
        (acc, inside)
    }

    /// Horizontal gradient and symmetrized horizontal Hessian at `p` by
    /// central differences along left translates `p · exp(±δ X_i)`.
    pub fn horizontal_derivatives(&self, group: &Group, p: &Point, delta: f64) -> HorizontalJet {
        let m1 = group.horizontal_dim();
        let mut off_box = false;
        let mut at = |q: &Point| {
            let (v, inside) = self.sample_checked(q);
            off_box |= !inside;
            v
        };
        let step = |i: usize, s: f64| {
            let mut v = HorizontalVector::zeros(m1);
            v[i] = s;
            v
        };

        let u0 = at(p);
        let mut plus = [0.0; MAX_DIM];
        let mut minus = [0.0; MAX_DIM];
        let mut eta = HorizontalVector::zeros(m1);
        let mut hess = SymMatrix::zeros(m1);
        let d2 = delta * delta;
        for i in 0..m1 {
            plus[i] = at(&group.translate_horizontal(p, &step(i, delta), 1.0));
            minus[i] = at(&group.translate_horizontal(p, &step(i, -delta), 1.0));
            eta[i] = (plus[i] - minus[i]) / (2.0 * delta);
            hess.set(i, i, (plus[i] - 2.0 * u0 + minus[i]) / d2);
        }

        let commutative = group.step() == 1;
        for i in 0..m1 {
            for j in (i + 1)..m1 {
                let mut mixed = |first: usize, second: usize| {
                    let mut acc = 0.0;
                    for (sa, sb, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                        let q = group.translate_horizontal(p, &step(first, sa * delta), 1.0);
                        let q = group.translate_horizontal(&q, &step(second, sb * delta), 1.0);
                        acc += sign * at(&q);
                    }
                    acc / (4.0 * d2)
                };
                let xij = mixed(i, j);
                let v = if commutative { xij } else { 0.5 * (xij + mixed(j, i)) };
                hess.set(i, j, v);
            }
        }
        HorizontalJet { eta, hessian: hess, off_box }
    }
}

/// Finite-difference `(∇_0 u, ∇_0^{2,*} u)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizontalJet {
    pub eta: HorizontalVector,
    pub hessian: SymMatrix,
    /// Some stencil point fell outside the box and read the far field.
    pub off_box: bool,
}
