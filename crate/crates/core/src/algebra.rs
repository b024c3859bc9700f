//! Carnot groups in exponential coordinates of the first kind.
//!
//! Points are coordinate vectors `p = (p_{1,1}, …, p_{l,m_l})` grouped by
//! stratum. The group law is the Baker–Campbell–Hausdorff product, which is
//! a finite polynomial because the Lie algebra is nilpotent. Euclidean space
//! and the Heisenberg groups have closed forms; the Engel group is
//! synthesized from its structure constants.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::HorizontalVector;
use crate::math;

/// Largest supported topological dimension `N`.
pub const MAX_DIM: usize = 8;

/// An element of `𝔾` in exponential coordinates.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Self { coords: [0.0; MAX_DIM], dim }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        let mut p = Self::zeros(c.len());
        p.coords[..c.len()].copy_from_slice(c);
        p
    }

    /// The horizontal point `(ν, 0)`.
    pub fn horizontal(nu: &HorizontalVector, dim: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.coords[..nu.dim()].copy_from_slice(nu.as_slice());
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim]
    }

    pub fn is_identity(&self) -> bool {
        self.coords().iter().all(|&c| c == 0.0)
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn euclidean_distance(&self, other: &Point) -> f64 {
        let s: f64 = self
            .coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        math::sqrt(s)
    }
}

impl core::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

impl core::ops::IndexMut<usize> for Point {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.coords_mut()[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// `ℝᴺ`, step 1.
    Euclidean(usize),
    /// `ℍⁿ` with basis `X_1..X_n, Y_1..Y_n, T`, step 2.
    Heisenberg(usize),
    /// `𝔼⁴`, step 3.
    Engel,
    /// Built from user supplied strata and structure constants.
    Custom,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Euclidean(n) => write!(f, "euclidean:{n}"),
            GroupKind::Heisenberg(n) => write!(f, "heisenberg:{n}"),
            GroupKind::Engel => write!(f, "engel"),
            GroupKind::Custom => write!(f, "custom"),
        }
    }
}

/// One nonzero structure constant: `[e_i, e_j] = c e_k` (with `i < j`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

/// A Carnot group descriptor: stratification, structure constants and law.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    kind: GroupKind,
    strata: Vec<usize>,
    layer_of: [usize; MAX_DIM],
    brackets: Vec<Bracket>,
}

impl Group {
    pub fn euclidean(n: usize) -> Self {
        Self::build(GroupKind::Euclidean(n), alloc::vec![n], Vec::new())
    }

    pub fn heisenberg(n: usize) -> Self {
        let brackets = (0..n)
            .map(|j| Bracket { i: j, j: j + n, k: 2 * n, c: 1.0 })
            .collect();
        Self::build(GroupKind::Heisenberg(n), alloc::vec![2 * n, 1], brackets)
    }

    /// `[X_1, X_2] = X_3`, `[X_1, X_3] = X_4`, `[X_2, X_3] = X_4`, read off
    /// from the coordinate frame at the origin.
    pub fn engel() -> Self {
        let brackets = alloc::vec![
            Bracket { i: 0, j: 1, k: 2, c: 1.0 },
            Bracket { i: 0, j: 2, k: 3, c: 1.0 },
            Bracket { i: 1, j: 2, k: 3, c: 1.0 },
        ];
        Self::build(GroupKind::Engel, alloc::vec![2, 1, 1], brackets)
    }

    /// A group from explicit strata and brackets. The brackets must respect
    /// the grading; this is checked.
    pub fn custom(strata: Vec<usize>, brackets: Vec<Bracket>) -> Result<Self> {
        let g = Self::build(GroupKind::Custom, strata, Vec::new());
        for b in &brackets {
            if b.i >= b.j || b.k >= g.dim() || b.j >= g.dim() {
                return Err(Error::Config(format!("malformed bracket {b:?}")));
            }
            let target = g.layer_of[b.i] + g.layer_of[b.j];
            if g.layer_of[b.k] != target {
                return Err(Error::Config(format!(
                    "bracket {b:?} maps layers {}+{} into layer {}",
                    g.layer_of[b.i], g.layer_of[b.j], g.layer_of[b.k]
                )));
            }
        }
        Ok(Self { brackets, ..g })
    }

    fn build(kind: GroupKind, strata: Vec<usize>, brackets: Vec<Bracket>) -> Self {
        let n: usize = strata.iter().sum();
        assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
        assert!(strata[0] <= crate::linalg::MAX_HORIZONTAL);
        let mut layer_of = [0usize; MAX_DIM];
        let mut idx = 0;
        for (j, &m) in strata.iter().enumerate() {
            for _ in 0..m {
                layer_of[idx] = j + 1;
                idx += 1;
            }
        }
        Self { kind, strata, layer_of, brackets }
    }

    /// Parses `euclidean:N`, `heisenberg:n` or `engel`.
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (name, None),
        };
        let parse_arg = |a: Option<&str>| -> Result<usize> {
            let a = a.ok_or_else(|| Error::Config(format!("group `{name}` needs a dimension")))?;
            let n: usize = a
                .parse()
                .map_err(|_| Error::Config(format!("bad group dimension `{a}`")))?;
            if n == 0 {
                return Err(Error::Config("group dimension must be positive".into()));
            }
            Ok(n)
        };
        let g = match head.to_ascii_lowercase().as_str() {
            "euclidean" => {
                let n = parse_arg(arg)?;
                if n > crate::linalg::MAX_HORIZONTAL {
                    return Err(Error::UnsupportedGroup(format!("euclidean:{n} too large")));
                }
                Self::euclidean(n)
            }
            "heisenberg" => {
                let n = parse_arg(arg)?;
                if 2 * n + 1 > MAX_DIM {
                    return Err(Error::UnsupportedGroup(format!("heisenberg:{n} too large")));
                }
                Self::heisenberg(n)
            }
            "engel" if arg.is_none() => Self::engel(),
            _ => return Err(Error::Config(format!("unknown group `{name}`"))),
        };
        Ok(g)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn step(&self) -> usize {
        self.strata.len()
    }

    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    /// `N = Σ m_j`.
    pub fn dim(&self) -> usize {
        self.strata.iter().sum()
    }

    /// `m_1`.
    pub fn horizontal_dim(&self) -> usize {
        self.strata[0]
    }

    /// Layer (1-based) of coordinate `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        self.layer_of[i]
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    pub fn identity(&self) -> Point {
        Point::zeros(self.dim())
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        Ok(())
    }

    /// Lie bracket `[a, b]` of algebra elements in the chosen basis.
    pub fn lie_bracket(&self, a: &Point, b: &Point) -> Point {
        let mut out = Point::zeros(self.dim());
        for br in &self.brackets {
            let coef = a[br.i] * b[br.j] - a[br.j] * b[br.i];
            out[br.k] += br.c * coef;
        }
        out
    }

    /// Group product `p · q`.
    pub fn multiply(&self, p: &Point, q: &Point) -> Result<Point> {
        self.check_dim(p)?;
        self.check_dim(q)?;
        match self.kind {
            GroupKind::Euclidean(_) => Ok(self.multiply_euclidean(p, q)),
            GroupKind::Heisenberg(n) => Ok(heisenberg_law(n, p, q)),
            GroupKind::Engel | GroupKind::Custom => self.bch_multiply_from_structure(p, q),
        }
    }

    /// Product without dimension checks; used in the inner loops.
    #[inline]
    pub(crate) fn mul_unchecked(&self, p: &Point, q: &Point) -> Point {
        match self.kind {
            GroupKind::Euclidean(_) => self.multiply_euclidean(p, q),
            GroupKind::Heisenberg(n) => heisenberg_law(n, p, q),
            _ => bch_truncated(self, p, q),
        }
    }

    fn multiply_euclidean(&self, p: &Point, q: &Point) -> Point {
        let mut out = *p;
        for (o, b) in out.coords_mut().iter_mut().zip(q.coords()) {
            *o += b;
        }
        out
    }

    /// `p · q = p + q + ½[p,q] + (1/12)([p,[p,q]] − [q,[p,q]])`, exact up to
    /// step 3.
    pub fn bch_multiply_from_structure(&self, p: &Point, q: &Point) -> Result<Point> {
        self.check_dim(p)?;
        self.check_dim(q)?;
        if self.step() > 3 {
            return Err(Error::UnsupportedGroup(format!(
                "BCH product implemented up to step 3, group has step {}",
                self.step()
            )));
        }
        Ok(bch_truncated(self, p, q))
    }

    /// For the exponential-coordinate groups shipped here, `p^{-1} = -p`.
    pub fn inverse(&self, p: &Point) -> Point {
        let mut out = *p;
        out.coords_mut().iter_mut().for_each(|c| *c = -*c);
        out
    }

    /// `δ_λ`: layer-`j` coordinates scaled by `λ^j`.
    pub fn dilate(&self, p: &Point, lambda: f64) -> Point {
        let mut out = *p;
        let mut pow = [1.0f64; 4];
        for j in 1..4 {
            pow[j] = pow[j - 1] * lambda;
        }
        for i in 0..p.dim() {
            let j = self.layer_of[i];
            out[i] *= if j < 4 { pow[j] } else { math::powf(lambda, j as f64) };
        }
        out
    }

    /// Carnot gauge `Σ_j Σ_i |p_{j,i}|^{1/j}`.
    pub fn gauge(&self, p: &Point) -> f64 {
        p.coords()
            .iter()
            .enumerate()
            .map(|(i, &c)| math::root_abs(c, self.layer_of[i]))
            .sum()
    }

    /// The `m_j` coordinates of layer `j` (1-based).
    pub fn layer_component<'a>(&self, p: &'a Point, j: usize) -> Result<&'a [f64]> {
        if j == 0 || j > self.step() {
            return Err(Error::LayerOutOfRange { layer: j, step: self.step() });
        }
        let start: usize = self.strata[..j - 1].iter().sum();
        Ok(&p.coords()[start..start + self.strata[j - 1]])
    }

    /// Columns are the coordinate expressions of `X_1, …, X_{m1}` at `p`.
    ///
    /// Heisenberg and Engel use the closed-form frames; other groups use the
    /// left-translation derivative `e_i + ½[p, e_i] + (1/12)[p, [p, e_i]]`.
    pub fn horizontal_frame(&self, p: &Point) -> Vec<Point> {
        let n = self.dim();
        let m1 = self.horizontal_dim();
        match self.kind {
            GroupKind::Euclidean(_) => (0..m1)
                .map(|i| {
                    let mut c = Point::zeros(n);
                    c[i] = 1.0;
                    c
                })
                .collect(),
            GroupKind::Heisenberg(k) => {
                let mut cols = Vec::with_capacity(m1);
                for j in 0..k {
                    let mut x = Point::zeros(n);
                    x[j] = 1.0;
                    x[2 * k] = -p[k + j] / 2.0;
                    cols.push(x);
                }
                for j in 0..k {
                    let mut y = Point::zeros(n);
                    y[k + j] = 1.0;
                    y[2 * k] = p[j] / 2.0;
                    cols.push(y);
                }
                cols
            }
            GroupKind::Engel => {
                let (p1, p2, p3) = (p[0], p[1], p[2]);
                let s = p1 + p2;
                let x1 = Point::from_slice(&[1.0, 0.0, -p2 / 2.0, -(p3 / 2.0 + p2 * s / 12.0)]);
                let x2 = Point::from_slice(&[0.0, 1.0, p1 / 2.0, -(p3 / 2.0 - p1 * s / 12.0)]);
                alloc::vec![x1, x2]
            }
            GroupKind::Custom => self.frame_from_structure(p),
        }
    }

    /// Left-invariant frame derived from the structure constants. Valid for
    /// step ≤ 3.
    pub fn frame_from_structure(&self, p: &Point) -> Vec<Point> {
        let n = self.dim();
        (0..self.horizontal_dim())
            .map(|i| {
                let mut e = Point::zeros(n);
                e[i] = 1.0;
                let ad1 = self.lie_bracket(p, &e);
                let ad2 = self.lie_bracket(p, &ad1);
                let mut col = e;
                for k in 0..n {
                    col[k] += 0.5 * ad1[k] + ad2[k] / 12.0;
                }
                col
            })
            .collect()
    }

    /// `p · δ_ε(ν, 0)` for a horizontal move; the hot path of the game.
    #[inline]
    pub fn translate_horizontal(&self, p: &Point, nu: &HorizontalVector, scale: f64) -> Point {
        let mut q = Point::zeros(self.dim());
        for i in 0..nu.dim() {
            q[i] = scale * nu[i];
        }
        self.mul_unchecked(p, &q)
    }
}

#[inline]
fn heisenberg_law(n: usize, p: &Point, q: &Point) -> Point {
    let mut out = *p;
    for i in 0..2 * n {
        out[i] += q[i];
    }
    let mut sym = 0.0;
    for i in 0..n {
        sym += p[i] * q[i + n] - p[i + n] * q[i];
    }
    out[2 * n] += q[2 * n] + 0.5 * sym;
    out
}

fn bch_truncated(g: &Group, p: &Point, q: &Point) -> Point {
    let n = g.dim();
    let pq = g.lie_bracket(p, q);
    let mut out = Point::zeros(n);
    if g.step() >= 3 {
        let p_pq = g.lie_bracket(p, &pq);
        let q_pq = g.lie_bracket(q, &pq);
        for k in 0..n {
            out[k] = p[k] + q[k] + 0.5 * pq[k] + (p_pq[k] - q_pq[k]) / 12.0;
        }
    } else {
        for k in 0..n {
            out[k] = p[k] + q[k] + 0.5 * pq[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> Group {
        Group::heisenberg(1)
    }

    #[test]
    fn heisenberg_product_example() {
        let g = h1();
        let p = Point::from_slice(&[1.0, 0.0, 0.0]);
        let q = Point::from_slice(&[0.0, 1.0, 0.0]);
        let r = g.multiply(&p, &q).unwrap();
        assert_eq!(r.coords(), &[1.0, 1.0, 0.5]);
    }

    #[test]
    fn identity_is_neutral() {
        for g in [Group::euclidean(2), h1(), Group::heisenberg(2), Group::engel()] {
            let p = Point::from_slice(&[0.3, -1.2, 0.7, 2.0, -0.1][..g.dim()]);
            assert_eq!(g.multiply(&p, &g.identity()).unwrap(), p);
            assert_eq!(g.multiply(&g.identity(), &p).unwrap(), p);
        }
    }

    #[test]
    fn inverse_examples() {
        let g = h1();
        let p = Point::from_slice(&[1.0, 2.0, 3.0]);
        assert_eq!(g.inverse(&p).coords(), &[-1.0, -2.0, -3.0]);
        assert_eq!(g.inverse(&g.identity()), g.identity());
        assert!(g.multiply(&p, &g.inverse(&p)).unwrap().is_identity());
    }

    #[test]
    fn dilation_example() {
        let g = h1();
        let p = Point::from_slice(&[1.0, 1.0, 1.0]);
        assert_eq!(g.dilate(&p, 2.0).coords(), &[2.0, 2.0, 4.0]);
        assert_eq!(g.dilate(&p, 1.0), p);
    }

    #[test]
    fn gauge_examples() {
        let g = h1();
        assert_eq!(g.gauge(&Point::from_slice(&[1.0, 1.0, 0.25])), 2.5);
        assert_eq!(g.gauge(&g.identity()), 0.0);
        let nu = HorizontalVector::from_slice(&[0.5, -1.5]);
        assert_eq!(g.gauge(&Point::horizontal(&nu, 3)), nu.norm_l1());
    }

    #[test]
    fn layer_slices() {
        let g = h1();
        let p = Point::from_slice(&[1.0, 2.0, 3.0]);
        assert_eq!(g.layer_component(&p, 1).unwrap(), &[1.0, 2.0]);
        assert_eq!(g.layer_component(&p, 2).unwrap(), &[3.0]);
        assert!(matches!(g.layer_component(&p, 3), Err(Error::LayerOutOfRange { .. })));
        let e = Group::engel();
        assert_eq!(e.layer_component(&e.identity(), 3).unwrap(), &[0.0]);
    }

    #[test]
    fn frame_examples() {
        let g = h1();
        let cols = g.horizontal_frame(&g.identity());
        assert_eq!(cols[0].coords(), &[1.0, 0.0, 0.0]);
        assert_eq!(cols[1].coords(), &[0.0, 1.0, 0.0]);
        let cols = g.horizontal_frame(&Point::from_slice(&[0.0, 2.0, 0.0]));
        assert_eq!(cols[0].coords(), &[1.0, 0.0, -1.0]);

        let e = Group::engel();
        let cols = e.horizontal_frame(&e.identity());
        assert_eq!(cols[0].coords(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(cols[1].coords(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn engel_frame_matches_structure_derivative() {
        let e = Group::engel();
        let p = Point::from_slice(&[0.7, -1.3, 0.4, 2.2]);
        let closed = e.horizontal_frame(&p);
        let derived = e.frame_from_structure(&p);
        for (a, b) in closed.iter().zip(&derived) {
            assert!(a.max_abs_diff(b) < 1e-14, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn euclidean_bch_is_sum() {
        let g = Group::euclidean(3);
        let p = Point::from_slice(&[1.0, 2.0, 3.0]);
        let q = Point::from_slice(&[-0.5, 0.25, 4.0]);
        assert_eq!(g.bch_multiply_from_structure(&p, &q).unwrap().coords(), &[0.5, 2.25, 7.0]);
    }

    #[test]
    fn step_four_is_rejected() {
        let brackets = alloc::vec![
            Bracket { i: 0, j: 1, k: 2, c: 1.0 },
            Bracket { i: 0, j: 2, k: 3, c: 1.0 },
            Bracket { i: 0, j: 3, k: 4, c: 1.0 },
        ];
        let g = Group::custom(alloc::vec![2, 1, 1, 1], brackets).unwrap();
        let p = g.identity();
        assert!(matches!(
            g.bch_multiply_from_structure(&p, &p),
            Err(Error::UnsupportedGroup(_))
        ));
    }

    #[test]
    fn custom_rejects_ungraded_bracket() {
        let bad = alloc::vec![Bracket { i: 0, j: 1, k: 1, c: 1.0 }];
        assert!(Group::custom(alloc::vec![2, 1], bad).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let g = h1();
        let p = Point::zeros(2);
        assert!(matches!(g.multiply(&p, &p), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn names_parse() {
        assert_eq!(Group::from_name("heisenberg:2").unwrap().dim(), 5);
        assert_eq!(Group::from_name("euclidean:2").unwrap().step(), 1);
        assert_eq!(Group::from_name("engel").unwrap().strata(), &[2, 1, 1]);
        assert!(Group::from_name("nilpotent").is_err());
        assert!(Group::from_name("heisenberg").is_err());
    }
}
