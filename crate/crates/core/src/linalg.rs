//! Small dense vectors and symmetric matrices on the horizontal layer.
//!
//! Everything here is stack allocated: the horizontal dimension `m1` of the
//! shipped groups is at most [`MAX_HORIZONTAL`], and the game engine builds
//! thousands of these per grid node.

use core::fmt;

use crate::math;

/// Largest supported horizontal dimension `m1`.
pub const MAX_HORIZONTAL: usize = 8;

const PACKED: usize = MAX_HORIZONTAL * (MAX_HORIZONTAL + 1) / 2;

/// Coefficients of a horizontal vector in the frame `X_1, …, X_{m1}`.
#[derive(Clone, Copy, PartialEq)]
pub struct HorizontalVector {
    comps: [f64; MAX_HORIZONTAL],
    len: usize,
}

impl HorizontalVector {
    pub fn zeros(m1: usize) -> Self {
        assert!(m1 <= MAX_HORIZONTAL, "horizontal dimension {m1} exceeds {MAX_HORIZONTAL}");
        Self { comps: [0.0; MAX_HORIZONTAL], len: m1 }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let mut out = Self::zeros(v.len());
        out.comps[..v.len()].copy_from_slice(v);
        out
    }

    /// Unit vector along axis `i`.
    pub fn axis(m1: usize, i: usize) -> Self {
        let mut out = Self::zeros(m1);
        out.comps[i] = 1.0;
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.comps[..self.len]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.comps[..self.len]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len, other.len);
        let mut s = 0.0;
        for i in 0..self.len {
            s += self.comps[i] * other.comps[i];
        }
        s
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        math::sqrt(self.dot(self))
    }

    /// ℓ1 norm; equals the Carnot gauge of the horizontal point `(ν, 0)`.
    #[inline]
    pub fn norm_l1(&self) -> f64 {
        self.as_slice().iter().map(|c| c.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        out.as_mut_slice().iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..self.len {
            out.comps[i] += other.comps[i];
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..self.len {
            out.comps[i] -= other.comps[i];
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.as_slice().iter().all(|&c| c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }
}

impl core::ops::Index<usize> for HorizontalVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl core::ops::IndexMut<usize> for HorizontalVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl fmt::Debug for HorizontalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

/// Symmetric `m1 × m1` matrix stored as its packed upper triangle.
#[derive(Clone, Copy, PartialEq)]
pub struct SymMatrix {
    upper: [f64; PACKED],
    m: usize,
}

#[inline]
fn packed_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // row i starts at i*m - i(i-1)/2
    i * m - (i * i - i) / 2 + (j - i)
}

impl SymMatrix {
    pub fn zeros(m: usize) -> Self {
        assert!(m <= MAX_HORIZONTAL, "horizontal dimension {m} exceeds {MAX_HORIZONTAL}");
        Self { upper: [0.0; PACKED], m }
    }

    pub fn identity(m: usize) -> Self {
        Self::scalar(m, 1.0)
    }

    pub fn scalar(m: usize, a: f64) -> Self {
        let mut out = Self::zeros(m);
        for i in 0..m {
            out.set(i, i, a);
        }
        out
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut out = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            out.set(i, i, v);
        }
        out
    }

    /// Builds from a full row-major matrix; only the upper triangle is read.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in i..m {
                out.set(i, j, rows[i][j]);
            }
        }
        out
    }

    /// `v ⊗ v`.
    pub fn outer(v: &HorizontalVector) -> Self {
        let m = v.dim();
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in i..m {
                out.set(i, j, v[i] * v[j]);
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed_index(self.m, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.m, i, j);
        self.upper[k] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.m).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &HorizontalVector) -> HorizontalVector {
        let mut out = HorizontalVector::zeros(self.m);
        for i in 0..self.m {
            let mut s = 0.0;
            for j in 0..self.m {
                s += self.get(i, j) * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// `⟨X v, v⟩`.
    #[inline]
    pub fn quad_form(&self, v: &HorizontalVector) -> f64 {
        let mut s = 0.0;
        for i in 0..self.m {
            let vi = v[i];
            s += self.get(i, i) * vi * vi;
            for j in (i + 1)..self.m {
                s += 2.0 * self.get(i, j) * vi * v[j];
            }
        }
        s
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        out.upper.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.m, other.m);
        let mut out = *self;
        for (a, b) in out.upper.iter_mut().zip(other.upper.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.m, other.m);
        let mut out = *self;
        for (a, b) in out.upper.iter_mut().zip(other.upper.iter()) {
            *a -= b;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|&c| c == 0.0)
    }

    /// Eigenvalues in descending order with matching orthonormal eigenvectors.
    pub fn eigen(&self) -> Eigen {
        jacobi_eigen(self)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen().values[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().values[self.m - 1]
    }

    /// Spectral norm `max |λ_i|`.
    pub fn spectral_norm(&self) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let e = self.eigen();
        e.values[0].abs().max(e.values[self.m - 1].abs())
    }

    /// `max(0, λ_max)`.
    pub fn positive_top(&self) -> f64 {
        self.max_eigenvalue().max(0.0)
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for i in 0..self.m {
            let mut row = [0.0; MAX_HORIZONTAL];
            for (j, r) in row.iter_mut().enumerate().take(self.m) {
                *r = self.get(i, j);
            }
            l.entry(&&row[..self.m]);
        }
        l.finish()
    }
}

/// Spectral decomposition of a [`SymMatrix`].
#[derive(Clone, Copy, Debug)]
pub struct Eigen {
    /// Descending.
    pub values: [f64; MAX_HORIZONTAL],
    pub vectors: [HorizontalVector; MAX_HORIZONTAL],
    pub dim: usize,
}

impl Eigen {
    pub fn values(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn vectors(&self) -> &[HorizontalVector] {
        &self.vectors[..self.dim]
    }
}

fn jacobi_eigen(x: &SymMatrix) -> Eigen {
    let m = x.dim();
    let mut a = [[0.0f64; MAX_HORIZONTAL]; MAX_HORIZONTAL];
    let mut v = [[0.0f64; MAX_HORIZONTAL]; MAX_HORIZONTAL];
    for i in 0..m {
        v[i][i] = 1.0;
        for j in 0..m {
            a[i][j] = x.get(i, j);
        }
    }

    let scale: f64 = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j] * a[i][j])
        .sum::<f64>();
    let tol = 1e-30 * scale.max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut().take(m) {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order = [0usize; MAX_HORIZONTAL];
    for (i, o) in order.iter_mut().enumerate().take(m) {
        *o = i;
    }
    // insertion sort, descending; m is tiny
    for i in 1..m {
        let mut k = i;
        while k > 0 && a[order[k - 1]][order[k - 1]] < a[order[k]][order[k]] {
            order.swap(k - 1, k);
            k -= 1;
        }
    }

    let mut out = Eigen {
        values: [0.0; MAX_HORIZONTAL],
        vectors: [HorizontalVector::zeros(m); MAX_HORIZONTAL],
        dim: m,
    };
    for (slot, &col) in order.iter().enumerate().take(m) {
        out.values[slot] = a[col][col];
        let mut vec = HorizontalVector::zeros(m);
        for (k, row) in v.iter().enumerate().take(m) {
            vec[k] = row[col];
        }
        out.vectors[slot] = vec;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_storage_is_symmetric() {
        let mut x = SymMatrix::zeros(3);
        x.set(0, 2, 5.0);
        assert_eq!(x.get(2, 0), 5.0);
        x.set(2, 1, -1.0);
        assert_eq!(x.get(1, 2), -1.0);
        let mut seen = [false; PACKED];
        for i in 0..4 {
            for j in i..4 {
                let k = packed_index(4, i, j);
                assert!(!seen[k], "collision at ({i},{j})");
                seen[k] = true;
            }
        }
    }

    #[test]
    fn eigen_diag() {
        let e = SymMatrix::diag(&[2.0, 4.0]).eigen();
        assert_eq!(e.values(), &[4.0, 2.0]);
        assert!((e.vectors[0][1].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_reconstructs() {
        let x = SymMatrix::from_rows(&[&[1.0, 2.0, -0.5], &[2.0, -3.0, 0.25], &[-0.5, 0.25, 0.7]]);
        let e = x.eigen();
        for (lam, v) in e.values().iter().zip(e.vectors()) {
            let xv = x.mul_vec(v);
            for i in 0..3 {
                assert!((xv[i] - lam * v[i]).abs() < 1e-12);
            }
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
    }

    #[test]
    fn quad_form_matches_mul_vec() {
        let x = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, -3.0]]);
        let v = HorizontalVector::from_slice(&[0.3, -1.2]);
        assert!((x.quad_form(&v) - x.mul_vec(&v).dot(&v)).abs() < 1e-15);
    }
}
