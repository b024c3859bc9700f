//! Random and deterministic samplers for vectors, matrices and points.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Point;
use crate::linalg::{HorizontalVector, SymMatrix};
use crate::math;

/// Standard normal via Box–Muller.
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * PI * u2)
}

/// Uniform direction on the unit sphere of `ℝ^m`.
pub fn unit_vector<R: Rng>(rng: &mut R, m: usize) -> HorizontalVector {
    loop {
        let mut v = HorizontalVector::zeros(m);
        for i in 0..m {
            v[i] = gaussian(rng);
        }
        let n = v.norm();
        if n > 1e-12 {
            return v.scaled(1.0 / n);
        }
    }
}

pub fn vector_with_norm<R: Rng>(rng: &mut R, m: usize, norm: f64) -> HorizontalVector {
    unit_vector(rng, m).scaled(norm)
}

/// Nonzero vector with norm log-uniform around `scale`.
pub fn nonzero_vector<R: Rng>(rng: &mut R, m: usize, scale: f64) -> HorizontalVector {
    let norm = scale * math::powf(10.0, rng.gen_range(-1.0..1.0));
    vector_with_norm(rng, m, norm)
}

/// Symmetric matrix with entries uniform in `[-scale, scale]`.
pub fn sym_matrix<R: Rng>(rng: &mut R, m: usize, scale: f64) -> SymMatrix {
    let mut x = SymMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            x.set(i, j, rng.gen_range(-scale..=scale));
        }
    }
    x
}

/// Symmetric matrix `Q diag(λ) Qᵀ` with a random orthonormal `Q` and the
/// given eigenvalues.
pub fn sym_with_eigenvalues<R: Rng>(rng: &mut R, eigenvalues: &[f64]) -> SymMatrix {
    let m = eigenvalues.len();
    let basis = random_orthonormal(rng, m);
    let mut x = SymMatrix::zeros(m);
    for (lam, q) in eigenvalues.iter().zip(&basis) {
        x = x.add(&SymMatrix::outer(q).scaled(*lam));
    }
    x
}

/// Symmetric matrix with spectral norm at most `bound` (eigenvalues uniform
/// in `[-bound, bound]`).
pub fn sym_in_ball<R: Rng>(rng: &mut R, m: usize, bound: f64) -> SymMatrix {
    let eig: Vec<f64> = (0..m).map(|_| rng.gen_range(-bound..=bound)).collect();
    sym_with_eigenvalues(rng, &eig)
}

/// Gram–Schmidt on Gaussian vectors.
pub fn random_orthonormal<R: Rng>(rng: &mut R, m: usize) -> Vec<HorizontalVector> {
    let mut out: Vec<HorizontalVector> = Vec::with_capacity(m);
    while out.len() < m {
        let mut v = unit_vector(rng, m);
        for q in &out {
            let c = v.dot(q);
            v = v.sub(&q.scaled(c));
        }
        let n = v.norm();
        if n > 1e-8 {
            out.push(v.scaled(1.0 / n));
        }
    }
    out
}

/// Deterministic set of `n` unit directions in `ℝ^m`.
///
/// `m = 1` gives `±1`; `m = 2` gives equally spaced angles starting on the
/// first axis; higher dimensions use the `±` coordinate axes first and then
/// a fixed-seed pseudo-random fill.
pub fn sphere_directions(m: usize, n: usize) -> Vec<HorizontalVector> {
    match m {
        0 => Vec::new(),
        1 => {
            let mut v = alloc::vec![HorizontalVector::from_slice(&[1.0])];
            if n > 1 {
                v.push(HorizontalVector::from_slice(&[-1.0]));
            }
            v
        }
        2 => (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                HorizontalVector::from_slice(&[math::cos(a), math::sin(a)])
            })
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(n);
            for i in 0..m {
                for s in [1.0, -1.0] {
                    if out.len() < n {
                        out.push(HorizontalVector::axis(m, i).scaled(s));
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1c7 ^ m as u64);
            while out.len() < n {
                out.push(unit_vector(&mut rng, m));
            }
            out
        }
    }
}

/// Point with coordinates uniform in `[lo_i, hi_i]`.
pub fn point_in_box<R: Rng>(rng: &mut R, lo: &[f64], hi: &[f64]) -> Point {
    let mut p = Point::zeros(lo.len());
    for i in 0..lo.len() {
        p[i] = rng.gen_range(lo[i]..=hi[i]);
    }
    p
}

/// Point with coordinates uniform in `[-r, r]`.
pub fn point_in_cube<R: Rng>(rng: &mut R, dim: usize, r: f64) -> Point {
    let mut p = Point::zeros(dim);
    for i in 0..dim {
        p[i] = rng.gen_range(-r..=r);
    }
    p
}
