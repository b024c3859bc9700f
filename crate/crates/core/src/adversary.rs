//! Player II's constructive answer to a Player I control.
//!
//! Given Player I's `(η, X)` and a reference pair `(η̂, X̂)` with
//! `‖η̂‖, ‖X̂‖ ≤ R0`, [`adversary_response`] builds a horizontal move
//! `q̄ = (ν̄, 0)`, `|q̄|_𝔾 ≤ ε^{-1/4}`, such that for small `ε`
//!
//! ```text
//! R^ε(q̄, η, X) ≥ R^{*,ε}(q̄, η̂, X̂) − ε² h_K(ε^{1/4})     if ‖η̂‖ ≥ 1/K
//! R^ε(q̄, η, X) ≥ R^{*,ε}(q̄, 0, X̂)                       if ‖η̂‖ < 1/K
//! ```
//!
//! The move is `ν̄ = s₀ ξ₀ + s_{j₀} ξ_{j₀}` in the eigenbasis of `X̂ − X`
//! (`ξ₀` for the top eigenvalue). Magnitudes come from
//! `{0, λ1 ε^{1/4}, λ1}` depending on how far `η` is from `η̂`, how much of
//! `η̂ − η` lies along `ξ₀`, and the sign of the top eigenvalue; signs make
//! the first-order terms `⟨η̂ − η, ν̄⟩` nonnegative.

use crate::linalg::{HorizontalVector, SymMatrix};
use crate::math;

/// Size of the fixed perturbation applied to degenerate inputs
/// (`η = η̂`, `η = 0` or `X = X̂`).
pub const DEGENERACY_PERTURBATION: f64 = 1e-10;

/// Constants the construction depends on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdversaryParams {
    /// Ellipticity constant of the operator.
    pub lambda1: f64,
    /// Gradient threshold: the reference gradient counts as large when
    /// `‖η̂‖ ≥ 1/K`.
    pub k: f64,
    /// Bound on `‖η̂‖` and `‖X̂‖`.
    pub r0: f64,
}

/// Distance of `η` from the reference gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GradientGap {
    /// `‖η̂ − η‖ ≤ ε^{1/4}`.
    Near,
    /// `‖η̂ − η‖ > ε^{1/4}` and `|⟨η̂ − η, ξ₀⟩| ≥ ε^{1/2}/λ1`.
    FarAligned,
    /// `‖η̂ − η‖ > ε^{1/4}` and `|⟨η̂ − η, ξ₀⟩| < ε^{1/2}/λ1`.
    FarTransverse,
}

/// Which branch of the case analysis produced a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AdversaryBranch {
    /// `‖η̂‖ ≥ 1/K`.
    pub large_gradient: bool,
    pub gap: GradientGap,
    /// Top eigenvalue of `X̂ − X` is positive.
    pub top_positive: bool,
}

impl AdversaryBranch {
    pub const COUNT: usize = 12;

    /// Dense index in `0..COUNT`.
    pub fn index(&self) -> usize {
        let g = match self.gap {
            GradientGap::Near => 0,
            GradientGap::FarAligned => 1,
            GradientGap::FarTransverse => 2,
        };
        (self.large_gradient as usize) * 6 + g * 2 + self.top_positive as usize
    }

    pub fn from_index(i: usize) -> Self {
        let gap = match (i % 6) / 2 {
            0 => GradientGap::Near,
            1 => GradientGap::FarAligned,
            _ => GradientGap::FarTransverse,
        };
        Self { large_gradient: i >= 6, gap, top_positive: i % 2 == 1 }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// The constructive move `q̄ = (ν̄, 0)`; see the module docs.
pub fn adversary_response(
    epsilon: f64,
    eta: &HorizontalVector,
    eta_hat: &HorizontalVector,
    x: &SymMatrix,
    x_hat: &SymMatrix,
    params: &AdversaryParams,
) -> HorizontalVector {
    adversary_response_with_branch(epsilon, eta, eta_hat, x, x_hat, params).0
}

/// [`adversary_response`] together with the branch that was taken.
pub fn adversary_response_with_branch(
    epsilon: f64,
    eta: &HorizontalVector,
    eta_hat: &HorizontalVector,
    x: &SymMatrix,
    x_hat: &SymMatrix,
    params: &AdversaryParams,
) -> (HorizontalVector, AdversaryBranch) {
    let m = eta.dim();
    let lambda1 = params.lambda1;
    let eps_q = math::sqrt(math::sqrt(epsilon));
    let eps_h = math::sqrt(epsilon);

    let large_gradient = eta_hat.norm() >= 1.0 / params.k;
    let reference = if large_gradient { *eta_hat } else { HorizontalVector::zeros(m) };

    let mut eta = *eta;
    if eta.is_zero() || eta == reference {
        eta[0] += DEGENERACY_PERTURBATION;
    }
    let mut x = *x;
    if x == *x_hat {
        x = x.add(&SymMatrix::scalar(m, DEGENERACY_PERTURBATION));
    }

    let eig = x_hat.sub(&x).eigen();
    let top = eig.values[0];
    let xi0 = eig.vectors[0];
    let top_positive = top > 0.0;

    let d = reference.sub(&eta);
    let gap_norm = d.norm();
    let along = d.dot(&xi0);

    let (gap, nu) = if gap_norm <= eps_q {
        let nu = if top_positive { xi0.scaled(sign(along) * lambda1) } else { HorizontalVector::zeros(m) };
        (GradientGap::Near, nu)
    } else if along.abs() >= eps_h / lambda1 || m == 1 {
        let mag = if top_positive { lambda1 } else { eps_q * lambda1 };
        (GradientGap::FarAligned, xi0.scaled(sign(along) * mag))
    } else {
        let mut j0 = 1;
        let mut best = f64::NEG_INFINITY;
        for j in 1..m {
            let r = d.dot(&eig.vectors[j]).abs();
            if r > best {
                best = r;
                j0 = j;
            }
        }
        let xj = eig.vectors[j0];
        let mut nu = xj.scaled(sign(d.dot(&xj)) * lambda1 * eps_q);
        if top_positive {
            nu = nu.add(&xi0.scaled(sign(along) * lambda1));
        }
        (GradientGap::FarTransverse, nu)
    };

    let bound = 1.0 / eps_q;
    let l1 = nu.norm_l1();
    let nu = if l1 > bound { nu.scaled(bound / l1) } else { nu };
    (nu, AdversaryBranch { large_gradient, gap, top_positive })
}

/// A sufficient `ε₁` below which every estimate of the construction holds
/// for an operator with constants `(λ1, C)` in horizontal dimension `m1`,
/// where `C` bounds `|F| ≤ C(1 + ‖X‖)`.
pub fn proven_threshold(params: &AdversaryParams, m1: usize, growth: f64) -> f64 {
    let ok = |eps: f64| -> bool {
        let q = math::sqrt(math::sqrt(eps));
        let h = math::sqrt(eps);
        let l1 = params.lambda1;
        let lower = 2.0 * growth * (1.0 + params.r0);
        let mdiv = if m1 > 1 { 2.0 * (m1 as f64 - 1.0) } else { 2.0 };
        q <= 1.0 / (2.0 * params.k)
            && h / (l1 * l1) < 0.5
            && 1.0 / q - l1 * l1 - lower >= 0.0
            && l1 / h / mdiv - 0.5 * l1 * l1 * (h * params.r0 + 1.0) - lower >= 0.0
            && l1 * (1.0 + q) * math::sqrt(m1 as f64) <= 1.0 / q
    };
    // every condition is monotone in ε
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if ok(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> AdversaryParams {
        AdversaryParams { lambda1: math::sqrt(2.0), k: 2.0, r0: 1.0 }
    }

    #[test]
    fn branch_index_round_trips() {
        for i in 0..AdversaryBranch::COUNT {
            assert_eq!(AdversaryBranch::from_index(i).index(), i);
        }
    }

    #[test]
    fn near_and_nonpositive_top_gives_zero_move() {
        let eps = 1e-3;
        let eta_hat = HorizontalVector::from_slice(&[1.0, 0.0]);
        let eta = HorizontalVector::from_slice(&[1.0 + 0.5 * math::powf(eps, 0.25), 0.0]);
        let x_hat = SymMatrix::diag(&[0.5, -0.5]);
        let x = SymMatrix::diag(&[1.0, 0.0]);
        let (nu, br) = adversary_response_with_branch(eps, &eta, &eta_hat, &x, &x_hat, &params());
        assert_eq!(br.gap, GradientGap::Near);
        assert!(!br.top_positive);
        assert!(nu.is_zero());
    }

    #[test]
    fn near_and_positive_top_moves_along_top_eigenvector() {
        let eps = 1e-3;
        let eta_hat = HorizontalVector::from_slice(&[1.0, 0.0]);
        let eta = HorizontalVector::from_slice(&[1.0, -0.01]);
        let x = SymMatrix::diag(&[-1.0, 0.0]);
        let x_hat = SymMatrix::zeros(2);
        let (nu, br) = adversary_response_with_branch(eps, &eta, &eta_hat, &x, &x_hat, &params());
        assert_eq!(br.gap, GradientGap::Near);
        assert!(br.top_positive);
        assert!((nu.norm() - math::sqrt(2.0)).abs() < 1e-12);
        assert!(nu[1].abs() < 1e-12);
    }

    #[test]
    fn signs_make_first_order_term_nonnegative() {
        let eps = 1e-4;
        let eta_hat = HorizontalVector::from_slice(&[0.8, 0.3]);
        let x_hat = SymMatrix::diag(&[0.2, -0.4]);
        for (e, xm) in [
            ([0.1, -2.0], SymMatrix::diag(&[3.0, -2.0])),
            ([-1.5, 0.2], SymMatrix::diag(&[-3.0, 1.0])),
            ([2.0, 2.0], SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])),
        ] {
            let eta = HorizontalVector::from_slice(&e);
            let nu = adversary_response(eps, &eta, &eta_hat, &xm, &x_hat, &params());
            assert!(eta_hat.sub(&eta).dot(&nu) >= 0.0);
            assert!(nu.norm_l1() <= math::powf(eps, -0.25) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn degenerate_inputs_are_handled() {
        let eta = HorizontalVector::from_slice(&[0.5, 0.5]);
        let x = SymMatrix::identity(2);
        let nu = adversary_response(1e-3, &eta, &eta, &x, &x, &params());
        assert!(nu.is_finite());
        let zero = HorizontalVector::zeros(2);
        let nu = adversary_response(1e-3, &zero, &zero, &x, &SymMatrix::zeros(2), &params());
        assert!(nu.is_finite());
    }

    #[test]
    fn threshold_is_positive_and_monotone_in_r0() {
        let mut p = params();
        let a = proven_threshold(&p, 2, 2.0);
        p.r0 = 5.0;
        let b = proven_threshold(&p, 2, 2.0);
        assert!(a > 0.0 && b > 0.0 && b <= a);
    }
}
