//! Singular operators `F(t, p, η, X)` and their envelopes at `η = 0`.
//!
//! Shipped operators:
//!
//! * horizontal mean curvature flow, `F = -tr[(I - η̂⊗η̂) X]`;
//! * normalized parabolic infinity Laplacian, `F = -⟨X η̂, η̂⟩`;
//!
//! where `η̂ = η/‖η‖`. Both are independent of `(t, p)`, positively
//! 0-homogeneous in `η`, and degenerate elliptic.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::algebra::Point;
use crate::error::{Error, Result};
use crate::linalg::{HorizontalVector, SymMatrix};
use crate::math;
use crate::sampling;

/// Which semicontinuous envelope to use at `η = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    /// `F_*`
    Lower,
    /// `F^*`
    Upper,
}

/// Constants from the structural assumptions on `F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssumptionConstants {
    /// `sup_η |F(t, p, η, O)|`.
    pub lambda0: f64,
    /// Ellipticity constant: `F(X) - F(X̂) ≤ (λ1²/2) E⁺(X̂ - X)`.
    pub lambda1: f64,
    /// `C` in `ω_{r,R}(s) = C·R·s/r`.
    pub omega_coeff: f64,
}

impl AssumptionConstants {
    /// `ω_{r,R}(s)`: modulus of continuity in `η` on `‖η‖ ≥ r`, `‖X‖ ≤ R`.
    pub fn omega(&self, r: f64, big_r: f64, s: f64) -> f64 {
        self.omega_coeff * big_r * s / r
    }

    /// Linear growth bound `|F| ≤ C (1 + ‖X‖)` with `C = λ1² m1 / 2 + λ0`.
    pub fn growth_constant(&self, m1: usize) -> f64 {
        self.lambda1 * self.lambda1 * m1 as f64 / 2.0 + self.lambda0
    }
}

/// A user supplied operator. Implementors are responsible for the
/// structural assumptions; [`OperatorDescriptor::check_assumptions`] only
/// spot-checks them.
pub trait CustomOperator: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, t: f64, p: &Point, eta: &HorizontalVector, x: &SymMatrix) -> f64;
    fn envelope(&self, t: f64, p: &Point, x: &SymMatrix, which: Envelope) -> f64;
    fn constants(&self) -> AssumptionConstants;
}

#[derive(Clone)]
pub enum OperatorKind {
    Mcf,
    Pil,
    Custom(Arc<dyn CustomOperator>),
}

impl fmt::Debug for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Mcf => write!(f, "Mcf"),
            OperatorKind::Pil => write!(f, "Pil"),
            OperatorKind::Custom(c) => write!(f, "Custom({})", c.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorDescriptor {
    kind: OperatorKind,
    m1: usize,
    constants: AssumptionConstants,
}

/// Default `C` in `ω_{r,R}(s) = C·R·s/r` for the shipped operators is
/// `4·m1`; [`OperatorDescriptor::check_assumptions`] validates it.
const OMEGA_PER_DIM: f64 = 4.0;

impl OperatorDescriptor {
    pub fn mcf(m1: usize) -> Result<Self> {
        if m1 < 2 {
            return Err(Error::Config(
                "mean curvature flow needs a horizontal dimension of at least 2".into(),
            ));
        }
        Ok(Self {
            kind: OperatorKind::Mcf,
            m1,
            constants: AssumptionConstants {
                lambda0: 0.0,
                lambda1: math::sqrt(2.0 * (m1 as f64 - 1.0)),
                omega_coeff: OMEGA_PER_DIM * m1 as f64,
            },
        })
    }

    pub fn pil(m1: usize) -> Result<Self> {
        if m1 == 0 {
            return Err(Error::Config("horizontal dimension must be positive".into()));
        }
        Ok(Self {
            kind: OperatorKind::Pil,
            m1,
            constants: AssumptionConstants {
                lambda0: 0.0,
                lambda1: math::sqrt(2.0),
                omega_coeff: OMEGA_PER_DIM * m1 as f64,
            },
        })
    }

    pub fn custom(op: Arc<dyn CustomOperator>, m1: usize) -> Self {
        let constants = op.constants();
        Self { kind: OperatorKind::Custom(op), m1, constants }
    }

    /// `"mcf"` or `"pil"`.
    pub fn from_name(name: &str, m1: usize) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "mcf" => Self::mcf(m1),
            "pil" => Self::pil(m1),
            other => Err(Error::Config(format!("unknown operator `{other}`"))),
        }
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            OperatorKind::Mcf => "mcf",
            OperatorKind::Pil => "pil",
            OperatorKind::Custom(c) => c.name(),
        }
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn assumption_constants(&self) -> AssumptionConstants {
        self.constants
    }

    /// `F(t, p, η, X)` for `η ≠ 0`.
    pub fn evaluate(&self, t: f64, p: &Point, eta: &HorizontalVector, x: &SymMatrix) -> Result<f64> {
        if eta.dim() != self.m1 || x.dim() != self.m1 {
            return Err(Error::DimensionMismatch { expected: self.m1, got: eta.dim() });
        }
        if eta.is_zero() {
            return Err(Error::Contract("F is singular at η = 0; use the envelopes".into()));
        }
        Ok(self.eval_nonzero(t, p, eta, x))
    }

    #[inline]
    pub(crate) fn eval_nonzero(&self, t: f64, p: &Point, eta: &HorizontalVector, x: &SymMatrix) -> f64 {
        match &self.kind {
            OperatorKind::Mcf => {
                let nn = eta.dot(eta);
                -(x.trace() - x.quad_form(eta) / nn)
            }
            OperatorKind::Pil => {
                let nn = eta.dot(eta);
                -x.quad_form(eta) / nn
            }
            OperatorKind::Custom(c) => c.evaluate(t, p, eta, x),
        }
    }

    /// `F_*(t, p, 0, X)` or `F^*(t, p, 0, X)`.
    pub fn envelope_at_zero(&self, t: f64, p: &Point, x: &SymMatrix, which: Envelope) -> f64 {
        match &self.kind {
            OperatorKind::Mcf => {
                let e = x.eigen();
                let lam = match which {
                    Envelope::Lower => e.values[self.m1 - 1],
                    Envelope::Upper => e.values[0],
                };
                -x.trace() + lam
            }
            OperatorKind::Pil => {
                let e = x.eigen();
                match which {
                    Envelope::Lower => -e.values[0],
                    Envelope::Upper => -e.values[self.m1 - 1],
                }
            }
            OperatorKind::Custom(c) => c.envelope(t, p, x, which),
        }
    }

    pub fn lower_envelope_at_zero(&self, t: f64, p: &Point, x: &SymMatrix) -> f64 {
        self.envelope_at_zero(t, p, x, Envelope::Lower)
    }

    pub fn upper_envelope_at_zero(&self, t: f64, p: &Point, x: &SymMatrix) -> f64 {
        self.envelope_at_zero(t, p, x, Envelope::Upper)
    }

    /// `F^*(t, p, η, X)`: equals `F` away from zero, the upper envelope at it.
    pub fn upper_semicontinuous(&self, t: f64, p: &Point, eta: &HorizontalVector, x: &SymMatrix) -> f64 {
        if eta.is_zero() {
            self.upper_envelope_at_zero(t, p, x)
        } else {
            self.eval_nonzero(t, p, eta, x)
        }
    }

    /// Random sweep of the ellipticity inequality and the `η`-modulus with
    /// this descriptor's constants.
    pub fn check_assumptions<R: Rng>(&self, n_samples: usize, rng: &mut R) -> AssumptionReport {
        assert!(n_samples >= 1, "need at least one sample");
        let m = self.m1;
        let c = self.constants;
        let p = Point::zeros(m);
        let mut report = AssumptionReport { samples: n_samples, ..Default::default() };

        for _ in 0..n_samples {
            let scale = math::powf(10.0, rng.gen_range(-2.0..2.0));
            let eta = sampling::nonzero_vector(rng, m, scale);
            let x = sampling::sym_matrix(rng, m, scale);
            let x_hat = sampling::sym_matrix(rng, m, scale);

            // F(η, X) − F(η, X̂) ≤ (λ1²/2) E⁺(X̂ − X)
            let lhs = self.eval_nonzero(0.0, &p, &eta, &x) - self.eval_nonzero(0.0, &p, &eta, &x_hat);
            let rhs = c.lambda1 * c.lambda1 / 2.0 * x_hat.sub(&x).positive_top();
            record(&mut report.ellipticity, lhs, rhs, 1e-12 * (1.0 + rhs.abs()));

            // F(η̂, X) − F(η, X) ≤ ω_{r,R}(‖η̂ − η‖) on ‖η‖, ‖η̂‖ ≥ r, ‖X‖ ≤ R
            let r = math::powf(10.0, rng.gen_range(-2.0..1.0));
            let na = r * rng.gen_range(1.0..3.0);
            let eta_a = sampling::vector_with_norm(rng, m, na);
            let eta_b = if rng.gen_bool(0.5) {
                let nb = r * rng.gen_range(0.0..0.5);
                let mut v = eta_a.add(&sampling::vector_with_norm(rng, m, nb));
                if v.norm() < r {
                    v = v.scaled(r / v.norm());
                }
                v
            } else {
                let nb = r * rng.gen_range(1.0..3.0);
                sampling::vector_with_norm(rng, m, nb)
            };
            let big_r = x.spectral_norm();
            let lhs = self.eval_nonzero(0.0, &p, &eta_b, &x) - self.eval_nonzero(0.0, &p, &eta_a, &x);
            let rhs = c.omega(r, big_r, eta_b.sub(&eta_a).norm());
            record(&mut report.eta_modulus, lhs, rhs, 1e-12 * (1.0 + big_r));
        }
        report
    }
}

fn record(stat: &mut InequalityStat, lhs: f64, rhs: f64, tol: f64) {
    stat.checked += 1;
    if lhs > rhs + tol {
        stat.violations += 1;
        if stat.witness.is_none() {
            stat.witness = Some((lhs, rhs));
        }
    }
    if rhs > 0.0 {
        stat.max_ratio = stat.max_ratio.max(lhs / rhs);
    }
}

/// Outcome of one inequality sweep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InequalityStat {
    pub checked: usize,
    pub violations: usize,
    /// Largest observed `lhs / rhs` over samples with `rhs > 0`.
    pub max_ratio: f64,
    /// First violating `(lhs, rhs)`.
    pub witness: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssumptionReport {
    pub samples: usize,
    pub ellipticity: InequalityStat,
    pub eta_modulus: InequalityStat,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.ellipticity.violations == 0 && self.eta_modulus.violations == 0
    }
}

/// Brute-force envelopes: min and max of `F(η, X)` over `n` unit directions.
/// Independent of the eigenvalue formulas used by the operators.
pub fn envelope_by_sweep(op: &OperatorDescriptor, x: &SymMatrix, n: usize) -> (f64, f64) {
    let p = Point::zeros(op.m1());
    let dirs: Vec<HorizontalVector> = sampling::sphere_directions(op.m1(), n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in &dirs {
        let v = op.eval_nonzero(0.0, &p, d, x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn origin() -> Point {
        Point::zeros(2)
    }

    #[test]
    fn evaluate_examples() {
        let x = SymMatrix::diag(&[2.0, 4.0]);
        let e1 = HorizontalVector::from_slice(&[1.0, 0.0]);
        let mcf = OperatorDescriptor::mcf(2).unwrap();
        let pil = OperatorDescriptor::pil(2).unwrap();
        assert_eq!(mcf.evaluate(0.0, &origin(), &e1, &x).unwrap(), -4.0);
        assert_eq!(pil.evaluate(0.0, &origin(), &e1, &x).unwrap(), -2.0);
        let any = HorizontalVector::from_slice(&[0.3, -2.0]);
        assert_eq!(mcf.evaluate(0.0, &origin(), &any, &SymMatrix::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn zero_gradient_is_rejected() {
        let mcf = OperatorDescriptor::mcf(2).unwrap();
        let r = mcf.evaluate(0.0, &origin(), &HorizontalVector::zeros(2), &SymMatrix::identity(2));
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn envelope_examples() {
        let x = SymMatrix::diag(&[2.0, 4.0]);
        let mcf = OperatorDescriptor::mcf(2).unwrap();
        let pil = OperatorDescriptor::pil(2).unwrap();
        assert_eq!(mcf.lower_envelope_at_zero(0.0, &origin(), &x), -4.0);
        assert_eq!(mcf.upper_envelope_at_zero(0.0, &origin(), &x), -2.0);
        assert_eq!(pil.lower_envelope_at_zero(0.0, &origin(), &x), -4.0);
        assert_eq!(pil.upper_envelope_at_zero(0.0, &origin(), &x), -2.0);
        for op in [&mcf, &pil] {
            let o = SymMatrix::zeros(2);
            assert_eq!(op.lower_envelope_at_zero(0.0, &origin(), &o), 0.0);
            assert_eq!(op.upper_envelope_at_zero(0.0, &origin(), &o), 0.0);
        }
    }

    #[test]
    fn envelopes_match_direction_sweep() {
        let x = SymMatrix::diag(&[2.0, 4.0]);
        for op in [OperatorDescriptor::mcf(2).unwrap(), OperatorDescriptor::pil(2).unwrap()] {
            let (lo, hi) = envelope_by_sweep(&op, &x, 10_000);
            assert!((lo - op.lower_envelope_at_zero(0.0, &origin(), &x)).abs() < 1e-6);
            assert!((hi - op.upper_envelope_at_zero(0.0, &origin(), &x)).abs() < 1e-6);
        }
    }

    #[test]
    fn constants() {
        let mcf = OperatorDescriptor::mcf(2).unwrap().assumption_constants();
        assert!((mcf.lambda1 - 1.41421).abs() < 1e-5);
        assert_eq!(mcf.lambda0, 0.0);
        let pil = OperatorDescriptor::pil(3).unwrap().assumption_constants();
        assert_eq!(pil.lambda1, math::sqrt(2.0));
        assert_eq!(pil.lambda0, 0.0);
        assert!(OperatorDescriptor::mcf(1).is_err());
    }

    #[test]
    fn sweep_finds_no_violation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for op in [
            OperatorDescriptor::mcf(2).unwrap(),
            OperatorDescriptor::mcf(3).unwrap(),
            OperatorDescriptor::pil(2).unwrap(),
        ] {
            let rep = op.check_assumptions(5_000, &mut rng);
            assert!(rep.passed(), "{:?}: {rep:?}", op.kind());
        }
    }

    #[test]
    fn sweep_rejects_too_small_lambda1() {
        let mut op = OperatorDescriptor::mcf(3).unwrap();
        op.constants.lambda1 = 1.0;
        let rep = op.check_assumptions(5_000, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(rep.ellipticity.violations > 0);
        assert!(rep.ellipticity.witness.is_some());
    }

    #[test]
    fn equal_matrices_give_zero_lhs() {
        let mcf = OperatorDescriptor::mcf(2).unwrap();
        let x = SymMatrix::from_rows(&[&[1.0, 0.3], &[0.3, -2.0]]);
        let eta = HorizontalVector::from_slice(&[0.4, 0.9]);
        let lhs = mcf.evaluate(0.0, &origin(), &eta, &x).unwrap()
            - mcf.evaluate(0.0, &origin(), &eta, &x).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(x.sub(&x).positive_top(), 0.0);
    }
}
