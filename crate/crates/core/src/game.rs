//! The two-player game: control and move lattices, running cost, and the
//! dynamic programming step
//!
//! ```text
//! u^ε(t, p) = 1/(1+με²) · min_{(η,X)} sup_{q} [ u^ε(t−ε², p·δ_ε q) + R^ε(t, p, q, η, X) ]
//! R^ε = −ε⟨η, ν⟩ − (ε²/2)⟨Xν, ν⟩ − ε² F(t, p, η, X)
//! ```
//!
//! over `‖η‖ ≤ ε^{-1/4}`, `‖X‖ ≤ ε^{-1/2}`, `q = (ν, 0)`, `|q|_𝔾 ≤ ε^{-1/4}`.
//! A control with `η = 0` is the "zero sentinel" and is priced with the
//! upper envelope `F^*(t, p, 0, X)`.

use alloc::format;
use alloc::vec::Vec;

#[cfg(feature = "std")]
use rayon::prelude::*;

use crate::adversary::{adversary_response, AdversaryParams};
use crate::algebra::{Group, Point};
use crate::error::{Error, Result};
use crate::grid::{GridBox, ValueLayer};
use crate::linalg::{HorizontalVector, SymMatrix};
use crate::math;
use crate::operators::{Envelope, OperatorDescriptor};
use crate::sampling::sphere_directions;

/// A horizontal move `ν`; the group element played is `(ν, 0)`.
pub type Move = HorizontalVector;

/// How Player I's control set is built at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// A fixed dictionary of gradients and matrices.
    Generic,
    /// Jets of the previous layer read off at the node: a least-squares
    /// quadratic fit over the move stencil at `p` and at `p ± ε max|ν| e_i`,
    /// each with `±aI` perturbations, plus one-sided finite-difference jets
    /// from `p ± 2δ e_i`. All one-sided jets are transported back to `p`.
    Guided,
}

/// Player II's move set (always contains `ν = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveLattice {
    /// `n_dir` directions times `n_mag` equally spaced gauge radii up to
    /// `ε^{-1/4}`.
    Polar { n_dir: usize, n_mag: usize },
    /// Every `ν ∈ (h/ε)ℤ^{m1}` inside the gauge ball, so horizontal
    /// translates of a node land on grid planes.
    Grid,
}

/// Matrices offered by Player I: `aI + b η̂⊗η̂`. In the guided strategy the
/// `a` values are the perturbations `±aI` of the fitted Hessians.
#[derive(Clone, Debug, PartialEq)]
pub struct XDictionary {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Default for XDictionary {
    fn default() -> Self {
        Self { a: alloc::vec![-1.0, 0.0, 1.0], b: alloc::vec![-1.0, 0.0, 1.0] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameConfig {
    pub epsilon: f64,
    pub mu: f64,
    pub horizon: f64,
    pub strategy: Strategy,
    /// Gradient directions of the generic strategy.
    pub n_dir: usize,
    /// Gradient magnitudes of the generic strategy, geometric in
    /// `[eta_min, ε^{-1/4}]`.
    pub n_mag: usize,
    /// Gradients shorter than this are replaced by the zero sentinel.
    pub eta_min: f64,
    pub x_dict: XDictionary,
    pub moves: MoveLattice,
    /// Add Player II's constructive answer to every control's move set.
    pub adversary_moves: bool,
    /// Finite-difference step `δ` of the guided strategy; defaults to the
    /// smallest horizontal grid spacing.
    pub fd_step: Option<f64>,
}

impl GameConfig {
    pub fn new(epsilon: f64, horizon: f64) -> Self {
        Self {
            epsilon,
            mu: 0.0,
            horizon,
            strategy: Strategy::Guided,
            n_dir: 8,
            n_mag: 3,
            eta_min: 1e-6,
            x_dict: XDictionary::default(),
            moves: MoveLattice::Grid,
            adversary_moves: false,
            fd_step: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::Config(m));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return bad(format!("mu must be finite and nonnegative, got {}", self.mu));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be finite and nonnegative, got {}", self.horizon));
        }
        if self.n_dir == 0 || self.n_mag == 0 {
            return bad("n_dir and n_mag must be positive".into());
        }
        if let MoveLattice::Polar { n_dir, n_mag } = self.moves {
            if n_dir == 0 || n_mag == 0 {
                return bad("move lattice needs positive n_dir and n_mag".into());
            }
        }
        if !(self.eta_min > 0.0) {
            return bad("eta_min must be positive".into());
        }
        if self.x_dict.a.is_empty() || self.x_dict.b.is_empty() {
            return bad("matrix dictionary must be nonempty".into());
        }
        if self.x_dict.a.iter().chain(&self.x_dict.b).any(|v| !v.is_finite()) {
            return bad("matrix dictionary entries must be finite".into());
        }
        if let Some(d) = self.fd_step {
            if !(d > 0.0) {
                return bad("fd_step must be positive".into());
            }
        }
        Ok(())
    }

    /// Number of DPP steps `⌊T/ε²⌋`, with ratios within `1e-9` of an
    /// integer rounded to it.
    pub fn steps(&self) -> usize {
        let r = self.horizon / (self.epsilon * self.epsilon);
        let n = math::round(r);
        if (r - n).abs() <= 1e-9 * n.max(1.0) {
            n as usize
        } else {
            math::floor(r) as usize
        }
    }

    pub fn eta_bound(&self) -> f64 {
        1.0 / math::sqrt(math::sqrt(self.epsilon))
    }

    pub fn x_bound(&self) -> f64 {
        1.0 / math::sqrt(self.epsilon)
    }

    pub fn move_bound(&self) -> f64 {
        self.eta_bound()
    }

    #[inline]
    fn discount(&self, v: f64) -> f64 {
        v / (1.0 + self.mu * self.epsilon * self.epsilon)
    }
}

/// Player I's choice `(η, X)`; `η = 0` is the zero sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Control {
    pub eta: HorizontalVector,
    pub x: SymMatrix,
}

impl Control {
    pub fn new(eta: HorizontalVector, x: SymMatrix) -> Self {
        Self { eta, x }
    }

    pub fn zero_sentinel(x: SymMatrix) -> Self {
        Self { eta: HorizontalVector::zeros(x.dim()), x }
    }

    pub fn is_zero_sentinel(&self) -> bool {
        self.eta.is_zero()
    }
}

/// Counters accumulated over DPP steps.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    pub nodes: u64,
    /// Move samples that fell outside the box.
    pub off_box_samples: u64,
    /// Guided-strategy stencils that touched the outside of the box.
    pub off_box_stencils: u64,
    /// Node values clamped back into `[−‖ψ‖∞, ‖ψ‖∞]`.
    pub bound_clamps: u64,
    /// Largest amount by which a value exceeded the uniform bound.
    pub max_bound_excess: f64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.steps += other.steps;
        self.nodes += other.nodes;
        self.off_box_samples += other.off_box_samples;
        self.off_box_stencils += other.off_box_stencils;
        self.bound_clamps += other.bound_clamps;
        self.max_bound_excess = self.max_bound_excess.max(other.max_bound_excess);
    }
}

#[inline]
fn cost_terms(epsilon: f64, eta_dot_nu: f64, quad: f64, f: f64) -> f64 {
    -(epsilon * eta_dot_nu) - 0.5 * epsilon * epsilon * quad - epsilon * epsilon * f
}

fn check_bounds(epsilon: f64, nu: &Move, c: &Control) -> Result<()> {
    let slack = 1.0 + 1e-9;
    let b4 = 1.0 / math::sqrt(math::sqrt(epsilon));
    let b2 = 1.0 / math::sqrt(epsilon);
    if nu.norm_l1() > b4 * slack {
        return Err(Error::Contract(format!("move gauge {} exceeds ε^(-1/4) = {b4}", nu.norm_l1())));
    }
    if c.eta.norm() > b4 * slack {
        return Err(Error::Contract(format!("|η| = {} exceeds ε^(-1/4) = {b4}", c.eta.norm())));
    }
    if c.x.spectral_norm() > b2 * slack {
        return Err(Error::Contract(format!("‖X‖ = {} exceeds ε^(-1/2) = {b2}", c.x.spectral_norm())));
    }
    Ok(())
}

/// `R^ε(t, p, q, η, X)`, with `F^*` in place of `F` at the zero sentinel.
pub fn running_cost(
    op: &OperatorDescriptor,
    epsilon: f64,
    t: f64,
    p: &Point,
    nu: &Move,
    control: &Control,
) -> Result<f64> {
    if nu.dim() != op.m1() || control.eta.dim() != op.m1() || control.x.dim() != op.m1() {
        return Err(Error::DimensionMismatch { expected: op.m1(), got: nu.dim() });
    }
    check_bounds(epsilon, nu, control)?;
    let f = op.upper_semicontinuous(t, p, &control.eta, &control.x);
    Ok(cost_terms(epsilon, control.eta.dot(nu), control.x.quad_form(nu), f))
}

/// `R^{*,ε}` / `R_*^ε` at `η = 0`: the running cost with `F^*` or `F_*`.
pub fn running_cost_envelope(
    op: &OperatorDescriptor,
    epsilon: f64,
    t: f64,
    p: &Point,
    nu: &Move,
    x: &SymMatrix,
    which: Envelope,
) -> f64 {
    cost_terms(epsilon, 0.0, x.quad_form(nu), op.envelope_at_zero(t, p, x, which))
}

/// Running cost of an arbitrary `(η, X)` using the semicontinuous envelope
/// `which` of `F` (`F^*` for `Upper`, `F_*` for `Lower`).
pub fn running_cost_with(
    op: &OperatorDescriptor,
    epsilon: f64,
    t: f64,
    p: &Point,
    nu: &Move,
    eta: &HorizontalVector,
    x: &SymMatrix,
    which: Envelope,
) -> f64 {
    let f = if eta.is_zero() { op.envelope_at_zero(t, p, x, which) } else { op.eval_nonzero(t, p, eta, x) };
    cost_terms(epsilon, eta.dot(nu), x.quad_form(nu), f)
}

/// Least-squares quadratic `c + ε⟨η, ν⟩ + (ε²/2)⟨Xν, ν⟩` through values
/// sampled on a fixed move stencil. The normal matrix depends only on the
/// stencil and is inverted once.
#[derive(Clone, Debug)]
struct JetFit {
    m1: usize,
    n: usize,
    /// Basis rows, one per move.
    rows: Vec<f64>,
    /// Inverse of the normal matrix.
    inverse: Vec<f64>,
}

impl JetFit {
    fn new(moves: &[Move], m1: usize) -> Option<Self> {
        let n = 1 + m1 + m1 * (m1 + 1) / 2;
        if moves.len() < n {
            return None;
        }
        let mut rows = alloc::vec![0.0; moves.len() * n];
        for (nu, row) in moves.iter().zip(rows.chunks_exact_mut(n)) {
            row[0] = 1.0;
            let mut k = 1;
            for i in 0..m1 {
                row[k] = nu[i];
                k += 1;
            }
            for i in 0..m1 {
                for j in i..m1 {
                    row[k] = if i == j { 0.5 * nu[i] * nu[i] } else { nu[i] * nu[j] };
                    k += 1;
                }
            }
        }
        let mut a = alloc::vec![0.0; n * n];
        for row in rows.chunks_exact(n) {
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] += row[i] * row[j];
                }
            }
        }
        // Gauss-Jordan with partial pivoting
        let scale = a[0].abs().max(1.0);
        let mut inv = alloc::vec![0.0; n * n];
        for i in 0..n {
            inv[i * n + i] = 1.0;
        }
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
            if !(a[piv * n + col].abs() > 1e-12 * scale) {
                return None;
            }
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
            let d = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= d;
                inv[col * n + j] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r * n + col];
                    if f != 0.0 {
                        for j in 0..n {
                            a[r * n + j] -= f * a[col * n + j];
                            inv[r * n + j] -= f * inv[col * n + j];
                        }
                    }
                }
            }
        }
        Some(Self { m1, n, rows, inverse: inv })
    }

    fn fit(&self, samples: &[f64], epsilon: f64) -> Option<(HorizontalVector, SymMatrix)> {
        let (m1, n) = (self.m1, self.n);
        let mut b = alloc::vec![0.0; n];
        for (row, &v) in self.rows.chunks_exact(n).zip(samples) {
            for i in 0..n {
                b[i] += row[i] * v;
            }
        }
        let c: Vec<f64> = self.inverse.chunks_exact(n).map(|r| r.iter().zip(&b).map(|(x, y)| x * y).sum()).collect();
        let mut eta = HorizontalVector::zeros(m1);
        for i in 0..m1 {
            eta[i] = c[1 + i] / epsilon;
        }
        let mut x = SymMatrix::zeros(m1);
        let mut k = 1 + m1;
        for i in 0..m1 {
            for j in i..m1 {
                x.set(i, j, c[k] / (epsilon * epsilon));
                k += 1;
            }
        }
        (eta.is_finite() && x.is_finite()).then_some((eta, x))
    }
}

/// Moves a jet taken at `p·step` back to `p` along the horizontal step:
/// `η_p = η_q − X_q step`.
fn transport(eta: HorizontalVector, x: &SymMatrix, step: &HorizontalVector) -> HorizontalVector {
    let mut out = eta;
    for j in 0..eta.dim() {
        for i in 0..eta.dim() {
            out[j] -= x.get(j, i) * step[i];
        }
    }
    out
}

fn clamp_norm(v: HorizontalVector, bound: f64) -> HorizontalVector {
    let n = v.norm();
    if n > bound {
        v.scaled(bound / n)
    } else {
        v
    }
}

fn clamp_spectral(x: SymMatrix, bound: f64) -> SymMatrix {
    let n = x.spectral_norm();
    if n > bound {
        x.scaled(bound / n)
    } else {
        x
    }
}

fn grid_moves(unit: &[f64], bound: f64) -> Vec<Move> {
    fn rec(a: usize, unit: &[f64], left: f64, cur: &mut HorizontalVector, out: &mut Vec<Move>) {
        if a == unit.len() {
            out.push(*cur);
            return;
        }
        let kmax = math::floor(left / unit[a] + 1e-9) as i64;
        for k in -kmax..=kmax {
            cur[a] = k as f64 * unit[a];
            rec(a + 1, unit, left - k.unsigned_abs() as f64 * unit[a], cur, out);
        }
        cur[a] = 0.0;
    }
    let mut out = Vec::new();
    let mut cur = HorizontalVector::zeros(unit.len());
    rec(0, unit, bound, &mut cur, &mut out);
    out
}

fn polar_moves(m1: usize, n_dir: usize, n_mag: usize, bound: f64) -> Vec<Move> {
    let mut out = alloc::vec![HorizontalVector::zeros(m1)];
    for d in sphere_directions(m1, n_dir) {
        let l1 = d.norm_l1();
        for k in 1..=n_mag {
            let r = bound * k as f64 / n_mag as f64;
            out.push(d.scaled(r / l1));
        }
    }
    out
}

struct NodeOutcome {
    value: f64,
    off_box_samples: u32,
    stencil_off: bool,
    excess: f64,
}

/// A configured game on a fixed grid.
#[derive(Clone, Debug)]
pub struct Game {
    group: Group,
    op: OperatorDescriptor,
    cfg: GameConfig,
    grid: GridBox,
    moves: Vec<Move>,
    generic: Vec<Control>,
    /// `ε · max |ν|` over the move lattice.
    reach: f64,
    fit: Option<JetFit>,
    adversary: AdversaryParams,
}

impl Game {
    pub fn new(group: Group, op: OperatorDescriptor, cfg: GameConfig, grid: GridBox) -> Result<Self> {
        cfg.validate()?;
        let m1 = group.horizontal_dim();
        if op.m1() != m1 {
            return Err(Error::DimensionMismatch { expected: m1, got: op.m1() });
        }
        if grid.dim() != group.dim() {
            return Err(Error::DimensionMismatch { expected: group.dim(), got: grid.dim() });
        }
        if grid.horizontal_axes() != m1 {
            return Err(Error::Config(format!(
                "grid marks {} horizontal axes, the group has {m1}",
                grid.horizontal_axes()
            )));
        }
        let bound = cfg.move_bound();
        let moves = match cfg.moves {
            MoveLattice::Polar { n_dir, n_mag } => polar_moves(m1, n_dir, n_mag, bound),
            MoveLattice::Grid => {
                let unit: Vec<f64> = grid.spacing()[..m1].iter().map(|h| h / cfg.epsilon).collect();
                grid_moves(&unit, bound)
            }
        };
        let adversary =
            AdversaryParams { lambda1: op.assumption_constants().lambda1, k: 1.0, r0: 1.0 };
        let reach = cfg.epsilon * moves.iter().map(|nu| nu.norm()).fold(0.0, f64::max);
        let fit = JetFit::new(&moves, m1);
        let mut game = Self { group, op, cfg, grid, moves, generic: Vec::new(), reach, fit, adversary };
        game.generic = game.generic_controls();
        Ok(game)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn operator(&self) -> &OperatorDescriptor {
        &self.op
    }

    pub fn config(&self) -> &GameConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }

    /// Player II's lattice moves (excluding the per-control adversary move).
    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    fn generic_controls(&self) -> Vec<Control> {
        let m1 = self.group.horizontal_dim();
        let xb = self.cfg.x_bound() * (1.0 + 1e-12);
        let eb = self.cfg.eta_bound();
        let mut out = alloc::vec![Control::zero_sentinel(SymMatrix::zeros(m1))];
        for &a in &self.cfg.x_dict.a {
            let x = SymMatrix::scalar(m1, a);
            if a != 0.0 && x.spectral_norm() <= xb {
                out.push(Control::zero_sentinel(x));
            }
        }
        let n_mag = self.cfg.n_mag;
        let mags: Vec<f64> = (0..n_mag)
            .map(|k| {
                if n_mag == 1 {
                    eb
                } else {
                    let s = k as f64 / (n_mag - 1) as f64;
                    self.cfg.eta_min * math::powf(eb / self.cfg.eta_min, s)
                }
            })
            .collect();
        for d in sphere_directions(m1, self.cfg.n_dir) {
            let proj = SymMatrix::outer(&d);
            for &mag in &mags {
                let eta = d.scaled(mag);
                for &a in &self.cfg.x_dict.a {
                    for &b in &self.cfg.x_dict.b {
                        let x = SymMatrix::scalar(m1, a).add(&proj.scaled(b));
                        if x.spectral_norm() <= xb {
                            out.push(Control::new(eta, x));
                        }
                    }
                }
            }
        }
        out
    }

    /// Player I's candidate controls at node `p`.
    pub fn player1_controls(&self, u_prev: &ValueLayer, p: &Point) -> Vec<Control> {
        let samples = self.samples(u_prev, p).0;
        self.player1_controls_flagged(u_prev, p, &samples).0
    }

    fn player1_controls_flagged(&self, u_prev: &ValueLayer, p: &Point, samples: &[f64]) -> (Vec<Control>, bool) {
        match self.cfg.strategy {
            Strategy::Generic => (self.generic.clone(), false),
            Strategy::Guided => {
                let m1 = self.group.horizontal_dim();
                let eps = self.cfg.epsilon;
                let delta = self.fd_step();
                let eb = self.cfg.eta_bound();
                let xb = self.cfg.x_bound();
                let axis = |i: usize, len: f64| {
                    let mut v = HorizontalVector::zeros(m1);
                    v[i] = len;
                    v
                };
                let mut off_box = false;

                // jets offered with the ±aI perturbations, and plain ones
                let mut perturbed = Vec::with_capacity(1 + 2 * m1);
                let fit = self.fit.as_ref();
                match fit.and_then(|f| f.fit(samples, eps)) {
                    Some(j) => perturbed.push(j),
                    None => {
                        let central = u_prev.horizontal_derivatives(&self.group, p, delta);
                        off_box |= central.off_box;
                        perturbed.push((central.eta, central.hessian));
                    }
                }
                let mut plain = Vec::with_capacity(2 * m1);
                for i in 0..m1 {
                    for sign in [1.0, -1.0] {
                        if let Some(f) = fit {
                            let step = axis(i, sign * self.reach);
                            let q = self.group.translate_horizontal(p, &step, 1.0);
                            if let Some((eta, x)) = f.fit(&self.samples(u_prev, &q).0, eps) {
                                perturbed.push((transport(eta, &x, &step), x));
                            }
                        }
                        let step = axis(i, 2.0 * sign * delta);
                        let q = self.group.translate_horizontal(p, &step, 1.0);
                        let side = u_prev.horizontal_derivatives(&self.group, &q, delta);
                        off_box |= side.off_box;
                        plain.push((transport(side.eta, &side.hessian, &step), side.hessian));
                    }
                }

                let mut shifts = alloc::vec![0.0];
                for &a in &self.cfg.x_dict.a {
                    for s in [a.abs(), -a.abs()] {
                        if s != 0.0 && !shifts.contains(&s) {
                            shifts.push(s);
                        }
                    }
                }
                let mut out = Vec::with_capacity(2 * perturbed.len() * shifts.len() + plain.len() + 1);
                for (eta, hess) in perturbed {
                    let eta = clamp_norm(eta, eb);
                    let use_eta = eta.norm() >= self.cfg.eta_min;
                    for &s in &shifts {
                        let x = clamp_spectral(hess.add(&SymMatrix::scalar(m1, s)), xb);
                        if use_eta {
                            out.push(Control::new(eta, x));
                        }
                        out.push(Control::zero_sentinel(x));
                    }
                }
                for (eta, x) in plain {
                    let eta = clamp_norm(eta, eb);
                    if eta.norm() >= self.cfg.eta_min {
                        out.push(Control::new(eta, clamp_spectral(x, xb)));
                    }
                }
                out.push(Control::zero_sentinel(SymMatrix::zeros(m1)));
                (out, off_box)
            }
        }
    }

    fn fd_step(&self) -> f64 {
        let m1 = self.group.horizontal_dim();
        self.cfg.fd_step.unwrap_or_else(|| self.grid.spacing()[..m1].iter().copied().fold(f64::INFINITY, f64::min))
    }

    fn samples(&self, u_prev: &ValueLayer, p: &Point) -> (Vec<f64>, u32) {
        let mut off = 0u32;
        let v = self
            .moves
            .iter()
            .map(|nu| {
                let (v, inside) = self.sample_move(u_prev, p, nu);
                off += !inside as u32;
                v
            })
            .collect();
        (v, off)
    }

    /// Player II's constructive answer to `control` against the reference
    /// pair `(0, O)`, if enabled.
    pub fn adversary_move(&self, control: &Control) -> Option<Move> {
        if !self.cfg.adversary_moves {
            return None;
        }
        let m1 = control.eta.dim();
        Some(adversary_response(
            self.cfg.epsilon,
            &control.eta,
            &HorizontalVector::zeros(m1),
            &control.x,
            &SymMatrix::zeros(m1),
            &self.adversary,
        ))
    }

    #[inline]
    fn sample_move(&self, u_prev: &ValueLayer, p: &Point, nu: &Move) -> (f64, bool) {
        u_prev.sample_checked(&self.group.translate_horizontal(p, nu, self.cfg.epsilon))
    }

    /// `sup_q [u(p·δ_ε q) + R]` for every control at `p`, in the order of
    /// [`player1_controls`](Self::player1_controls).
    pub fn control_values(&self, u_prev: &ValueLayer, p: &Point, t: f64) -> Vec<(Control, f64)> {
        let samples = self.samples(u_prev, p).0;
        let (controls, _) = self.player1_controls_flagged(u_prev, p, &samples);
        controls
            .into_iter()
            .map(|c| {
                let (v, _) = self.sup_for(u_prev, p, t, &c, &samples);
                (c, v)
            })
            .collect()
    }

    #[inline]
    fn sup_for(&self, u_prev: &ValueLayer, p: &Point, t: f64, c: &Control, samples: &[f64]) -> (f64, u32) {
        let eps = self.cfg.epsilon;
        let f = self.op.upper_semicontinuous(t, p, &c.eta, &c.x);
        let mut sup = f64::NEG_INFINITY;
        for (nu, &s) in self.moves.iter().zip(samples) {
            let v = s + cost_terms(eps, c.eta.dot(nu), c.x.quad_form(nu), f);
            if v > sup {
                sup = v;
            }
        }
        let mut off = 0;
        if let Some(nu) = self.adversary_move(c) {
            let (s, inside) = self.sample_move(u_prev, p, &nu);
            off += !inside as u32;
            let v = s + cost_terms(eps, c.eta.dot(&nu), c.x.quad_form(&nu), f);
            if v > sup {
                sup = v;
            }
        }
        (sup, off)
    }

    fn node(&self, u_prev: &ValueLayer, idx: usize, t: f64) -> NodeOutcome {
        let p = self.grid.node_point(idx);
        let (samples, mut off_box_samples) = self.samples(u_prev, &p);
        let (controls, stencil_off) = self.player1_controls_flagged(u_prev, &p, &samples);
        let mut best = f64::INFINITY;
        for c in &controls {
            let (sup, off) = self.sup_for(u_prev, &p, t, c, &samples);
            off_box_samples += off;
            if sup < best {
                best = sup;
            }
        }
        let (value, excess) = enforce_bound(self.cfg.discount(best), u_prev.bound());
        NodeOutcome { value, off_box_samples, stencil_off, excess }
    }

    fn check_layer(&self, u_prev: &ValueLayer) -> Result<()> {
        if u_prev.grid() != &self.grid {
            return Err(Error::Contract("value layer lives on a different grid than the game".into()));
        }
        Ok(())
    }

    /// One DPP step producing the layer at time `t`.
    pub fn step(&self, u_prev: &ValueLayer, t: f64) -> Result<(ValueLayer, Diagnostics)> {
        self.check_layer(u_prev)?;
        let n = self.grid.node_count();
        #[cfg(feature = "std")]
        let outcomes: Vec<NodeOutcome> = (0..n).into_par_iter().map(|i| self.node(u_prev, i, t)).collect();
        #[cfg(not(feature = "std"))]
        let outcomes: Vec<NodeOutcome> = (0..n).map(|i| self.node(u_prev, i, t)).collect();

        let mut diag = Diagnostics { steps: 1, nodes: n as u64, ..Diagnostics::default() };
        let mut values = Vec::with_capacity(n);
        for o in outcomes {
            diag.off_box_samples += o.off_box_samples as u64;
            diag.off_box_stencils += o.stencil_off as u64;
            if o.excess > 0.0 {
                diag.bound_clamps += 1;
                diag.max_bound_excess = diag.max_bound_excess.max(o.excess);
            }
            values.push(o.value);
        }
        let layer = ValueLayer::from_parts(self.grid, values, t, self.cfg.discount(u_prev.far_field()), u_prev.bound());
        Ok((layer, diag))
    }

    /// One DPP step from `u_prev` to `u_prev.t() + ε²`.
    pub fn dpp_step(&self, u_prev: &ValueLayer) -> Result<(ValueLayer, Diagnostics)> {
        self.step(u_prev, u_prev.t() + self.cfg.epsilon * self.cfg.epsilon)
    }

    /// Runs all `⌊T/ε²⌋` steps, calling `on_layer(k, layer, step_diag)` for
    /// `k = 0..=m` (with empty diagnostics at `k = 0`). Returns the final
    /// layer and accumulated diagnostics.
    pub fn solve_with<F>(&self, psi: &ValueLayer, mut on_layer: F) -> Result<(ValueLayer, Diagnostics)>
    where
        F: FnMut(usize, &ValueLayer, &Diagnostics) -> Result<()>,
    {
        self.check_layer(psi)?;
        let mut total = Diagnostics::default();
        on_layer(0, psi, &total)?;
        let mut cur = psi.clone();
        let e2 = self.cfg.epsilon * self.cfg.epsilon;
        for k in 1..=self.cfg.steps() {
            let (next, d) = self.step(&cur, k as f64 * e2)?;
            total.merge(&d);
            on_layer(k, &next, &d)?;
            cur = next;
        }
        Ok((cur, total))
    }

    /// All layers `u^ε(kε², ·)`, `k = 0..=m`.
    pub fn solve(&self, psi: &ValueLayer) -> Result<(Vec<ValueLayer>, Diagnostics)> {
        let mut layers = Vec::with_capacity(self.cfg.steps() + 1);
        let (_, diag) = self.solve_with(psi, |_, l, _| {
            layers.push(l.clone());
            Ok(())
        })?;
        Ok((layers, diag))
    }
}

/// Clamps `v` into `[−bound, bound]`, returning the excess.
pub(crate) fn enforce_bound(v: f64, bound: f64) -> (f64, f64) {
    if v > bound {
        (bound, v - bound)
    } else if v < -bound {
        (-bound, -bound - v)
    } else {
        (v, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid_game(cfg: GameConfig) -> (Game, GridBox) {
        let g = Group::euclidean(2);
        let grid = GridBox::cube(2, -1.0, 1.0, 0.05).unwrap();
        let op = OperatorDescriptor::mcf(2).unwrap();
        (Game::new(g, op, cfg, grid).unwrap(), grid)
    }

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(GameConfig::new(0.05, 0.25).steps(), 100);
        assert_eq!(GameConfig::new(0.2, 0.25).steps(), 6);
        assert_eq!(GameConfig::new(0.1, 0.0).steps(), 0);
    }

    #[test]
    fn grid_moves_respect_gauge_bound() {
        let moves = grid_moves(&[0.4, 0.4], 2.1);
        assert!(moves.iter().all(|m| m.norm_l1() <= 2.1 + 1e-12));
        assert!(moves.iter().any(|m| m.is_zero()));
        // |k|_1 ≤ 5 in two dimensions: 2·5·6 + 1 points
        assert_eq!(moves.len(), 61);
    }

    #[test]
    fn polar_moves_count() {
        let moves = polar_moves(2, 8, 3, 2.0);
        assert_eq!(moves.len(), 25);
        assert!(moves.iter().all(|m| m.norm_l1() <= 2.0 + 1e-12));
    }

    #[test]
    fn generic_control_count() {
        let mut cfg = GameConfig::new(0.1, 0.1);
        cfg.strategy = Strategy::Generic;
        cfg.n_dir = 4;
        cfg.n_mag = 2;
        cfg.x_dict = XDictionary { a: alloc::vec![0.0], b: alloc::vec![0.0] };
        let (game, grid) = euclid_game(cfg);
        let psi = ValueLayer::build(grid, |_| 0.0, 0.0).unwrap();
        let cs = game.player1_controls(&psi, &Point::zeros(2));
        // zero sentinel plus 4 directions × 2 magnitudes
        assert_eq!(cs.len(), 9);
    }

    #[test]
    fn jet_fit_is_exact_on_quadratics() {
        let moves = grid_moves(&[0.4, 0.4], 2.1);
        let fit = JetFit::new(&moves, 2).unwrap();
        let eps = 0.05;
        let (g, h) = ([0.3, -1.2], [[2.0, 0.5], [0.5, -1.0]]);
        let samples: Vec<f64> = moves
            .iter()
            .map(|nu| {
                let d = [eps * nu[0], eps * nu[1]];
                0.7 + g[0] * d[0] + g[1] * d[1]
                    + 0.5 * (h[0][0] * d[0] * d[0] + 2.0 * h[0][1] * d[0] * d[1] + h[1][1] * d[1] * d[1])
            })
            .collect();
        let (eta, x) = fit.fit(&samples, eps).unwrap();
        assert!((eta[0] - 0.3).abs() < 1e-9 && (eta[1] + 1.2).abs() < 1e-9);
        for i in 0..2 {
            for j in 0..2 {
                assert!((x.get(i, j) - h[i][j]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn jet_fit_needs_enough_moves() {
        let moves = [HorizontalVector::zeros(2), HorizontalVector::from_slice(&[1.0, 0.0])];
        assert!(JetFit::new(&moves, 2).is_none());
    }

    #[test]
    fn transport_follows_the_hessian() {
        let x = SymMatrix::scalar(2, 2.0);
        let step = HorizontalVector::from_slice(&[0.1, 0.0]);
        let eta = transport(HorizontalVector::from_slice(&[1.2, 0.4]), &x, &step);
        assert!((eta[0] - 1.0).abs() < 1e-15 && eta[1] == 0.4);
    }

    #[test]
    fn guided_contains_the_exact_jet() {
        let (game, grid) = euclid_game(GameConfig::new(0.1, 0.1));
        let values = (0..grid.node_count())
            .map(|i| {
                let p = grid.node_point(i);
                p[0] * p[0] + p[1] * p[1]
            })
            .collect();
        let u = ValueLayer::from_parts(grid, values, 0.0, 2.0, 2.0);
        let p = Point::from_slice(&[0.3, -0.2]);
        let cs = game.player1_controls(&u, &p);
        let exact = cs.iter().any(|c| {
            (c.eta[0] - 0.6).abs() < 1e-8
                && (c.eta[1] + 0.4).abs() < 1e-8
                && c.x.sub(&SymMatrix::scalar(2, 2.0)).spectral_norm() < 1e-6
        });
        assert!(exact);
        assert!(cs.iter().any(|c| c.is_zero_sentinel()));
    }

    #[test]
    fn adversary_moves_are_opt_in() {
        let cfg = GameConfig::new(0.1, 0.1);
        assert!(!cfg.adversary_moves);
        let (game, _) = euclid_game(cfg);
        let c = Control::new(HorizontalVector::from_slice(&[1.0, 0.0]), SymMatrix::identity(2));
        assert!(game.adversary_move(&c).is_none());
    }

    #[test]
    fn constant_is_discounted_exactly() {
        let mut cfg = GameConfig::new(0.1, 0.1);
        cfg.mu = 0.5;
        let (game, grid) = euclid_game(cfg);
        let psi = ValueLayer::build(grid, |_| 2.0, 2.0).unwrap();
        let (next, diag) = game.dpp_step(&psi).unwrap();
        let expect = 2.0 / (1.0 + 0.5 * 0.01);
        assert!(next.values().iter().all(|&v| v == expect));
        assert_eq!(diag.bound_clamps, 0);
    }

    #[test]
    fn running_cost_checks_bounds() {
        let op = OperatorDescriptor::mcf(2).unwrap();
        let p = Point::zeros(2);
        let c = Control::new(HorizontalVector::from_slice(&[1.0, 0.0]), SymMatrix::identity(2));
        let far = HorizontalVector::from_slice(&[10.0, 0.0]);
        assert!(running_cost(&op, 0.01, 0.0, &p, &far, &c).is_err());
        let nu = HorizontalVector::from_slice(&[1.0, 0.0]);
        // −ε·1 − ε²/2·1 − ε²·(−(2 − 1))
        let r = running_cost(&op, 0.01, 0.0, &p, &nu, &c).unwrap();
        assert!((r - (-0.01 - 0.5e-4 + 1e-4)).abs() < 1e-15);
    }
}
