//! Property suites run by `verify` and the acceptance tests. Each suite is
//! deterministic for a given seed and returns a report of named checks.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{adversary_response_with_branch, proven_threshold, AdversaryBranch, AdversaryParams, GradientGap};
use crate::algebra::{Group, Point};
use crate::data::InitialData;
use crate::game::{running_cost_with, Game, GameConfig, MoveLattice, Strategy, XDictionary};
use crate::grid::{GridBox, ValueLayer};
use crate::linalg::{HorizontalVector, SymMatrix};
use crate::math;
use crate::operators::{envelope_by_sweep, Envelope, OperatorDescriptor};
use crate::oracles;
use crate::sampling;

/// One named check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub samples: u64,
    pub violations: u64,
    /// Largest observed error (or ratio) for the check's metric.
    pub max_error: f64,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    fn from_errors(name: String, errors: &[f64], tolerance: f64) -> Self {
        let violations = errors.iter().filter(|e| !(**e <= tolerance)).count() as u64;
        let max_error = errors.iter().copied().fold(0.0f64, f64::max);
        Self {
            name,
            passed: violations == 0,
            samples: errors.len() as u64,
            violations,
            max_error,
            tolerance,
            note: String::new(),
        }
    }

    fn flag(name: String, passed: bool, note: String) -> Self {
        Self { name, passed, samples: 1, violations: !passed as u64, max_error: 0.0, tolerance: 0.0, note }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.to_string(), checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Groups covered by the algebra suite.
pub fn algebra_groups() -> Vec<Group> {
    alloc::vec![Group::euclidean(2), Group::heisenberg(1), Group::heisenberg(2), Group::engel()]
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn norm_inf(p: &Point) -> f64 {
    p.coords().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Left-invariant field of the basis vector `e_k` at `p`, by a central
/// difference of the group law in the second argument.
fn left_invariant_field(g: &Group, p: &Point, k: usize) -> Point {
    let h = 1e-3;
    let mut e = Point::zeros(g.dim());
    e[k] = h;
    let plus = g.mul_unchecked(p, &e);
    e[k] = -h;
    let minus = g.mul_unchecked(p, &e);
    let mut out = Point::zeros(g.dim());
    for a in 0..g.dim() {
        out[a] = (plus[a] - minus[a]) / (2.0 * h);
    }
    out
}

/// `[X_i, X_j](p)` of the closed-form frame, with Jacobians by central
/// differences.
fn frame_commutator(g: &Group, p: &Point, i: usize, j: usize) -> Point {
    let n = g.dim();
    let h = 1e-4;
    let jac_apply = |col: usize, v: &Point| -> Point {
        // D X_col (p) · v
        let mut out = Point::zeros(n);
        for b in 0..n {
            let mut pp = *p;
            let mut pm = *p;
            pp[b] += h;
            pm[b] -= h;
            let fp = g.horizontal_frame(&pp)[col];
            let fm = g.horizontal_frame(&pm)[col];
            for a in 0..n {
                out[a] += (fp[a] - fm[a]) / (2.0 * h) * v[b];
            }
        }
        out
    };
    let frame = g.horizontal_frame(p);
    let a = jac_apply(j, &frame[i]);
    let b = jac_apply(i, &frame[j]);
    let mut out = Point::zeros(n);
    for k in 0..n {
        out[k] = a[k] - b[k];
    }
    out
}

/// Group axioms, dilation automorphism, gauge homogeneity, bracket closure
/// and the frame/law consistency on ℝ², ℍ¹, ℍ², 𝔼⁴.
pub fn algebra_suite(samples: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("algebra");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in algebra_groups() {
        let n = g.dim();
        let name = g.kind().to_string();
        let (mut assoc, mut ident, mut inv, mut neg, mut auto, mut gauge, mut closure, mut frame) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let e = g.identity();
        for _ in 0..samples {
            let p = sampling::point_in_cube(&mut rng, n, 2.0);
            let q = sampling::point_in_cube(&mut rng, n, 2.0);
            let r = sampling::point_in_cube(&mut rng, n, 2.0);
            let mul = |a: &Point, b: &Point| g.multiply(a, b).expect("dimensions agree");

            let lhs = mul(&mul(&p, &q), &r);
            let rhs = mul(&p, &mul(&q, &r));
            assoc.push(rel(lhs.max_abs_diff(&rhs), norm_inf(&lhs)));

            let exact = mul(&p, &e) == p && mul(&e, &p) == p;
            ident.push(if exact { 0.0 } else { 1.0 });

            let pinv = g.inverse(&p);
            inv.push(norm_inf(&mul(&p, &pinv)).max(norm_inf(&mul(&pinv, &p))));
            let mut minus = p;
            minus.coords_mut().iter_mut().for_each(|c| *c = -*c);
            neg.push(pinv.max_abs_diff(&minus));

            let lambda = rng.gen_range(0.0..=10.0);
            let a = g.dilate(&mul(&p, &q), lambda);
            let b = mul(&g.dilate(&p, lambda), &g.dilate(&q, lambda));
            auto.push(rel(a.max_abs_diff(&b), norm_inf(&a)));

            let gl = lambda * g.gauge(&p);
            gauge.push(rel((g.gauge(&g.dilate(&p, lambda)) - gl).abs(), gl));

            let fr = g.horizontal_frame(&p);
            let fs = g.frame_from_structure(&p);
            for i in 0..g.horizontal_dim() {
                let w = left_invariant_field(&g, &p, i);
                frame.push(fr[i].max_abs_diff(&w).max(fr[i].max_abs_diff(&fs[i])));
            }
        }
        // brackets of vector fields are costlier; a tenth of the samples
        for _ in 0..(samples / 10).max(1) {
            let p = sampling::point_in_cube(&mut rng, n, 2.0);
            let m1 = g.horizontal_dim();
            for i in 0..m1 {
                for j in (i + 1)..m1 {
                    let got = frame_commutator(&g, &p, i, j);
                    let mut ei = Point::zeros(n);
                    let mut ej = Point::zeros(n);
                    ei[i] = 1.0;
                    ej[j] = 1.0;
                    let coef = g.lie_bracket(&ei, &ej);
                    let mut want = Point::zeros(n);
                    for k in 0..n {
                        if coef[k] != 0.0 {
                            let w = left_invariant_field(&g, &p, k);
                            for a in 0..n {
                                want[a] += coef[k] * w[a];
                            }
                        }
                    }
                    closure.push(got.max_abs_diff(&want));
                }
            }
        }
        let mut push = |label: &str, errs: &[f64], tol: f64, note: &str| {
            let mut c = Check::from_errors(format!("{name}/{label}"), errs, tol);
            c.note = note.to_string();
            report.checks.push(c);
        };
        push("associativity", &assoc, 1e-10, "relative to max(1, |(pq)r|_inf)");
        push("identity", &ident, 0.0, "p·e = e·p = p bitwise");
        push("inverse", &inv, 1e-12, "|p·p⁻¹|_inf and |p⁻¹·p|_inf");
        push("inverse-is-negation", &neg, 0.0, "p⁻¹ = −p");
        push("dilation-automorphism", &auto, 1e-10, "λ ∈ [0, 10], relative to max(1, |δ(pq)|_inf)");
        push("gauge-homogeneity", &gauge, 1e-12, "λ ∈ [0, 10], relative to max(1, λ|p|)");
        push("frame-matches-law", &frame, 1e-9, "closed-form frame vs d/ds p·(s e_i) and vs structure constants");
        push("bracket-closure", &closure, 1e-6, "[X_i, X_j] of the frame vs Σ c_ij^k W_k");
    }
    report
}

/// Operators whose assumptions are swept.
pub fn operator_cases() -> Vec<OperatorDescriptor> {
    alloc::vec![
        OperatorDescriptor::mcf(2).expect("m1 = 2"),
        OperatorDescriptor::mcf(3).expect("m1 = 3"),
        OperatorDescriptor::pil(2).expect("m1 = 2"),
        OperatorDescriptor::pil(3).expect("m1 = 3"),
    ]
}

/// Assumption sweeps, envelopes vs brute force, 0-homogeneity, degenerate
/// ellipticity, linear growth and the envelope sandwich.
pub fn operators_suite(samples: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("operators");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for op in operator_cases() {
        let m = op.m1();
        let name = format!("{}:m1={m}", op.name());
        let origin = Point::zeros(m);

        let rep = op.check_assumptions(samples, &mut rng);
        for (label, stat) in [("ellipticity", &rep.ellipticity), ("eta-modulus", &rep.eta_modulus)] {
            report.checks.push(Check {
                name: format!("{name}/{label}"),
                passed: stat.violations == 0,
                samples: stat.checked as u64,
                violations: stat.violations as u64,
                max_error: stat.max_ratio,
                tolerance: 1.0,
                note: "max_error is the largest lhs/rhs".into(),
            });
        }

        let (mut homog, mut ellip, mut growth, mut sandwich, mut brute) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let c = op.assumption_constants().growth_constant(m);
        let n_aux = (samples / 10).max(100);
        for _ in 0..n_aux {
            let scale = math::powf(10.0, rng.gen_range(-1.0..1.0));
            let x = sampling::sym_matrix(&mut rng, m, scale);
            let eta = sampling::nonzero_vector(&mut rng, m, 1.0);
            let f = op.eval_nonzero(0.0, &origin, &eta, &x);
            let k = math::powf(10.0, rng.gen_range(-3.0..3.0));
            let fk = op.eval_nonzero(0.0, &origin, &eta.scaled(k), &x);
            homog.push((f - fk).abs() / f.abs().max(1.0));

            let mut d = Vec::with_capacity(m);
            for _ in 0..m {
                d.push(rng.gen_range(0.0..scale));
            }
            let psd = sampling::sym_with_eigenvalues(&mut rng, &d);
            let fh = op.eval_nonzero(0.0, &origin, &eta, &x.add(&psd));
            ellip.push((fh - f).max(0.0));

            growth.push(f.abs() / (c * (1.0 + x.spectral_norm())));

            let lo = op.lower_envelope_at_zero(0.0, &origin, &x);
            let hi = op.upper_envelope_at_zero(0.0, &origin, &x);
            let unit = eta.scaled(1.0 / eta.norm());
            let fu = op.eval_nonzero(0.0, &origin, &unit, &x);
            sandwich.push((lo - fu).max(fu - hi).max(0.0));
        }
        if m == 2 {
            for _ in 0..100 {
                let x = sampling::sym_matrix(&mut rng, m, 3.0);
                let (blo, bhi) = envelope_by_sweep(&op, &x, 10_000);
                let lo = op.lower_envelope_at_zero(0.0, &origin, &x);
                let hi = op.upper_envelope_at_zero(0.0, &origin, &x);
                brute.push((blo - lo).abs().max((bhi - hi).abs()));
            }
        }
        report.checks.push(Check::from_errors(format!("{name}/zero-homogeneity"), &homog, 1e-10));
        report.checks.push(Check::from_errors(format!("{name}/degenerate-ellipticity"), &ellip, 1e-10));
        let mut g = Check::from_errors(format!("{name}/linear-growth"), &growth, 1.0);
        g.note = format!("|F| / (C(1 + |X|)) with C = {c}");
        report.checks.push(g);
        report.checks.push(Check::from_errors(format!("{name}/envelope-sandwich"), &sandwich, 1e-12));
        if !brute.is_empty() {
            let mut b = Check::from_errors(format!("{name}/envelope-vs-sweep"), &brute, 1e-6);
            b.note = "10⁴ equally spaced unit directions".into();
            report.checks.push(b);
        }
    }
    report
}

/// One cell of the adversary sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryCell {
    pub operator: String,
    pub k: f64,
    pub r0: f64,
    pub epsilon: f64,
    pub branch: AdversaryBranch,
    pub draws: u64,
    /// Draws whose computed branch differed from the targeted one.
    pub branch_mismatches: u64,
    pub violations: u64,
    pub gauge_violations: u64,
    /// `min ε^{-2}(lhs − rhs)` over the draws.
    pub min_scaled_slack: f64,
    /// Sufficient `ε₁` from the construction's estimates.
    pub proven_threshold: f64,
}

/// The sweep grid of the acceptance suite.
pub const ADVERSARY_KS: [f64; 3] = [1.0, 2.0, 5.0];
pub const ADVERSARY_R0S: [f64; 2] = [1.0, 5.0];
pub const ADVERSARY_EPSILONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Slack allowed for the degeneracy perturbation.
pub const ADVERSARY_SLACK: f64 = 1e-10;

struct Draw {
    eta: HorizontalVector,
    eta_hat: HorizontalVector,
    x: SymMatrix,
    x_hat: SymMatrix,
}

/// An admissible draw aimed at `target`: `‖η̂‖, ‖X̂‖ ≤ R0`,
/// `‖η‖ ≤ ε^{-1/4}`, `‖X‖ ≤ ε^{-1/2}`.
fn adversary_draw<R: Rng>(rng: &mut R, m: usize, eps: f64, p: &AdversaryParams, target: AdversaryBranch) -> Draw {
    let q = math::sqrt(math::sqrt(eps));
    let eta_cap = 1.0 / q;
    let x_cap = 1.0 / math::sqrt(eps);
    let x_hat = sampling::sym_in_ball(rng, m, p.r0);

    let eta_hat = if target.large_gradient {
        let hi = p.r0.min(eta_cap - 2.0 * q).max(1.0 / p.k);
        let n = rng.gen_range(1.0 / p.k..=hi);
        let v = sampling::vector_with_norm(rng, m, n);
        // keep ‖η̂‖ ≥ 1/K after rounding when 1/K = R0
        if v.norm() < 1.0 / p.k {
            v.scaled(1.0 / p.k / v.norm() * (1.0 + 1e-15))
        } else {
            v
        }
    } else {
        let hi = (1.0 / p.k).min(p.r0);
        let n = rng.gen_range(0.0..hi);
        sampling::vector_with_norm(rng, m, n)
    };
    let reference = if target.large_gradient { eta_hat } else { HorizontalVector::zeros(m) };

    // D = X̂ − X with a prescribed sign of its top eigenvalue
    let room = x_cap - p.r0;
    let top = if target.top_positive {
        math::powf(10.0, rng.gen_range(-3.0..0.0)) * room
    } else {
        -math::powf(10.0, rng.gen_range(-3.0..0.0)) * room
    };
    let mut eig = alloc::vec![top];
    for _ in 1..m {
        eig.push(if target.top_positive { rng.gen_range(-room..top) } else { rng.gen_range(-room..top) });
    }
    let basis = sampling::random_orthonormal(rng, m);
    let mut d_mat = SymMatrix::zeros(m);
    for (lam, v) in eig.iter().zip(&basis) {
        d_mat = d_mat.add(&SymMatrix::outer(v).scaled(*lam));
    }
    let x = x_hat.sub(&d_mat);
    let xi0 = basis[0];

    // gap vector d = reference − η
    let d_max = eta_cap - reference.norm();
    let h = math::sqrt(eps) / p.lambda1;
    let d = match target.gap {
        GradientGap::Near => {
            let n = rng.gen_range(0.0..=q);
            sampling::vector_with_norm(rng, m, n)
        }
        GradientGap::FarAligned => {
            let n = rng.gen_range(q..d_max).max(q * (1.0 + 1e-9));
            let lo = h.min(n);
            let a = rng.gen_range(lo..=n) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let rest = math::sqrt((n * n - a * a).max(0.0));
            let perp = if m > 1 { basis[1 + rng.gen_range(0..m - 1)] } else { HorizontalVector::zeros(m) };
            xi0.scaled(a).add(&perp.scaled(rest))
        }
        GradientGap::FarTransverse => {
            let n = rng.gen_range(q..d_max).max(q * (1.0 + 1e-9));
            let a = rng.gen_range(-h..h) * 0.999;
            let mut rest = HorizontalVector::zeros(m);
            for v in basis.iter().skip(1) {
                rest = rest.add(&v.scaled(sampling::gaussian(rng)));
            }
            let rest = if rest.norm() > 0.0 { rest.scaled(math::sqrt((n * n - a * a).max(0.0)) / rest.norm()) } else { rest };
            xi0.scaled(a).add(&rest)
        }
    };
    let mut eta = reference.sub(&d);
    if eta.norm() > eta_cap {
        eta = eta.scaled(eta_cap / eta.norm());
    }
    Draw { eta, eta_hat, x, x_hat }
}

/// Sweeps the constructive lemma over operators × K × R0 × ε × branch.
pub fn adversary_cells(draws_per_branch: usize, seed: u64) -> Vec<AdversaryCell> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::new();
    let ops = [OperatorDescriptor::mcf(2).expect("m1 = 2"), OperatorDescriptor::pil(2).expect("m1 = 2")];
    for op in &ops {
        let m = op.m1();
        let consts = op.assumption_constants();
        let origin = Point::zeros(m);
        for &k in &ADVERSARY_KS {
            for &r0 in &ADVERSARY_R0S {
                for &eps in &ADVERSARY_EPSILONS {
                    let params = AdversaryParams { lambda1: consts.lambda1, k, r0 };
                    let h_k = consts.omega(1.0 / (2.0 * k), r0, math::sqrt(math::sqrt(eps)));
                    let bound = 1.0 / math::sqrt(math::sqrt(eps));
                    let threshold = proven_threshold(&params, m, consts.growth_constant(m));
                    for b in 0..AdversaryBranch::COUNT {
                        let target = AdversaryBranch::from_index(b);
                        let mut cell = AdversaryCell {
                            operator: op.name().to_string(),
                            k,
                            r0,
                            epsilon: eps,
                            branch: target,
                            draws: 0,
                            branch_mismatches: 0,
                            violations: 0,
                            gauge_violations: 0,
                            min_scaled_slack: f64::INFINITY,
                            proven_threshold: threshold,
                        };
                        for _ in 0..draws_per_branch {
                            let d = adversary_draw(&mut rng, m, eps, &params, target);
                            let (nu, got) =
                                adversary_response_with_branch(eps, &d.eta, &d.eta_hat, &d.x, &d.x_hat, &params);
                            cell.draws += 1;
                            if got != target {
                                cell.branch_mismatches += 1;
                            }
                            if nu.norm_l1() > bound * (1.0 + 1e-12) {
                                cell.gauge_violations += 1;
                            }
                            let lhs = running_cost_with(op, eps, 0.0, &origin, &nu, &d.eta, &d.x, Envelope::Upper);
                            let rhs = if got.large_gradient {
                                running_cost_with(op, eps, 0.0, &origin, &nu, &d.eta_hat, &d.x_hat, Envelope::Upper)
                                    - eps * eps * h_k
                            } else {
                                running_cost_with(
                                    op,
                                    eps,
                                    0.0,
                                    &origin,
                                    &nu,
                                    &HorizontalVector::zeros(m),
                                    &d.x_hat,
                                    Envelope::Upper,
                                )
                            };
                            if lhs < rhs - ADVERSARY_SLACK {
                                cell.violations += 1;
                            }
                            cell.min_scaled_slack = cell.min_scaled_slack.min((lhs - rhs) / (eps * eps));
                        }
                        cells.push(cell);
                    }
                }
            }
        }
    }
    cells
}

/// Summary checks over [`adversary_cells`], one per operator/K/R0/ε.
pub fn adversary_suite(draws_per_branch: usize, seed: u64) -> (SuiteReport, Vec<AdversaryCell>) {
    let cells = adversary_cells(draws_per_branch, seed);
    let mut report = SuiteReport::new("adversary");
    for chunk in cells.chunks(AdversaryBranch::COUNT) {
        let c0 = &chunk[0];
        let draws: u64 = chunk.iter().map(|c| c.draws).sum();
        let violations: u64 = chunk.iter().map(|c| c.violations).sum();
        let gauge: u64 = chunk.iter().map(|c| c.gauge_violations).sum();
        let mism: u64 = chunk.iter().map(|c| c.branch_mismatches).sum();
        let worst = chunk.iter().map(|c| c.min_scaled_slack).fold(f64::INFINITY, f64::min);
        let bad_branches: Vec<usize> = chunk.iter().filter(|c| c.violations > 0).map(|c| c.branch.index()).collect();
        report.checks.push(Check {
            name: format!("{}/K={}/R0={}/eps={:e}", c0.operator, c0.k, c0.r0, c0.epsilon),
            passed: violations == 0 && gauge == 0,
            samples: draws,
            violations: violations + gauge,
            max_error: -worst.min(0.0),
            tolerance: ADVERSARY_SLACK,
            note: format!(
                "min ε⁻²(lhs−rhs) = {worst:.3e}; branch mismatches {mism}; violating branches {bad_branches:?}; proven ε₁ = {:.3e}",
                c0.proven_threshold
            ),
        });
    }
    (report, cells)
}

fn small_game(group: Group, op: OperatorDescriptor, cfg: GameConfig, grid: GridBox) -> Game {
    Game::new(group, op, cfg, grid).expect("suite configuration is valid")
}

fn euclid_grid(h: f64) -> GridBox {
    GridBox::cube(2, -1.0, 1.0, h).expect("valid grid")
}

fn random_layer<R: Rng>(rng: &mut R, grid: GridBox, amplitude: f64) -> ValueLayer {
    let values: Vec<f64> = (0..grid.node_count())
        .map(|i| if grid.is_boundary_node(i) { 0.0 } else { rng.gen_range(-amplitude..=amplitude) })
        .collect();
    ValueLayer::from_parts(grid, values, 0.0, 0.0, amplitude)
}

/// Uniform bound, discount monotonicity, monotonicity in the data for the
/// generic strategy, interpolation range, finite-difference convergence and
/// ε-stability of the measured Lipschitz constants on a small problem.
pub fn regularity_suite(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("regularity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mcf = OperatorDescriptor::mcf(2).expect("m1 = 2");
    let grid = euclid_grid(0.1);

    // uniform bound and monotonicity in the data (fixed control set)
    let mut cfg = GameConfig::new(0.2, 0.2);
    cfg.strategy = Strategy::Generic;
    cfg.n_dir = 8;
    cfg.n_mag = 3;
    cfg.x_dict = XDictionary { a: alloc::vec![-2.0, 0.0, 2.0], b: alloc::vec![-2.0, 0.0, 2.0] };
    let game = small_game(Group::euclidean(2), mcf.clone(), cfg, grid);
    let mut excess = Vec::new();
    let mut order = Vec::new();
    for _ in 0..3 {
        let lo = random_layer(&mut rng, grid, 1.0);
        let bumped: Vec<f64> = lo
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| if grid.is_boundary_node(i) { *v } else { (v + rng.gen_range(0.0..0.5)).min(1.0) })
            .collect();
        let hi = ValueLayer::from_parts(grid, bumped, 0.0, 0.0, 1.0);
        let (a, _) = game.solve(&lo).expect("solve");
        let (b, _) = game.solve(&hi).expect("solve");
        for (la, lb) in a.iter().zip(&b) {
            excess.push((la.sup_norm() - 1.0).max(0.0));
            excess.push((lb.sup_norm() - 1.0).max(0.0));
            for (x, y) in la.values().iter().zip(lb.values()) {
                order.push((x - y).max(0.0));
            }
        }
    }
    report.checks.push(Check::from_errors("uniform-bound".into(), &excess, 1e-9));
    let mut c = Check::from_errors("monotone-in-data".into(), &order, 1e-9);
    c.note = "generic strategy (control set independent of the data)".into();
    report.checks.push(c);

    // discount monotonicity on a nonnegative constant-preserving run
    let mut cfg = GameConfig::new(0.2, 0.4);
    cfg.mu = 1.0;
    let game = small_game(Group::euclidean(2), mcf.clone(), cfg, grid);
    let psi = ValueLayer::build(grid, |_| 1.0, 1.0).expect("constant");
    let (layers, _) = game.solve(&psi).expect("solve");
    let rises: Vec<f64> = layers.windows(2).map(|w| (w[1].value_range().1 - w[0].value_range().1).max(0.0)).collect();
    report.checks.push(Check::from_errors("discount-monotone".into(), &rises, 0.0));

    // interpolation stays within the stencil range
    let layer = random_layer(&mut rng, grid, 1.0);
    let (lo, hi) = layer.value_range();
    let outside: Vec<f64> = (0..2000)
        .map(|_| {
            let p = sampling::point_in_cube(&mut rng, 2, 1.2);
            let v = layer.sample(&p);
            (lo.min(0.0) - v).max(v - hi.max(0.0)).max(0.0)
        })
        .collect();
    report.checks.push(Check::from_errors("interpolation-range".into(), &outside, 0.0));

    // O(δ²) of horizontal finite differences on a non-polynomial function
    let g = Group::heisenberg(1);
    let f = |p: &Point| math::sin(p[0]) * math::cos(p[1]) + 0.3 * p[2] * p[0];
    let p0 = Point::from_slice(&[0.3, -0.2, 0.1]);
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&delta| fd_error(&g, &f, &p0, delta))
        .collect();
    let slopes: Vec<f64> = errs.windows(2).map(|w| math::ln(w[0] / w[1]) / math::ln(2.0)).collect();
    let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    report.checks.push(Check::flag(
        "fd-second-order".into(),
        min_slope >= 1.9,
        format!("errors {errs:?}, slopes {slopes:?}"),
    ));

    // ε-stability of the Lipschitz constants on a smooth bump, for ε ≤ 1/16
    let (cs, ct) = lipschitz_sweep(&[0.05, 0.025], 0.025, 0.06);
    let ratio = |v: &[f64]| {
        let hi = v.iter().copied().fold(0.0f64, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    };
    report.checks.push(Check::flag(
        "lipschitz-space-stable".into(),
        ratio(&cs) <= 2.0,
        format!("C_space {cs:?}"),
    ));
    report.checks.push(Check::flag("lipschitz-time-stable".into(), ratio(&ct) <= 2.0, format!("C_time {ct:?}")));
    report
}

/// Max error of the finite-difference jet of `f` at `p` against a
/// reference with a much smaller step.
fn fd_error(g: &Group, f: &dyn Fn(&Point) -> f64, p: &Point, delta: f64) -> f64 {
    let jet = |d: f64| {
        let m1 = g.horizontal_dim();
        let at = |q: &Point| f(q);
        let step = |i: usize, s: f64| {
            let mut v = HorizontalVector::zeros(m1);
            v[i] = s;
            v
        };
        let u0 = at(p);
        let mut eta = HorizontalVector::zeros(m1);
        let mut hess = SymMatrix::zeros(m1);
        for i in 0..m1 {
            let a = at(&g.translate_horizontal(p, &step(i, d), 1.0));
            let b = at(&g.translate_horizontal(p, &step(i, -d), 1.0));
            eta[i] = (a - b) / (2.0 * d);
            hess.set(i, i, (a - 2.0 * u0 + b) / (d * d));
        }
        (eta, hess)
    };
    let (e1, h1) = jet(delta);
    let (e0, h0) = jet(1e-4);
    let mut err = e1.sub(&e0).norm();
    for i in 0..g.horizontal_dim() {
        err = err.max((h1.get(i, i) - h0.get(i, i)).abs());
    }
    err
}

/// `(C_space, C_time)` per ε for the guided game on a smooth bump in ℝ².
///
/// The bump has amplitude 0.05, so `max(‖ψ‖∞, ‖∇ψ‖∞, ‖∇²ψ‖∞) ≈ 1.05` stays
/// below `ε^{-1/4}` for every ε ≤ 0.2.
pub fn lipschitz_sweep(epsilons: &[f64], h: f64, horizon: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = GridBox::cube(2, -1.5, 1.5, h).expect("valid grid");
    let data = InitialData::SmoothBump { amplitude: 0.05, radius: 1.0 };
    let group = Group::euclidean(2);
    let psi = ValueLayer::build(grid, |p| data.evaluate(p, 2), 0.0).expect("bump");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pairs: Vec<(Point, Point)> = (0..2000)
        .map(|_| {
            let p = sampling::point_in_cube(&mut rng, 2, 1.2);
            let mut q = p;
            q[0] += rng.gen_range(-0.1..0.1);
            q[1] += rng.gen_range(-0.1..0.1);
            (p, q)
        })
        .collect();
    let mut cs = Vec::new();
    let mut ct = Vec::new();
    for &eps in epsilons {
        let cfg = GameConfig::new(eps, horizon);
        let game = small_game(group.clone(), OperatorDescriptor::mcf(2).expect("m1 = 2"), cfg, grid);
        let (layers, _) = game.solve(&psi).expect("solve");
        let (s, t) = oracles::measure_lipschitz(&layers, &group, &pairs, eps, 0.0).expect("two layers");
        cs.push(s);
        ct.push(t);
    }
    (cs, ct)
}

/// Exact-solution residuals, radius measurement on exact data, and the
/// engine-vs-brute-force cross-check.
pub fn oracle_suite(seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // residual u_t + F(∇u, ∇²u) of the exact solutions
    let cases: [(&str, Group, OperatorDescriptor); 3] = [
        ("sphere-mcf", Group::euclidean(2), OperatorDescriptor::mcf(2).expect("m1 = 2")),
        ("cylinder-mcf", Group::heisenberg(1), OperatorDescriptor::mcf(2).expect("m1 = 2")),
        ("pil-exact", Group::heisenberg(1), OperatorDescriptor::pil(2).expect("m1 = 2")),
    ];
    for (name, g, op) in cases {
        let n = g.dim();
        let grid = GridBox::cube(n, -1.5, 1.5, 0.05).expect("grid").with_horizontal_axes(2).expect("axes");
        let t = 0.1;
        let exact = |t: f64, p: &Point| -> f64 {
            match name {
                "pil-exact" => oracles::pil_exact(t, p),
                _ => p[0] * p[0] + p[1] * p[1] + 2.0 * t - 1.0,
            }
        };
        let values: Vec<f64> = (0..grid.node_count()).map(|i| exact(t, &grid.node_point(i))).collect();
        let layer = ValueLayer::from_parts(grid, values, t, 0.0, f64::INFINITY);
        let mut res = Vec::new();
        for _ in 0..200 {
            let mut p = sampling::point_in_cube(&mut rng, n, 1.0);
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2 < 0.25 {
                p[0] += 0.6;
            }
            let jet = layer.horizontal_derivatives(&g, &p, 0.05);
            let ut = (exact(t + 1e-3, &p) - exact(t - 1e-3, &p)) / 2e-3;
            let f = op.evaluate(t, &p, &jet.eta, &jet.hessian).expect("nonzero gradient");
            res.push((ut + f).abs());
        }
        report.checks.push(Check::from_errors(format!("{name}/pde-residual"), &res, 1e-6));
    }

    // radius of exact data within one cell
    let grid = GridBox::cube(2, -1.5, 1.5, 0.02).expect("grid");
    let layer = ValueLayer::build(grid, |p| (p[0] * p[0] + p[1] * p[1] - 1.0).min(1.25), 1.25).expect("datum");
    let r = oracles::measure_zero_level_radius(&layer, &Point::zeros(2), 32).expect("crossing");
    report.checks.push(Check::from_errors("radius-of-exact-datum".into(), &[(r - 1.0).abs()], 0.02));

    let cross = dpp_crosscheck(seed ^ 0xdead_beef, 3, 100);
    report.checks.extend(cross.checks);
    report
}

/// Engine vs [`oracles::bruteforce_dpp_step`] on `nodes` random nodes for
/// each of `configs` random configurations; constant data preserved
/// (`μ = 0`, `ε ≤ 1/16`); uniform bound on every layer.
pub fn dpp_crosscheck(seed: u64, configs: usize, nodes: usize) -> SuiteReport {
    let mut report = SuiteReport::new("dpp");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diffs = Vec::new();
    let mut constant = Vec::new();
    let mut bound = Vec::new();
    let mut labels = Vec::new();
    for c in 0..configs {
        let heis = c % 2 == 1;
        let group = if heis { Group::heisenberg(1) } else { Group::euclidean(2) };
        let op = if rng.gen_bool(0.5) { OperatorDescriptor::mcf(2) } else { OperatorDescriptor::pil(2) }.expect("m1 = 2");
        let grid = if heis {
            GridBox::cube(3, -1.0, 1.0, 0.2).expect("grid").with_horizontal_axes(2).expect("axes")
        } else {
            euclid_grid(0.1)
        };
        let eps = rng.gen_range(0.1..0.3);
        let mut cfg = GameConfig::new(eps, 3.0 * eps * eps);
        cfg.mu = if rng.gen_bool(0.5) { rng.gen_range(0.0..2.0) } else { 0.0 };
        cfg.strategy = if c == 0 { Strategy::Generic } else { Strategy::Guided };
        cfg.n_dir = rng.gen_range(3..8);
        cfg.n_mag = rng.gen_range(1..4);
        cfg.moves = if rng.gen_bool(0.5) {
            MoveLattice::Grid
        } else {
            MoveLattice::Polar { n_dir: rng.gen_range(4..12), n_mag: rng.gen_range(1..4) }
        };
        labels.push(format!("{} {} eps={eps:.3} mu={:.3} {:?} {:?}", group.kind(), op.name(), cfg.mu, cfg.strategy, cfg.moves));
        let game = small_game(group, op, cfg.clone(), grid);

        let u_prev = random_layer(&mut rng, grid, 1.0);
        let t = eps * eps;
        let (next, _) = game.step(&u_prev, t).expect("step");
        for _ in 0..nodes {
            let idx = rng.gen_range(0..grid.node_count());
            let p = grid.node_point(idx);
            let b = oracles::bruteforce_dpp_step(&game, &u_prev, &p, t).expect("brute force");
            diffs.push((b - next.values()[idx]).abs());
        }

        let (layers, _) = game.solve(&u_prev).expect("solve");
        for l in &layers {
            bound.push((l.sup_norm() - 1.0).max(0.0));
        }

        // constants are fixed points only once the gauge ball reaches every
        // direction far enough, i.e. for ε ≤ 1/16
        let small_eps = rng.gen_range(0.04..0.0625);
        let mut zero_mu = cfg.clone();
        zero_mu.mu = 0.0;
        zero_mu.epsilon = small_eps;
        zero_mu.horizon = 3.0 * small_eps * small_eps;
        let fine = 0.02;
        let cgrid = if heis {
            GridBox::new(&[-0.4, -0.4, -0.4], &[0.4, 0.4, 0.4], &[fine, fine, 0.2])
                .and_then(|g| g.with_horizontal_axes(2))
                .expect("grid")
        } else {
            GridBox::cube(2, -0.4, 0.4, fine).expect("grid")
        };
        let game = small_game(game.group().clone(), game.operator().clone(), zero_mu, cgrid);
        let value = rng.gen_range(-2.0..2.0);
        let psi = ValueLayer::build(cgrid, |_| value, value).expect("constant");
        let (layers, _) = game.solve(&psi).expect("solve");
        for l in &layers {
            constant.push(l.values().iter().fold(0.0f64, |m, v| m.max((v - value).abs())));
            bound.push((l.sup_norm() - value.abs()).max(0.0));
        }
    }
    let mut c = Check::from_errors("engine-vs-bruteforce".into(), &diffs, 1e-12);
    c.note = labels.join("; ");
    report.checks.push(c);
    report.checks.push(Check::from_errors("constant-preserved".into(), &constant, 1e-8));
    report.checks.push(Check::from_errors("uniform-bound".into(), &bound, 1e-9));
    report
}

/// Runs a suite by name.
pub fn run_suite(name: &str, seed: u64) -> Option<SuiteReport> {
    match name {
        "algebra" => Some(algebra_suite(1000, seed)),
        "operators" => Some(operators_suite(100_000, seed)),
        "adversary" => Some(adversary_suite(1000, seed).0),
        "regularity" => Some(regularity_suite(seed)),
        "oracle" => Some(oracle_suite(seed)),
        _ => None,
    }
}

pub const SUITE_NAMES: [&str; 5] = ["algebra", "operators", "adversary", "regularity", "oracle"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_algebra_suite_passes() {
        let r = algebra_suite(50, 1);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn small_operator_suite_passes() {
        let r = operators_suite(2000, 2);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn draws_hit_their_branch() {
        let cells = adversary_cells(20, 3);
        let mism: u64 = cells.iter().map(|c| c.branch_mismatches).sum();
        assert_eq!(mism, 0);
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", 0).is_none());
    }
}
