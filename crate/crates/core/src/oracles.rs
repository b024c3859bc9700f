//! Exact solutions, brute-force cross-checks and measurement utilities.

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{Group, Point};
use crate::error::{Error, Result};
use crate::game::{running_cost, Control, Game, Move};
use crate::grid::ValueLayer;
use crate::linalg::HorizontalVector;
use crate::math;

/// Radius of a shrinking sphere in `ℝ^{m1}` under mean curvature flow:
/// `sqrt(r0² − 2(m1−1)t)`.
pub fn euclidean_sphere_radius(t: f64, r0: f64, m1: usize) -> Result<f64> {
    if m1 < 2 {
        return Err(Error::Config(format!("sphere flow needs m1 >= 2, got {m1}")));
    }
    let t_ext = r0 * r0 / (2.0 * (m1 as f64 - 1.0));
    if t > t_ext {
        return Err(Error::PastExtinction { t, t_ext });
    }
    Ok(math::sqrt((r0 * r0 - 2.0 * (m1 as f64 - 1.0) * t).max(0.0)))
}

/// Radius of the vertical cylinder `p₁² + p₂² = r²` in `ℍ¹` under horizontal
/// mean curvature flow: `sqrt(r0² − 2t)`.
pub fn heisenberg_cylinder_radius(t: f64, r0: f64) -> Result<f64> {
    let t_ext = r0 * r0 / 2.0;
    if t > t_ext {
        return Err(Error::PastExtinction { t, t_ext });
    }
    Ok(math::sqrt((r0 * r0 - 2.0 * t).max(0.0)))
}

/// `p₁² + p₂² + 2t`, a classical solution of the normalized parabolic
/// infinity Laplacian in `ℍ¹` away from the vertical axis.
pub fn pil_exact(t: f64, p: &Point) -> f64 {
    p[0] * p[0] + p[1] * p[1] + 2.0 * t
}

/// Zero-level-set radius time series.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadialProfile {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
}

impl RadialProfile {
    pub fn push(&mut self, t: f64, r: f64) -> Result<()> {
        if !(r >= 0.0) {
            return Err(Error::Contract(format!("negative radius {r}")));
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Contract(format!("times must increase ({t} after {last})")));
            }
        }
        self.times.push(t);
        self.radii.push(r);
        Ok(())
    }
}

/// Outcome of a zero-level radius measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusMeasurement {
    /// Mean radius over the rays that crossed the level set.
    pub radius: f64,
    pub rays_used: usize,
    /// Rays that left the box without a sign change.
    pub rays_excluded: usize,
}

/// Mean over `n_rays` horizontal rays from `center` (in the plane of the
/// first two coordinates) of the first root of the layer along each ray.
/// The layer is read through biquadratic interpolation, roots are bracketed
/// on a quarter-cell walk and refined by bisection.
pub fn measure_zero_level_radius(layer: &ValueLayer, center: &Point, n_rays: usize) -> Result<f64> {
    measure_zero_level(layer, center, n_rays).map(|m| m.radius)
}

/// As [`measure_zero_level_radius`], with ray counts.
pub fn measure_zero_level(layer: &ValueLayer, center: &Point, n_rays: usize) -> Result<RadiusMeasurement> {
    let grid = layer.grid();
    if center.dim() != grid.dim() || grid.dim() < 2 {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: center.dim() });
    }
    let dr = 0.25 * grid.spacing()[0].min(grid.spacing()[1]);
    let reach = (0..2)
        .map(|a| grid.hi()[a] - grid.lo()[a])
        .fold(0.0f64, f64::max);
    let n_steps = math::floor(reach / dr) as usize + 1;
    let n_rays = n_rays.max(1);
    let mut sum = 0.0;
    let mut found = 0usize;
    for k in 0..n_rays {
        let theta = 2.0 * core::f64::consts::PI * k as f64 / n_rays as f64;
        let (c, s) = (math::cos(theta), math::sin(theta));
        let at = |r: f64| {
            let mut q = *center;
            q[0] += r * c;
            q[1] += r * s;
            q
        };
        let f = |r: f64| sample_biquadratic(layer, &at(r));
        let mut prev = f(0.0);
        for i in 1..=n_steps {
            let r = i as f64 * dr;
            if !grid.contains(&at(r)) {
                break;
            }
            let v = f(r);
            if prev == 0.0 {
                sum += r - dr;
                found += 1;
                break;
            }
            if (prev < 0.0) != (v < 0.0) || v == 0.0 {
                sum += bisect(&f, r - dr, r, prev);
                found += 1;
                break;
            }
            prev = v;
        }
    }
    if found == 0 {
        return Err(Error::NoLevelCrossing);
    }
    Ok(RadiusMeasurement { radius: sum / found as f64, rays_used: found, rays_excluded: n_rays - found })
}

/// Root of `f` in `[a, b]` given `f(a) = fa` and a sign change on the bracket.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) != (fm < 0.0) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Tensor-product quadratic interpolation in axes 0 and 1 through the 3×3
/// nodes nearest `q` (multilinear in the remaining axes). Exact for data
/// quadratic in the first two coordinates.
fn sample_biquadratic(layer: &ValueLayer, q: &Point) -> f64 {
    let grid = layer.grid();
    let mut base = [0usize; 2];
    let mut s = [0.0f64; 2];
    for a in 0..2 {
        let n = grid.nodes_per_axis()[a];
        if n < 3 {
            return layer.sample(q);
        }
        let x = (q[a] - grid.lo()[a]) / grid.spacing()[a];
        let i = (math::round(x) as i64).clamp(1, n as i64 - 2) as usize;
        base[a] = i - 1;
        s[a] = x - i as f64;
    }
    let weights = |t: f64| [0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)];
    let (wx, wy) = (weights(s[0]), weights(s[1]));
    let mut acc = 0.0;
    for (i, wi) in wx.iter().enumerate() {
        for (j, wj) in wy.iter().enumerate() {
            let mut node = *q;
            node[0] = grid.lo()[0] + (base[0] + i) as f64 * grid.spacing()[0];
            node[1] = grid.lo()[1] + (base[1] + j) as f64 * grid.spacing()[1];
            acc += wi * wj * layer.sample(&node);
        }
    }
    acc
}

/// Empirical regularity constants of a sequence of layers `u(kε², ·)`:
///
/// * `C_space = max |u_k(p) − u_k(p̂)| / |p·p̂⁻¹|_𝔾` over the pairs and all
///   layers (pairs with `p = p̂` are skipped);
/// * `C_time = max |u_k(p) − u_{k−1}(p)| / (ε² (1+με²)^{−k})` over all
///   nodes and `k ≥ 1`.
pub fn measure_lipschitz(
    layers: &[ValueLayer],
    group: &Group,
    pairs: &[(Point, Point)],
    epsilon: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    if layers.len() < 2 {
        return Err(Error::Contract("need at least two layers".into()));
    }
    let mut c_space = 0.0f64;
    for layer in layers {
        for (p, q) in pairs {
            let d = group.gauge(&group.mul_unchecked(p, &group.inverse(q)));
            if d == 0.0 {
                continue;
            }
            c_space = c_space.max((layer.sample(p) - layer.sample(q)).abs() / d);
        }
    }
    let e2 = epsilon * epsilon;
    let mut c_time = 0.0f64;
    for k in 1..layers.len() {
        let scale = e2 * math::powf(1.0 / (1.0 + mu * e2), k as f64);
        let diff = layers[k]
            .values()
            .iter()
            .zip(layers[k - 1].values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        c_time = c_time.max(diff / scale);
    }
    Ok((c_space, c_time))
}

/// Naive `sup` over the move set for one control: every move is translated
/// with the checked group law, sampled and priced with [`running_cost`].
/// Returns the value and a maximizing move.
pub fn bruteforce_sup(
    game: &Game,
    u_prev: &ValueLayer,
    p: &Point,
    t: f64,
    control: &Control,
) -> Result<(f64, Move)> {
    let g = game.group();
    let eps = game.config().epsilon;
    let mut candidates: Vec<Move> = game.moves().to_vec();
    if let Some(nu) = game.adversary_move(control) {
        candidates.push(nu);
    }
    let mut best = (f64::NEG_INFINITY, HorizontalVector::zeros(g.horizontal_dim()));
    for nu in candidates {
        let q = g.multiply(p, &g.dilate(&Point::horizontal(&nu, g.dim()), eps))?;
        let v = u_prev.sample(&q) + running_cost(game.operator(), eps, t, p, &nu, control)?;
        if v > best.0 {
            best = (v, nu);
        }
    }
    Ok(best)
}

/// Naive DPP value at one node: `min` over controls of [`bruteforce_sup`],
/// discounted and clamped to the uniform bound.
pub fn bruteforce_dpp_step(game: &Game, u_prev: &ValueLayer, p: &Point, t: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for c in game.player1_controls(u_prev, p) {
        let (v, _) = bruteforce_sup(game, u_prev, p, t, &c)?;
        if v < best {
            best = v;
        }
    }
    let cfg = game.config();
    let discounted = best / (1.0 + cfg.mu * cfg.epsilon * cfg.epsilon);
    Ok(crate::game::enforce_bound(discounted, u_prev.bound()).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameConfig;
    use crate::grid::GridBox;
    use crate::operators::OperatorDescriptor;

    fn euclid_game(cfg: GameConfig) -> (Game, GridBox) {
        let g = Group::euclidean(2);
        let grid = GridBox::cube(2, -1.0, 1.0, 0.05).unwrap();
        let op = OperatorDescriptor::mcf(2).unwrap();
        (Game::new(g, op, cfg, grid).unwrap(), grid)
    }

    #[test]
    fn radius_laws() {
        assert_eq!(euclidean_sphere_radius(0.0, 1.0, 2).unwrap(), 1.0);
        assert!((euclidean_sphere_radius(0.25, 1.0, 2).unwrap() - math::sqrt(0.5)).abs() < 1e-15);
        assert!((euclidean_sphere_radius(0.1, 1.0, 3).unwrap() - math::sqrt(0.6)).abs() < 1e-15);
        assert_eq!(heisenberg_cylinder_radius(0.125, 0.5).unwrap(), 0.0);
        assert!(matches!(heisenberg_cylinder_radius(0.2, 0.5), Err(Error::PastExtinction { .. })));
        assert!(euclidean_sphere_radius(0.6, 1.0, 2).is_err());
    }

    #[test]
    fn pil_examples() {
        assert_eq!(pil_exact(0.0, &Point::from_slice(&[1.0, 0.0, 0.0])), 1.0);
        assert_eq!(pil_exact(0.5, &Point::from_slice(&[0.0, 0.0, 7.0])), 1.0);
    }

    #[test]
    fn radius_of_exact_datum() {
        let grid = GridBox::cube(2, -1.5, 1.5, 0.02).unwrap();
        let layer = ValueLayer::build(grid, |p| (p[0] * p[0] + p[1] * p[1] - 1.0).min(1.25), 1.25).unwrap();
        let r = measure_zero_level_radius(&layer, &Point::zeros(2), 16).unwrap();
        assert!((r - 1.0).abs() < 0.02);
        let shifted = ValueLayer::build(grid, |p| (p[0] * p[0] + p[1] * p[1] - 0.9).min(1.25), 1.25).unwrap();
        assert!(measure_zero_level_radius(&shifted, &Point::zeros(2), 16).unwrap() < r);
    }

    #[test]
    fn biquadratic_reproduces_quadratics() {
        let grid = GridBox::cube(3, -1.0, 1.0, 0.1).unwrap();
        let f = |p: &Point| 0.3 * p[0] * p[0] - p[0] * p[1] + 2.0 * p[1] * p[1] + p[0] - 0.5;
        let values = (0..grid.node_count()).map(|i| f(&grid.node_point(i))).collect();
        let layer = ValueLayer::from_parts(grid, values, 0.0, 0.0, f64::INFINITY);
        for q in [[0.013, -0.377, 0.2], [0.95, 0.96, -0.4], [-0.999, 0.5, 0.0]] {
            let q = Point::from_slice(&q);
            assert!((sample_biquadratic(&layer, &q) - f(&q)).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_counts_rays() {
        let grid = GridBox::cube(2, -1.0, 1.0, 0.05).unwrap();
        let values = (0..grid.node_count())
            .map(|i| {
                let p = grid.node_point(i);
                p[0] * p[0] + p[1] * p[1] - 0.36
            })
            .collect();
        let layer = ValueLayer::from_parts(grid, values, 0.0, 1.0, f64::INFINITY);
        let m = measure_zero_level(&layer, &Point::zeros(2), 12).unwrap();
        assert_eq!((m.rays_used, m.rays_excluded), (12, 0));
        assert!((m.radius - 0.6).abs() < 1e-9);
        let off = measure_zero_level(&layer, &Point::from_slice(&[0.6, 0.0]), 8).unwrap();
        assert!(off.rays_excluded > 0 && off.rays_used > 0);
    }

    #[test]
    fn no_crossing_is_an_error() {
        let grid = GridBox::cube(2, -1.0, 1.0, 0.1).unwrap();
        let layer = ValueLayer::build(grid, |_| 1.0, 1.0).unwrap();
        assert!(matches!(measure_zero_level_radius(&layer, &Point::zeros(2), 8), Err(Error::NoLevelCrossing)));
    }

    #[test]
    fn lipschitz_of_constant_layers() {
        let grid = GridBox::cube(2, -1.0, 1.0, 0.1).unwrap();
        let layer = ValueLayer::build(grid, |_| 1.0, 1.0).unwrap();
        let pairs = [(Point::from_slice(&[0.1, 0.2]), Point::from_slice(&[0.1, 0.2])), (Point::zeros(2), Point::from_slice(&[0.5, 0.0]))];
        let (s, t) = measure_lipschitz(&[layer.clone(), layer], &Group::euclidean(2), &pairs, 0.1, 0.0).unwrap();
        assert_eq!((s, t), (0.0, 0.0));
    }

    #[test]
    fn bruteforce_matches_engine_on_constant() {
        let (game, grid) = euclid_game(GameConfig::new(0.1, 0.1));
        let psi = ValueLayer::build(grid, |_| 0.7, 0.7).unwrap();
        let p = Point::from_slice(&[0.2, 0.3]);
        assert_eq!(bruteforce_dpp_step(&game, &psi, &p, 0.01).unwrap(), 0.7);
    }

    #[test]
    fn fast_sup_matches_bruteforce() {
        let (game, grid) = euclid_game(GameConfig::new(0.1, 0.1));
        let psi = ValueLayer::build(grid, |p| (p[0] * p[0] + p[1] * p[1] - 0.25).min(0.5), 0.5).unwrap();
        for p in [Point::from_slice(&[0.3, -0.2]), Point::from_slice(&[0.0, 0.0]), Point::from_slice(&[0.9, 0.95])] {
            for (c, v) in game.control_values(&psi, &p, 0.01) {
                let (b, _) = bruteforce_sup(&game, &psi, &p, 0.01, &c).unwrap();
                assert_eq!(v, b);
            }
        }
    }
}
