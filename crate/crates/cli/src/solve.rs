//! `solve`: run the game scheme end to end and emit artifacts.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use carnot_core::game::Game;
use carnot_core::oracles::{euclidean_sphere_radius, heisenberg_cylinder_radius, measure_zero_level};
use carnot_core::{Error, GroupKind, InitialData, OperatorKind, Point, ValueLayer};

use crate::config::{Problem, RunConfig};
use crate::output::{config_hash, layer_file_name, write_layer, write_radius, ManifestDiagnostics, RadiusRow, RunManifest};

/// The zero level set must stay this many cells inside the box.
const SHELL_MARGIN_CELLS: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub manifest: RunManifest,
    pub final_layer: ValueLayer,
    pub radius: Vec<RadiusRow>,
}

/// Initial radius of the zero level set, when the datum has one.
pub fn initial_radius(data: &InitialData) -> Option<f64> {
    match *data {
        InitialData::QuadraticCylinder { radius, .. } => Some(radius),
        InitialData::CappedQuadratic { offset, .. } if offset < 0.0 => Some((-offset).sqrt()),
        _ => None,
    }
}

/// Exact radius at time `t` for mean curvature flow of a round cylinder on
/// the groups where a closed form is known.
pub fn exact_radius(problem: &Problem, t: f64) -> Option<f64> {
    if !matches!(problem.operator.kind(), OperatorKind::Mcf) {
        return None;
    }
    let r0 = initial_radius(&problem.data)?;
    let g = &problem.group;
    let r = match g.kind() {
        GroupKind::Euclidean(n) => euclidean_sphere_radius(t, r0, n),
        GroupKind::Heisenberg(1) => heisenberg_cylinder_radius(t, r0),
        _ => return None,
    };
    r.ok()
}

fn build_psi(problem: &Problem) -> Result<ValueLayer> {
    let m1 = problem.group.horizontal_dim();
    let data = problem.data;
    ValueLayer::build(problem.grid, |p| data.evaluate(p, m1), data.far_field()).map_err(config_error)
}

fn config_error(e: Error) -> anyhow::Error {
    crate::ConfigError(e.to_string()).into()
}

/// Runs `cfg`, writing artifacts below `out_dir` when given.
pub fn execute(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<SolveOutcome> {
    let started = Instant::now();
    let problem = cfg.resolve()?;
    let game = Game::new(problem.group.clone(), problem.operator.clone(), problem.game.clone(), problem.grid)
        .map_err(config_error)?;
    let psi = build_psi(&problem)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let out = &cfg.output;
    let steps = problem.game.steps();
    let center = match &out.center {
        Some(c) => Point::from_slice(c),
        None => Point::zeros(problem.grid.dim()),
    };
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let mut radius = Vec::new();
    let mut excluded_rays = 0u64;
    let mut near_shell = false;
    let mut lost_level_set = false;

    let (final_layer, diag) = game.solve_with(&psi, |k, layer, _| {
        if out.track_radius {
            match measure_zero_level(layer, &center, out.n_rays) {
                Ok(m) => {
                    excluded_rays += m.rays_excluded as u64;
                    radius.push(RadiusRow { t: layer.t(), r_measured: m.radius, r_exact: exact_radius(&problem, layer.t()) });
                    let grid = layer.grid();
                    let margin = (0..2)
                        .flat_map(|a| [1.0, -1.0].map(|s| (a, s)))
                        .map(|(a, s)| {
                            let mut q = center;
                            q[a] += s * m.radius;
                            grid.cells_to_boundary(&q)
                        })
                        .fold(f64::INFINITY, f64::min);
                    if margin < SHELL_MARGIN_CELLS && !near_shell {
                        near_shell = true;
                        warnings.push(format!(
                            "zero level set within {margin:.1} cells of the box boundary at t = {}",
                            layer.t()
                        ));
                    }
                }
                Err(Error::NoLevelCrossing) => {
                    if !lost_level_set {
                        lost_level_set = true;
                        warnings.push(format!("no zero level crossing from t = {}", layer.t()));
                    }
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(dir) = out_dir {
            if out.write_layers && (k % out.stride == 0 || k == steps) {
                let name = layer_file_name(k);
                write_layer(&dir.join(&name), layer).map_err(|e| Error::Contract(format!("{e:#}")))?;
                files.push(name);
            }
        }
        Ok(())
    })?;

    if diag.off_box_samples > 0 {
        warnings.push(format!("{} move samples left the box and read the far-field value", diag.off_box_samples));
    }
    if let Some(dir) = out_dir {
        if out.track_radius {
            write_radius(&dir.join("radius.csv"), &radius)?;
            files.push("radius.csv".into());
        }
        files.push("manifest.toml".into());
    }
    let manifest = RunManifest {
        config_hash: config_hash(cfg),
        wall_time_s: started.elapsed().as_secs_f64(),
        files,
        warnings,
        diagnostics: ManifestDiagnostics {
            steps: diag.steps,
            nodes_updated: diag.nodes,
            off_box_samples: diag.off_box_samples,
            off_box_stencils: diag.off_box_stencils,
            bound_clamps: diag.bound_clamps,
            max_bound_excess: diag.max_bound_excess,
            excluded_rays,
        },
        config: cfg.clone(),
    };
    if let Some(dir) = out_dir {
        manifest.write(&dir.join("manifest.toml"))?;
    }
    Ok(SolveOutcome { manifest, final_layer, radius })
}

/// `solve <config>`: artifacts go to `out_dir`, or `output.dir` if `None`.
pub fn run_solve(config_path: &Path, out_dir: Option<&Path>) -> Result<SolveOutcome> {
    let cfg = RunConfig::load(config_path)?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone().into());
    execute(&cfg, Some(&dir))
}
