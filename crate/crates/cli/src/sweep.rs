//! `sweep`: convergence table over `epsilon` or `h`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use carnot_core::oracles::{measure_zero_level_radius, pil_exact};
use carnot_core::{GroupKind, InitialData, OperatorKind, Point, ValueLayer};

use crate::config::{Axes, RunConfig};
use crate::solve::{exact_radius, execute};
use crate::ConfigError;

/// Band `r² ∈ [0.25, 0.81]` where the parabolic infinity Laplacian run is
/// compared with its exact solution.
pub const PIL_BAND: (f64, f64) = (0.25, 0.81);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Epsilon,
    H,
}

impl FromStr for SweepParam {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "epsilon" => Ok(Self::Epsilon),
            "h" => Ok(Self::H),
            _ => Err(ConfigError(format!("unknown sweep parameter `{s}` (expected epsilon or h)"))),
        }
    }
}

/// How the error column of a sweep is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMetric {
    /// Relative zero-level radius error against the exact law at `T`.
    Radius,
    /// Interior L∞ error against the exact infinity-Laplacian solution.
    PilInterior,
    /// L∞ distance to the previous row's final layer (first row empty).
    SuccessiveDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub error: Option<f64>,
}

pub fn metric_for(cfg: &RunConfig) -> Result<ErrorMetric> {
    let p = cfg.resolve()?;
    let metric = match p.operator.kind() {
        OperatorKind::Mcf if exact_radius(&p, cfg.game.horizon).is_some() => ErrorMetric::Radius,
        OperatorKind::Pil
            if matches!(p.group.kind(), GroupKind::Heisenberg(1) | GroupKind::Euclidean(2))
                && matches!(p.data, InitialData::CappedQuadratic { .. }) =>
        {
            ErrorMetric::PilInterior
        }
        _ => ErrorMetric::SuccessiveDifference,
    };
    Ok(metric)
}

/// Largest `|u − (r² + 2t + offset)|` over nodes with `r²` in [`PIL_BAND`].
pub fn pil_interior_error(layer: &ValueLayer, t: f64, offset: f64) -> f64 {
    let grid = layer.grid();
    layer
        .values()
        .iter()
        .enumerate()
        .filter_map(|(idx, u)| {
            let p = grid.node_point(idx);
            let r2 = p[0] * p[0] + p[1] * p[1];
            (r2 >= PIL_BAND.0 && r2 <= PIL_BAND.1).then(|| (u - pil_exact(t, &p) - offset).abs())
        })
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &ValueLayer, b: &ValueLayer) -> Option<f64> {
    let grid = b.grid();
    if a.grid() == grid {
        return Some(a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    // different grids: compare at the nodes of the coarser one
    let (coarse, fine) = if a.grid().node_count() <= grid.node_count() { (a, b) } else { (b, a) };
    let g = coarse.grid();
    Some(
        coarse
            .values()
            .iter()
            .enumerate()
            .map(|(idx, v)| (v - fine.sample(&g.node_point(idx))).abs())
            .fold(0.0, f64::max),
    )
}

/// Runs `cfg` once per value, without writing layer files.
pub fn sweep_rows(cfg: &RunConfig, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(ConfigError("sweep needs at least one value".into()).into());
    }
    let metric = metric_for(cfg)?;
    let mut rows = Vec::with_capacity(values.len());
    let mut prev: Option<ValueLayer> = None;
    for &value in values {
        let mut run = cfg.clone();
        match param {
            SweepParam::Epsilon => run.game.epsilon = value,
            SweepParam::H => run.grid.h = Axes::All(value),
        }
        run.output.track_radius = false;
        let problem = run.resolve()?;
        let outcome = execute(&run, None)?;
        let layer = outcome.final_layer;
        let horizon = run.game.horizon;
        let error = match metric {
            ErrorMetric::Radius => {
                let exact = exact_radius(&problem, horizon).context("exact radius")?;
                let center = match &run.output.center {
                    Some(c) => Point::from_slice(c),
                    None => Point::zeros(problem.grid.dim()),
                };
                let r = measure_zero_level_radius(&layer, &center, run.output.n_rays)?;
                Some((r - exact).abs() / exact)
            }
            ErrorMetric::PilInterior => {
                let offset = match problem.data {
                    InitialData::CappedQuadratic { offset, .. } => offset,
                    _ => 0.0,
                };
                Some(pil_interior_error(&layer, horizon, offset))
            }
            ErrorMetric::SuccessiveDifference => prev.as_ref().and_then(|p| max_abs_diff(p, &layer)),
        };
        rows.push(SweepRow { value, error });
        prev = Some(layer);
    }
    Ok(rows)
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut s = String::from("value,error\n");
    for r in rows {
        let e = r.error.map(|e| format!("{e:.16e}")).unwrap_or_default();
        writeln!(s, "{:.16e},{e}", r.value).unwrap();
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// `sweep <config> --param <name> --values <list>`: writes `sweep.csv` to
/// `out_dir` (or `output.dir`).
pub fn run_sweep(config_path: &Path, param: SweepParam, values: &[f64], out_dir: Option<&Path>) -> Result<Vec<SweepRow>> {
    let cfg = RunConfig::load(config_path)?;
    let rows = sweep_rows(&cfg, param, values)?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone().into());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_sweep(&dir.join("sweep.csv"), &rows)?;
    Ok(rows)
}
