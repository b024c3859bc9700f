//! Artifact writers: layer and radius CSVs, the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use carnot_core::ValueLayer;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::RunConfig;

pub fn layer_file_name(k: usize) -> String {
    format!("layer_{k:05}.csv")
}

/// `t,x1,…,xN,u`, one row per node in flat index order.
pub fn write_layer(path: &Path, layer: &ValueLayer) -> Result<()> {
    let grid = layer.grid();
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("t");
    for a in 1..=grid.dim() {
        write!(header, ",x{a}").unwrap();
    }
    writeln!(w, "{header},u")?;
    let t = layer.t();
    let mut line = String::new();
    for (idx, u) in layer.values().iter().enumerate() {
        line.clear();
        write!(line, "{t:.16e}").unwrap();
        for x in grid.node_point(idx).coords() {
            write!(line, ",{x:.16e}").unwrap();
        }
        writeln!(line, ",{u:.16e}").unwrap();
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// One row of `radius.csv`. `r_exact` and `rel_err` are empty when no exact
/// law applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusRow {
    pub t: f64,
    pub r_measured: f64,
    pub r_exact: Option<f64>,
}

impl RadiusRow {
    pub fn rel_err(&self) -> Option<f64> {
        self.r_exact.filter(|r| *r > 0.0).map(|r| (self.r_measured - r).abs() / r)
    }
}

pub fn write_radius(path: &Path, rows: &[RadiusRow]) -> Result<()> {
    let mut s = String::from("t,r_measured,r_exact,rel_err\n");
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in rows {
        writeln!(s, "{:.16e},{:.16e},{},{}", r.t, r.r_measured, opt(r.r_exact), opt(r.rel_err())).unwrap();
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// SHA-256 of the canonical JSON form of the configuration, as hex.
pub fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(cfg.canonical().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ManifestDiagnostics {
    pub steps: usize,
    pub nodes_updated: u64,
    pub off_box_samples: u64,
    pub off_box_stencils: u64,
    pub bound_clamps: u64,
    pub max_bound_excess: f64,
    pub excluded_rays: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub diagnostics: ManifestDiagnostics,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).context("serializing manifest")?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use carnot_core::GridBox;

    #[test]
    fn layer_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridBox::cube(2, 0.0, 1.0, 0.5).unwrap();
        let layer = ValueLayer::build(grid, |_| 3.0, 3.0).unwrap();
        let path = dir.path().join(layer_file_name(7));
        write_layer(&path, &layer).unwrap();
        assert!(path.ends_with("layer_00007.csv"));
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,u");
        assert_eq!(lines.len(), 10);
        let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row, vec![0.0, 0.0, 0.0, 3.0]);
    }

    #[test]
    fn radius_rows_without_exact_law() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("radius.csv");
        let rows = [
            RadiusRow { t: 0.0, r_measured: 1.0, r_exact: Some(1.0) },
            RadiusRow { t: 0.1, r_measured: 0.9, r_exact: None },
        ];
        write_radius(&path, &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].ends_with(",0.0000000000000000e0"));
        assert!(lines[2].ends_with(",,"));
    }
}
