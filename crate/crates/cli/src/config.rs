//! Run configuration file.

use std::path::Path;

use carnot_core::{
    GameConfig, GridBox, Group, InitialData, MoveLattice, OperatorDescriptor, Strategy, XDictionary,
};
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupSection,
    pub operator: OperatorSection,
    pub game: GameSection,
    pub grid: GridSection,
    pub initial_data: DataSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    /// `euclidean:N`, `heisenberg:n` or `engel`.
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    /// `mcf` or `pil`.
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub epsilon: f64,
    #[serde(default)]
    pub mu: f64,
    pub horizon: f64,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_dir: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_mag: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_min: Option<f64>,
    /// `grid` or `polar`.
    #[serde(default = "default_moves")]
    pub moves: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_dirs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_mags: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_dict_a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_dict_b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary_moves: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

fn default_strategy() -> String {
    "guided".into()
}

fn default_moves() -> String {
    "grid".into()
}

/// A per-axis quantity given either once for all axes or as a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axes {
    All(f64),
    Each(Vec<f64>),
}

impl Axes {
    fn expand(&self, dim: usize, what: &str) -> Result<Vec<f64>, ConfigError> {
        match self {
            Axes::All(v) => Ok(vec![*v; dim]),
            Axes::Each(v) if v.len() == dim => Ok(v.clone()),
            Axes::Each(v) => Err(ConfigError(format!("grid.{what} has {} entries, the group has dimension {dim}", v.len()))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: Axes,
    pub hi: Axes,
    pub h: Axes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// `constant`, `quadratic-cylinder`, `capped-quadratic` or `smooth-bump`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_true")]
    pub write_layers: bool,
    #[serde(default)]
    pub track_radius: bool,
    #[serde(default = "default_rays")]
    pub n_rays: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

fn default_dir() -> String {
    "out".into()
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_rays() -> usize {
    64
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            stride: default_stride(),
            write_layers: true,
            track_radius: false,
            n_rays: default_rays(),
            center: None,
        }
    }
}

/// Everything the engine needs, resolved from a [`RunConfig`].
#[derive(Clone, Debug)]
pub struct Problem {
    pub group: Group,
    pub operator: OperatorDescriptor,
    pub game: GameConfig,
    pub grid: GridBox,
    pub data: InitialData,
}

fn core_err(e: carnot_core::Error) -> ConfigError {
    ConfigError(e.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical serialization used for hashing and echoing.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn resolve(&self) -> Result<Problem, ConfigError> {
        let group = Group::from_name(&self.group.name).map_err(core_err)?;
        let m1 = group.horizontal_dim();
        let operator = OperatorDescriptor::from_name(&self.operator.name, m1).map_err(core_err)?;

        let g = &self.game;
        let mut game = GameConfig::new(g.epsilon, g.horizon);
        game.mu = g.mu;
        game.strategy = match g.strategy.as_str() {
            "guided" => Strategy::Guided,
            "generic" => Strategy::Generic,
            s => return Err(ConfigError(format!("unknown strategy `{s}`"))),
        };
        if let Some(v) = g.n_dir {
            game.n_dir = v;
        }
        if let Some(v) = g.n_mag {
            game.n_mag = v;
        }
        if let Some(v) = g.eta_min {
            game.eta_min = v;
        }
        game.moves = match g.moves.as_str() {
            "grid" => {
                if g.move_dirs.is_some() || g.move_mags.is_some() {
                    return Err(ConfigError("move_dirs/move_mags only apply to the polar lattice".into()));
                }
                MoveLattice::Grid
            }
            "polar" => MoveLattice::Polar { n_dir: g.move_dirs.unwrap_or(16), n_mag: g.move_mags.unwrap_or(4) },
            s => return Err(ConfigError(format!("unknown move lattice `{s}`"))),
        };
        let defaults = XDictionary::default();
        game.x_dict = XDictionary {
            a: g.x_dict_a.clone().unwrap_or(defaults.a),
            b: g.x_dict_b.clone().unwrap_or(defaults.b),
        };
        if let Some(v) = g.adversary_moves {
            game.adversary_moves = v;
        }
        game.fd_step = g.fd_step;
        game.validate().map_err(core_err)?;

        let dim = group.dim();
        let lo = self.grid.lo.expand(dim, "lo")?;
        let hi = self.grid.hi.expand(dim, "hi")?;
        let h = self.grid.h.expand(dim, "h")?;
        let grid = GridBox::new(&lo, &hi, &h).and_then(|b| b.with_horizontal_axes(m1)).map_err(core_err)?;

        let d = &self.initial_data;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| ConfigError(format!("initial_data `{}` needs `{name}`", d.kind)))
        };
        let data = match d.kind.as_str() {
            "constant" => InitialData::Constant { value: need(d.value, "value")? },
            "quadratic-cylinder" => InitialData::QuadraticCylinder {
                radius: need(d.radius, "radius")?,
                cap: need(d.cap, "cap")?,
                scale: d.scale.unwrap_or(1.0),
            },
            "capped-quadratic" => {
                InitialData::CappedQuadratic { cap: need(d.cap, "cap")?, offset: d.offset.unwrap_or(0.0) }
            }
            "smooth-bump" => InitialData::SmoothBump {
                amplitude: need(d.amplitude, "amplitude")?,
                radius: need(d.radius, "radius")?,
            },
            k => return Err(ConfigError(format!("unknown initial data kind `{k}`"))),
        };
        data.validate().map_err(core_err)?;

        let o = &self.output;
        if o.stride == 0 {
            return Err(ConfigError("output.stride must be positive".into()));
        }
        if let Some(c) = &o.center {
            if c.len() != dim {
                return Err(ConfigError(format!("output.center has {} entries, expected {dim}", c.len())));
            }
        }
        if o.track_radius && o.n_rays == 0 {
            return Err(ConfigError("output.n_rays must be positive".into()));
        }
        Ok(Problem { group, operator, game, grid, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[group]
name = "euclidean:2"
[operator]
name = "mcf"
[game]
epsilon = 0.2
horizon = 0.04
[grid]
lo = -1.0
hi = 1.0
h = 0.1
[initial_data]
kind = "constant"
value = 2.0
"#;

    #[test]
    fn minimal_config_resolves() {
        let cfg = RunConfig::from_toml(BASE).unwrap();
        let p = cfg.resolve().unwrap();
        assert_eq!(p.grid.dim(), 2);
        assert_eq!(p.game.steps(), 1);
        assert_eq!(cfg.output.stride, 1);
    }

    #[test]
    fn missing_group_name_is_rejected() {
        let text = BASE.replace("name = \"euclidean:2\"", "");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("horizon = 0.04", "horizon = 0.04\nhorizn = 1.0");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn per_axis_lists_must_match_dimension() {
        let text = BASE.replace("h = 0.1", "h = [0.1, 0.1, 0.1]");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn canonical_form_tracks_every_field() {
        let a = RunConfig::from_toml(BASE).unwrap();
        let mut b = a.clone();
        assert_eq!(a.canonical(), b.canonical());
        b.game.mu = 0.5;
        assert_ne!(a.canonical(), b.canonical());
    }
}
