use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgn_core::diagnostics::StudyScheme;
use sgn_core::integrators::BoxSchemeConfig;
use sgn_core::scenarios::Scenario;
use sgn_core::{DiffKind, Grid1D, Params};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Box,
    SpectralMidpoint,
    ReferenceRk4,
}

impl SchemeName {
    pub const ALL: [SchemeName; 3] = [
        SchemeName::Box,
        SchemeName::SpectralMidpoint,
        SchemeName::ReferenceRk4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeName::Box => "box",
            SchemeName::SpectralMidpoint => "spectral-midpoint",
            SchemeName::ReferenceRk4 => "reference-rk4",
        }
    }

    pub fn study(self) -> StudyScheme {
        match self {
            SchemeName::Box => StudyScheme::Box,
            SchemeName::SpectralMidpoint => StudyScheme::SpectralMidpoint,
            SchemeName::ReferenceRk4 => StudyScheme::ReferenceRk4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to the scenario's natural length (`40 h0`).
    pub length: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub h0: Option<f64>,
    pub a: Option<f64>,
    pub width: Option<f64>,
    pub u0: Option<f64>,
}

fn default_g() -> f64 {
    1.0
}
fn default_diff() -> DiffKind {
    DiffKind::Fd2
}
fn default_tol() -> f64 {
    BoxSchemeConfig::DEFAULT_TOL
}
fn default_max_iter() -> usize {
    BoxSchemeConfig::DEFAULT_MAX_ITER
}
fn default_snapshot_stride() -> usize {
    10
}
fn default_stride() -> usize {
    1
}

/// Run configuration as read from TOML. Optional keys are filled in by
/// [`RunConfig::resolve`], and the resolved form is what gets archived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeName,
    pub grid: GridConfig,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    pub scenario: ScenarioConfig,
    #[serde(default = "default_diff")]
    pub diff_operator: DiffKind,
    #[serde(default = "default_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_iter")]
    pub newton_max_iter: usize,
    pub output_dir: PathBuf,
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_stride")]
    pub diagnostics_stride: usize,
    #[serde(default)]
    pub seed: u64,
    /// Adds the eight state components to every snapshot file.
    #[serde(default)]
    pub z_columns: bool,
}

/// Validated configuration with the objects it describes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub scenario: Scenario,
    pub grid: Grid1D,
    pub params: Params,
    pub step: BoxSchemeConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            key: None,
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1));
            CliError::Config {
                key: None,
                line,
                message: e.message().to_string(),
            }
        })
    }

    /// Checks every value and fills in defaults.
    pub fn resolve(mut self) -> Result<Resolved, CliError> {
        let bad = |key: &str, message: String| CliError::Config {
            key: Some(key.to_string()),
            line: None,
            message,
        };
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(key, format!("must be positive and finite, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("g", self.g)?;
        positive("newton_tol", self.newton_tol)?;
        if self.newton_max_iter == 0 {
            return Err(bad("newton_max_iter", "must be at least 1".to_string()));
        }
        if self.snapshot_stride == 0 {
            return Err(bad("snapshot_stride", "must be at least 1".to_string()));
        }
        if self.diagnostics_stride == 0 {
            return Err(bad("diagnostics_stride", "must be at least 1".to_string()));
        }
        let params = Params::new(self.g).map_err(|e| bad("g", e.to_string()))?;
        let scenario = self.build_scenario(&params)?;
        self.scenario.h0.get_or_insert(1.0);
        let length = self
            .grid
            .length
            .unwrap_or_else(|| scenario.default_length());
        positive("grid.length", length)?;
        self.grid.length = Some(length);
        let grid = Grid1D::new(length, self.grid.n).map_err(|e| bad("grid.n", e.to_string()))?;
        let step = BoxSchemeConfig {
            dt: self.dt,
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            damping: 1.0,
        };
        Ok(Resolved {
            config: self,
            scenario,
            grid,
            params,
            step,
        })
    }

    fn build_scenario(&self, params: &Params) -> Result<Scenario, CliError> {
        let sc = &self.scenario;
        let allowed: &[&str] = match sc.name.as_str() {
            "still_water" => &["h0"],
            "uniform_stream" => &["h0", "u0"],
            "gaussian_hump" => &["h0", "a", "width"],
            "solitary_wave" => &["h0", "a"],
            other => {
                return Err(CliError::Config {
                    key: Some("scenario.name".to_string()),
                    line: None,
                    message: format!(
                        "unknown scenario `{other}` (expected still_water, uniform_stream, gaussian_hump or solitary_wave)"
                    ),
                })
            }
        };
        let given = [
            ("h0", sc.h0),
            ("a", sc.a),
            ("width", sc.width),
            ("u0", sc.u0),
        ];
        for (key, value) in given {
            if value.is_some() && !allowed.contains(&key) {
                return Err(CliError::Config {
                    key: Some(format!("scenario.{key}")),
                    line: None,
                    message: format!("not a parameter of scenario `{}`", sc.name),
                });
            }
        }
        let need = |key: &'static str, value: Option<f64>| {
            value.ok_or_else(|| CliError::Config {
                key: Some(format!("scenario.{key}")),
                line: None,
                message: format!("required by scenario `{}`", sc.name),
            })
        };
        let h0 = sc.h0.unwrap_or(1.0);
        let built = match sc.name.as_str() {
            "still_water" => Scenario::still_water(h0),
            "uniform_stream" => Scenario::uniform_stream(h0, need("u0", sc.u0)?),
            "gaussian_hump" => {
                Scenario::gaussian_hump(h0, need("a", sc.a)?, need("width", sc.width)?)
            }
            _ => Scenario::solitary_wave(h0, need("a", sc.a)?, params),
        };
        built.map_err(|e| CliError::Config {
            key: Some("scenario".to_string()),
            line: None,
            message: e.to_string(),
        })
    }
}
