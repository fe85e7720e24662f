//! Run configuration: loading, defaults and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{Tolerances, DEFAULT_MAX_ORDER};
use crate::elastic3d::SweepMode;
use crate::expr::{parse_expression, Expr, ParseError};
use crate::grid::{MidplateGrid, Rect};
use crate::metric::{MetricField, DEFAULT_SPD_FLOOR};
use crate::quad_forms::EnergyDensity;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("{path}: {source}")]
    Expression { path: String, source: ParseError },
    #[error("cannot read {file}: {reason}")]
    Io { file: String, reason: String },
}

fn invalid(path: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Conformal,
    General,
    Pullback,
}

/// `family = "conformal"` takes `phi`; `"general"` takes `g11 … g33`;
/// `"pullback"` takes the Jacobian rows `jacobian[c][a] = ∂_a u_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g11: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g12: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g13: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g22: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g23: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g33: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<[[String; 3]; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec { x1: [0.0, 1.0], x2: [0.0, 1.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { nx: 33, ny: 33 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub mu: f64,
    #[serde(default)]
    pub lambda: f64,
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec { mu: 1.0, lambda: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSpec {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_order: usize,
    pub holonomy: f64,
    pub curl: f64,
    /// Bound on interior residuals and identity defects built from finite differences.
    pub disc: f64,
    /// Smallest admissible metric eigenvalue.
    pub spd_floor: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        ToleranceSpec { tol_abs: t.tol_abs, tol_rel: t.tol_rel, max_order: DEFAULT_MAX_ORDER, holonomy: 1e-8, curl: 1e-6, disc: 1e-6, spd_floor: DEFAULT_SPD_FLOOR }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitSpec {
    pub nx: usize,
    pub ny: usize,
    pub epsilon: f64,
}

impl Default for LimitSpec {
    fn default() -> Self {
        LimitSpec { nx: 17, ny: 17, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub h: Vec<f64>,
    pub mesh: [usize; 3],
    pub mode: SweepMode,
    pub max_iter: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { h: vec![0.2, 0.14, 0.1, 0.07, 0.05], mesh: [17, 17, 5], mode: SweepMode::Ansatz, max_iter: 300 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub metric: MetricSpec,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub limit: LimitSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn expr(path: &str, src: &Option<String>) -> Result<Expr, ConfigError> {
    let src = src.as_ref().ok_or_else(|| invalid(path, "missing"))?;
    parse_expression(src).map_err(|source| ConfigError::Expression { path: path.to_string(), source })
}

impl RunConfig {
    /// Parse a TOML document.
    pub fn from_toml(src: &str) -> Result<RunConfig, ConfigError> {
        let de = toml::de::Deserializer::parse(src).map_err(|e| invalid("<toml>", e.message().to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(&path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse a JSON document.
    pub fn from_json(src: &str) -> Result<RunConfig, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(src);
        let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            invalid(&path, inner)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.metric()?;
        let d = &self.domain;
        for (name, r) in [("domain.x1", d.x1), ("domain.x2", d.x2)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(invalid(name, "must be an increasing finite interval"));
            }
        }
        for (name, v) in [("grid.nx", self.grid.nx), ("grid.ny", self.grid.ny), ("limit.nx", self.limit.nx), ("limit.ny", self.limit.ny)] {
            if v < 5 {
                return Err(invalid(name, "must be at least 5"));
            }
        }
        if !(self.density.mu > 0.0 && self.density.mu.is_finite()) {
            return Err(invalid("density.mu", "must be positive"));
        }
        if !(self.density.lambda >= 0.0 && self.density.lambda.is_finite()) {
            return Err(invalid("density.lambda", "must be nonnegative"));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.tol_abs", t.tol_abs),
            ("tolerances.tol_rel", t.tol_rel),
            ("tolerances.holonomy", t.holonomy),
            ("tolerances.curl", t.curl),
            ("tolerances.disc", t.disc),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be a nonnegative number"));
            }
        }
        if !(t.spd_floor > 0.0 && t.spd_floor.is_finite()) {
            return Err(invalid("tolerances.spd_floor", "must be positive"));
        }
        if !(self.limit.epsilon > 0.0) {
            return Err(invalid("limit.epsilon", "must be positive"));
        }
        let s = &self.sweep;
        if s.h.len() < 3 {
            return Err(invalid("sweep.h", "needs at least 3 thickness values"));
        }
        if s.h.iter().any(|h| !(*h > 0.0 && h.is_finite())) || s.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("sweep.h", "must be positive and strictly decreasing"));
        }
        if s.mesh[0] < 5 || s.mesh[1] < 5 || s.mesh[2] < 2 {
            return Err(invalid("sweep.mesh", "needs at least 5x5 midplate nodes and 2 through the thickness"));
        }
        Ok(())
    }

    pub fn domain(&self) -> Rect {
        Rect::new(self.domain.x1, self.domain.x2)
    }

    pub fn metric(&self) -> Result<MetricField, ConfigError> {
        Ok(self.metric_unfloored()?.with_spd_floor(self.tolerances.spd_floor))
    }

    fn metric_unfloored(&self) -> Result<MetricField, ConfigError> {
        let m = &self.metric;
        let domain = Rect::new(self.domain.x1, self.domain.x2);
        let used: &[(&str, bool)] = &[
            ("metric.phi", m.phi.is_some()),
            ("metric.g11", m.g11.is_some()),
            ("metric.g12", m.g12.is_some()),
            ("metric.g13", m.g13.is_some()),
            ("metric.g22", m.g22.is_some()),
            ("metric.g23", m.g23.is_some()),
            ("metric.g33", m.g33.is_some()),
            ("metric.jacobian", m.jacobian.is_some()),
        ];
        let allowed: &[&str] = match m.family {
            Family::Conformal => &["metric.phi"],
            Family::General => &["metric.g11", "metric.g12", "metric.g13", "metric.g22", "metric.g23", "metric.g33"],
            Family::Pullback => &["metric.jacobian"],
        };
        if let Some((name, _)) = used.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            return Err(invalid(name, format!("not used by family {:?}", m.family).to_lowercase()));
        }
        match m.family {
            Family::Conformal => {
                let phi = expr("metric.phi", &m.phi)?;
                MetricField::conformal(phi, domain).map_err(|e| invalid("metric.phi", e.to_string()))
            }
            Family::General => {
                let entries = [
                    expr("metric.g11", &m.g11)?,
                    expr("metric.g12", &m.g12)?,
                    expr("metric.g13", &m.g13)?,
                    expr("metric.g22", &m.g22)?,
                    expr("metric.g23", &m.g23)?,
                    expr("metric.g33", &m.g33)?,
                ];
                Ok(MetricField::general(entries, domain))
            }
            Family::Pullback => {
                let rows = m.jacobian.as_ref().ok_or_else(|| invalid("metric.jacobian", "missing"))?;
                let entry = |c: usize, a: usize| expr(&format!("metric.jacobian[{c}][{a}]"), &Some(rows[c][a].clone()));
                let mut jac = Vec::with_capacity(3);
                for c in 0..3 {
                    jac.push([entry(c, 0)?, entry(c, 1)?, entry(c, 2)?]);
                }
                let jac: [[Expr; 3]; 3] = jac.try_into().expect("three rows");
                Ok(MetricField::pullback(&jac, domain))
            }
        }
    }

    pub fn grid(&self) -> MidplateGrid {
        MidplateGrid::new(self.grid.nx, self.grid.ny, self.domain())
    }

    pub fn limit_grid(&self) -> MidplateGrid {
        MidplateGrid::new(self.limit.nx, self.limit.ny, self.domain())
    }

    pub fn sweep_grid(&self) -> MidplateGrid {
        MidplateGrid::new(self.sweep.mesh[0], self.sweep.mesh[1], self.domain())
    }

    pub fn density(&self) -> EnergyDensity {
        EnergyDensity::new(self.density.mu, self.density.lambda)
    }

    pub fn classifier_tolerances(&self) -> Tolerances {
        Tolerances { tol_abs: self.tolerances.tol_abs, tol_rel: self.tolerances.tol_rel }
    }
}

/// Load a TOML or JSON config, chosen by file extension.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let file = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { file: file.clone(), reason: e.to_string() })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => RunConfig::from_json(&src),
        Some("toml") => RunConfig::from_toml(&src),
        _ => Err(ConfigError::Io { file, reason: "expected a .toml or .json extension".into() }),
    }
}
