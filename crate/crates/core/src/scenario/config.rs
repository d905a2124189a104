use serde::{Deserialize, Serialize};

use crate::domain::{DomainSpec, SolverSettings};
use crate::error::{Error, Result};
use crate::geometry::ModelSpace;
use crate::source::SourceSpec;

/// `{0.005, 0.01, ..., 2.56}`.
pub fn default_times() -> Vec<f64> {
    (0..10).map(|k| 0.005 * f64::from(1u32 << k)).collect()
}

fn default_n() -> u32 {
    2
}

fn default_resolution() -> usize {
    1024
}

fn default_dt() -> f64 {
    1e-3
}

fn default_tolerance() -> f64 {
    1e-2
}

fn default_route_tolerance() -> f64 {
    1e-2
}

fn default_equality_tolerance() -> f64 {
    5e-3
}

fn default_shape_tolerance() -> f64 {
    1e-10
}

/// Refinement study settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Number of meshes: `h, h/2, ..., h/2^(levels-1)`, with `dt` scaled by 1/4 per level.
    pub levels: usize,
    /// Required gap reduction per level.
    pub ratio: f64,
    /// Gaps at or below `floor * max V` count as converged.
    pub floor: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            levels: 3,
            ratio: 1.5,
            floor: 1e-9,
        }
    }
}

/// One verification scenario.
///
/// Tolerances are relative to `max V` over the snapshot grid unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub domain: DomainSpec,
    /// Derived from the domain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_n")]
    pub n: u32,
    #[serde(default = "SourceSpec::zero")]
    pub f: SourceSpec,
    #[serde(default = "SourceSpec::zero")]
    pub g: SourceSpec,
    /// Cells of the radial and volume-coordinate grids of the symmetrized problem.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Bound on `max (U - V)`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// `L^p` rows pass when `lhs <= rhs (1 + lp_tolerance)`.
    #[serde(default = "default_tolerance")]
    pub lp_tolerance: f64,
    /// Bound on `sup |V_direct - V_radial|`.
    #[serde(default = "default_route_tolerance")]
    pub route_tolerance: f64,
    /// Bound on monotonicity and concavity defects of `U` and `V`.
    #[serde(default = "default_shape_tolerance")]
    pub shape_tolerance: f64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub equality_case: bool,
    /// Bound on `max |U - V|` for equality cases.
    #[serde(default = "default_equality_tolerance")]
    pub equality_tolerance: f64,
    #[serde(default)]
    pub refinement_sweep: bool,
    #[serde(default)]
    pub sweep: SweepSettings,
}

impl ScenarioConfig {
    /// A scenario with every optional field at its default.
    pub fn new(name: impl Into<String>, domain: DomainSpec) -> Self {
        Self {
            name: name.into(),
            domain,
            theta: None,
            kappa: 0.0,
            n: default_n(),
            f: SourceSpec::zero(),
            g: SourceSpec::zero(),
            resolution: default_resolution(),
            dt: default_dt(),
            times: default_times(),
            tolerance: default_tolerance(),
            lp_tolerance: default_tolerance(),
            route_tolerance: default_route_tolerance(),
            shape_tolerance: default_shape_tolerance(),
            solver: SolverSettings::default(),
            equality_case: false,
            equality_tolerance: default_equality_tolerance(),
            refinement_sweep: false,
            sweep: SweepSettings::default(),
        }
    }

    pub fn model(&self) -> Result<ModelSpace> {
        ModelSpace::new(self.kappa, self.n).map_err(|e| e.in_field("kappa"))
    }

    /// Checks internal consistency and fills in `theta`.
    pub fn normalized(&self) -> Result<Self> {
        let mut out = self.clone();
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
            || self.name.starts_with('.')
        {
            return Err(Error::config(
                "name",
                format!("must be a nonempty file-name-safe identifier, got {:?}", self.name),
            ));
        }
        if self.n != 2 {
            return Err(Error::config(
                "n",
                format!("the domain solver is two-dimensional, got n = {}", self.n),
            ));
        }
        let model = self.model()?;
        self.domain.validate(&model).map_err(|e| e.in_field("domain"))?;
        let theta = self.domain.natural_theta().map_err(|e| e.in_field("domain"))?;
        if let Some(given) = self.theta {
            if (given - theta).abs() > 1e-12 {
                let why = if self.domain.is_cone() {
                    "the cone angle"
                } else {
                    "a domain that is not a cone"
                };
                return Err(Error::config(
                    "theta",
                    format!("{given} is inconsistent with {why}, which gives theta = {theta}"),
                ));
            }
        }
        out.theta = Some(theta);
        self.f.validate().map_err(|e| e.in_field("f"))?;
        self.g.validate().map_err(|e| e.in_field("g"))?;
        if self.resolution < 4 {
            return Err(Error::config("resolution", "must be at least 4"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.times.is_empty() {
            return Err(Error::config("times", "needs at least one snapshot time"));
        }
        let mut last = 0.0;
        for (k, &t) in self.times.iter().enumerate() {
            if !(t > last && t.is_finite()) {
                return Err(Error::config(
                    format!("times[{k}]"),
                    format!("snapshot times must increase strictly from 0, got {t}"),
                ));
            }
            last = t;
        }
        for (field, v) in [
            ("tolerance", self.tolerance),
            ("lp_tolerance", self.lp_tolerance),
            ("route_tolerance", self.route_tolerance),
            ("shape_tolerance", self.shape_tolerance),
            ("equality_tolerance", self.equality_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.solver.cg_tolerance > 0.0 && self.solver.cg_tolerance < 1.0) {
            return Err(Error::config("solver.cg_tolerance", "must lie in (0, 1)"));
        }
        if self.solver.max_iterations_per_unknown == 0 {
            return Err(Error::config("solver.max_iterations_per_unknown", "must be positive"));
        }
        if self.equality_case && !(self.domain.is_model_ball() && theta == 1.0) {
            return Err(Error::config(
                "equality_case",
                "only a polar disc or spherical cap can be an equality case",
            ));
        }
        if self.sweep.levels < 2 {
            return Err(Error::config("sweep.levels", "a sweep needs at least 2 levels"));
        }
        if !(self.sweep.ratio > 1.0) {
            return Err(Error::config("sweep.ratio", "must exceed 1"));
        }
        if !(self.sweep.floor >= 0.0) {
            return Err(Error::config("sweep.floor", "must be >= 0"));
        }
        Ok(out)
    }
}

/// A configuration file: one scenario, or `{"scenarios": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub scenarios: Vec<ScenarioConfig>,
}

impl SuiteConfig {
    /// Parses and normalizes a configuration file. Errors carry the JSON path
    /// of the offending field and, for syntax errors, the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let probe: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config {
            field: String::new(),
            message: e.to_string(),
        })?;
        let is_suite = probe.get("scenarios").is_some();
        let mut de = serde_json::Deserializer::from_str(text);
        let parsed = if is_suite {
            serde_path_to_error::deserialize::<_, SuiteConfig>(&mut de)
        } else {
            serde_path_to_error::deserialize::<_, ScenarioConfig>(&mut de).map(|s| SuiteConfig {
                scenarios: vec![s],
            })
        };
        let suite = parsed.map_err(|e| Error::Config {
            field: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?;
        suite.normalized_with_prefix(is_suite)
    }

    pub fn normalized(&self) -> Result<Self> {
        self.normalized_with_prefix(true)
    }

    fn normalized_with_prefix(&self, prefixed: bool) -> Result<Self> {
        if self.scenarios.is_empty() {
            return Err(Error::config("scenarios", "needs at least one scenario"));
        }
        let mut out = Vec::with_capacity(self.scenarios.len());
        for (i, s) in self.scenarios.iter().enumerate() {
            let prefix = |e: Error| {
                if prefixed {
                    e.in_field(&format!("scenarios[{i}]"))
                } else {
                    e
                }
            };
            if self.scenarios[..i].iter().any(|o| o.name == s.name) {
                return Err(prefix(Error::config("name", format!("duplicate name {:?}", s.name))));
            }
            out.push(s.normalized().map_err(prefix)?);
        }
        Ok(SuiteConfig { scenarios: out })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{
        "name": "square",
        "domain": {"kind": "flat_rectangle", "width": 1, "height": 1, "cells_per_unit": 16},
        "f": 1,
        "g": {"preset": "gaussian", "center": [0.5, 0.5], "width": 0.1}
    }"#;

    fn field_of(text: &str) -> String {
        match SuiteConfig::parse(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let s = SuiteConfig::parse(SQUARE).unwrap();
        let c = &s.scenarios[0];
        assert_eq!(c.theta, Some(1.0));
        assert_eq!(c.times.len(), 10);
        assert!((c.times[9] - 2.56).abs() < 1e-15);
        assert_eq!(c.resolution, 1024);
        assert_eq!(c.tolerance, 1e-2);
    }

    #[test]
    fn normalized_echo_reparses_equal() {
        let s = SuiteConfig::parse(SQUARE).unwrap();
        let again = SuiteConfig::parse(&s.to_json()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn cone_theta_is_derived_and_checked() {
        let cone = r#"{"name": "cone", "domain": {"kind": "cone_polar", "angle": 3.141592653589793,
            "radius": 1, "radial_cells": 8, "angular_cells": 8}}"#;
        let s = SuiteConfig::parse(cone).unwrap();
        assert!((s.scenarios[0].theta.unwrap() - 0.5).abs() < 1e-15);
        let bad = cone.replace("\"name\"", "\"theta\": 0.4, \"name\"");
        assert_eq!(field_of(&bad), "theta");
        let flat = SQUARE.replace("\"name\"", "\"theta\": 0.5, \"name\"");
        assert_eq!(field_of(&flat), "theta");
    }

    #[test]
    fn curvature_must_match_the_domain() {
        assert!(field_of(&SQUARE.replace("\"f\": 1", "\"kappa\": 1, \"f\": 1")).starts_with("domain"));
        let cap = r#"{"name": "cap", "domain": {"kind": "sphere_cap", "radius": 1,
            "radial_cells": 8, "angular_cells": 8}}"#;
        assert!(field_of(cap).starts_with("domain"));
    }

    #[test]
    fn field_paths_reach_into_suites() {
        let suite = format!(r#"{{"scenarios": [{SQUARE}, {}]}}"#, SQUARE.replace("\"f\": 1", "\"f\": -1").replace("square", "b"));
        assert_eq!(field_of(&suite), "scenarios[1].f");
        let unknown = SQUARE.replace("\"f\": 1", "\"f\": 1, \"bogus\": 2");
        assert_eq!(field_of(&unknown), "bogus");
        let typo = SQUARE.replace("\"width\": 1,", "\"width\": \"wide\",");
        assert!(field_of(&typo).starts_with("domain"));
        let dup = format!(r#"{{"scenarios": [{SQUARE}, {SQUARE}]}}"#);
        assert_eq!(field_of(&dup), "scenarios[1].name");
    }

    #[test]
    fn syntax_errors_report_lines() {
        match SuiteConfig::parse("{\n  \"name\": \"x\",\n  oops\n}") {
            Err(Error::Config { message, .. }) => assert!(message.contains("line 3"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_inconsistent_values() {
        assert_eq!(field_of(&SQUARE.replace("\"f\": 1", "\"f\": 1, \"n\": 3")), "n");
        assert_eq!(field_of(&SQUARE.replace("\"f\": 1", "\"f\": 1, \"dt\": 0")), "dt");
        assert_eq!(
            field_of(&SQUARE.replace("\"f\": 1", "\"f\": 1, \"times\": [0.1, 0.05]")),
            "times[1]"
        );
        assert_eq!(
            field_of(&SQUARE.replace("\"f\": 1", "\"f\": 1, \"equality_case\": true")),
            "equality_case"
        );
        assert_eq!(field_of(&SQUARE.replace("\"f\": 1", "\"f\": \"x +\"")), "f");
    }
}
