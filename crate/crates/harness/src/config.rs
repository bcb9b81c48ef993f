//! Scenario configuration: parsing, defaults and validation.
//!
//! Files are TOML or JSON, picked by extension. Times are rational strings
//! (`"7/10080"`), complex values `[re, im]` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use dilation_core::grid::{Grid, GridRational, RationalString, DEFAULT_DENOMINATOR};
use dilation_core::semigroup::{default_schedule, FrameSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::suites::Suite;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("{suite}: tolerance must be positive, got {value}")]
    Tolerance { suite: String, value: f64 },
    #[error("a seed is required when suites are selected")]
    MissingSeed,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Exponential,
    Discrete,
    Opposite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    #[serde(default)]
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub multiplicity: usize,
    #[serde(default)]
    pub grid_denominator: Option<i64>,
    /// The underlying model when `kind = "opposite"`.
    #[serde(default)]
    pub inner: Option<Box<ModelDescriptor>>,
}

fn one() -> usize {
    1
}

impl Default for ModelDescriptor {
    fn default() -> Self {
        ModelDescriptor { kind: ModelKind::Exponential, multiplicity: 1, grid_denominator: None, inner: None }
    }
}

impl ModelDescriptor {
    /// The non-opposite model at the bottom of the descriptor, and whether an
    /// odd number of opposites wraps it.
    pub fn base(&self) -> Result<(ModelKind, usize, bool), ConfigError> {
        match self.kind {
            ModelKind::Opposite => {
                let inner = self.inner.as_deref().cloned().unwrap_or_default();
                let (kind, dim, flipped) = inner.base()?;
                Ok((kind, dim, !flipped))
            }
            kind => {
                if self.inner.is_some() {
                    return Err(ConfigError::Invalid("`inner` is only valid for kind = \"opposite\"".into()));
                }
                if self.multiplicity == 0 {
                    return Err(ConfigError::Invalid("multiplicity must be at least 1".into()));
                }
                Ok((kind, self.multiplicity, false))
            }
        }
    }
}

/// Per-suite overrides; anything left out takes the suite default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    pub cases: Option<usize>,
    pub tolerance: Option<f64>,
    pub norm_bound: Option<f64>,
    pub max_breakpoints: Option<usize>,
    pub max_value: Option<f64>,
    pub max_depth: Option<RationalString>,
    pub t_range: Option<[RationalString; 2]>,
    pub s_range: Option<[RationalString; 2]>,
    pub frame_schedule: Option<Vec<FrameSpec>>,
    /// Continuity probe: coarsest spacing, number of halvings, window length.
    pub spacing: Option<RationalString>,
    pub halvings: Option<u32>,
    pub span: Option<RationalString>,
    pub route: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub model: ModelDescriptor,
    #[serde(default)]
    pub grid_denominator: Option<i64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, SuiteParams>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_toml(&text),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let q = self.grid_denominator.or(self.model.grid_denominator).unwrap_or(DEFAULT_DENOMINATOR);
        Grid::new(q).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Checks everything and resolves defaults. `suites` and `seed` from the
    /// command line replace the file's values when given.
    pub fn resolve(&self, suites: Option<&[String]>, seed: Option<u64>) -> Result<RunPlan, ConfigError> {
        let grid = self.grid()?;
        let (kind, dim, _) = self.model.base()?;
        for name in self.params.keys() {
            Suite::parse(name).ok_or_else(|| ConfigError::UnknownSuite(name.clone()))?;
        }
        let names = suites.unwrap_or(&self.suites);
        let mut selected = Vec::with_capacity(names.len());
        for name in names {
            let suite = Suite::parse(name).ok_or_else(|| ConfigError::UnknownSuite(name.clone()))?;
            if !selected.iter().any(|(s, _)| *s == suite) {
                let params = self.params.get(suite.name()).cloned().unwrap_or_default();
                selected.push((suite, resolve_params(suite, &params, grid)?));
            }
        }
        let seed = seed.or(self.seed);
        let seed = match (seed, selected.is_empty()) {
            (Some(s), _) => s,
            (None, true) => 0,
            (None, false) => return Err(ConfigError::MissingSeed),
        };
        Ok(RunPlan { grid, kind, dim, seed, suites: selected })
    }
}

/// Scenario bounds for random inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub max_breakpoints: usize,
    pub max_value: f64,
    pub norm_bound: f64,
    /// Largest relative depth of a generated section.
    pub max_depth: GridRational,
    /// Largest `|value|` in section profiles.
    pub section_value: f64,
    pub max_terms: usize,
    pub max_sections: usize,
    pub t_range: (GridRational, GridRational),
    pub s_range: (GridRational, GridRational),
}

impl Bounds {
    pub fn new(grid: Grid) -> Self {
        Bounds {
            max_breakpoints: 6,
            max_value: 2.0,
            norm_bound: 2.0,
            max_depth: grid.integer(2),
            section_value: 0.6,
            max_terms: 3,
            max_sections: 3,
            t_range: (grid.ticks(1), grid.integer(5)),
            s_range: (grid.ticks(1), grid.integer(5)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedParams {
    pub cases: usize,
    pub tolerance: f64,
    pub bounds: Bounds,
    pub frame_schedule: Vec<FrameSpec>,
    pub spacing: GridRational,
    pub halvings: u32,
    pub span: GridRational,
    pub frame_route: bool,
}

#[derive(Clone, Debug)]
pub struct RunPlan {
    pub grid: Grid,
    pub kind: ModelKind,
    pub dim: usize,
    pub seed: u64,
    pub suites: Vec<(Suite, ResolvedParams)>,
}

fn rational(grid: Grid, s: &RationalString) -> Result<GridRational, ConfigError> {
    s.resolve(grid).map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn range(grid: Grid, r: &[RationalString; 2], what: &str) -> Result<(GridRational, GridRational), ConfigError> {
    let (lo, hi) = (rational(grid, &r[0])?, rational(grid, &r[1])?);
    if !lo.is_positive() || hi < lo {
        return Err(ConfigError::Invalid(format!("{what} must satisfy 0 < lo ≤ hi, got [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

fn resolve_params(suite: Suite, p: &SuiteParams, grid: Grid) -> Result<ResolvedParams, ConfigError> {
    let mut bounds = Bounds::new(grid);
    let (cases, tolerance) = suite.defaults();
    if suite == Suite::FrameConvergence {
        bounds.t_range = (grid.ratio(3, 2).unwrap_or(grid.integer(2)), grid.integer(2));
    }
    let tolerance = p.tolerance.unwrap_or(tolerance);
    if tolerance <= 0.0 || !tolerance.is_finite() {
        return Err(ConfigError::Tolerance { suite: suite.name().into(), value: tolerance });
    }
    if let Some(v) = p.max_breakpoints {
        bounds.max_breakpoints = v;
    }
    for (slot, v, what) in
        [(&mut bounds.max_value, p.max_value, "max_value"), (&mut bounds.norm_bound, p.norm_bound, "norm_bound")]
    {
        if let Some(v) = v {
            if v <= 0.0 || !v.is_finite() {
                return Err(ConfigError::Invalid(format!("{what} must be positive")));
            }
            *slot = v;
        }
    }
    if let Some(d) = &p.max_depth {
        bounds.max_depth = rational(grid, d)?;
    }
    if let Some(r) = &p.t_range {
        bounds.t_range = range(grid, r, "t_range")?;
    }
    if let Some(r) = &p.s_range {
        bounds.s_range = range(grid, r, "s_range")?;
    }
    let frame_schedule = p.frame_schedule.clone().unwrap_or_else(default_schedule);
    if frame_schedule.is_empty() {
        return Err(ConfigError::Invalid("frame_schedule must not be empty".into()));
    }
    let spacing = match &p.spacing {
        Some(s) => rational(grid, s)?,
        None => grid.ratio(1, 30).map_err(|e| ConfigError::Invalid(e.to_string()))?,
    };
    let halvings = p.halvings.unwrap_or(4);
    if !spacing.is_positive() || spacing.ticks() % (1i64 << halvings.min(62)) != 0 {
        return Err(ConfigError::Invalid(format!(
            "spacing {spacing} cannot be halved {halvings} times on the grid 1/{}",
            grid.denominator()
        )));
    }
    let span = match &p.span {
        Some(s) => rational(grid, s)?,
        None => grid.one(),
    };
    if !span.is_positive() || span.ticks() % spacing.ticks() != 0 {
        return Err(ConfigError::Invalid(format!("span {span} must be a positive multiple of spacing {spacing}")));
    }
    let frame_route = match p.route.as_deref() {
        None | Some("exact") => false,
        Some("frame") => true,
        Some(other) => {
            return Err(ConfigError::Invalid(format!("route must be \"exact\" or \"frame\", got {other:?}")))
        }
    };
    Ok(ResolvedParams {
        cases: p.cases.unwrap_or(cases),
        tolerance,
        bounds,
        frame_schedule,
        spacing,
        halvings,
        span,
        frame_route,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = ScenarioConfig::from_toml(
            r#"
            seed = 7
            suites = ["isometry", "unit-laws"]
            [model]
            kind = "exponential"
            multiplicity = 2
            [params.isometry]
            cases = 5
            t_range = ["1/10080", "5"]
            "#,
        )
        .unwrap();
        let plan = cfg.resolve(None, None).unwrap();
        assert_eq!(plan.seed, 7);
        assert_eq!(plan.dim, 2);
        assert_eq!(plan.suites[0].1.cases, 5);
        assert_eq!(plan.suites[1].1.cases, 200);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = ScenarioConfig { suites: vec!["nope".into()], seed: Some(1), ..Default::default() };
        assert!(matches!(cfg.resolve(None, None), Err(ConfigError::UnknownSuite(_))));
        let mut cfg = ScenarioConfig { suites: vec!["isometry".into()], seed: Some(1), ..Default::default() };
        cfg.params.insert("isometry".into(), SuiteParams { tolerance: Some(0.0), ..Default::default() });
        assert!(matches!(cfg.resolve(None, None), Err(ConfigError::Tolerance { .. })));
        let cfg = ScenarioConfig { suites: vec!["isometry".into()], ..Default::default() };
        assert!(matches!(cfg.resolve(None, None), Err(ConfigError::MissingSeed)));
        assert!(cfg.resolve(None, Some(3)).is_ok());
        assert!(ScenarioConfig::from_json(r#"{"sedd": 1}"#).is_err());
    }

    #[test]
    fn empty_suite_list_needs_no_seed() {
        let plan = ScenarioConfig::default().resolve(None, None).unwrap();
        assert!(plan.suites.is_empty());
    }

    #[test]
    fn opposite_descriptor() {
        let cfg = ScenarioConfig::from_json(
            r#"{"model": {"kind": "opposite", "inner": {"kind": "discrete", "multiplicity": 3}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.model.base().unwrap(), (ModelKind::Discrete, 3, true));
    }
}
