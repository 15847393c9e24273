//! The JSON problem file.
//!
//! ```json
//! {
//!   "N": 1,
//!   "grid": { "L": 20.0, "n": 1024 },
//!   "kernels": ["0.02*exp(-abs(x))"],
//!   "multipliers": ["1"],
//!   "initial": ["0.01*exp(-x^2)"],
//!   "g": ["u1^2"],
//!   "g2": ["1.01*u1^2"],
//!   "rho": 1.0,
//!   "options": { "c_a": 1.5811, "M_override": null, "safety_factor": 1.05, "tail_tolerance": 1e-6 }
//! }
//! ```
//!
//! `N`, `g2`, `rho` (default 1) and every entry of `options` are optional;
//! `g2` is required by `sensitivity` only.

use std::path::Path;

use quadint_core::expr::{parse, Expr};
use quadint_core::grid::GridSpec;
use quadint_core::problem::{ProblemError, ProblemOptions, ProblemSpec};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}[{index}]: {source} in \"{text}\"")]
    Parse {
        field: &'static str,
        index: usize,
        text: String,
        source: quadint_core::expr::ParseError,
    },
    #[error("grid: {0}")]
    Grid(#[from] quadint_core::grid::GridError),
    #[error("N = {declared} but {field} has {found} entries")]
    Count { declared: usize, field: &'static str, found: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("this command needs a second nonlinearity block \"g2\"")]
    MissingG2,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    pub c_a: Option<f64>,
    #[serde(rename = "M_override")]
    pub m_override: Option<f64>,
    pub safety_factor: Option<f64>,
    pub tail_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub grid: GridConfig,
    pub kernels: Vec<String>,
    pub multipliers: Vec<String>,
    pub initial: Vec<String>,
    pub g: Vec<String>,
    pub g2: Option<Vec<String>>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub options: OptionsConfig,
}

fn default_rho() -> f64 {
    1.0
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub spec: ProblemSpec,
    pub g2: Option<Vec<Expr>>,
}

impl Loaded {
    pub fn g2(&self) -> Result<&[Expr], ConfigError> {
        self.g2.as_deref().ok_or(ConfigError::MissingG2)
    }
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_str(&text)
}

pub fn from_str(text: &str) -> Result<Loaded, ConfigError> {
    let cfg: ProblemConfig = serde_json::from_str(text)?;
    cfg.build()
}

fn parse_all(field: &'static str, sources: &[String]) -> Result<Vec<Expr>, ConfigError> {
    sources
        .iter()
        .enumerate()
        .map(|(index, text)| {
            parse(text).map_err(|source| ConfigError::Parse {
                field,
                index,
                text: text.clone(),
                source,
            })
        })
        .collect()
}

impl ProblemConfig {
    pub fn build(&self) -> Result<Loaded, ConfigError> {
        if let Some(declared) = self.n {
            let blocks = [
                ("kernels", self.kernels.len()),
                ("multipliers", self.multipliers.len()),
                ("initial", self.initial.len()),
                ("g", self.g.len()),
                ("g2", self.g2.as_ref().map_or(declared, Vec::len)),
            ];
            if let Some(&(field, found)) = blocks.iter().find(|(_, found)| *found != declared) {
                return Err(ConfigError::Count { declared, field, found });
            }
        }
        let defaults = ProblemOptions::default();
        let options = ProblemOptions {
            c_a: self.options.c_a.unwrap_or(defaults.c_a),
            m_override: self.options.m_override,
            safety_factor: self.options.safety_factor.unwrap_or(defaults.safety_factor),
            tail_tolerance: self.options.tail_tolerance.unwrap_or(defaults.tail_tolerance),
        };
        let spec = ProblemSpec::new(
            GridSpec::new(self.grid.half_width, self.grid.n)?,
            parse_all("kernels", &self.kernels)?,
            parse_all("multipliers", &self.multipliers)?,
            parse_all("initial", &self.initial)?,
            parse_all("g", &self.g)?,
            self.rho,
            options,
        )?;
        let g2 = match &self.g2 {
            Some(g2) => {
                let g2 = parse_all("g2", g2)?;
                spec.with_nonlinearity(g2.clone())?;
                Some(g2)
            }
            None => None,
        };
        Ok(Loaded { spec, g2 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "N": 1,
        "grid": { "L": 20, "n": 256 },
        "kernels": ["0.02*exp(-abs(x))"],
        "multipliers": ["1"],
        "initial": ["0.01*exp(-x^2)"],
        "g": ["u1^2"]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let loaded = from_str(BASE).unwrap();
        assert_eq!(loaded.spec.rho(), 1.0);
        assert_eq!(*loaded.spec.options(), ProblemOptions::default());
        assert!(matches!(loaded.g2(), Err(ConfigError::MissingG2)));
    }

    #[test]
    fn parse_errors_carry_field_and_position() {
        let text = BASE.replace("u1^2", "u1^^2");
        let err = from_str(&text).unwrap_err();
        match &err {
            ConfigError::Parse { field, index, source, .. } => {
                assert_eq!((*field, *index), ("g", 0));
                assert_eq!(source.position, 3);
            }
            other => panic!("{other}"),
        }
        assert!(err.to_string().contains("g[0]"));
    }

    #[test]
    fn declared_count_is_checked() {
        let text = BASE.replace("\"N\": 1", "\"N\": 2");
        assert!(matches!(from_str(&text), Err(ConfigError::Count { declared: 2, .. })));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = BASE.replace("\"N\": 1,", "\"N\": 1, \"kernel\": [],");
        assert!(matches!(from_str(&text), Err(ConfigError::Json(_))));
    }

    #[test]
    fn g2_must_use_the_same_components() {
        let text = BASE.replace("\"g\": [\"u1^2\"]", "\"g\": [\"u1^2\"], \"g2\": [\"u2\"]");
        assert!(matches!(from_str(&text), Err(ConfigError::Problem(_))));
    }
}
