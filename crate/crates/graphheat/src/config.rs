//! Run configuration: a JSON file whose fields the command-line flags
//! override.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use graphheat_core::metrics::MetricError;
use graphheat_core::{Metric, MetricKind, WeightedGraph};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{GenError, Generator};
use crate::io::{read_graph, IoError};
use crate::validation::SuiteConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParametrixChoice {
    #[default]
    Dirac,
    Gaussian,
}

impl FromStr for ParametrixChoice {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "dirac" => Ok(ParametrixChoice::Dirac),
            "gaussian" => Ok(ParametrixChoice::Gaussian),
            other => Err(invalid(format!("unknown parametrix {other} (dirac, gaussian)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(invalid(format!("unknown format {other} (csv, json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub generator: Option<String>,
    /// Metric kind name; `a=…` or `e1=…` may follow after a colon.
    pub metric: String,
    pub parametrix: ParametrixChoice,
    pub tol: f64,
    pub t: Vec<f64>,
    /// Queries as `x:y` vertex ids.
    pub pairs: Vec<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Treat a window as a complete finite graph.
    pub as_finite: bool,
    pub suite: SuiteConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: None,
            generator: None,
            metric: "combinatorial".into(),
            parametrix: ParametrixChoice::Dirac,
            tol: 1e-10,
            t: vec![1.0],
            pairs: Vec::new(),
            out: None,
            format: Format::Csv,
            seed: 0,
            threads: None,
            as_finite: false,
            suite: SuiteConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tolerance must be positive"));
        }
        if let Some(t) = self.t.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(invalid(format!("time {t} must be finite and ≥ 0")));
        }
        if self.threads == Some(0) {
            return Err(invalid("thread count must be positive"));
        }
        Ok(())
    }

    pub fn generator(&self) -> Result<Option<Generator>, ConfigError> {
        self.generator.as_deref().map(|s| s.parse().map_err(ConfigError::from)).transpose()
    }

    /// Reads `graph` or runs `generator`; applies `as_finite`.
    pub fn load_graph(&self) -> Result<WeightedGraph, ConfigError> {
        let g = match (&self.graph, self.generator()?) {
            (Some(_), Some(_)) => return Err(invalid("give either a graph file or a generator, not both")),
            (Some(p), None) => read_graph(p)?,
            (None, Some(gen)) => gen.generate()?,
            (None, None) => return Err(invalid("no graph: pass --graph or --generator")),
        };
        Ok(if self.as_finite { g.as_finite() } else { g })
    }

    /// Resolves `pairs` against the graph's vertex ids.
    pub fn resolve_pairs(&self, g: &WeightedGraph) -> Result<Vec<(usize, usize)>, ConfigError> {
        self.pairs.iter().map(|p| parse_pair(g, p)).collect()
    }

    pub fn build_metric(&self, g: &WeightedGraph) -> Result<Metric, ConfigError> {
        build_metric(g, &self.metric)
    }
}

pub fn parse_pair(g: &WeightedGraph, s: &str) -> Result<(usize, usize), ConfigError> {
    let (x, y) = s.split_once(':').ok_or_else(|| invalid(format!("pair {s} must look like x:y")))?;
    let look = |l: &str| g.vertex(l.trim()).map_err(|_| invalid(format!("unknown vertex {l}")));
    Ok((look(x)?, look(y)?))
}

/// `kind` or `kind:param=value`, e.g. `normalized:a=3` or `edge_weighted:e1=0.5`.
pub fn build_metric(g: &WeightedGraph, spec: &str) -> Result<Metric, ConfigError> {
    let (name, param) = spec.split_once(':').unwrap_or((spec, ""));
    let kind = MetricKind::from_name(name.trim()).ok_or_else(|| invalid(format!("unknown metric {name}")))?;
    let value = |key: &str| -> Result<Option<f64>, ConfigError> {
        if param.trim().is_empty() {
            return Ok(None);
        }
        let (k, v) = param.split_once('=').ok_or_else(|| invalid(format!("metric parameter {param} must be key=value")))?;
        if k.trim() != key {
            return Err(invalid(format!("metric {name} takes parameter {key}, not {k}")));
        }
        v.trim().parse().map(Some).map_err(|_| invalid(format!("bad value {v}")))
    };
    Ok(match kind {
        MetricKind::Normalized => match value("a")? {
            Some(a) => Metric::normalized(g, a)?,
            None => Metric::normalized_auto(g)?,
        },
        MetricKind::EdgeWeighted => Metric::edge_weighted(g, value("e1")?),
        MetricKind::Custom => return Err(invalid("the custom metric is only available through the library")),
        other => {
            if !param.trim().is_empty() {
                return Err(invalid(format!("metric {name} takes no parameters")));
            }
            Metric::of_kind(g, other)?
        }
    })
}
