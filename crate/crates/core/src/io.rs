//! JSON problem and solution files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Polygon};
use crate::otsolve::{build_laguerre, BrenierPotential, OtError, SemiDiscreteProblem, SemiDiscreteSolution, SolveReport};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&text, path)
}

/// Parses `text`, attributing errors to `path`.
pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_text(path, &to_json_string(value))
}

/// Complete transport problem: sites are sampled from `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub source: Polygon,
    pub target: Polygon,
    #[serde(default)]
    pub n_sites: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub lloyd: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
}

/// Partial transport problem; `mass` is absolute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialProblemFile {
    pub source: Polygon,
    pub target: Polygon,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Everything needed to rebuild a solved diagram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub source: Polygon,
    pub target: Polygon,
    pub sites: Vec<Point2>,
    pub masses: Vec<f64>,
    pub weights: Vec<f64>,
    pub cells: Vec<Vec<Point2>>,
    pub residual: f64,
    pub iters: usize,
}

impl SolutionFile {
    pub fn from_solution(sol: &SemiDiscreteSolution) -> Self {
        SolutionFile {
            source: sol.problem.source.clone(),
            target: sol.problem.target.clone(),
            sites: sol.problem.sites.clone(),
            masses: sol.problem.masses.clone(),
            weights: sol.report.weights.clone(),
            cells: sol.diagram().cells.iter().map(|c| c.vertices().to_vec()).collect(),
            residual: sol.report.residual,
            iters: sol.report.iters,
        }
    }

    /// Rebuilds the diagram from sites and weights; stored cells are ignored
    /// and the residual is recomputed.
    pub fn into_solution(self) -> Result<SemiDiscreteSolution, OtError> {
        if self.weights.len() != self.sites.len() {
            return Err(OtError::InvalidProblem(format!(
                "{} weights for {} sites",
                self.weights.len(),
                self.sites.len()
            )));
        }
        let problem = SemiDiscreteProblem::new(self.source, self.sites, self.masses, self.target)?;
        let diagram = build_laguerre(&problem.sites, &self.weights, &problem.source)?;
        let area = problem.source.area();
        let residual = diagram
            .masses()
            .iter()
            .zip(&problem.masses)
            .map(|(a, b)| (a - b).abs() / area)
            .fold(0.0, f64::max);
        let potential = BrenierPotential::from_diagram(&diagram);
        Ok(SemiDiscreteSolution {
            problem,
            report: SolveReport {
                weights: self.weights,
                diagram,
                residual,
                iters: self.iters,
                history: Vec::new(),
            },
            potential,
        })
    }
}
