use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use polyot::io::read_json;

pub const DEFAULT_N: usize = 800;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_LEVELS: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Singular,
    Partial,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Singular => "singular",
            Command::Partial => "partial",
            Command::Verify => "verify",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "polyot", version, about = "Optimal transport onto polygons: solve, analyze, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Solve a complete semi-discrete problem.
    Solve(Flags),
    /// Extract and classify the singular set, optionally over refinement levels.
    Singular(Flags),
    /// Solve a partial problem and check its free boundary.
    Partial(Flags),
    /// Run the acceptance suite on bundled fixtures.
    Verify(Flags),
}

impl Sub {
    pub fn split(self) -> (Command, Flags) {
        match self {
            Sub::Solve(f) => (Command::Solve, f),
            Sub::Singular(f) => (Command::Singular, f),
            Sub::Partial(f) => (Command::Partial, f),
            Sub::Verify(f) => (Command::Verify, f),
        }
    }
}

/// Flags shared by all subcommands. Unset flags fall back to `--config`,
/// then to the problem file, then to built-in defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Prior `solve` output to analyze instead of solving.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Absolute mass for `partial`.
    #[arg(long)]
    pub mass: Option<f64>,
    /// JSON file with any of the fields above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Append a check that always fails.
    #[arg(long, hide = true)]
    pub force_fail: bool,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub levels: Option<usize>,
    pub out: Option<PathBuf>,
    pub mass: Option<f64>,
    #[serde(default)]
    pub force_fail: bool,
}

/// Resolved settings; `None` means "use the problem file or the default".
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem_path: Option<PathBuf>,
    pub solution_path: Option<PathBuf>,
    pub n_sites: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub refinement_levels: usize,
    pub output_dir: PathBuf,
    pub mass: Option<f64>,
    pub force_fail: bool,
}

fn existing(p: Option<PathBuf>, what: &str) -> Result<Option<PathBuf>, CliError> {
    match p {
        Some(p) if !p.exists() => Err(CliError::Input(format!("{what} {} does not exist", p.display()))),
        p => Ok(p),
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<RunConfig, CliError> {
        let file = match &flags.config {
            Some(p) => read_json::<ConfigFile>(p).map_err(|e| CliError::Input(e.to_string()))?,
            None => ConfigFile::default(),
        };
        let cfg = RunConfig {
            command,
            problem_path: existing(flags.problem.or(file.problem), "problem file")?,
            solution_path: existing(flags.solution.or(file.solution), "solution file")?,
            n_sites: flags.n.or(file.n),
            seed: flags.seed.or(file.seed),
            tol: flags.tol.or(file.tol),
            refinement_levels: flags.levels.or(file.levels).unwrap_or(DEFAULT_LEVELS),
            output_dir: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            mass: flags.mass.or(file.mass),
            force_fail: flags.force_fail || file.force_fail,
        };
        if cfg.n_sites == Some(0) {
            return Err(CliError::Input("--n must be at least 1".into()));
        }
        if cfg.refinement_levels == 0 {
            return Err(CliError::Input("--levels must be at least 1".into()));
        }
        if let Some(t) = cfg.tol.filter(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
        Ok(cfg)
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    pub fn problem(&self) -> Result<&Path, CliError> {
        self.problem_path
            .as_deref()
            .ok_or_else(|| CliError::Input(format!("{} needs --problem", self.command.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"n": 50, "seed": 4, "levels": 2}"#).unwrap();
        let flags = Flags {
            n: Some(10),
            config: Some(cfg),
            ..Default::default()
        };
        let rc = RunConfig::resolve(Command::Solve, flags).unwrap();
        assert_eq!(rc.n_sites, Some(10));
        assert_eq!(rc.seed, Some(4));
        assert_eq!(rc.refinement_levels, 2);
        assert_eq!(rc.tol, None);
    }

    #[test]
    fn rejects_bad_values() {
        let zero = Flags {
            n: Some(0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(Command::Solve, zero).is_err());
        let missing = Flags {
            problem: Some(PathBuf::from("/no/such/problem.json")),
            ..Default::default()
        };
        let e = RunConfig::resolve(Command::Solve, missing).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("/no/such/problem.json"));
    }
}
