//! Running a scenario file: tasks in order, one CSV per task plus a summary.

use std::path::{Path, PathBuf};

use spacelike::Verdict;

use crate::config::{ConfigError, ScenarioConfig, TaskConfig};
use crate::status::{write_checks_csv, Check, Expect, Status};
use crate::tasks::{run_task, TaskContext, TaskError};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out: None, seed: None, tol_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub name: String,
    pub kind: String,
    pub expect: Expect,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

impl TaskOutcome {
    /// A task expected to fail (or hit a precondition) succeeds when at
    /// least one of its checks does so.
    pub fn status(&self) -> Status {
        if self.error.is_some() {
            return Status::Fail;
        }
        match self.expect {
            Expect::Pass => {
                if self.checks.iter().all(|c| c.status().ok()) {
                    Status::Pass
                } else if self.checks.iter().any(|c| c.status() == Status::Fail) {
                    Status::Fail
                } else {
                    Status::Precondition
                }
            }
            Expect::Fail | Expect::Precondition => {
                let wanted = if self.expect == Expect::Fail { Verdict::Fail } else { Verdict::Precondition };
                if self.checks.iter().any(|c| c.report.verdict == wanted) {
                    Status::of(wanted, self.expect)
                } else {
                    Status::UnexpectedPass
                }
            }
        }
    }

    pub fn line(&self) -> String {
        let mut s = format!("{:<22} {:<12} {} ({} checks", self.status().as_str(), self.kind, self.name, self.checks.len());
        let bad: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| c.report.verdict != Verdict::Pass)
            .map(|c| c.report.check.as_str())
            .collect();
        if !bad.is_empty() {
            s.push_str(&format!(", not passing: {}", bad.join(" ")));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!(", error: {e}"));
        }
        s.push(')');
        s
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<spacelike::Error> for RunError {
    fn from(e: spacelike::Error) -> Self {
        RunError::Io(std::io::Error::other(e.to_string()))
    }
}

pub fn output_dir(cfg: &ScenarioConfig, opts: &RunOptions) -> PathBuf {
    opts.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn run_one(task: &TaskConfig, ctx: &TaskContext) -> Result<TaskOutcome, RunError> {
    let (checks, error) = match run_task(task, ctx) {
        Ok(c) => (c, None),
        Err(TaskError::Config(e)) => return Err(RunError::Config(e)),
        Err(TaskError::Compute(e)) => (Vec::new(), Some(e.to_string())),
    };
    Ok(TaskOutcome { name: task.name.clone(), kind: task.kind.clone(), expect: task.expect, checks, error })
}

/// Runs every task; configuration problems abort, numerical failures are
/// recorded in the outcome.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<TaskOutcome>, RunError> {
    let model = match &cfg.model {
        Some(m) => Some(m.build().map_err(RunError::Config)?),
        None => None,
    };
    let dir = output_dir(cfg, opts);
    std::fs::create_dir_all(&dir)?;
    let ctx = TaskContext { model: model.as_ref(), out_dir: &dir, seed: opts.seed.unwrap_or(cfg.seed), tol_scale: opts.tol_scale };
    let mut outcomes = Vec::new();
    for task in &cfg.tasks {
        let o = run_one(task, &ctx)?;
        write_checks_csv(&o.checks, std::fs::File::create(dir.join(format!("{}.csv", o.name)))?)?;
        outcomes.push(o);
    }
    write_summary(&outcomes, &dir)?;
    Ok(outcomes)
}

pub fn run_config_file(path: &Path, opts: &RunOptions) -> Result<Vec<TaskOutcome>, RunError> {
    let cfg = ScenarioConfig::load(path).map_err(RunError::Config)?;
    run_scenario(&cfg, opts)
}

fn write_summary(outcomes: &[TaskOutcome], dir: &Path) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(spacelike::Error::from)?;
    let mut rows = vec![vec!["task".to_string(), "kind".into(), "expect".into(), "status".into(), "checks".into(), "error".into()]];
    for o in outcomes {
        rows.push(vec![
            o.name.clone(),
            o.kind.clone(),
            o.expect.as_str().into(),
            o.status().as_str().into(),
            o.checks.len().to_string(),
            o.error.clone().unwrap_or_default(),
        ]);
    }
    for r in rows {
        w.write_record(&r).map_err(spacelike::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

/// Process exit code for a finished run: 0 when every task is fine, 2 otherwise.
pub fn exit_code(outcomes: &[TaskOutcome]) -> i32 {
    if outcomes.iter().all(|o| o.status().ok()) {
        0
    } else {
        2
    }
}
