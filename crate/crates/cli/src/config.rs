//! Scenario files: `[section]` headers followed by `key = value` lines.
//!
//! ```text
//! [model]
//! profile = hyperbolic
//! m = 2
//!
//! [task:cmc]
//! kind = solve-graph
//! h0 = 0.5
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use spacelike::geometry::{RadialBase, RadialProfile, StaticModel, Warp};

use crate::status::Expect;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.msg)
        } else {
            write!(f, "line {}: {}", self.line, self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.entry(key).map_or(default, |e| e.value.as_str())
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => match e.value.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => err(e.line, format!("`{key}` must be a finite number, got `{}`", e.value)),
            },
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_req(&self, key: &str) -> Result<f64, ConfigError> {
        match self.f64_opt(key)? {
            Some(v) => Ok(v),
            None => err(self.line, format!("[{}] needs `{key}`", self.name)),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse::<usize>()
                .or_else(|_| err(e.line, format!("`{key}` must be a nonnegative integer, got `{}`", e.value))),
        }
    }

    /// Comma-separated numbers.
    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.entry(key) {
            None => Ok(default.to_vec()),
            Some(e) => e
                .value
                .split(',')
                .map(|t| match t.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => err(e.line, format!("`{key}` must be a list of numbers, bad item `{}`", t.trim())),
                })
                .collect(),
        }
    }

    /// Rejects keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return err(e.line, format!("unknown key `{}` in [{}]", e.key, self.name));
            }
        }
        Ok(())
    }
}

/// Parses the line-based format; comments start with `#` or `;`.
pub fn parse_ini(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, "section header must end with `]`");
            };
            let name = name.trim();
            if name.is_empty() {
                return err(line, "empty section name");
            }
            if sections.iter().any(|s| s.name == name) {
                return err(line, format!("duplicate section [{name}]"));
            }
            sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = t.split_once('=') else {
            return err(line, format!("expected `key = value`, got `{t}`"));
        };
        let key = key.trim();
        if key.is_empty() {
            return err(line, "empty key");
        }
        let Some(sec) = sections.last_mut() else {
            return err(line, "entry before any section header");
        };
        if sec.entry(key).is_some() {
            return err(line, format!("duplicate key `{key}`"));
        }
        sec.entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
    }
    Ok(sections)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub section: Section,
    pub base_dir: PathBuf,
}

const MODEL_KEYS: &[&str] = &[
    "profile",
    "m",
    "curvature",
    "mu",
    "profile_csv",
    "warp",
    "warp_value",
    "warp_rate",
    "s_min",
    "s_max",
];

impl ModelConfig {
    pub fn m(&self) -> Result<usize, ConfigError> {
        let m = self.section.usize_or("m", 2)?;
        if !(2..=7).contains(&m) {
            let line = self.section.entry("m").map_or(self.section.line, |e| e.line);
            return err(line, format!("m must lie in 2..=7, got {m}"));
        }
        Ok(m)
    }

    pub fn build(&self) -> Result<StaticModel, ConfigError> {
        let s = &self.section;
        let at = |key: &str| s.entry(key).map_or(s.line, |e| e.line);
        let lib = |key: &str, e: spacelike::Error| ConfigError { line: at(key), msg: e.to_string() };
        let m = self.m()?;
        let kind = s.str_or("profile", "");
        let base = match kind {
            "euclidean" => RadialBase::euclidean(m),
            "hyperbolic" => RadialBase::hyperbolic(m, s.f64_or("curvature", 1.0)?),
            "schwarzschild" => RadialBase::schwarzschild(s.f64_or("mu", 1.0)?, m),
            "custom" => {
                let Some(e) = s.entry("profile_csv") else {
                    return err(s.line, "custom profile needs `profile_csv`");
                };
                let path = self.base_dir.join(&e.value);
                if !path.exists() {
                    return err(e.line, format!("profile file {} does not exist", path.display()));
                }
                RadialProfile::from_csv(&path).and_then(|p| RadialBase::new(m, p))
            }
            "" => return err(s.line, "[model] needs `profile`"),
            other => return err(at("profile"), format!("unknown profile `{other}`")),
        }
        .map_err(|e| lib("profile", e))?;
        let (lo, hi) = base.domain();
        let (s_min, s_max) = (s.f64_or("s_min", lo)?, s.f64_or("s_max", hi)?);
        let base = if (s_min, s_max) != (lo, hi) {
            base.with_domain(s_min, s_max).map_err(|e| lib("s_min", e))?
        } else {
            base
        };
        let warp = match s.str_or("warp", if kind == "schwarzschild" { "lapse" } else { "constant" }) {
            "constant" => Warp::Constant(s.f64_or("warp_value", 1.0)?),
            "exponential" => Warp::Exponential { rate: s.f64_req("warp_rate")? },
            "lapse" => Warp::SchwarzschildLapse,
            other => return err(at("warp"), format!("unknown warp `{other}`")),
        };
        StaticModel::new(base, warp).map_err(|e| lib("warp", e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig {
    pub name: String,
    pub kind: String,
    pub expect: Expect,
    pub section: Section,
}

pub const TASK_KINDS: &[&str] = &["solve-graph", "barrier", "verify", "estimates", "growth", "angle-bound", "elliptic", "suite"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: Option<ModelConfig>,
    pub tasks: Vec<TaskConfig>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ScenarioConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let sections = parse_ini(text)?;
        let mut model = None;
        let mut tasks = Vec::new();
        let (mut out_dir, mut seed) = (None, DEFAULT_SEED);
        let mut names = BTreeSet::new();
        for sec in sections {
            if sec.name == "model" {
                sec.only(MODEL_KEYS)?;
                model = Some(ModelConfig { section: sec, base_dir: base_dir.to_path_buf() });
            } else if sec.name == "output" {
                sec.only(&["dir", "seed"])?;
                if let Some(e) = sec.entry("dir") {
                    out_dir = Some(base_dir.join(&e.value));
                }
                if let Some(e) = sec.entry("seed") {
                    seed = e.value.parse().or_else(|_| err(e.line, format!("seed must be an integer, got `{}`", e.value)))?;
                }
            } else if sec.name == "task" || sec.name.starts_with("task:") {
                let Some(kind) = sec.entry("kind").map(|e| e.value.clone()) else {
                    return err(sec.line, format!("[{}] needs `kind`", sec.name));
                };
                if !TASK_KINDS.contains(&kind.as_str()) {
                    let line = sec.entry("kind").map_or(sec.line, |e| e.line);
                    return err(line, format!("unknown task kind `{kind}` (expected one of {})", TASK_KINDS.join(", ")));
                }
                let name = sec.name.strip_prefix("task:").map_or_else(|| kind.clone(), |n| n.trim().to_string());
                if !names.insert(name.clone()) {
                    return err(sec.line, format!("duplicate task name `{name}`"));
                }
                let expect = match sec.str_or("expect", "pass") {
                    "pass" => Expect::Pass,
                    "fail" => Expect::Fail,
                    "precondition" => Expect::Precondition,
                    other => {
                        let line = sec.entry("expect").map_or(sec.line, |e| e.line);
                        return err(line, format!("`expect` must be pass, fail or precondition, got `{other}`"));
                    }
                };
                tasks.push(TaskConfig { name, kind, expect, section: sec });
            } else {
                return err(sec.line, format!("unknown section [{}]", sec.name));
            }
        }
        if tasks.is_empty() {
            return err(1, "no [task] section");
        }
        let needs_model = tasks.iter().any(|t| t.kind != "suite");
        if needs_model && model.is_none() {
            return err(1, "missing [model] section");
        }
        if let Some(m) = &model {
            m.build()?;
        }
        Ok(ScenarioConfig { model, tasks, out_dir, seed })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: 0, msg: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(t: &str) -> Result<ScenarioConfig, ConfigError> {
        ScenarioConfig::parse(t, Path::new("."))
    }

    #[test]
    fn minimal_scenario() {
        let c = parse("[model]\nprofile = hyperbolic\nm = 2\n[task:a]\nkind = growth\n").unwrap();
        assert_eq!(c.tasks[0].name, "a");
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.model.unwrap().build().unwrap().m(), 2);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse("[task]\nkind = growth\n").unwrap_err();
        assert!(e.msg.contains("missing [model]"));
        let e = parse("[model]\nprofile = hyperbolic\nbogus = 1\n[task]\nkind = growth\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse("[model]\nprofile = hyperbolic\nm = x\n[task]\nkind = growth\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse("[model]\nprofile = hyperbolic\n[task]\nkind = fly\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse("[model]\nprofile hyperbolic\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse("[model]\nprofile = hyperbolic\nm = 2\nm = 3\n").unwrap_err();
        assert_eq!(e.line, 4);
    }

    #[test]
    fn lists_and_defaults() {
        let secs = parse_ini("[x]\nr = 1, 2.5 ,3\n").unwrap();
        assert_eq!(secs[0].list_or("r", &[]).unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(secs[0].f64_or("missing", 4.0).unwrap(), 4.0);
    }

    #[test]
    fn missing_profile_file() {
        let e = parse("[model]\nprofile = custom\nprofile_csv = nope.csv\n[task]\nkind = growth\n").unwrap_err();
        assert_eq!(e.line, 3);
    }
}
