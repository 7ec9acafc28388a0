//! Reproducible experiments that emit CSV reports.
//!
//! Each experiment takes an [`ExperimentConfig`] and returns an
//! [`ExperimentReport`]. Identical configurations give byte-identical CSV
//! bodies under either execution mode: randomness is drawn per work item from
//! `(seed, stream)` pairs and results are assembled in index order.

mod ball;
mod identity;
mod level;
mod stats;
mod superlevel;
mod trace;

pub use stats::{kendall_tau, quantile};

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::exec::Execution;
use crate::harmonic::HarmonicError;
use crate::network::{BirthDeathRule, Family, NetworkError};
use crate::transforms::TransformError;
use crate::walk::WalkError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn config_err(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    CrossingIdentity,
    SuperlevelBound,
    LevelCutTrend,
    BallWitness,
    TraceRecurrence,
    RnGrowth,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::CrossingIdentity,
        ExperimentKind::SuperlevelBound,
        ExperimentKind::LevelCutTrend,
        ExperimentKind::BallWitness,
        ExperimentKind::TraceRecurrence,
        ExperimentKind::RnGrowth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CrossingIdentity => "crossing-identity",
            ExperimentKind::SuperlevelBound => "superlevel-bound",
            ExperimentKind::LevelCutTrend => "level-cut-trend",
            ExperimentKind::BallWitness => "ball-witness",
            ExperimentKind::TraceRecurrence => "trace-recurrence",
            ExperimentKind::RnGrowth => "rn-growth",
        }
    }

    /// The statement the experiment checks, echoed into the CSV header.
    pub fn claim(self) -> &'static str {
        match self {
            ExperimentKind::CrossingIdentity => {
                "E[N(x,y)] = alpha c(x,y) [v(x) + v(y)] for the walk from o absorbed at z"
            }
            ExperimentKind::SuperlevelBound => {
                "C(A_t, z) <= C(a, z) / t for A_t = {v >= t}; C(A, z) <= C(a, z) / min_A v for any A containing a"
            }
            ExperimentKind::LevelCutTrend => {
                "conductance from W_t to infinity in (G_t, E[N]) is at most 2; in (G_t, c) at most 1/(alpha t)"
            }
            ExperimentKind::BallWitness => {
                "on a transient network some finite ball has conductance to infinity above any given m"
            }
            ExperimentKind::TraceRecurrence => "the traces (G, N) and (G, 1{N>0}) of a transient walk are recurrent",
            ExperimentKind::RnGrowth => "exploratory: growth of R(n) against log n and log^2 n (no assertion)",
        }
    }

    /// Experiment-specific `--param` keys.
    fn param_keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::CrossingIdentity => &["cap"],
            ExperimentKind::SuperlevelBound => &["networks", "size", "density", "cmin", "cmax", "subsets"],
            ExperimentKind::LevelCutTrend => &[],
            ExperimentKind::BallWitness => &["m"],
            ExperimentKind::TraceRecurrence => &["radius", "steps", "sample", "dump_dir"],
            ExperimentKind::RnGrowth => &["steps", "min_exp"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            config_err(format!("unknown experiment {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Everything an experiment run depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// One of `lattice`, `tree`, `wedge`, `birth-death`. Ignored by
    /// `superlevel-bound`, which samples random networks.
    pub family: String,
    /// Family and experiment parameters from `--param key=value`.
    pub params: BTreeMap<String, String>,
    /// Collapse depths; depth `n` means the sink replaces the sphere at
    /// distance `n`.
    pub depths: Vec<u32>,
    pub t_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub execution: Execution,
}

impl ExperimentConfig {
    /// Defaults that reproduce the standard run of each experiment.
    pub fn new(kind: ExperimentKind) -> ExperimentConfig {
        let (family, depths, trials) = match kind {
            ExperimentKind::CrossingIdentity => ("tree", vec![6], 10_000),
            ExperimentKind::SuperlevelBound => ("random", vec![], 1),
            ExperimentKind::LevelCutTrend => ("tree", (4..=16).collect(), 1),
            ExperimentKind::BallWitness => ("tree", vec![20], 1),
            ExperimentKind::TraceRecurrence => ("lattice", vec![], 10),
            ExperimentKind::RnGrowth => ("lattice", vec![], 8),
        };
        let t_grid = match kind {
            ExperimentKind::LevelCutTrend => vec![0.2, 0.5, 0.8],
            _ => (1..=9).map(|k| k as f64 / 10.0).collect(),
        };
        ExperimentConfig {
            kind,
            family: family.to_string(),
            params: BTreeMap::new(),
            depths,
            t_grid,
            trials,
            seed: 1,
            out: None,
            execution: Execution::default(),
        }
    }

    /// Applies one `key = value` setting, as read from a config file or a
    /// command-line flag.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let value = value.trim();
        match key.trim() {
            "family" => self.family = value.to_string(),
            "param" => {
                let (k, v) =
                    value.split_once('=').ok_or_else(|| config_err(format!("param {value:?} is not key=value")))?;
                self.params.insert(k.trim().to_string(), v.trim().to_string());
            }
            "depths" => self.depths = parse_depths(value)?,
            "tgrid" | "t_grid" => self.t_grid = parse_list(value, "tgrid")?,
            "trials" => self.trials = parse_num(value, "trials")?,
            "seed" => self.seed = parse_num(value, "seed")?,
            "out" => self.out = Some(PathBuf::from(value)),
            "execution" => {
                self.execution = match value {
                    "sequential" => Execution::Sequential,
                    "parallel" => Execution::Parallel,
                    _ => return Err(config_err(format!("execution must be sequential or parallel, got {value:?}"))),
                }
            }
            "sequential" => {
                if parse_bool(value, "sequential")? {
                    self.execution = Execution::Sequential;
                }
            }
            "experiment" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.kind {
                    return Err(config_err(format!("config is for {kind}, running {}", self.kind)));
                }
            }
            other => {
                if let Some(p) = other.strip_prefix("param.") {
                    self.params.insert(p.to_string(), value.to_string());
                } else {
                    return Err(config_err(format!("unknown key {other:?}")));
                }
            }
        }
        Ok(())
    }

    /// Applies a config file: one `key = value` per line, `#` comments.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), ExperimentError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| config_err(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v).map_err(|e| {
                config_err(format!("line {}: {}", i + 1, e.to_string().trim_start_matches("configuration: ")))
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("depths must be strictly increasing"));
        }
        if self.depths.first() == Some(&0) {
            return Err(config_err("depths start at 1"));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(config_err(format!("t = {t} is outside (0, 1)")));
        }
        let needs_depths = matches!(
            self.kind,
            ExperimentKind::CrossingIdentity | ExperimentKind::LevelCutTrend | ExperimentKind::BallWitness
        );
        if needs_depths && self.depths.is_empty() {
            return Err(config_err(format!("{} needs --depths", self.kind)));
        }
        if self.kind == ExperimentKind::LevelCutTrend && self.t_grid.is_empty() {
            return Err(config_err("level-cut-trend needs a non-empty --tgrid"));
        }
        let family_keys = family_param_keys(&self.family, self.kind)?;
        for k in self.params.keys() {
            if !family_keys.contains(&k.as_str()) && !self.kind.param_keys().contains(&k.as_str()) {
                return Err(config_err(format!("unknown parameter {k:?} for {} on {}", self.kind, self.family)));
            }
        }
        if self.kind != ExperimentKind::SuperlevelBound {
            self.build_family()?;
        }
        Ok(())
    }

    fn raw_param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub(crate) fn param<T: FromStr>(&self, key: &str, default: T) -> Result<T, ExperimentError> {
        match self.raw_param(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| config_err(format!("bad value {v:?} for parameter {key}"))),
        }
    }

    /// The infinite family named by `family` and its parameters.
    pub fn build_family(&self) -> Result<Family, ExperimentError> {
        let family = match self.family.as_str() {
            "lattice" => Family::lattice(self.param("dim", 3usize)?),
            "tree" => Family::tree(self.param("branching", 2u32)?),
            "wedge" => Family::wedge(self.param("exponent", 1.0 / 3.0)?),
            "birth-death" => {
                let rule = match self.raw_param("rule").unwrap_or("geometric") {
                    "geometric" => BirthDeathRule::Geometric { ratio: self.param("ratio", 2.0)? },
                    "power" => BirthDeathRule::Power { exponent: self.param("exponent", 2.0)? },
                    other => return Err(config_err(format!("unknown birth-death rule {other:?}"))),
                };
                Family::birth_death(rule)
            }
            other => return Err(config_err(format!("unknown family {other:?}"))),
        };
        family.map_err(|e| config_err(e.to_string()))
    }

    /// `# key=value` lines echoing the full configuration.
    fn echo(&self) -> Vec<String> {
        let mut lines = vec![format!("experiment={}", self.kind), format!("family={}", self.family)];
        if self.kind != ExperimentKind::SuperlevelBound {
            if let Ok(f) = self.build_family() {
                lines.push(format!("family_resolved={}", f.name()));
            }
        }
        for (k, v) in &self.params {
            lines.push(format!("param.{k}={v}"));
        }
        lines.push(format!("depths={}", join(&self.depths)));
        lines.push(format!("tgrid={}", join(&self.t_grid)));
        lines.push(format!("trials={}", self.trials));
        lines.push(format!("seed={}", self.seed));
        lines
    }
}

fn family_param_keys(family: &str, kind: ExperimentKind) -> Result<&'static [&'static str], ExperimentError> {
    if kind == ExperimentKind::SuperlevelBound {
        return Ok(&[]);
    }
    Ok(match family {
        "lattice" => &["dim"],
        "tree" => &["branching"],
        "wedge" => &["exponent"],
        "birth-death" => &["rule", "ratio", "exponent"],
        other => return Err(config_err(format!("unknown family {other:?}"))),
    })
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T, ExperimentError> {
    s.trim().parse().map_err(|_| config_err(format!("bad {what} {s:?}")))
}

fn parse_bool(s: &str, what: &str) -> Result<bool, ExperimentError> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(format!("bad {what} {s:?}"))),
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, ExperimentError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| parse_num(p, what)).collect()
}

/// `4,5,6` or an inclusive range `4..16`, or a mix of both.
fn parse_depths(s: &str) -> Result<Vec<u32>, ExperimentError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = parse_num(a, "depths")?;
            let b: u32 = parse_num(b.trim_start_matches('='), "depths")?;
            out.extend(a..=b);
        } else {
            out.push(parse_num(part, "depths")?);
        }
    }
    Ok(out)
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Passed,
    /// A checked identity or inequality failed.
    Violation(String),
    /// A statistical or truncation-dependent target was not reached.
    SoftFailure(String),
}

impl Outcome {
    /// Process exit code for the CLI: 0, 2 or 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Passed => 0,
            Outcome::Violation(_) => 2,
            Outcome::SoftFailure(_) => 4,
        }
    }

    fn describe(&self) -> String {
        match self {
            Outcome::Passed => "passed".to_string(),
            Outcome::Violation(m) => format!("violation: {m}"),
            Outcome::SoftFailure(m) => format!("soft failure: {m}"),
        }
    }

    /// Keeps the more severe of two outcomes (violation over soft failure).
    fn worst(self, other: Outcome) -> Outcome {
        match (&self, &other) {
            (Outcome::Violation(_), _) => self,
            (_, Outcome::Violation(_)) => other,
            (Outcome::SoftFailure(_), _) => self,
            _ => other,
        }
    }
}

/// A table with a metadata header.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    /// Lines printed after `# ` above the header row.
    pub metadata: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub outcome: Outcome,
}

impl ExperimentReport {
    fn new(config: &ExperimentConfig, columns: &[&str]) -> ExperimentReport {
        let mut metadata = vec![format!("ohmtrace {}", env!("CARGO_PKG_VERSION"))];
        metadata.push(format!("claim: {}", config.kind.claim()));
        metadata.extend(config.echo());
        ExperimentReport {
            kind: config.kind,
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            outcome: Outcome::Passed,
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn note(&mut self, line: impl Into<String>) {
        self.metadata.push(line.into());
    }

    fn record(&mut self, outcome: Outcome) {
        let current = std::mem::replace(&mut self.outcome, Outcome::Passed);
        self.outcome = current.worst(outcome);
    }

    /// Value of column `name` in row `i`.
    pub fn cell(&self, i: usize, name: &str) -> Option<&str> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows.get(i).map(|r| r[j].as_str())
    }

    /// Header row and data rows, without metadata.
    pub fn body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for m in &self.metadata {
            let _ = writeln!(s, "# {m}");
        }
        let _ = writeln!(s, "# outcome: {}", self.outcome.describe());
        s.push_str(&self.body());
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<(), ExperimentError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Formats a float for a CSV cell (shortest round-trip form).
fn num(x: f64) -> String {
    format!("{x}")
}

/// Validates the configuration and runs the experiment.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    match config.kind {
        ExperimentKind::CrossingIdentity => identity::run(config),
        ExperimentKind::SuperlevelBound => superlevel::run(config),
        ExperimentKind::LevelCutTrend => level::run(config),
        ExperimentKind::BallWitness => ball::run(config),
        ExperimentKind::TraceRecurrence => trace::run_recurrence(config),
        ExperimentKind::RnGrowth => trace::run_growth(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        assert!("bogus".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn config_file_and_overrides() {
        let mut c = ExperimentConfig::new(ExperimentKind::LevelCutTrend);
        c.apply_file_text("# trend\nfamily = tree\ndepths = 4..6, 8\ntgrid = 0.5\nparam = branching=3\nseed = 9\n")
            .unwrap();
        assert_eq!(c.depths, vec![4, 5, 6, 8]);
        assert_eq!(c.t_grid, vec![0.5]);
        assert_eq!(c.params["branching"], "3");
        assert_eq!(c.seed, 9);
        c.set("seed", "10").unwrap();
        assert_eq!(c.seed, 10);
        c.validate().unwrap();
        assert_eq!(c.build_family().unwrap(), Family::Tree { branching: 3 });
    }

    #[test]
    fn invalid_configs() {
        let mut c = ExperimentConfig::new(ExperimentKind::LevelCutTrend);
        c.depths = vec![5, 4];
        assert!(matches!(c.validate(), Err(ExperimentError::Config(_))));
        let mut c = ExperimentConfig::new(ExperimentKind::LevelCutTrend);
        c.t_grid = vec![1.0];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(ExperimentKind::LevelCutTrend);
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(ExperimentKind::LevelCutTrend);
        c.set("param", "colour=red").unwrap();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new(ExperimentKind::LevelCutTrend);
        c.family = "moebius".into();
        assert!(c.validate().is_err());
        assert!(c.apply_file_text("nonsense").is_err());
        assert!(c.set("bogus", "1").is_err());
    }

    #[test]
    fn worst_outcome_wins() {
        let soft = Outcome::SoftFailure("s".into());
        let bad = Outcome::Violation("v".into());
        assert_eq!(Outcome::Passed.worst(soft.clone()), soft);
        assert_eq!(soft.clone().worst(bad.clone()), bad);
        assert_eq!(bad.clone().worst(Outcome::Passed), bad);
        assert_eq!(bad.exit_code(), 2);
    }
}
