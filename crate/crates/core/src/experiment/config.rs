//! Declarative run descriptions.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::noise::NoiseDistribution;
use crate::protocol::{Mode, PathRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Condition,
    Channel,
    FisherSweep,
    Scaling,
    Continuous,
    OracleCheck,
    Estimate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Condition => "condition",
            Command::Channel => "channel",
            Command::FisherSweep => "fisher-sweep",
            Command::Scaling => "scaling",
            Command::Continuous => "continuous",
            Command::OracleCheck => "oracle-check",
            Command::Estimate => "estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    PhaseKick {
        p: f64,
        delta0: f64,
    },
    Atoms(Vec<(f64, f64)>),
    Gaussian {
        mean: f64,
        sigma: f64,
        points: usize,
    },
}

impl NoiseConfig {
    pub fn build(&self) -> crate::Result<NoiseDistribution> {
        match self {
            NoiseConfig::PhaseKick { p, delta0 } => NoiseDistribution::phase_kick(*p, *delta0),
            NoiseConfig::Atoms(atoms) => NoiseDistribution::new(atoms.clone()),
            NoiseConfig::Gaussian {
                mean,
                sigma,
                points,
            } => NoiseDistribution::discretized_gaussian(*mean, *sigma, *points),
        }
    }

    fn scale_angles(&mut self, k: f64) {
        match self {
            NoiseConfig::PhaseKick { delta0, .. } => *delta0 *= k,
            NoiseConfig::Atoms(atoms) => atoms.iter_mut().for_each(|a| a.0 *= k),
            NoiseConfig::Gaussian { mean, sigma, .. } => {
                *mean *= k;
                *sigma *= k;
            }
        }
    }
}

/// Inclusive, evenly spaced grid of `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Probe (or step) count for single-`N` commands.
    pub n: Option<usize>,
    /// Probe counts for sweeps.
    pub ns: Option<Vec<usize>>,
    /// Fixed path count; overrides `m_coefficient`.
    pub m: Option<usize>,
    /// `M = round(coefficient · N)`; defaults to 1.
    pub m_coefficient: Option<f64>,
    /// Path counts for the `channel` table.
    pub ms: Option<Vec<usize>>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub theta: Option<f64>,
    pub thetas: Option<Vec<f64>>,
    pub theta_grid: Option<Grid>,
}

fn default_mode() -> Mode {
    Mode::Parallel
}

impl ProtocolConfig {
    pub fn path_rule(&self) -> PathRule {
        match (self.m, self.m_coefficient) {
            (Some(m), _) => PathRule::Fixed(m),
            (None, Some(c)) => PathRule::Proportional(c),
            (None, None) => PathRule::default(),
        }
    }

    /// `thetas`, then `theta_grid`, then `theta`.
    pub fn theta_values(&self) -> Option<Vec<f64>> {
        if let Some(t) = &self.thetas {
            return Some(t.clone());
        }
        if let Some(g) = &self.theta_grid {
            return Some(g.points());
        }
        self.theta.map(|t| vec![t])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousConfig {
    #[serde(default = "one")]
    pub gamma: f64,
    pub omega: f64,
    pub t_values: Vec<f64>,
    pub total_times: Option<Vec<f64>>,
    pub total_time_grid: Option<Grid>,
}

fn one() -> f64 {
    1.0
}

impl ContinuousConfig {
    pub fn total_time_values(&self) -> Vec<f64> {
        match (&self.total_times, &self.total_time_grid) {
            (Some(v), _) => v.clone(),
            (None, Some(g)) => g.points(),
            (None, None) => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    pub nu: u64,
    #[serde(default = "one_trial")]
    pub trials: usize,
    /// Defaults to `protocol.theta`, then to the point where the sine fringe vanishes.
    pub theta_true: Option<f64>,
    /// Defaults to `theta_true ± π/(2N)`.
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub record_counts: bool,
}

fn one_trial() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "eight")]
    pub max_paths: usize,
    #[serde(default = "twenty")]
    pub samples: usize,
    #[serde(default = "six")]
    pub max_steps: usize,
    #[serde(default = "oracle_tol")]
    pub tol: f64,
    /// Continuous-model check; skipped when absent.
    pub continuous: Option<OracleContinuousConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleContinuousConfig {
    #[serde(default = "one")]
    pub gamma: f64,
    pub omega: f64,
    pub t: f64,
    #[serde(default = "six")]
    pub max_paths: usize,
    #[serde(default = "six")]
    pub max_steps: usize,
    #[serde(default = "continuous_tol")]
    pub tol: f64,
}

fn eight() -> usize {
    8
}
fn twenty() -> usize {
    20
}
fn six() -> usize {
    6
}
fn oracle_tol() -> f64 {
    1e-10
}
fn continuous_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Angles (and `omega`) are given in units of π.
    #[serde(default)]
    pub pi_units: bool,
    /// Master seed for every random stream in the run.
    #[serde(default)]
    pub seed: u64,
    pub workers: Option<usize>,
    pub noise: Option<NoiseConfig>,
    pub protocol: Option<ProtocolConfig>,
    pub continuous: Option<ContinuousConfig>,
    pub estimation: Option<EstimationConfig>,
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Converts every angle from units of π to radians when `pi_units` is set.
    pub fn into_radians(mut self) -> Self {
        if !self.pi_units {
            return self;
        }
        let k = PI;
        if let Some(n) = &mut self.noise {
            n.scale_angles(k);
        }
        if let Some(p) = &mut self.protocol {
            p.theta = p.theta.map(|t| t * k);
            if let Some(ts) = &mut p.thetas {
                ts.iter_mut().for_each(|t| *t *= k);
            }
            if let Some(g) = &mut p.theta_grid {
                g.start *= k;
                g.stop *= k;
            }
        }
        if let Some(c) = &mut self.continuous {
            c.omega *= k;
        }
        if let Some(e) = &mut self.estimation {
            e.theta_true = e.theta_true.map(|t| t * k);
            if let Some(w) = &mut e.window {
                w[0] *= k;
                w[1] *= k;
            }
        }
        if let Some(c) = self.oracle.as_mut().and_then(|o| o.continuous.as_mut()) {
            c.omega *= k;
        }
        self.pi_units = false;
        self
    }
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn require<'a, T>(&mut self, field: &str, value: &'a Option<T>) -> Option<&'a T> {
        if value.is_none() {
            self.push(field, "required for this command");
        }
        value.as_ref()
    }
}

/// Lists everything that would stop `config` from running; empty means runnable.
///
/// Expects angles in radians (see [`RunConfig::into_radians`]).
pub fn validate(config: &RunConfig) -> Vec<Diagnostic> {
    let mut d = Diagnostics(Vec::new());
    use Command::*;
    let cmd = config.command;

    if matches!(
        cmd,
        Condition | Channel | FisherSweep | Scaling | OracleCheck | Estimate
    ) {
        if let Some(noise) = d.require("noise", &config.noise) {
            if let Err(e) = noise.build() {
                d.push("noise", e.to_string());
            }
        }
    }
    if config.workers == Some(0) {
        d.push("workers", "must be at least 1");
    }

    if matches!(cmd, Channel | FisherSweep | Scaling | Estimate) {
        if let Some(p) = d.require("protocol", &config.protocol) {
            validate_protocol(&mut d, cmd, p);
        }
    }
    if cmd == Estimate {
        d.require("estimation", &config.estimation);
    }
    if matches!(cmd, Scaling | Estimate) {
        if let Some(e) = &config.estimation {
            validate_estimation(&mut d, cmd, e, config.protocol.as_ref());
        }
    }
    if cmd == Continuous {
        if let Some(c) = d.require("continuous", &config.continuous) {
            if !(c.gamma >= 0.0) {
                d.push("continuous.gamma", "must be nonnegative");
            }
            if c.t_values.is_empty() || c.t_values.iter().any(|&t| !(t > 0.0)) {
                d.push(
                    "continuous.t_values",
                    "need at least one positive control interval",
                );
            }
            let ts = c.total_time_values();
            if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0)) {
                d.push(
                    "continuous.total_times",
                    "need at least one positive total time (total_times or total_time_grid)",
                );
            }
        }
    }
    if cmd == OracleCheck {
        if let Some(o) = d.require("oracle", &config.oracle) {
            if o.max_paths == 0 {
                d.push("oracle.max_paths", "must be at least 1");
            }
            if !(o.tol > 0.0) {
                d.push("oracle.tol", "must be positive");
            }
            if let Some(c) = &o.continuous {
                if !(c.t > 0.0) {
                    d.push("oracle.continuous.t", "must be positive");
                }
                if c.max_paths == 0 || c.max_steps == 0 {
                    d.push(
                        "oracle.continuous",
                        "max_paths and max_steps must be at least 1",
                    );
                }
            }
        }
    }
    d.0
}

fn validate_protocol(d: &mut Diagnostics, cmd: Command, p: &ProtocolConfig) {
    if p.m == Some(0) {
        d.push("protocol.m", "path count must be at least 1");
    }
    if let Some(c) = p.m_coefficient {
        if !(c > 0.0) {
            d.push("protocol.m_coefficient", "must be positive");
        }
    }
    match cmd {
        Command::Channel => match &p.ms {
            Some(ms) if !ms.is_empty() && ms.iter().all(|&m| m >= 1) => {}
            _ => d.push("protocol.ms", "need a nonempty list of path counts >= 1"),
        },
        Command::FisherSweep | Command::Scaling => {
            match &p.ns {
                Some(ns) if !ns.is_empty() && ns.iter().all(|&n| n >= 1) => {}
                _ => d.push("protocol.ns", "need a nonempty list of probe counts >= 1"),
            }
            if cmd == Command::FisherSweep && p.theta_values().is_none_or(|t| t.is_empty()) {
                d.push("protocol.thetas", "need thetas, theta_grid or theta");
            }
        }
        Command::Estimate => match p.n {
            Some(n) if n >= 1 => {}
            _ => d.push("protocol.n", "need a probe count >= 1"),
        },
        _ => {}
    }
}

fn validate_estimation(
    d: &mut Diagnostics,
    cmd: Command,
    e: &EstimationConfig,
    p: Option<&ProtocolConfig>,
) {
    if e.nu == 0 {
        d.push("estimation.nu", "repetition count must be at least 1");
    }
    if e.trials == 0 {
        d.push("estimation.trials", "must be at least 1");
    }
    let Some(p) = p else { return };
    let largest_n = match cmd {
        Command::Estimate => p.n,
        _ => p.ns.as_ref().and_then(|ns| ns.iter().copied().max()),
    };
    if let (Some([lo, hi]), Some(n)) = (e.window, largest_n) {
        if !(hi > lo) {
            d.push("estimation.window", "window is empty");
        } else if hi - lo > TAU / n.max(1) as f64 + 1e-12 {
            d.push(
                "estimation.window",
                format!(
                    "width {} exceeds 2π/N = {} (phase not identifiable)",
                    hi - lo,
                    TAU / n as f64
                ),
            );
        }
        if let Some(theta) = e.theta_true.or(p.theta) {
            if !(lo..=hi).contains(&theta) {
                d.push("estimation.theta_true", "outside the estimation window");
            }
        }
    }
}

/// Sets `value` at a dotted path, creating intermediate objects.
pub fn set_dotted(root: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("malformed override path '{path}'"));
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("'{}' is not an object", parts[..i].join(".")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("path has at least one component")
}

/// Parses `path=value`; the value is JSON when it parses, a string otherwise.
pub fn parse_override(arg: &str) -> Result<(String, Value), String> {
    let (path, raw) = arg
        .split_once('=')
        .ok_or_else(|| format!("override '{arg}' is not of the form path=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((path.trim().to_string(), value))
}
