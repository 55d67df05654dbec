//! Config-driven experiment runner behind the `pathmetro` binary.
//!
//! A run is one JSON file naming a command and its parameter groups. Dotted
//! overrides are applied to the raw JSON before it is typed, so any leaf can
//! be changed from the command line. Each run writes its table plus
//! `<out>.manifest.json` with the config echo and a SHA-256 of the table.

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::Value;

pub use config::{
    parse_override, set_dotted, validate, Command, ContinuousConfig, Diagnostic, EstimationConfig,
    Format, Grid, NoiseConfig, OracleConfig, OracleContinuousConfig, OutputConfig, ProtocolConfig,
    RunConfig,
};
pub use output::{manifest_path, sha256_hex, Cell, Manifest, Output, OutputFile, Table};
pub use run::{dispatch, log_log_slope, CONDITION_REPORT_TOL};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PATHMETRO_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    #[error("{0}")]
    ResourceLimit(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) => 2,
            RunError::Validation(_) => 3,
            RunError::ResourceLimit(_) => 4,
            RunError::Io(_) | RunError::Failed(_) => 1,
        }
    }

    fn missing(field: &str) -> Self {
        RunError::Validation(vec![Diagnostic {
            field: field.into(),
            message: "required for this command".into(),
        }])
    }
}

impl From<crate::Error> for RunError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::ResourceLimit { .. } => RunError::ResourceLimit(e.to_string()),
            other => RunError::Validation(vec![Diagnostic {
                field: "(run)".into(),
                message: other.to_string(),
            }]),
        }
    }
}

/// Command-line level inputs on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub command: Option<String>,
    pub config_text: String,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub overrides: Vec<String>,
    /// Worker count used when the config leaves `workers` unset.
    pub default_workers: Option<usize>,
}

/// A parsed, validated run ready to execute.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    /// Config as given, after overrides; echoed into the manifest.
    pub echo: Value,
    /// Typed config with angles in radians.
    pub config: RunConfig,
    pub out: PathBuf,
    pub format: Format,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: Output,
    pub out: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

/// Parses, applies overrides and validates, without touching the filesystem.
pub fn prepare(inv: &Invocation) -> Result<PreparedRun, RunError> {
    let mut echo: Value = serde_json::from_str(&inv.config_text)
        .map_err(|e| RunError::Parse(format!("config is not valid JSON: {e}")))?;
    if !echo.is_object() {
        return Err(RunError::Parse("config must be a JSON object".into()));
    }
    for arg in &inv.overrides {
        let (path, value) = parse_override(arg).map_err(RunError::Parse)?;
        set_dotted(&mut echo, &path, value).map_err(RunError::Parse)?;
    }
    if let Some(seed) = inv.seed {
        set_dotted(&mut echo, "seed", seed.into()).map_err(RunError::Parse)?;
    }
    if let Some(cmd) = &inv.command {
        match echo.get("command") {
            None => set_dotted(&mut echo, "command", Value::String(cmd.clone()))
                .map_err(RunError::Parse)?,
            Some(Value::String(c)) if c == cmd => {}
            Some(other) => {
                return Err(RunError::Validation(vec![Diagnostic {
                    field: "command".into(),
                    message: format!("config names {other} but '{cmd}' was requested"),
                }]))
            }
        }
    }
    let config: RunConfig = serde_json::from_value(echo.clone())
        .map_err(|e| RunError::Parse(format!("config: {e}")))?;
    let config = config.into_radians();
    let diags = validate(&config);
    if !diags.is_empty() {
        return Err(RunError::Validation(diags));
    }
    let format = inv
        .format
        .or(config.output.format)
        .or_else(|| {
            let p = inv.out.as_ref().or(config.output.path.as_ref())?;
            match p.extension()?.to_str()? {
                "json" => Some(Format::Json),
                _ => None,
            }
        })
        .unwrap_or_default();
    let out = inv
        .out
        .clone()
        .or_else(|| config.output.path.clone())
        .unwrap_or_else(|| {
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            PathBuf::from(format!("{}.{ext}", config.command.name()))
        });
    let workers = config.workers.or(inv.default_workers);
    Ok(PreparedRun {
        echo,
        config,
        out,
        format,
        workers,
    })
}

/// Runs on a pool of `run.workers` threads and writes the table and manifest.
pub fn execute(run: &PreparedRun) -> Result<RunReport, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = run.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Failed(format!("worker pool: {e}")))?;
    let output = pool.install(|| dispatch(&run.config))?;
    let bytes = output.render(run.format)?;
    output::write_file(&run.out, &bytes)?;
    let manifest = Manifest {
        command: run.config.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        seed: run.config.seed,
        workers: pool.current_num_threads(),
        config: run.echo.clone(),
        outputs: vec![OutputFile {
            path: run.out.clone(),
            sha256: sha256_hex(&bytes),
        }],
        summary: output.summary.clone(),
        notes: output.notes.clone(),
    };
    let manifest_path = manifest_path(&run.out);
    let mut text =
        serde_json::to_vec_pretty(&manifest).map_err(|e| RunError::Failed(e.to_string()))?;
    text.push(b'\n');
    output::write_file(&manifest_path, &text)?;
    Ok(RunReport {
        output,
        out: run.out.clone(),
        manifest_path,
        manifest,
    })
}

/// Reads `path` into an [`Invocation`]; unreadable files count as parse errors.
pub fn read_config(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path)
        .map_err(|e| RunError::Parse(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv(text: &str) -> Invocation {
        Invocation {
            config_text: text.into(),
            ..Default::default()
        }
    }

    #[test]
    fn malformed_json_is_parse_error() {
        let err = prepare(&inv("{\"command\": ")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn unknown_field_is_parse_error() {
        let err = prepare(&inv(
            r#"{"command":"condition","noise":{"phase_kick":{"p":0.5,"delta":1}}}"#,
        ))
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn validation_exit_code() {
        let err = prepare(&inv(r#"{"command":"condition"}"#)).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn command_mismatch() {
        let mut i = inv(r#"{"command":"condition","noise":{"phase_kick":{"p":0.5,"delta0":1}}}"#);
        i.command = Some("channel".into());
        assert_eq!(prepare(&i).unwrap_err().exit_code(), 3);
        i.command = Some("condition".into());
        assert!(prepare(&i).is_ok());
    }

    #[test]
    fn overrides_and_defaults() {
        let mut i = inv(r#"{"noise":{"phase_kick":{"p":0.5,"delta0":1}}}"#);
        i.command = Some("condition".into());
        i.overrides = vec![
            "noise.phase_kick.p=0.25".into(),
            "output.format=json".into(),
        ];
        i.seed = Some(9);
        let run = prepare(&i).unwrap();
        assert_eq!(run.config.seed, 9);
        assert_eq!(run.format, Format::Json);
        assert_eq!(run.out, PathBuf::from("condition.json"));
        assert!(matches!(run.config.noise, Some(NoiseConfig::PhaseKick { p, .. }) if p == 0.25));
    }

    #[test]
    fn condition_summary() {
        let run = prepare(&inv(r#"{"command":"condition","pi_units":true,"noise":{"phase_kick":{"p":0.5,"delta0":1}}}"#))
            .unwrap();
        let out = dispatch(&run.config).unwrap();
        let verdict = out.summary["verdict"].as_str().unwrap();
        assert!(verdict.starts_with("satisfied"), "{verdict}");
    }

    #[test]
    fn oracle_budget_maps_to_exit_four() {
        let text = r#"{"command":"oracle-check",
            "noise":{"gaussian":{"mean":3.14159,"sigma":0.5,"points":101}},
            "oracle":{"max_paths":4,"samples":1}}"#;
        let run = prepare(&inv(text)).unwrap();
        let err = dispatch(&run.config).unwrap_err();
        assert_eq!(err.exit_code(), 4, "{err}");
    }
}
