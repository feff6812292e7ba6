//! Command-line front end: reads a job file, dispatches one command, prints a JSON report.

pub mod commands;
pub mod spec;

use std::io::Read;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use albker::engine::Caps;
pub use spec::{Command, JobSpec, SCHEMA};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read input: {0}")]
    Io(String),
}

impl InputError {
    fn to_json(&self) -> Value {
        match self {
            InputError::Json { line, column, message } => {
                serde_json::json!({"kind": "MalformedJson", "line": line, "column": column, "message": message})
            }
            InputError::Invalid { path, message } => serde_json::json!({"kind": "InvalidSpec", "path": path, "message": message}),
            InputError::Usage(m) => serde_json::json!({"kind": "Usage", "message": m}),
            InputError::Io(m) => serde_json::json!({"kind": "Io", "message": m}),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "albker", about = "Local invariants of elliptic curves over p-adic fields and Albanese kernel verdicts")]
struct Args {
    /// command to run; `run` uses the command recorded in the job file
    command: Option<String>,
    /// job file, or - for standard input
    #[arg(long, default_value = "-")]
    input: String,
    #[arg(long)]
    pretty: bool,
    /// override field.precision
    #[arg(long)]
    precision: Option<i64>,
    /// override caps with a JSON object, e.g. {"n_cap":2}
    #[arg(long)]
    caps: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_command(s: &str) -> Result<Option<Command>, InputError> {
    if s == "run" {
        return Ok(None);
    }
    serde_json::from_value(Value::String(s.to_string())).map(Some).map_err(|_| {
        InputError::Usage(format!("unknown command '{s}' (expected analyze, reduction, filtration, symbol, psi, mackey, tower or run)"))
    })
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    command: &'static str,
    spec: &'a JobSpec,
    result: Value,
    errors: Vec<Value>,
}

fn emit(value: &impl Serialize, pretty: bool) -> String {
    let mut s = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) }.expect("reports serialize");
    s.push('\n');
    s
}

fn input_failure(e: &InputError, pretty: bool) -> Outcome {
    Outcome { code: 1, stdout: emit(&serde_json::json!({"schema": SCHEMA, "error": e.to_json()}), pretty) }
}

fn merge_caps(base: Caps, overrides: &str) -> Result<Caps, InputError> {
    let mut v = serde_json::to_value(base).expect("caps serialize");
    let o: Value = serde_json::from_str(overrides).map_err(|e| InputError::Invalid { path: "--caps".into(), message: e.to_string() })?;
    let Value::Object(o) = o else {
        return Err(InputError::Invalid { path: "--caps".into(), message: "expected a JSON object".into() });
    };
    for (key, val) in o {
        v[key] = val;
    }
    serde_json::from_value(v).map_err(|e| InputError::Invalid { path: "--caps".into(), message: e.to_string() })
}

/// Apply command-line overrides and fix the command, giving the spec that is embedded in the report.
fn resolve(args: &Args, text: &str) -> Result<JobSpec, InputError> {
    let requested = match &args.command {
        Some(c) => parse_command(c)?,
        None => return Err(InputError::Usage("no command given".into())),
    };
    let mut spec = JobSpec::from_json(text)?;
    let command = match (requested, spec.command) {
        (Some(c), Some(s)) if c != s => {
            return Err(InputError::Usage(format!("job file is for '{}' but '{}' was requested", s.name(), c.name())));
        }
        (Some(c), _) => c,
        (None, Some(s)) => s,
        (None, None) => return Err(InputError::Usage("the job file names no command".into())),
    };
    spec.command = Some(command);
    if let Some(p) = args.precision {
        spec.field.precision = p;
    }
    if let Some(c) = &args.caps {
        spec.caps = merge_caps(spec.caps, c)?;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    Ok(spec.normalized())
}

fn read_input(path: &str, stdin: &mut dyn Read) -> Result<String, InputError> {
    let mut text = String::new();
    if path == "-" {
        stdin.read_to_string(&mut text).map_err(|e| InputError::Io(e.to_string()))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| InputError::Io(format!("{path}: {e}")))?;
    }
    Ok(text)
}

/// Run one command. Exit codes: 0 success, 1 input error, 2 computation error.
pub fn run(argv: &[String], stdin: &mut dyn Read) -> Outcome {
    let pretty_hint = argv.iter().any(|a| a == "--pretty");
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return Outcome { code: 0, stdout: e.to_string() };
        }
        Err(e) => return input_failure(&InputError::Usage(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or("")), pretty_hint),
    };
    let text = match read_input(&args.input, stdin) {
        Ok(t) => t,
        Err(e) => return input_failure(&e, args.pretty),
    };
    let spec = match resolve(&args, &text) {
        Ok(s) => s,
        Err(e) => return input_failure(&e, args.pretty),
    };
    execute(&spec, args.pretty)
}

/// Run a resolved spec. The embedded spec in the output reproduces it.
pub fn execute(spec: &JobSpec, pretty: bool) -> Outcome {
    let command = spec.command.expect("resolved spec names its command");
    let out = match commands::dispatch(command, spec) {
        Ok(o) => o,
        Err(commands::Failure::Input(e)) => return input_failure(&e, pretty),
        Err(commands::Failure::Computation(e)) => {
            let report = Report {
                schema: SCHEMA,
                command: command.name(),
                spec,
                result: Value::Null,
                errors: vec![serde_json::json!({"path": "", "kind": e.kind(), "message": e.to_string()})],
            };
            return Outcome { code: 2, stdout: emit(&report, pretty) };
        }
    };
    let code = if out.errors.is_empty() { 0 } else { 2 };
    let report = Report { schema: SCHEMA, command: command.name(), spec, result: out.result, errors: out.errors };
    Outcome { code, stdout: emit(&report, pretty) }
}
