//! `phasor` command-line front end.
//!
//! Every run resolves its arguments (from flags, optionally seeded by a JSON
//! config or an earlier manifest), writes its artifacts into the output
//! directory and records the resolved configuration in `manifest.json`.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use commands::{BenchArgs, BudgetArgs, ExtractArgs, MatchArgs, PatternArgs, TaperArgs, ZimArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "PHASOR_OUT";
pub const DEFAULT_OUT: &str = "phasor-out";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read '{}': {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write '{}': {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Invalid(_) => EXIT_INVALID,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Write { .. } => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "phasor", version, about = "Phased-array receiver design and verification runs")]
#[command(args_override_self = true)]
struct Cli {
    /// Output directory (PHASOR_OUT takes precedence).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON object of option values, or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Taylor taper weights and gain-control range.
    Taper(TaperArgs),
    /// Planar-array directivity, principal cuts and side lobes.
    Pattern(PatternArgs),
    /// Coupled-inductor input matching network.
    Match(MatchArgs),
    /// Noise-aware sweep of the intermediate impedance.
    Zim(ZimArgs),
    /// Receive-chain gain, NF, intercept and power budget.
    Budget(BudgetArgs),
    /// Metrics from a measured .s2p with optional NF and two-tone sidecars.
    Extract(ExtractArgs),
    /// Power comparison against published works.
    Bench(BenchArgs),
}

const SUBCOMMANDS: [&str; 7] = ["taper", "pattern", "match", "zim", "budget", "extract", "bench"];

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Taper(_) => "taper",
            Command::Pattern(_) => "pattern",
            Command::Match(_) => "match",
            Command::Zim(_) => "zim",
            Command::Budget(_) => "budget",
            Command::Extract(_) => "extract",
            Command::Bench(_) => "bench",
        }
    }

    fn config(&self) -> serde_json::Value {
        let v = serde_json::to_value(self).unwrap_or_default();
        v.get(self.name()).cloned().unwrap_or_default()
    }
}

/// Files and stdout text produced by a subcommand.
pub(crate) struct Output {
    pub files: Vec<(String, String)>,
    pub stdout: String,
}

/// Runs the tool with process stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs the tool, writing the report to `out` and diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(argv) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            // Help and version requests.
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = out.write_all(report.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn parse(argv: Vec<OsString>) -> Result<Result<Cli, clap::Error>, CliError> {
    let argv = splice_config(argv)?;
    match Cli::try_parse_from(argv) {
        Ok(cli) => Ok(Ok(cli)),
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            Ok(Err(e))
        }
        Err(e) => Err(CliError::Usage(e.render().to_string())),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

/// Expands `--config FILE` into flags placed right after the subcommand, so
/// flags given on the command line still win.
fn splice_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    for i in 1..argv.len() {
        let a = argv[i].to_string_lossy();
        if a == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = read_text(&path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("config '{}': {e}", path.display())))?;
    // A manifest nests the options under "config".
    let (sub, map) = match (doc.get("config"), doc.get("subcommand")) {
        (Some(c), s) => (s.and_then(|s| s.as_str()).map(str::to_string), c.clone()),
        (None, _) => (None, doc),
    };
    let serde_json::Value::Object(map) = map else {
        return Err(CliError::Invalid(format!("config '{}' must be a JSON object", path.display())));
    };
    let mut tokens = Vec::new();
    for (k, v) in &map {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => tokens.push(OsString::from(flag)),
            serde_json::Value::String(s) if k == "input" => tokens.push(OsString::from(s)),
            serde_json::Value::String(s) => tokens.push(OsString::from(format!("{flag}={s}"))),
            serde_json::Value::Number(n) => tokens.push(OsString::from(format!("{flag}={n}"))),
            other => return Err(CliError::Invalid(format!("config key '{k}' has unsupported value {other}"))),
        }
    }
    let pos = argv.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let at = match (pos, sub) {
        (Some(p), _) => p + 1,
        (None, Some(s)) => {
            argv.insert(1, OsString::from(s));
            2
        }
        (None, None) => return Ok(argv),
    };
    argv.splice(at..at, tokens);
    Ok(argv)
}

fn out_dir(cli: &Cli) -> PathBuf {
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    format: Format,
    config: serde_json::Value,
    extra: serde_json::Value,
    outputs: Vec<&'a str>,
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let result = match &cli.command {
        Command::Taper(a) => commands::taper(a, cli.format)?,
        Command::Pattern(a) => commands::pattern(a, cli.format)?,
        Command::Match(a) => commands::matching(a, cli.format)?,
        Command::Zim(a) => commands::zim(a, cli.format)?,
        Command::Budget(a) => commands::budget(a, cli.format)?,
        Command::Extract(a) => commands::extract(a, cli.format)?,
        Command::Bench(a) => commands::bench(a, cli.format)?,
    };
    let dir = out_dir(cli);
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
    let write = |name: &str, body: &str| {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|source| CliError::Write { path, source })
    };
    for (name, body) in &result.output.files {
        write(name, body)?;
    }
    let manifest = Manifest {
        tool: "phasor",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name(),
        format: cli.format,
        config: cli.command.config(),
        extra: result.extra,
        outputs: result.output.files.iter().map(|(n, _)| n.as_str()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Invalid(e.to_string()))?;
    write(MANIFEST, &(json + "\n"))?;
    Ok(result.output.stdout)
}

/// Subcommand result: artifacts plus values recorded in the manifest only.
pub(crate) struct Run {
    pub output: Output,
    pub extra: serde_json::Value,
}
