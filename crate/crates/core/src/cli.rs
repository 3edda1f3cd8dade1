//! The `carebench` command line: `run`, `select` and `report`.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 data error
//! (unreadable or invalid dataset, malformed report JSON), 3 training or
//! runtime error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::boruta::{boruta_run, BorutaError};
use crate::config::{ConfigError, ExperimentConfig, OutputFormat};
use crate::dataset::Dataset;
use crate::evaluation::{run_experiment, EvaluationError, ExperimentReport, SelectionSummary};
use crate::report::{render_csv, render_markdown};

#[derive(Debug, Parser)]
#[command(
    name = "carebench",
    version,
    about = "Cross-validated classifier benchmark with Boruta feature selection"
)]
pub struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the output directory in the config.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every configured model, select features, evaluate again.
    Run { config: PathBuf },
    /// Run Boruta only and write selection.json.
    Select { config: PathBuf },
    /// Re-render a saved report.json.
    Report {
        json: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Md)]
        format: ReportFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Md,
    Csv,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
    fn data(e: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }
    fn runtime(e: impl std::fmt::Display) -> Self {
        Self {
            code: 3,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::config(e)
    }
}

impl From<EvaluationError> for Failure {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::Dataset(_) => Failure::data(e),
            EvaluationError::InvalidProtocol(_) => Failure::config(e),
            EvaluationError::Boruta(BorutaError::InvalidConfig(_)) => Failure::config(e),
            _ => Failure::runtime(e),
        }
    }
}

/// Writes every file under a temporary name first, then renames them all,
/// so that a failure leaves no partially written report behind.
pub fn write_atomically(dir: &Path, files: &[(&str, String)]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::new();
    for (name, contents) in files {
        let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
        let result = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        });
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(e);
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, dest) in staged {
        fs::rename(tmp, dest)?;
    }
    Ok(())
}

fn output_dir(cli: &Cli, config: &ExperimentConfig) -> PathBuf {
    cli.output_dir
        .clone()
        .unwrap_or_else(|| config.resolve(&config.output.directory))
}

fn load_config(cli: &Cli, path: &Path) -> Result<ExperimentConfig, Failure> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    Ok(config)
}

fn load_dataset(config: &ExperimentConfig) -> Result<Dataset, Failure> {
    config.load_dataset().map_err(|e| {
        let path = config.resolve(&config.dataset.path);
        Failure::data(format!("dataset `{}`: {e}", path.display()))
    })
}

fn report_json(report: &ExperimentReport) -> Result<String, Failure> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(Failure::runtime)
}

fn cmd_run(cli: &Cli, path: &Path, out: &mut Vec<u8>) -> Result<(), Failure> {
    let config = load_config(cli, path)?;
    let models = config.model_entries()?;
    let ds = load_dataset(&config)?;
    let report = run_experiment(
        &ds,
        &models,
        &config.protocol,
        config.selection_settings().as_ref(),
    )?;

    let json = report_json(&report)?;
    // render from the serialized form so `report` reproduces it exactly
    let reparsed: ExperimentReport = serde_json::from_str(&json).map_err(Failure::runtime)?;
    let mut files = Vec::new();
    if config.output.formats.contains(&OutputFormat::Json) {
        files.push(("report.json", json));
    }
    if config.output.formats.contains(&OutputFormat::Markdown) {
        files.push(("report.md", render_markdown(&reparsed)));
    }
    let dir = output_dir(cli, &config);
    write_atomically(&dir, &files).map_err(Failure::runtime)?;
    for (name, _) in &files {
        let _ = writeln!(out, "wrote {}", dir.join(name).display());
    }
    Ok(())
}

fn cmd_select(cli: &Cli, path: &Path, out: &mut Vec<u8>) -> Result<(), Failure> {
    let config = load_config(cli, path)?;
    let settings = config.selection_settings().ok_or_else(|| {
        Failure::config("config field `selection`: missing; `select` needs a [selection] table")
    })?;
    let ds = load_dataset(&config)?;
    let result = boruta_run(&ds, &settings.boruta).map_err(|e| match e {
        BorutaError::InvalidConfig(_) => Failure::config(e),
        _ => Failure::runtime(e),
    })?;
    let summary = SelectionSummary::from_result(&result, settings.include_tentative);
    let mut json = serde_json::to_string_pretty(&summary).map_err(Failure::runtime)?;
    json.push('\n');
    let dir = output_dir(cli, &config);
    write_atomically(&dir, &[("selection.json", json)]).map_err(Failure::runtime)?;
    let _ = writeln!(
        out,
        "confirmed: {} / {} (reduction {:.1}%)",
        summary.confirmed,
        summary.n_predictors,
        summary.reduction * 100.0
    );
    Ok(())
}

fn cmd_report(cli: &Cli, path: &Path, format: ReportFormat, out: &mut Vec<u8>) -> Result<(), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("cannot read `{}`: {e}", path.display())))?;
    let report: ExperimentReport = {
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Failure::data(format!("`{}` at `{}`: {}", path.display(), e.path(), e.inner())))?
    };
    let (name, rendered) = match format {
        ReportFormat::Md => ("report.md", render_markdown(&report)),
        ReportFormat::Csv => ("report.csv", render_csv(&report)),
    };
    match &cli.output_dir {
        Some(dir) => {
            write_atomically(dir, &[(name, rendered)]).map_err(Failure::runtime)?;
            let _ = writeln!(out, "wrote {}", dir.join(name).display());
        }
        None => {
            let _ = out.write_all(rendered.as_bytes());
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<(), Failure> {
    let go = |out: &mut Vec<u8>| match &cli.command {
        Command::Run { config } => cmd_run(cli, config, out),
        Command::Select { config } => cmd_select(cli, config, out),
        Command::Report { json, format } => cmd_report(cli, json, *format, out),
    };
    match cli.threads {
        Some(0) => Err(Failure::config("--threads must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(Failure::runtime)?
            .install(|| go(out)),
        None => go(out),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 1;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let mut buffer = Vec::new();
    let result = dispatch(&cli, &mut buffer);
    let _ = out.write_all(&buffer);
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
