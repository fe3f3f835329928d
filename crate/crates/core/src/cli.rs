//! Command-line entry point: `check`, `expand`, `dict`, `fair`, `scan`.
//!
//! Exit codes: 0 success, 1 enforced check failures (or expansion errors),
//! 2 usage, configuration or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::checks::{run_suite, CheckId, SuiteReport};
use crate::config::{LintConfig, Mode};
use crate::dynamic::expand_file;
use crate::fair::{parse_assessment, score_assessment, Registry};
use crate::metadata::{
    check_char_limits, check_references, check_vocabulary, parse_measure_info, resolve_citations, to_canonical_json,
};
use crate::report::{render_dictionary, render_fair, render_suite};
use crate::scanner::{scan_repo, FileKind, RepoSnapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "commons-lint", version, about = "Lint data-commons repositories, expand metadata, build dictionaries and score FAIR maturity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the check suite and write HTML/JSON reports.
    Check(CheckArgs),
    /// Expand dynamic entries of a measure_info file.
    Expand(ExpandArgs),
    /// Build the static data dictionary site.
    Dict(DictArgs),
    /// Score a FAIR maturity self-assessment.
    Fair(FairArgs),
    /// Print a JSON summary of a repository scan with entry diagnostics.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct RepoArgs {
    /// Repository root.
    #[arg(long, default_value = ".")]
    pub repo: PathBuf,
    /// TOML configuration (default: <repo>/.commons-lint.toml when present).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub repo: RepoArgs,
    /// Comma-separated check ids or names, e.g. `T2,T13`.
    #[arg(long)]
    pub tests: Option<String>,
    /// Report directory.
    #[arg(long, default_value = "reports")]
    pub out: PathBuf,
    /// Use the strict enforcement tiers.
    #[arg(long, conflicts_with = "dev")]
    pub strict: bool,
    /// Apply the relaxed dev-mode tier overrides.
    #[arg(long)]
    pub dev: bool,
    /// Timestamp recorded in the report; omitted by default so output is reproducible.
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// measure_info file to expand.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Destination file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DictArgs {
    #[command(flatten)]
    pub repo: RepoArgs,
    /// Site directory.
    #[arg(long, default_value = "dictionary")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FairArgs {
    /// Assessment file (JSON, or CSV with `indicator_id,level` columns).
    #[arg(long)]
    pub assessment: PathBuf,
    /// TOML configuration supplying the checklist level mapping.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Indicator registry TSV replacing the shipped one.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Report directory.
    #[arg(long, default_value = "fair")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub repo: RepoArgs,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Check(a) => cmd_check(a, out),
        Command::Expand(a) => cmd_expand(a, out),
        Command::Dict(a) => cmd_dict(a, out),
        Command::Fair(a) => cmd_fair(a, out),
        Command::Scan(a) => cmd_scan(a, out),
    }
}

fn load_config(args: &RepoArgs) -> Result<LintConfig> {
    Ok(LintConfig::resolve(args.config.as_deref(), &args.repo)?)
}

fn scan(args: &RepoArgs, config: &LintConfig) -> Result<RepoSnapshot> {
    if !args.repo.is_dir() {
        anyhow::bail!("repository {} is not a directory", args.repo.display());
    }
    Ok(scan_repo(&args.repo, config)?)
}

/// Runs the suite over `repo` and writes reports; shared by the CLI and the
/// Python bindings.
pub fn check_repo(
    repo: &Path,
    config: &LintConfig,
    tests: Option<&[CheckId]>,
    timestamp: Option<String>,
) -> Result<SuiteReport> {
    let snapshot = scan_repo(repo, config)?;
    let mut suite = run_suite(&snapshot, config, tests)?;
    suite.generated_at = timestamp;
    Ok(suite)
}

pub fn cmd_check(args: CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let tests = args.tests.as_deref().map(CheckId::parse_list).transpose()?;
    let mut config = load_config(&args.repo)?;
    if args.strict {
        config.enforcement.mode = Mode::Strict;
    } else if args.dev {
        config.enforcement.mode = Mode::Dev;
    }
    if !args.repo.repo.is_dir() {
        anyhow::bail!("repository {} is not a directory", args.repo.repo.display());
    }
    let suite = check_repo(&args.repo.repo, &config, tests.as_deref(), args.timestamp)?;
    render_suite(&suite, &args.out)?;
    for report in &suite.reports {
        let status = if report.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{} {} [{}] {status}", report.id, report.name, report.enforcement)?;
        for line in report.summary_lines() {
            writeln!(out, "    {line}")?;
        }
    }
    writeln!(
        out,
        "overall: {} (reports in {})",
        if suite.overall_pass { "PASS" } else { "FAIL" },
        args.out.display()
    )?;
    Ok(suite.exit_code())
}

pub fn cmd_expand(args: ExpandArgs, out: &mut dyn Write) -> Result<i32> {
    let bytes = fs::read(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let file = parse_measure_info(&bytes, &args.input.display().to_string())?;
    let expanded = expand_file(&file);
    if !expanded.errors.is_empty() {
        for e in &expanded.errors {
            writeln!(out, "expansion error: {e}")?;
        }
        return Ok(EXIT_FAIL);
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(&args.out, to_canonical_json(&expanded.file.to_value()))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    writeln!(
        out,
        "expanded {} entries into {}, written to {}",
        file.entries.len(),
        expanded.file.entries.len(),
        args.out.display()
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_dict(args: DictArgs, out: &mut dyn Write) -> Result<i32> {
    let config = load_config(&args.repo)?;
    let snapshot = scan(&args.repo, &config)?;
    let bundle = render_dictionary(&snapshot, &args.out)?;
    let measures = bundle.files.keys().filter(|k| k.starts_with("measures/")).count();
    writeln!(out, "{measures} measure pages written to {}", args.out.display())?;
    Ok(EXIT_OK)
}

pub fn cmd_fair(args: FairArgs, out: &mut dyn Write) -> Result<i32> {
    let mapping = match &args.config {
        Some(p) => LintConfig::load(p)?.fair,
        None => LintConfig::with_defaults().fair,
    };
    let registry = match &args.registry {
        Some(p) => Registry::from_path(p)?,
        None => Registry::shipped(),
    };
    let text = fs::read_to_string(&args.assessment)
        .with_context(|| format!("cannot read {}", args.assessment.display()))?;
    let is_csv = args
        .assessment
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let assessment = parse_assessment(&text, is_csv, &registry, &mapping)?;
    let report = score_assessment(&assessment, &registry)?;
    render_fair(&report, &args.out)?;
    writeln!(out, "assessed {}/{} indicators", report.assessed, report.registry_size)?;
    for area in &report.areas {
        let mean = area.mean_level.map(|m| format!("{m:.2}")).unwrap_or_else(|| "-".into());
        writeln!(out, "{:?}: levels 0-4 {:?}, mean {mean}", area.area, area.histogram)?;
    }
    for gap in &report.gaps {
        writeln!(out, "gap: {} ({}, {}) level {}", gap.indicator_id, gap.principle, gap.priority, gap.level)?;
    }
    if report.essential_gap {
        writeln!(out, "essential gap: yes")?;
    }
    Ok(EXIT_OK)
}

/// JSON summary of a snapshot plus per-entry metadata diagnostics.
pub fn snapshot_summary(snapshot: &RepoSnapshot, config: &LintConfig) -> Value {
    let count = |kind: FileKind| snapshot.files.iter().filter(|f| f.kind == kind).count();
    let infos: Vec<Value> = snapshot
        .measure_info_files
        .iter()
        .map(|parsed| match &parsed.result {
            Err(e) => json!({ "path": parsed.path, "error": e.to_string() }),
            Ok(file) => {
                let expanded = expand_file(file);
                let unresolved: Vec<Value> = resolve_citations(&expanded.file)
                    .into_iter()
                    .filter(|c| !c.is_resolved())
                    .map(|c| json!({ "measure": c.measure_id, "key": c.key }))
                    .collect();
                let mut diagnostics = Vec::new();
                for entry in expanded.file.entries.values() {
                    let limits = check_char_limits(entry, &config.schema);
                    let vocab = check_vocabulary(entry, &config.schema);
                    let refs = check_references(entry);
                    if limits.is_empty() && vocab.is_empty() && refs.is_empty() {
                        continue;
                    }
                    diagnostics.push(json!({
                        "measure": entry.measure_id,
                        "char_limits": limits,
                        "vocabulary": vocab,
                        "references": refs,
                    }));
                }
                json!({
                    "path": parsed.path,
                    "entries": file.entries.len(),
                    "expanded_entries": expanded.file.entries.len(),
                    "dynamic_entries": file.entries.values().filter(|e| e.is_dynamic()).count(),
                    "references": file.references.len(),
                    "expansion_errors": expanded.errors.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "unresolved_citations": unresolved,
                    "diagnostics": diagnostics,
                })
            }
        })
        .collect();
    let tables: Vec<Value> = snapshot
        .data_tables
        .iter()
        .map(|t| match &t.result {
            Ok(d) => json!({
                "path": t.path,
                "columns": d.columns,
                "rows": d.rows.len(),
                "measures": d.distinct_measures.len(),
            }),
            Err(e) => json!({ "path": t.path, "error": e.message }),
        })
        .collect();
    json!({
        "root": snapshot.root.display().to_string(),
        "files": snapshot.files.len(),
        "kinds": {
            "measure_info": count(FileKind::MeasureInfo),
            "tabular_data": count(FileKind::TabularData),
            "layer_data": count(FileKind::LayerData),
            "code": count(FileKind::Code),
            "other": count(FileKind::Other),
        },
        "measure_info_files": infos,
        "data_tables": tables,
        "invalid_json": snapshot.json_files.iter().filter(|j| j.error.is_some()).map(|j| j.path.clone()).collect::<Vec<_>>(),
    })
}

pub fn cmd_scan(args: ScanArgs, out: &mut dyn Write) -> Result<i32> {
    let config = load_config(&args.repo)?;
    let snapshot = scan(&args.repo, &config)?;
    let mut text = serde_json::to_string_pretty(&snapshot_summary(&snapshot, &config))?;
    text.push('\n');
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}
