//! The T2–T14 check catalog and suite aggregation.
//!
//! Every check is a pure function of a [`RepoSnapshot`] and a [`LintConfig`]
//! that yields one [`CheckReport`]. Ids are fixed and T1 does not exist.

mod files;
mod json;
mod measures;
mod percent;
mod structure;
mod tabular;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, LintConfig};
use crate::dynamic::{expand_file, ExpandedFile};
use crate::metadata::MetadataError;
use crate::scanner::{DataTable, Parsed, RepoSnapshot, TableError};

pub use measures::{pair_tables, Pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckId {
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
    T11,
    T12,
    T13,
    T14,
}

impl CheckId {
    pub const ALL: [CheckId; 13] = [
        CheckId::T2,
        CheckId::T3,
        CheckId::T4,
        CheckId::T5,
        CheckId::T6,
        CheckId::T7,
        CheckId::T8,
        CheckId::T9,
        CheckId::T10,
        CheckId::T11,
        CheckId::T12,
        CheckId::T13,
        CheckId::T14,
    ];

    /// Report file stem.
    pub fn name(self) -> &'static str {
        match self {
            CheckId::T2 => "test_percent_data",
            CheckId::T3 => "test_measure_info_structure",
            CheckId::T4 => "test_measure_type",
            CheckId::T5 => "test_measure_info_missing_measures",
            CheckId::T6 => "test_columns",
            CheckId::T7 => "test_measure_info_keys",
            CheckId::T8 => "test_jsons",
            CheckId::T9 => "test_region_type",
            CheckId::T10 => "test_known_measures",
            CheckId::T11 => "test_file_name",
            CheckId::T12 => "test_code_exists",
            CheckId::T13 => "test_file_name_len",
            CheckId::T14 => "test_measure_info_extra_measures",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CheckId::T2 => "Percent data lies in the range 0-100 (not 0-1)",
            CheckId::T3 => "measure_info entries use only the allowed keys",
            CheckId::T4 => "Measure types in data files are valid",
            CheckId::T5 => "measure_info files cover every measure in their data files",
            CheckId::T6 => "Tabular files have the predetermined column names",
            CheckId::T7 => "measure_info entries carry every expected key with a value",
            CheckId::T8 => "JSON files can be read",
            CheckId::T9 => "Region types in data files are valid",
            CheckId::T10 => "Measures in data files match the known measures",
            CheckId::T11 => "File names follow the naming convention",
            CheckId::T12 => "Distribution code exists when distribution data exists",
            CheckId::T13 => "File names are within the length limit",
            CheckId::T14 => "measure_info files have no measures absent from their data files",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.html", self.name())
    }

    /// Parses a comma-separated list such as `T2,T13`.
    pub fn parse_list(text: &str) -> Result<Vec<CheckId>, ConfigError> {
        let mut ids: Vec<CheckId> = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        ids.sort();
        ids.dedup();
        Ok(ids)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for CheckId {
    type Err = ConfigError;

    /// Accepts `T2`, `t2`, or the report name (`test_percent_data`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('/').trim_end_matches(".html");
        CheckId::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(trimmed) || c.name() == trimmed)
            .ok_or_else(|| ConfigError::UnknownCheck(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
    Missing,
    Extra,
    Error,
    Skipped,
}

impl Verdict {
    pub const ALL: [Verdict; 6] = [
        Verdict::Valid,
        Verdict::Invalid,
        Verdict::Missing,
        Verdict::Extra,
        Verdict::Error,
        Verdict::Skipped,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Missing => "missing",
            Verdict::Extra => "extra",
            Verdict::Error => "error",
            Verdict::Skipped => "skipped",
        }
    }

    /// Verdicts that fail an enforced check.
    pub fn is_failure(self) -> bool {
        !matches!(self, Verdict::Valid | Verdict::Skipped)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Enforcement tier of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Enforced,
    Warn,
    Off,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Enforced => "enforced",
            Tier::Warn => "warn",
            Tier::Off => "off",
        })
    }
}

/// What a check item is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subject {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
}

impl Subject {
    pub fn file(path: impl Into<String>) -> Self {
        Subject {
            path: path.into(),
            measure: None,
            row: None,
        }
    }

    pub fn measure(path: impl Into<String>, measure: impl Into<String>) -> Self {
        Subject {
            path: path.into(),
            measure: Some(measure.into()),
            row: None,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path)?;
        if let Some(m) = &self.measure {
            write!(f, " :: {m}")?;
        }
        if let Some(r) = self.row {
            write!(f, " @ row {r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckItem {
    pub subject: Subject,
    pub verdict: Verdict,
    pub detail: String,
}

impl CheckItem {
    pub fn new(subject: Subject, verdict: Verdict, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        debug_assert!(
            !(verdict.is_failure() && detail.is_empty()),
            "{verdict} items need a detail"
        );
        CheckItem {
            subject,
            verdict,
            detail,
        }
    }

    pub fn valid(subject: Subject) -> Self {
        Self::new(subject, Verdict::Valid, "")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub valid: usize,
    pub invalid: usize,
    pub missing: usize,
    pub extra: usize,
    pub error: usize,
    pub skipped: usize,
}

impl Counts {
    pub fn get(&self, verdict: Verdict) -> usize {
        match verdict {
            Verdict::Valid => self.valid,
            Verdict::Invalid => self.invalid,
            Verdict::Missing => self.missing,
            Verdict::Extra => self.extra,
            Verdict::Error => self.error,
            Verdict::Skipped => self.skipped,
        }
    }

    fn bump(&mut self, verdict: Verdict) {
        let slot = match verdict {
            Verdict::Valid => &mut self.valid,
            Verdict::Invalid => &mut self.invalid,
            Verdict::Missing => &mut self.missing,
            Verdict::Extra => &mut self.extra,
            Verdict::Error => &mut self.error,
            Verdict::Skipped => &mut self.skipped,
        };
        *slot += 1;
    }

    pub fn sum(&self) -> usize {
        Verdict::ALL.iter().map(|v| self.get(*v)).sum()
    }

    pub fn failures(&self) -> usize {
        Verdict::ALL
            .iter()
            .filter(|v| v.is_failure())
            .map(|v| self.get(*v))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: CheckId,
    pub name: String,
    pub enforcement: Tier,
    pub total: usize,
    pub counts: Counts,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    /// Items are sorted by subject so output does not depend on discovery order.
    pub fn new(id: CheckId, mut items: Vec<CheckItem>) -> Self {
        items.sort_by(|a, b| a.subject.cmp(&b.subject).then(a.verdict.cmp(&b.verdict)));
        let mut counts = Counts::default();
        for item in &items {
            counts.bump(item.verdict);
        }
        CheckReport {
            id,
            name: id.name().to_string(),
            enforcement: Tier::Enforced,
            total: items.len(),
            counts,
            items,
        }
    }

    pub fn passed(&self) -> bool {
        self.counts.failures() == 0
    }

    pub fn flagged(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| i.verdict.is_failure())
    }

    /// `"141/234 (60.3%) valid"`-style lines for each non-zero verdict.
    pub fn summary_lines(&self) -> Vec<String> {
        Verdict::ALL
            .iter()
            .filter(|v| self.counts.get(**v) > 0)
            .map(|v| {
                let n = self.counts.get(*v);
                let pct = format_percentage(n as u64, self.total as u64).unwrap_or_default();
                format!("{n}/{} ({pct}) {v}", self.total)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub repo_root: String,
    pub overall_pass: bool,
    /// Tier of every check in the catalog, whether or not it ran.
    pub enforcement: BTreeMap<CheckId, Tier>,
    pub reports: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl SuiteReport {
    pub fn report(&self, id: CheckId) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.id == id)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("suite report serializes");
        s.push('\n');
        s
    }

    /// Exit code for CI: 0 when the suite passes, 1 on enforced failures.
    pub fn exit_code(&self) -> i32 {
        if self.overall_pass {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PercentageError {
    #[error("percentage of an empty total")]
    ZeroTotal,
    #[error("count {count} exceeds total {total}")]
    CountExceedsTotal { count: u64, total: u64 },
}

/// `100·count/total` rounded half away from zero to one decimal, with `%`.
pub fn format_percentage(count: u64, total: u64) -> Result<String, PercentageError> {
    if total == 0 {
        return Err(PercentageError::ZeroTotal);
    }
    if count > total {
        return Err(PercentageError::CountExceedsTotal { count, total });
    }
    // tenths of a percent: floor(1000c/t + 1/2) in exact integer arithmetic
    let (c, t) = (count as u128, total as u128);
    let tenths = (2000 * c + t) / (2 * t);
    Ok(format!("{}.{}%", tenths / 10, tenths % 10))
}

/// One parsed `measure_info` file with its dynamic entries expanded.
pub(crate) struct InfoState<'a> {
    pub path: &'a str,
    pub expanded: Result<ExpandedFile, &'a MetadataError>,
}

/// Shared, precomputed view of a snapshot for the checks.
pub(crate) struct CheckContext<'a> {
    pub snapshot: &'a RepoSnapshot,
    pub config: &'a LintConfig,
    pub infos: Vec<InfoState<'a>>,
    pub tables: Vec<&'a Parsed<DataTable, TableError>>,
    pub pairing: BTreeMap<&'a str, Pairing>,
}

impl<'a> CheckContext<'a> {
    pub fn new(snapshot: &'a RepoSnapshot, config: &'a LintConfig) -> Self {
        let infos: Vec<InfoState<'a>> = snapshot
            .measure_info_files
            .iter()
            .map(|p| InfoState {
                path: &p.path,
                expanded: p.result.as_ref().map(expand_file),
            })
            .collect();
        let tables: Vec<_> = snapshot.data_tables.iter().collect();
        let info_paths: Vec<&str> = infos.iter().map(|i| i.path).collect();
        let pairing = tables
            .iter()
            .map(|t| (t.path.as_str(), pair_tables(&info_paths, &t.path)))
            .collect();
        CheckContext {
            snapshot,
            config,
            infos,
            tables,
            pairing,
        }
    }

    pub fn info(&self, path: &str) -> Option<&InfoState<'a>> {
        self.infos.iter().find(|i| i.path == path)
    }

    /// `measure_type` recorded in the single paired `measure_info` file.
    pub fn metadata_measure_type(&self, table: &str, measure: &str) -> Option<&str> {
        let Some(Pairing::One(info)) = self.pairing.get(table) else {
            return None;
        };
        let state = self.info(info)?;
        let expanded = state.expanded.as_ref().ok()?;
        expanded.file.entries.get(measure)?.measure_type.as_deref()
    }
}

fn run_check(ctx: &CheckContext, id: CheckId) -> Vec<CheckItem> {
    match id {
        CheckId::T2 => percent::percent_range(ctx),
        CheckId::T3 => structure::info_structure(ctx).0,
        CheckId::T7 => structure::info_structure(ctx).1,
        CheckId::T4 => tabular::measure_types(ctx),
        CheckId::T6 => tabular::columns(ctx),
        CheckId::T9 => tabular::region_types(ctx),
        CheckId::T10 => tabular::known_measures(ctx),
        CheckId::T5 => measures::cross_check(ctx).0,
        CheckId::T14 => measures::cross_check(ctx).1,
        CheckId::T8 => json::json_valid(ctx),
        CheckId::T11 => files::file_names(ctx),
        CheckId::T12 => files::code_exists(ctx),
        CheckId::T13 => files::file_name_lengths(ctx),
    }
}

fn build_report(ctx: &CheckContext, id: CheckId) -> Result<CheckReport, ConfigError> {
    let scope = ctx.config.scope_for(id)?;
    let items = run_check(ctx, id)
        .into_iter()
        .filter(|i| scope.admits(&i.subject.path))
        .collect();
    let mut report = CheckReport::new(id, items);
    report.enforcement = ctx.config.enforcement.tier(id)?;
    Ok(report)
}

fn single(snapshot: &RepoSnapshot, config: &LintConfig, id: CheckId) -> CheckReport {
    let ctx = CheckContext::new(snapshot, config);
    build_report(&ctx, id).expect("config validated at load time")
}

/// T2: percent measures lie in [0, 100] and do not look like 0–1 fractions.
pub fn check_percent_range(snapshot: &RepoSnapshot, config: &LintConfig) -> CheckReport {
    single(snapshot, config, CheckId::T2)
}

/// T3 (allowed keys only) and T7 (expected keys present and non-blank).
pub fn check_info_structure(snapshot: &RepoSnapshot, config: &LintConfig) -> (CheckReport, CheckReport) {
    let ctx = CheckContext::new(snapshot, config);
    (
        build_report(&ctx, CheckId::T3).expect("config validated at load time"),
        build_report(&ctx, CheckId::T7).expect("config validated at load time"),
    )
}

/// T5 (missing measures) and T14 (extra measures).
pub fn cross_check_measures(snapshot: &RepoSnapshot, config: &LintConfig) -> (CheckReport, CheckReport) {
    let ctx = CheckContext::new(snapshot, config);
    (
        build_report(&ctx, CheckId::T5).expect("config validated at load time"),
        build_report(&ctx, CheckId::T14).expect("config validated at load time"),
    )
}

/// T4, T6, T9 and T10, in that order.
pub fn check_tabular_conventions(snapshot: &RepoSnapshot, config: &LintConfig) -> [CheckReport; 4] {
    let ctx = CheckContext::new(snapshot, config);
    [CheckId::T4, CheckId::T6, CheckId::T9, CheckId::T10]
        .map(|id| build_report(&ctx, id).expect("config validated at load time"))
}

/// T11, T12 and T13, in that order.
pub fn check_file_conventions(snapshot: &RepoSnapshot, config: &LintConfig) -> [CheckReport; 3] {
    let ctx = CheckContext::new(snapshot, config);
    [CheckId::T11, CheckId::T12, CheckId::T13]
        .map(|id| build_report(&ctx, id).expect("config validated at load time"))
}

/// T8: JSON-bearing files parse.
pub fn check_json_valid(snapshot: &RepoSnapshot, config: &LintConfig) -> CheckReport {
    single(snapshot, config, CheckId::T8)
}

/// Runs the selected checks (default: every check not switched off).
///
/// A check explicitly selected while its tier is `off` runs as `warn`.
pub fn run_suite(
    snapshot: &RepoSnapshot,
    config: &LintConfig,
    selected: Option<&[CheckId]>,
) -> Result<SuiteReport, ConfigError> {
    config.validate()?;
    let ctx = CheckContext::new(snapshot, config);
    let mut enforcement = BTreeMap::new();
    for id in CheckId::ALL {
        enforcement.insert(id, config.enforcement.tier(id)?);
    }
    let ids: BTreeSet<CheckId> = match selected {
        Some(sel) => sel.iter().copied().collect(),
        None => CheckId::ALL
            .into_iter()
            .filter(|id| enforcement[id] != Tier::Off)
            .collect(),
    };
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let mut report = build_report(&ctx, id)?;
        if report.enforcement == Tier::Off {
            report.enforcement = Tier::Warn;
        }
        reports.push(report);
    }
    let overall_pass = reports
        .iter()
        .filter(|r| r.enforcement == Tier::Enforced)
        .all(CheckReport::passed);
    Ok(SuiteReport {
        repo_root: snapshot.root.display().to_string(),
        overall_pass,
        enforcement,
        reports,
        generated_at: None,
    })
}

/// Joins names for item details.
pub(crate) fn list<I, S>(items: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    items
        .into_iter()
        .map(|s| s.as_ref().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_and_names_are_a_bijection() {
        let names: BTreeSet<_> = CheckId::ALL.iter().map(|c| c.name()).collect();
        assert_eq!(names.len(), 13);
        for id in CheckId::ALL {
            assert_eq!(id.name().parse::<CheckId>().unwrap(), id);
            assert_eq!(id.to_string().parse::<CheckId>().unwrap(), id);
            assert_eq!(format!("/{}", id.file_name()).parse::<CheckId>().unwrap(), id);
        }
        assert!("T1".parse::<CheckId>().is_err());
        assert!("T15".parse::<CheckId>().is_err());
        assert_eq!(CheckId::T2.file_name(), "test_percent_data.html");
        assert_eq!(CheckId::T14.name(), "test_measure_info_extra_measures");
    }

    #[test]
    fn parse_list_sorts_and_rejects_unknown() {
        assert_eq!(CheckId::parse_list("T13, t2,T2").unwrap(), vec![CheckId::T2, CheckId::T13]);
        assert!(matches!(CheckId::parse_list("T99"), Err(ConfigError::UnknownCheck(s)) if s == "T99"));
    }

    #[test]
    fn percentages() {
        assert_eq!(format_percentage(141, 234).unwrap(), "60.3%");
        assert_eq!(format_percentage(34, 237).unwrap(), "14.3%");
        assert_eq!(format_percentage(0, 10).unwrap(), "0.0%");
        assert_eq!(format_percentage(10, 10).unwrap(), "100.0%");
        // exact ties round away from zero
        assert_eq!(format_percentage(1, 16).unwrap(), "6.3%");
        assert_eq!(format_percentage(1, 0), Err(PercentageError::ZeroTotal));
        assert!(format_percentage(3, 2).is_err());
    }

    #[test]
    fn report_counts_are_conserved() {
        let items = vec![
            CheckItem::valid(Subject::file("b")),
            CheckItem::new(Subject::file("a"), Verdict::Invalid, "bad"),
            CheckItem::new(Subject::file("c"), Verdict::Skipped, "n/a"),
        ];
        let r = CheckReport::new(CheckId::T13, items);
        assert_eq!(r.total, 3);
        assert_eq!(r.counts.sum(), 3);
        assert_eq!(r.counts.invalid, 1);
        assert_eq!(r.items[0].subject.path, "a");
        assert!(!r.passed());
        assert_eq!(
            r.summary_lines(),
            vec!["1/3 (33.3%) valid", "1/3 (33.3%) invalid", "1/3 (33.3%) skipped"]
        );
    }
}
