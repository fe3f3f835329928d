//! Repository-level configuration, read from a TOML file.
//!
//! Every section is optional; anything left out falls back to the defaults
//! below. A repository opts in by placing `.commons-lint.toml` at its root or
//! by passing `--config`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use globset::{Glob, GlobBuilder, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{CheckId, Tier};
use crate::metadata::SchemaConfig;

/// Conventional config file name looked up at the repository root.
pub const CONFIG_FILE_NAME: &str = ".commons-lint.toml";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("unknown check `{0}` (expected T2..T14 or a check name)")]
    UnknownCheck(String),
    #[error("invalid glob `{pattern}`: {message}")]
    Glob { pattern: String, message: String },
    #[error("invalid regex `{pattern}`: {message}")]
    Regex { pattern: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LintConfig {
    pub schema: SchemaConfig,
    pub scan: ScanConfig,
    /// Column profiles for tabular files; the first profile whose globs match a
    /// file decides its expected columns.
    pub columns: Vec<ColumnProfile>,
    pub checks: CheckSettings,
    pub enforcement: EnforcementConfig,
    /// Per-check include/exclude globs, keyed by check id (`T4`) or name.
    pub scope: BTreeMap<String, ScopeRule>,
    pub fair: FairConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Regex matched against a file's basename to classify it as `measure_info`.
    pub metadata_pattern: String,
    /// Directory or file names skipped entirely during the walk.
    pub ignore: Vec<String>,
    pub tabular_extensions: Vec<String>,
    /// Compression suffixes that may follow a tabular extension (`x.csv.gz`).
    pub compression_extensions: Vec<String>,
    pub layer_extensions: Vec<String>,
    /// Extensions of files checked for JSON validity besides `measure_info` files.
    pub json_extensions: Vec<String>,
    /// Path segment marking code directories.
    pub code_segment: String,
    pub measure_column: String,
    pub value_column: String,
    pub measure_type_column: String,
    pub region_type_column: String,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            metadata_pattern: r"^measure_info(\.json)?$".into(),
            ignore: vec![".git".into()],
            tabular_extensions: vec!["csv".into()],
            compression_extensions: vec!["gz".into()],
            layer_extensions: vec!["geojson".into()],
            json_extensions: vec!["json".into()],
            code_segment: "code".into(),
            measure_column: "measure".into(),
            value_column: "value".into(),
            measure_type_column: "measure_type".into(),
            region_type_column: "region_type".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnProfile {
    pub name: String,
    pub include: Vec<String>,
    #[serde(default)]
    pub required: BTreeSet<String>,
    #[serde(default)]
    pub optional: BTreeSet<String>,
}

impl ColumnProfile {
    pub fn distribution_default() -> Self {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        ColumnProfile {
            name: "distribution".into(),
            include: vec!["**/data/distribution/**".into()],
            required: set(&["geoid", "year", "measure", "value", "measure_type"]),
            optional: set(&["region_type", "region_name"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSettings {
    /// Minimum numeric rows before an all-in-[0,1] percent measure is flagged
    /// as a probable fraction.
    pub fraction_min_rows: usize,
    /// Regex a data file's basename must match.
    pub file_name_pattern: String,
    /// Extensions (possibly multi-part, like `csv.gz`) allowed on data files.
    pub file_name_extensions: Vec<String>,
    pub max_file_name_length: usize,
    /// Known measure ids; when unset the known-measures check is skipped.
    pub known_measures: Option<BTreeSet<String>>,
    /// Only tables under `data/distribution` take part in the measure cross-checks.
    pub cross_check_distribution_only: bool,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            fraction_min_rows: 3,
            file_name_pattern: r"^[a-z0-9_.\-]+$".into(),
            file_name_extensions: vec!["csv".into(), "csv.gz".into(), "json".into(), "geojson".into()],
            max_file_name_length: 100,
            known_measures: None,
            cross_check_distribution_only: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Dev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnforcementConfig {
    pub mode: Mode,
    /// Tier per check id; unlisted checks are enforced.
    pub tiers: BTreeMap<String, Tier>,
    /// Tiers applied on top of `tiers` in dev mode.
    pub dev: BTreeMap<String, Tier>,
}

impl Default for EnforcementConfig {
    fn default() -> Self {
        EnforcementConfig {
            mode: Mode::Strict,
            tiers: [("T10".to_string(), Tier::Warn)].into_iter().collect(),
            dev: BTreeMap::new(),
        }
    }
}

impl EnforcementConfig {
    pub fn tier(&self, check: CheckId) -> Result<Tier, ConfigError> {
        let mut tier = Tier::Enforced;
        let lookup = |map: &BTreeMap<String, Tier>| -> Result<Option<Tier>, ConfigError> {
            for (k, t) in map {
                if k.parse::<CheckId>()? == check {
                    return Ok(Some(*t));
                }
            }
            Ok(None)
        };
        if let Some(t) = lookup(&self.tiers)? {
            tier = t;
        }
        if self.mode == Mode::Dev {
            if let Some(t) = lookup(&self.dev)? {
                tier = t;
            }
        }
        Ok(tier)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScopeRule {
    pub include: Vec<String>,
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FairConfig {
    pub achieving: u8,
    pub working_towards: u8,
    pub not_addressing: u8,
}

impl Default for FairConfig {
    fn default() -> Self {
        FairConfig {
            achieving: 4,
            working_towards: 2,
            not_addressing: 1,
        }
    }
}

impl LintConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut config: LintConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        if config.columns.is_empty() {
            config.columns.push(ColumnProfile::distribution_default());
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Explicit path if given, else `<repo>/.commons-lint.toml` if present,
    /// else defaults.
    pub fn resolve(explicit: Option<&Path>, repo: &Path) -> Result<Self, ConfigError> {
        match explicit {
            Some(p) => Self::load(p),
            None => {
                let candidate = repo.join(CONFIG_FILE_NAME);
                if candidate.is_file() {
                    Self::load(&candidate)
                } else {
                    Ok(Self::with_defaults())
                }
            }
        }
    }

    pub fn with_defaults() -> Self {
        LintConfig {
            columns: vec![ColumnProfile::distribution_default()],
            ..Default::default()
        }
    }

    /// Compiles every pattern once so later failures cannot happen mid-run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for pattern in [&self.scan.metadata_pattern, &self.checks.file_name_pattern] {
            regex::Regex::new(pattern).map_err(|e| ConfigError::Regex {
                pattern: pattern.clone(),
                message: e.to_string(),
            })?;
        }
        for profile in &self.columns {
            build_globset(&profile.include)?;
        }
        for (check, rule) in &self.scope {
            check.parse::<CheckId>()?;
            build_globset(&rule.include)?;
            build_globset(&rule.exclude)?;
        }
        for check in CheckId::ALL {
            self.enforcement.tier(check)?;
        }
        Ok(())
    }

    pub fn scope_for(&self, check: CheckId) -> Result<CompiledScope, ConfigError> {
        let mut include = Vec::new();
        let mut exclude = Vec::new();
        for (k, rule) in &self.scope {
            if k.parse::<CheckId>()? == check {
                include.extend(rule.include.iter().cloned());
                exclude.extend(rule.exclude.iter().cloned());
            }
        }
        Ok(CompiledScope {
            include: if include.is_empty() { None } else { Some(build_globset(&include)?) },
            exclude: build_globset(&exclude)?,
        })
    }
}

pub fn compile_glob(pattern: &str) -> Result<Glob, ConfigError> {
    GlobBuilder::new(pattern)
        .literal_separator(true)
        .build()
        .map_err(|e| ConfigError::Glob {
            pattern: pattern.to_string(),
            message: e.to_string(),
        })
}

pub fn build_globset(patterns: &[String]) -> Result<GlobSet, ConfigError> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        builder.add(compile_glob(p)?);
    }
    builder.build().map_err(|e| ConfigError::Glob {
        pattern: patterns.join(", "),
        message: e.to_string(),
    })
}

/// Path filter for one check.
#[derive(Debug, Clone)]
pub struct CompiledScope {
    include: Option<GlobSet>,
    exclude: GlobSet,
}

impl CompiledScope {
    pub fn admits(&self, path: &str) -> bool {
        self.include.as_ref().is_none_or(|g| g.is_match(path)) && !self.exclude.is_match(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = LintConfig::from_toml_str("", "x").unwrap();
        assert_eq!(c, LintConfig::with_defaults());
        assert_eq!(c.enforcement.tier(CheckId::T10).unwrap(), Tier::Warn);
        assert_eq!(c.enforcement.tier(CheckId::T2).unwrap(), Tier::Enforced);
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let text = r#"
            [schema.vocabularies]
            region_type = ["county", "health district"]

            [checks]
            known_measures = ["perc_no_computer"]

            [enforcement]
            mode = "dev"
            [enforcement.dev]
            T7 = "warn"

            [scope.T4]
            exclude = ["geographies/**"]
        "#;
        let c = LintConfig::from_toml_str(text, "x").unwrap();
        assert_eq!(c.schema.vocabularies.len(), 1);
        assert_eq!(c.schema.char_limits["long_name"], 55);
        assert_eq!(c.checks.fraction_min_rows, 3);
        assert_eq!(c.enforcement.tier(CheckId::T7).unwrap(), Tier::Warn);
        let scope = c.scope_for(CheckId::T4).unwrap();
        assert!(!scope.admits("geographies/data/distribution/x.csv"));
        assert!(scope.admits("broadband/data/distribution/x.csv"));
        assert!(c.scope_for(CheckId::T9).unwrap().admits("geographies/x.csv"));
    }

    #[test]
    fn unknown_fields_and_checks_are_rejected() {
        assert!(matches!(
            LintConfig::from_toml_str("[scan]\nbogus = 1", "x"),
            Err(ConfigError::Parse { .. })
        ));
        assert!(matches!(
            LintConfig::from_toml_str("[enforcement.tiers]\nT1 = \"off\"", "x"),
            Err(ConfigError::UnknownCheck(_))
        ));
        assert!(matches!(
            LintConfig::from_toml_str("[checks]\nfile_name_pattern = \"[\"", "x"),
            Err(ConfigError::Regex { .. })
        ));
    }

    #[test]
    fn distribution_glob_matches_at_any_depth() {
        let set = build_globset(&ColumnProfile::distribution_default().include).unwrap();
        assert!(set.is_match("data/distribution/a.csv"));
        assert!(set.is_match("x/y/data/distribution/sub/a.csv.gz"));
        assert!(!set.is_match("x/data/working/a.csv"));
    }
}
