//! Repository linter and metadata toolkit for data-commons repositories.
//!
//! The crate is organised around the life of a repository check:
//!
//! * [`metadata`] parses and validates `measure_info.json` core metadata.
//! * [`scanner`] walks a repository into an immutable [`scanner::RepoSnapshot`].
//! * [`dynamic`] expands templated (dynamic) metadata entries.
//! * [`checks`] runs the T2–T14 check catalog and aggregates suite reports.
//! * [`fair`] scores FAIR maturity self-assessments.
//! * [`report`] renders HTML/JSON reports and the static data dictionary.
//! * [`cli`] wires these into the `commons-lint` command.

pub mod checks;
pub mod cli;
pub mod config;
pub mod dynamic;
pub mod fair;
mod html;
pub mod metadata;
pub mod report;
pub mod scanner;

pub use checks::{
    format_percentage, run_suite, CheckId, CheckItem, CheckReport, Counts, Subject, SuiteReport,
    Tier, Verdict,
};
pub use config::LintConfig;
pub use dynamic::{expand_dynamic, expand_file, ExpansionError};
pub use metadata::{
    parse_measure_info, MeasureEntry, MeasureInfoFile, MetadataError, SchemaConfig,
};
pub use scanner::{scan_repo, RepoSnapshot};
