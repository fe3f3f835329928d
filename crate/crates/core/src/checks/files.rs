//! T11, T12, T13: file naming and layout conventions.

use std::collections::BTreeMap;

use regex::Regex;

use super::{list, CheckContext, CheckItem, Subject, Verdict};
use crate::scanner::FileKind;

/// T11 applies to the files the platform ingests; code and docs keep their own
/// conventions.
fn is_data_file(kind: FileKind) -> bool {
    matches!(kind, FileKind::MeasureInfo | FileKind::TabularData | FileKind::LayerData)
}

pub(super) fn file_names(ctx: &CheckContext) -> Vec<CheckItem> {
    let settings = &ctx.config.checks;
    let pattern = Regex::new(&settings.file_name_pattern).expect("config validated at load time");
    ctx.snapshot
        .files
        .iter()
        .filter(|f| is_data_file(f.kind))
        .map(|f| {
            let name = f.basename();
            let mut problems = Vec::new();
            if !pattern.is_match(name) {
                let mut odd: Vec<String> = name
                    .chars()
                    .filter(|c| !pattern.is_match(&c.to_string()))
                    .map(|c| format!("{c:?}"))
                    .collect();
                odd.dedup();
                problems.push(format!("name does not match `{}` (offending: {})", settings.file_name_pattern, list(&odd)));
            }
            let ext_ok = f.kind == FileKind::MeasureInfo
                || settings
                    .file_name_extensions
                    .iter()
                    .any(|e| name.ends_with(&format!(".{e}")));
            if !ext_ok {
                problems.push(format!(
                    "extension not in {}",
                    list(&settings.file_name_extensions)
                ));
            }
            let subject = Subject::file(&f.path);
            if problems.is_empty() {
                CheckItem::valid(subject)
            } else {
                CheckItem::new(subject, Verdict::Invalid, problems.join("; "))
            }
        })
        .collect()
}

pub(super) fn code_exists(ctx: &CheckContext) -> Vec<CheckItem> {
    let code = &ctx.config.scan.code_segment;
    // code/distribution dir → the data/distribution dir it serves
    let mut groups: BTreeMap<&str, String> = BTreeMap::new();
    for f in &ctx.snapshot.files {
        if let Some(code_dir) = f.sibling_code_dir.as_deref() {
            let prefix = &code_dir[..code_dir.len() - format!("{code}/distribution").len()];
            groups.entry(code_dir).or_insert_with(|| format!("{prefix}data/distribution"));
        }
    }
    groups
        .into_iter()
        .map(|(code_dir, data_dir)| {
            let needle = format!("{code_dir}/");
            let has_code = ctx.snapshot.files.iter().any(|f| f.path.starts_with(&needle));
            let subject = Subject::file(data_dir);
            if has_code {
                CheckItem::valid(subject)
            } else {
                CheckItem::new(subject, Verdict::Invalid, format!("no files under {code_dir}/"))
            }
        })
        .collect()
}

pub(super) fn file_name_lengths(ctx: &CheckContext) -> Vec<CheckItem> {
    let max = ctx.config.checks.max_file_name_length;
    ctx.snapshot
        .files
        .iter()
        .map(|f| {
            let len = f.basename().chars().count();
            let subject = Subject::file(&f.path);
            if len <= max {
                CheckItem::valid(subject)
            } else {
                CheckItem::new(
                    subject,
                    Verdict::Invalid,
                    format!("file name is {len} characters; limit is {max}"),
                )
            }
        })
        .collect()
}
