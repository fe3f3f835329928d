//! T4, T6, T9, T10: conventions inside tabular data files.

use std::collections::BTreeSet;

use super::{list, CheckContext, CheckItem, Subject, Verdict};
use crate::config::build_globset;
use crate::scanner::DataTable;

/// Shared shape of the vocabulary-style checks: every distinct value of a
/// column must belong to an allowed set.
fn vocabulary_check(
    ctx: &CheckContext,
    column: &str,
    allowed: Option<&BTreeSet<String>>,
    what: &str,
    values: fn(&DataTable) -> &BTreeSet<String>,
) -> Vec<CheckItem> {
    let mut items = Vec::new();
    for parsed in &ctx.tables {
        let subject = Subject::file(&parsed.path);
        let table = match &parsed.result {
            Ok(t) => t,
            Err(e) => {
                items.push(CheckItem::new(subject, Verdict::Error, e.message.clone()));
                continue;
            }
        };
        let Some(allowed) = allowed.filter(|a| !a.is_empty()) else {
            items.push(CheckItem::new(subject, Verdict::Skipped, format!("no {what} list configured")));
            continue;
        };
        if table.column_index(column).is_none() {
            items.push(CheckItem::new(subject, Verdict::Skipped, format!("no `{column}` column")));
            continue;
        }
        let distinct = values(table).iter().map(|v| v.trim()).filter(|v| !v.is_empty());
        let bad: Vec<&str> = distinct.filter(|v| !allowed.contains(*v)).collect();
        items.push(if bad.is_empty() {
            CheckItem::valid(subject)
        } else {
            CheckItem::new(subject, Verdict::Invalid, format!("unknown {what}: {}", list(&bad)))
        });
    }
    items
}

pub(super) fn measure_types(ctx: &CheckContext) -> Vec<CheckItem> {
    vocabulary_check(
        ctx,
        &ctx.config.scan.measure_type_column,
        ctx.config.schema.vocabularies.get("measure_type"),
        "measure_type",
        |t| &t.distinct_measure_types,
    )
}

pub(super) fn region_types(ctx: &CheckContext) -> Vec<CheckItem> {
    vocabulary_check(
        ctx,
        &ctx.config.scan.region_type_column,
        ctx.config.schema.vocabularies.get("region_type"),
        "region_type",
        |t| &t.distinct_region_types,
    )
}

pub(super) fn known_measures(ctx: &CheckContext) -> Vec<CheckItem> {
    vocabulary_check(
        ctx,
        &ctx.config.scan.measure_column,
        ctx.config.checks.known_measures.as_ref(),
        "known measures",
        |t| &t.distinct_measures,
    )
}

pub(super) fn columns(ctx: &CheckContext) -> Vec<CheckItem> {
    let profiles: Vec<_> = ctx
        .config
        .columns
        .iter()
        .map(|p| (p, build_globset(&p.include).expect("config validated at load time")))
        .collect();
    let mut items = Vec::new();
    for parsed in &ctx.tables {
        let Some((profile, _)) = profiles.iter().find(|(_, g)| g.is_match(&parsed.path)) else {
            continue;
        };
        let subject = Subject::file(&parsed.path);
        let table = match &parsed.result {
            Ok(t) => t,
            Err(e) => {
                items.push(CheckItem::new(subject, Verdict::Error, e.message.clone()));
                continue;
            }
        };
        let present: BTreeSet<&str> = table.columns.iter().map(String::as_str).collect();
        let mut problems = Vec::new();
        let missing: Vec<&str> = profile
            .required
            .iter()
            .map(String::as_str)
            .filter(|c| !present.contains(c))
            .collect();
        if !missing.is_empty() {
            problems.push(format!("missing columns: {}", list(&missing)));
        }
        let unexpected: Vec<&str> = present
            .iter()
            .copied()
            .filter(|c| !profile.required.contains(*c) && !profile.optional.contains(*c))
            .collect();
        if !unexpected.is_empty() {
            problems.push(format!("unexpected columns: {}", list(&unexpected)));
        }
        if present.len() != table.columns.len() {
            problems.push("duplicate column names".to_string());
        }
        items.push(if problems.is_empty() {
            CheckItem::valid(subject)
        } else {
            CheckItem::new(
                subject,
                Verdict::Invalid,
                format!("{} (profile `{}`)", problems.join("; "), profile.name),
            )
        });
    }
    items
}
