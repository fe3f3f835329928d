//! T3 / T7: key structure of `measure_info` entries.

use serde_json::Value;

use super::{list, CheckContext, CheckItem, Subject, Verdict};
use crate::metadata::{validate_entry_keys, REFERENCES_KEY};

fn scalar_like(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|i| !i.is_array() && !i.is_object()),
        Value::Object(_) => false,
        _ => true,
    }
}

/// Both reports share one pass over the expanded entries.
pub(super) fn info_structure(ctx: &CheckContext) -> (Vec<CheckItem>, Vec<CheckItem>) {
    let schema = &ctx.config.schema;
    let mut structure = Vec::new();
    let mut keys = Vec::new();
    for state in &ctx.infos {
        let expanded = match &state.expanded {
            Ok(e) => e,
            Err(e) => {
                let item = CheckItem::new(Subject::file(state.path), Verdict::Error, e.to_string());
                structure.push(item.clone());
                keys.push(item);
                continue;
            }
        };
        for err in &expanded.errors {
            let item = CheckItem::new(
                Subject::measure(state.path, err.source_id()),
                Verdict::Error,
                err.to_string(),
            );
            structure.push(item.clone());
            keys.push(item);
        }
        for entry in expanded.file.entries.values() {
            let subject = Subject::measure(state.path, &entry.measure_id);
            let report = validate_entry_keys(entry, schema);
            structure.push(if report.disallowed.is_empty() {
                CheckItem::valid(subject.clone())
            } else {
                CheckItem::new(
                    subject.clone(),
                    Verdict::Invalid,
                    format!("keys outside the allowed set: {}", list(&report.disallowed)),
                )
            });
            let mut problems = Vec::new();
            if !report.absent.is_empty() {
                problems.push(format!("absent: {}", list(&report.absent)));
            }
            if !report.blank.is_empty() {
                problems.push(format!("blank: {}", list(&report.blank)));
            }
            keys.push(if problems.is_empty() {
                CheckItem::valid(subject)
            } else {
                CheckItem::new(subject, Verdict::Invalid, problems.join("; "))
            });
        }
        if !expanded.file.references.is_empty() {
            let nested: Vec<String> = expanded
                .file
                .references
                .values()
                .flat_map(|r| {
                    r.fields
                        .iter()
                        .filter(|(_, v)| !scalar_like(v))
                        .map(move |(k, _)| format!("{}.{k}", r.ref_id))
                })
                .collect();
            let subject = Subject::measure(state.path, REFERENCES_KEY);
            structure.push(if nested.is_empty() {
                CheckItem::valid(subject)
            } else {
                CheckItem::new(
                    subject,
                    Verdict::Invalid,
                    format!("reference fields must be plain values: {}", list(&nested)),
                )
            });
        }
    }
    (structure, keys)
}
