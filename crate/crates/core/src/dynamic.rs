//! Expansion of dynamic metadata entries.
//!
//! A dynamic entry names a template id such as `{category}_{variant}` and
//! lists tokens on up to two axes. Expansion produces one concrete entry per
//! (category, variant) pair, substituting the tokens into every string field
//! and then applying the per-token overrides.

use std::collections::BTreeSet;

use serde_json::Value;
use thiserror::Error;

use crate::metadata::{AxisSpec, MeasureEntry, MeasureInfoFile};

pub const CATEGORY_PLACEHOLDER: &str = "{category}";
pub const VARIANT_PLACEHOLDER: &str = "{variant}";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("expansion of `{source_id}` produces duplicate measure id `{id}`")]
    DuplicateId { source_id: String, id: String },
    #[error("`{source_id}` still contains `{placeholder}` in `{field}` after expansion")]
    Unsubstituted {
        source_id: String,
        field: String,
        placeholder: String,
    },
    #[error("id template `{source_id}` lacks `{placeholder}` although that axis is non-empty")]
    MissingIdPlaceholder { source_id: String, placeholder: String },
    #[error("override `{field}` on `{source_id}` is invalid: {message}")]
    InvalidOverride {
        source_id: String,
        field: String,
        message: String,
    },
}

impl ExpansionError {
    pub fn source_id(&self) -> &str {
        match self {
            ExpansionError::DuplicateId { source_id, .. }
            | ExpansionError::Unsubstituted { source_id, .. }
            | ExpansionError::MissingIdPlaceholder { source_id, .. }
            | ExpansionError::InvalidOverride { source_id, .. } => source_id,
        }
    }
}

fn substitute(text: &str, category: Option<&str>, variant: Option<&str>) -> String {
    let mut out = text.to_string();
    if let Some(c) = category {
        out = out.replace(CATEGORY_PLACEHOLDER, c);
    }
    if let Some(v) = variant {
        out = out.replace(VARIANT_PLACEHOLDER, v);
    }
    out
}

fn substitute_value(value: &mut Value, category: Option<&str>, variant: Option<&str>) {
    match value {
        Value::String(s) => *s = substitute(s, category, variant),
        Value::Array(items) => items
            .iter_mut()
            .for_each(|v| substitute_value(v, category, variant)),
        Value::Object(map) => map
            .values_mut()
            .for_each(|v| substitute_value(v, category, variant)),
        _ => {}
    }
}

/// First string (as a dotted field path) still containing an axis placeholder.
fn find_residue(value: &Value, path: &str) -> Option<(String, &'static str)> {
    match value {
        Value::String(s) => [CATEGORY_PLACEHOLDER, VARIANT_PLACEHOLDER]
            .into_iter()
            .find(|p| s.contains(p))
            .map(|p| (path.to_string(), p)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, v)| find_residue(v, &format!("{path}[{i}]"))),
        Value::Object(map) => map.iter().find_map(|(k, v)| {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            find_residue(v, &p)
        }),
        _ => None,
    }
}

fn axis_or_identity(axis: &Option<Vec<AxisSpec>>) -> Vec<Option<&AxisSpec>> {
    match axis {
        Some(tokens) if !tokens.is_empty() => tokens.iter().map(Some).collect(),
        _ => vec![None],
    }
}

/// Expands one entry. A concrete entry comes back unchanged as a single item.
///
/// Output is ordered by (category index, variant index); an empty axis acts as
/// a single identity token.
pub fn expand_dynamic(entry: &MeasureEntry) -> Result<Vec<MeasureEntry>, ExpansionError> {
    if !entry.is_dynamic() {
        return Ok(vec![entry.clone()]);
    }
    let source_id = entry.measure_id.as_str();
    for (axis, placeholder) in [
        (&entry.categories, CATEGORY_PLACEHOLDER),
        (&entry.variants, VARIANT_PLACEHOLDER),
    ] {
        if axis.as_ref().is_some_and(|a| !a.is_empty()) && !source_id.contains(placeholder) {
            return Err(ExpansionError::MissingIdPlaceholder {
                source_id: source_id.to_string(),
                placeholder: placeholder.to_string(),
            });
        }
    }

    let mut base = entry.clone();
    base.categories = None;
    base.variants = None;
    let base_value = base.to_value();

    let categories = axis_or_identity(&entry.categories);
    let variants = axis_or_identity(&entry.variants);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(categories.len() * variants.len());
    for category in &categories {
        for variant in &variants {
            let cat = category.map(|c| c.token.as_str());
            let var = variant.map(|v| v.token.as_str());
            let id = substitute(source_id, cat, var);
            let mut value = base_value.clone();
            substitute_value(&mut value, cat, var);
            let obj = value.as_object_mut().expect("entry value is an object");
            for spec in category.iter().chain(variant.iter()) {
                for (field, text) in &spec.overrides {
                    obj.insert(field.clone(), Value::String(substitute(text, cat, var)));
                }
            }
            let expanded = MeasureEntry::from_value(&id, &value).map_err(|message| {
                ExpansionError::InvalidOverride {
                    source_id: source_id.to_string(),
                    field: message.split(':').next().unwrap_or_default().to_string(),
                    message,
                }
            })?;
            if let Some((field, placeholder)) = find_residue(&Value::String(id.clone()), "id")
                .or_else(|| find_residue(&expanded.to_value(), ""))
            {
                return Err(ExpansionError::Unsubstituted {
                    source_id: source_id.to_string(),
                    field,
                    placeholder: placeholder.to_string(),
                });
            }
            if !seen.insert(id.clone()) {
                return Err(ExpansionError::DuplicateId {
                    source_id: source_id.to_string(),
                    id,
                });
            }
            out.push(expanded);
        }
    }
    Ok(out)
}

/// Result of expanding every entry of a file. Entries that fail to expand are
/// reported and left out of `file`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedFile {
    pub file: MeasureInfoFile,
    pub errors: Vec<ExpansionError>,
    /// Concrete id → id of the entry it came from.
    pub origins: Vec<(String, String)>,
}

/// Expands all entries, keeping references. Concrete ids must stay unique
/// across the whole file.
pub fn expand_file(file: &MeasureInfoFile) -> ExpandedFile {
    let mut expanded = MeasureInfoFile {
        path: file.path.clone(),
        entries: Default::default(),
        references: file.references.clone(),
    };
    let mut errors = Vec::new();
    let mut origins = Vec::new();
    for entry in file.entries.values() {
        match expand_dynamic(entry) {
            Ok(concrete) => {
                if let Some(dup) = concrete.iter().find(|c| {
                    expanded.entries.contains_key(&c.measure_id)
                        || (entry.is_dynamic() && file.entries.contains_key(&c.measure_id))
                }) {
                    errors.push(ExpansionError::DuplicateId {
                        source_id: entry.measure_id.clone(),
                        id: dup.measure_id.clone(),
                    });
                    continue;
                }
                for c in concrete {
                    origins.push((c.measure_id.clone(), entry.measure_id.clone()));
                    expanded.entries.insert(c.measure_id.clone(), c);
                }
            }
            Err(e) => errors.push(e),
        }
    }
    origins.sort();
    ExpandedFile {
        file: expanded,
        errors,
        origins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metadata::parse_measure_info;

    fn dynamic(id: &str, cats: &[&str], vars: &[&str]) -> MeasureEntry {
        let mut e = MeasureEntry::new(id);
        e.long_name = Some("{variant} in {category}".into());
        e.short_name = Some("{category} {variant}".into());
        e.measure_type = Some("percent".into());
        if !cats.is_empty() {
            e.categories = Some(cats.iter().map(|c| AxisSpec::new(*c)).collect());
        }
        if !vars.is_empty() {
            e.variants = Some(vars.iter().map(|v| AxisSpec::new(*v)).collect());
        }
        e
    }

    #[test]
    fn single_pair_uses_table2_tokens() {
        let out = expand_dynamic(&dynamic("{category}_{variant}", &["NAICS72"], &["entry_rate"])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].measure_id, "NAICS72_entry_rate");
        assert_eq!(out[0].long_name.as_deref(), Some("entry_rate in NAICS72"));
        assert!(out[0].categories.is_none() && out[0].variants.is_none());
        assert_eq!(out[0].measure_type.as_deref(), Some("percent"));
    }

    #[test]
    fn empty_axis_is_identity() {
        let mut e = dynamic("{category}_share", &["a", "b", "c"], &[]);
        e.long_name = Some("Share of {category}".into());
        e.short_name = None;
        let out = expand_dynamic(&e).unwrap();
        let ids: Vec<_> = out.iter().map(|e| e.measure_id.as_str()).collect();
        assert_eq!(ids, vec!["a_share", "b_share", "c_share"]);
    }

    #[test]
    fn order_is_category_major() {
        let out = expand_dynamic(&dynamic("{category}_{variant}", &["c1", "c2"], &["v1", "v2"])).unwrap();
        let ids: Vec<_> = out.iter().map(|e| e.measure_id.as_str()).collect();
        assert_eq!(ids, vec!["c1_v1", "c1_v2", "c2_v1", "c2_v2"]);
    }

    #[test]
    fn concrete_entries_pass_through() {
        let mut e = MeasureEntry::new("plain");
        e.long_name = Some("Plain".into());
        assert_eq!(expand_dynamic(&e).unwrap(), vec![e]);
    }

    #[test]
    fn overrides_apply_after_substitution() {
        let mut e = dynamic("{category}_{variant}", &[], &["entry_rate"]);
        let mut naics = AxisSpec::new("NAICS72");
        naics
            .overrides
            .insert("long_name".into(), "{variant} in Accommodation and Food Services".into());
        e.categories = Some(vec![naics]);
        let out = expand_dynamic(&e).unwrap();
        assert_eq!(
            out[0].long_name.as_deref(),
            Some("entry_rate in Accommodation and Food Services")
        );
        assert_eq!(out[0].short_name.as_deref(), Some("NAICS72 entry_rate"));
    }

    #[test]
    fn variant_overrides_win_over_category_overrides() {
        let mut e = dynamic("{category}_{variant}", &[], &[]);
        let mut c = AxisSpec::new("c");
        c.overrides.insert("unit".into(), "firm".into());
        let mut v = AxisSpec::new("v");
        v.overrides.insert("unit".into(), "worker".into());
        e.categories = Some(vec![c]);
        e.variants = Some(vec![v]);
        assert_eq!(expand_dynamic(&e).unwrap()[0].unit.as_deref(), Some("worker"));
    }

    #[test]
    fn errors() {
        let dup = expand_dynamic(&dynamic("{category}_{variant}", &["a", "a"], &["v"])).unwrap_err();
        assert!(matches!(dup, ExpansionError::DuplicateId { id, .. } if id == "a_v"));

        let residue = expand_dynamic(&dynamic("{category}", &["a"], &[])).unwrap_err();
        assert!(matches!(residue, ExpansionError::Unsubstituted { placeholder, .. } if placeholder == "{variant}"));

        let no_slot = expand_dynamic(&dynamic("{category}_x", &["a"], &["v"])).unwrap_err();
        assert!(matches!(no_slot, ExpansionError::MissingIdPlaceholder { .. }));

        let mut bad = dynamic("{category}", &[], &[]);
        bad.long_name = None;
        bad.short_name = None;
        let mut c = AxisSpec::new("a");
        c.overrides.insert("sources".into(), "ACS".into());
        bad.categories = Some(vec![c]);
        assert!(matches!(expand_dynamic(&bad).unwrap_err(), ExpansionError::InvalidOverride { .. }));
    }

    #[test]
    fn file_expansion_keeps_references_and_rejects_collisions() {
        let src = r#"{
            "_references": {"lou04": {"title": "t"}},
            "a_v": {"long_name": "fixed"},
            "{category}_v": {"categories": ["a", "b"], "long_name": "{category}"},
            "m": {"short_name": "m"}
        }"#;
        let file = parse_measure_info(src.as_bytes(), "mi.json").unwrap();
        let out = expand_file(&file);
        assert_eq!(out.errors.len(), 1);
        assert!(matches!(&out.errors[0], ExpansionError::DuplicateId { id, .. } if id == "a_v"));
        assert_eq!(out.file.entries.keys().collect::<Vec<_>>(), vec!["a_v", "m"]);
        assert_eq!(out.file.references.len(), 1);
    }
}
