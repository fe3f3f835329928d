//! T5 / T14: measure ids in metadata versus measure ids in data.

use std::collections::{BTreeMap, BTreeSet};

use super::{list, CheckContext, CheckItem, Subject, Verdict};
use crate::scanner::parent_dir;

/// Which `measure_info` file(s) describe a data table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pairing {
    None,
    One(String),
    Ambiguous(Vec<String>),
}

impl Pairing {
    pub fn infos(&self) -> &[String] {
        match self {
            Pairing::None => &[],
            Pairing::One(p) => std::slice::from_ref(p),
            Pairing::Ambiguous(ps) => ps,
        }
    }
}

/// Pairs a table with the `measure_info` files in its own directory, or in the
/// nearest ancestor directory that has any. More than one claimant is ambiguous.
pub fn pair_tables(info_paths: &[&str], table_path: &str) -> Pairing {
    let mut dir = parent_dir(table_path);
    loop {
        let here: Vec<String> = info_paths
            .iter()
            .filter(|p| parent_dir(p) == dir)
            .map(|p| p.to_string())
            .collect();
        match here.len() {
            0 => {}
            1 => return Pairing::One(here.into_iter().next().unwrap()),
            _ => return Pairing::Ambiguous(here),
        }
        if dir.is_empty() {
            return Pairing::None;
        }
        dir = parent_dir(dir);
    }
}

pub(super) fn cross_check(ctx: &CheckContext) -> (Vec<CheckItem>, Vec<CheckItem>) {
    let distribution_only = ctx.config.checks.cross_check_distribution_only;
    let in_scope = |path: &str| {
        !distribution_only || ctx.snapshot.file(path).is_some_and(|f| f.in_distribution)
    };

    let mut missing_items = Vec::new();
    // measure_info path → union of measure ids over its paired tables
    let mut data_measures: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();

    for parsed in ctx.tables.iter().filter(|t| in_scope(&t.path)) {
        let path = parsed.path.as_str();
        let pairing = &ctx.pairing[path];
        let table = match &parsed.result {
            Ok(t) => t,
            Err(e) => {
                missing_items.push(CheckItem::new(Subject::file(path), Verdict::Error, e.message.clone()));
                continue;
            }
        };
        for info in pairing.infos() {
            data_measures
                .entry(info.as_str())
                .or_default()
                .extend(table.distinct_measures.iter().map(String::as_str));
        }
        match pairing {
            Pairing::None => {
                if !table.distinct_measures.is_empty() {
                    missing_items.push(CheckItem::new(
                        Subject::file(path),
                        Verdict::Invalid,
                        "no measure_info file describes this data file",
                    ));
                }
            }
            Pairing::Ambiguous(infos) => missing_items.push(CheckItem::new(
                Subject::file(path),
                Verdict::Error,
                format!("claimed by several measure_info files: {}", list(infos)),
            )),
            Pairing::One(info) => {
                let state = ctx.info(info).expect("paired info exists");
                let entries = match &state.expanded {
                    Ok(expanded) => &expanded.file.entries,
                    Err(e) => {
                        missing_items.push(CheckItem::new(
                            Subject::file(path),
                            Verdict::Error,
                            format!("paired measure_info is unreadable: {e}"),
                        ));
                        continue;
                    }
                };
                for measure in &table.distinct_measures {
                    let subject = Subject::measure(path, measure);
                    missing_items.push(if entries.contains_key(measure) {
                        CheckItem::valid(subject)
                    } else {
                        CheckItem::new(subject, Verdict::Missing, format!("`{measure}` has no entry in {info}"))
                    });
                }
            }
        }
    }

    let mut extra_items = Vec::new();
    for state in &ctx.infos {
        let expanded = match &state.expanded {
            Ok(e) => e,
            Err(e) => {
                extra_items.push(CheckItem::new(Subject::file(state.path), Verdict::Error, e.to_string()));
                continue;
            }
        };
        let present = data_measures.get(state.path);
        for err in &expanded.errors {
            extra_items.push(CheckItem::new(
                Subject::measure(state.path, err.source_id()),
                Verdict::Error,
                err.to_string(),
            ));
        }
        for id in expanded.file.entries.keys() {
            let subject = Subject::measure(state.path, id);
            extra_items.push(if present.is_some_and(|p| p.contains(id.as_str())) {
                CheckItem::valid(subject)
            } else {
                CheckItem::new(subject, Verdict::Extra, format!("`{id}` does not occur in any paired data file"))
            });
        }
    }
    (missing_items, extra_items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_with_nearest_directory() {
        let infos = ["a/data/distribution/measure_info.json", "a/measure_info.json"];
        assert_eq!(
            pair_tables(&infos, "a/data/distribution/x.csv"),
            Pairing::One(infos[0].to_string())
        );
        assert_eq!(pair_tables(&infos, "a/data/working/x.csv"), Pairing::One(infos[1].to_string()));
        assert_eq!(pair_tables(&infos, "b/x.csv"), Pairing::None);
        assert_eq!(pair_tables(&[], "x.csv"), Pairing::None);
        let two = ["d/measure_info.json", "d/measure_info"];
        assert!(matches!(pair_tables(&two, "d/x.csv"), Pairing::Ambiguous(v) if v.len() == 2));
        assert_eq!(pair_tables(&["measure_info.json"], "d/e/x.csv"), Pairing::One("measure_info.json".into()));
    }
}
