//! T2: percent data in the 0–100 range, not 0–1.

use std::collections::BTreeMap;

use super::{CheckContext, CheckItem, Subject, Verdict};

const MISSING_TOKENS: [&str; 6] = ["", "NA", "na", "NaN", "null", "NULL"];

/// Parsed numeric cell; `None` for an empty / NA cell.
pub(crate) fn parse_cell(raw: &str) -> Result<Option<f64>, ()> {
    let raw = raw.trim();
    if MISSING_TOKENS.contains(&raw) {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_nan() => Ok(None),
        Ok(v) => Ok(Some(v)),
        Err(_) => Err(()),
    }
}

/// Verdict for one percent measure given its (line, raw value) cells.
pub(crate) fn judge(cells: &[(usize, &str)], fraction_min_rows: usize) -> (Verdict, String) {
    let mut values = Vec::with_capacity(cells.len());
    for (line, raw) in cells {
        match parse_cell(raw) {
            Ok(Some(v)) => values.push((*line, v)),
            Ok(None) => {}
            Err(()) => return (Verdict::Error, format!("unparseable value `{raw}` at line {line}")),
        }
    }
    let outside: Vec<_> = values.iter().filter(|(_, v)| !(0.0..=100.0).contains(v)).collect();
    if let Some((line, v)) = outside.first() {
        return (
            Verdict::Invalid,
            format!(
                "{} value(s) outside [0, 100], first {v} at line {line}",
                outside.len()
            ),
        );
    }
    if values.len() >= fraction_min_rows && values.iter().all(|(_, v)| (0.0..=1.0).contains(v)) {
        return (
            Verdict::Invalid,
            format!("all {} values lie in [0, 1]; looks like a fraction, not a percentage", values.len()),
        );
    }
    (Verdict::Valid, String::new())
}

pub(super) fn percent_range(ctx: &CheckContext) -> Vec<CheckItem> {
    let scan = &ctx.config.scan;
    let min_rows = ctx.config.checks.fraction_min_rows;
    let mut items = Vec::new();
    for parsed in &ctx.tables {
        let table = match &parsed.result {
            Ok(t) => t,
            Err(e) => {
                items.push(CheckItem::new(Subject::file(&parsed.path), Verdict::Error, e.message.clone()));
                continue;
            }
        };
        let (Some(mi), Some(vi)) = (
            table.column_index(&scan.measure_column),
            table.column_index(&scan.value_column),
        ) else {
            continue;
        };
        let ti = table.column_index(&scan.measure_type_column);
        let mut groups: BTreeMap<&str, Vec<(usize, &str)>> = BTreeMap::new();
        for (i, row) in table.rows.iter().enumerate() {
            let measure = row[mi].as_str();
            let is_percent = match ti {
                Some(ti) => row[ti] == "percent",
                None => ctx.metadata_measure_type(&table.path, measure) == Some("percent"),
            };
            if is_percent {
                // +2: header line and 1-based numbering
                groups.entry(measure).or_default().push((i + 2, row[vi].as_str()));
            }
        }
        for (measure, cells) in groups {
            let (verdict, detail) = judge(&cells, min_rows);
            items.push(CheckItem::new(Subject::measure(&table.path, measure), verdict, detail));
        }
    }
    items
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(vals: &[&'static str]) -> Vec<(usize, &'static str)> {
        vals.iter().enumerate().map(|(i, v)| (i + 2, *v)).collect()
    }

    #[test]
    fn boundaries_are_inclusive() {
        assert_eq!(judge(&cells(&["12.5", "99.9", "0.0", "100.0"]), 3).0, Verdict::Valid);
    }

    #[test]
    fn out_of_range_is_invalid() {
        let (v, d) = judge(&cells(&["50", "104.2"]), 3);
        assert_eq!(v, Verdict::Invalid);
        assert!(d.contains("104.2") && d.contains("line 3"), "{d}");
        assert_eq!(judge(&cells(&["-0.5"]), 3).0, Verdict::Invalid);
    }

    #[test]
    fn suspected_fraction_needs_enough_rows() {
        assert_eq!(judge(&cells(&["0.12", "0.45", "0.88"]), 3).0, Verdict::Invalid);
        assert_eq!(judge(&cells(&["0.12", "0.45"]), 3).0, Verdict::Valid);
        // missing cells don't count towards the threshold
        assert_eq!(judge(&cells(&["0.12", "NA", "0.45", ""]), 3).0, Verdict::Valid);
        assert_eq!(judge(&cells(&["0.12", "0.45", "1.5"]), 3).0, Verdict::Valid);
    }

    #[test]
    fn unparseable_is_error() {
        let (v, d) = judge(&cells(&["12", "twelve"]), 3);
        assert_eq!(v, Verdict::Error);
        assert!(d.contains("twelve"));
    }
}
