//! T8: JSON files can be read.

use super::{CheckContext, CheckItem, Subject, Verdict};

pub(super) fn json_valid(ctx: &CheckContext) -> Vec<CheckItem> {
    ctx.snapshot
        .json_files
        .iter()
        .map(|f| match &f.error {
            None => CheckItem::valid(Subject::file(&f.path)),
            Some(e) => CheckItem::new(Subject::file(&f.path), Verdict::Invalid, e.clone()),
        })
        .collect()
}
