//! HTML and JSON output: per-check report pages, the data dictionary site and
//! FAIR maturity reports.
//!
//! Everything here is plain static HTML with relative links. Elements that
//! tests or scrapers may want to target carry stable ids such as
//! `T2-count-valid` or `field-short_name`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use crate::checks::{format_percentage, CheckReport, SuiteReport, Verdict};
use crate::dynamic::expand_file;
use crate::fair::FairReport;
use crate::html::{escape, page, slug};
use crate::metadata::{MeasureEntry, ReferenceEntry};
use crate::scanner::RepoSnapshot;

pub const SUITE_JSON: &str = "suite.json";
pub const INDEX_HTML: &str = "index.html";
pub const UNRESOLVED_MARKER: &str = "unresolved reference";
pub const UNCATEGORIZED: &str = "Uncategorized";

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct ReportError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError {
        path: path.to_path_buf(),
        source,
    }
}

/// Rendered files, keyed by path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportBundle {
    pub outdir: PathBuf,
    pub files: BTreeMap<String, String>,
}

impl ReportBundle {
    /// Check pages only (everything except the index and JSON sidecar).
    pub fn pages(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files
            .iter()
            .filter(|(k, _)| k.as_str() != INDEX_HTML && k.as_str() != SUITE_JSON)
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn index(&self) -> Option<&str> {
        self.files.get(INDEX_HTML).map(String::as_str)
    }

    pub fn json(&self) -> Option<&str> {
        self.files.get(SUITE_JSON).map(String::as_str)
    }
}

/// Writes files into a staging directory inside `outdir`, then renames each
/// into place so readers never observe a half-written page.
pub fn write_files(outdir: &Path, files: &BTreeMap<String, String>) -> Result<(), ReportError> {
    fs::create_dir_all(outdir).map_err(io_err(outdir))?;
    let staging = tempfile::Builder::new()
        .prefix(".staging-")
        .tempdir_in(outdir)
        .map_err(io_err(outdir))?;
    for (rel, content) in files {
        let tmp = staging.path().join(rel);
        if let Some(parent) = tmp.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&tmp, content).map_err(io_err(&tmp))?;
    }
    for rel in files.keys() {
        let dest = outdir.join(rel);
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::rename(staging.path().join(rel), &dest).map_err(io_err(&dest))?;
    }
    staging.close().map_err(io_err(outdir))
}

fn percent_cell(n: usize, total: usize) -> String {
    format_percentage(n as u64, total as u64).unwrap_or_else(|_| "-".into())
}

fn status(report: &CheckReport) -> (&'static str, &'static str) {
    if report.passed() {
        ("pass", "PASS")
    } else {
        ("fail", "FAIL")
    }
}

fn check_page(report: &CheckReport) -> String {
    let id = report.id;
    let (class, label) = status(report);
    let mut b = String::new();
    let _ = writeln!(b, "<p><a href=\"{INDEX_HTML}\">All checks</a></p>");
    let _ = writeln!(b, "<h1 id=\"{id}-title\">{}</h1>", escape(&report.name));
    let _ = writeln!(b, "<p id=\"{id}-description\">{} ({id})</p>", escape(id.description()));
    let _ = writeln!(
        b,
        "<p>Status: <strong id=\"{id}-status\" class=\"{class}\">{label}</strong>; enforcement: <span id=\"{id}-enforcement\">{}</span></p>",
        report.enforcement
    );
    let _ = writeln!(b, "<table id=\"{id}-counts\">\n<tr><th>verdict</th><th>count</th><th>percent</th></tr>");
    for v in Verdict::ALL {
        let n = report.counts.get(v);
        let _ = writeln!(
            b,
            "<tr id=\"{id}-count-{v}\"><th>{v}</th><td>{n}</td><td>{}</td></tr>",
            percent_cell(n, report.total)
        );
    }
    let _ = writeln!(
        b,
        "<tr id=\"{id}-count-total\"><th>total</th><td>{}</td><td></td></tr>\n</table>",
        report.total
    );
    let _ = writeln!(b, "<h2>Items</h2>\n<table id=\"{id}-items\">\n<tr><th>#</th><th>file</th><th>measure</th><th>verdict</th><th>detail</th></tr>");
    for (i, item) in report.items.iter().enumerate() {
        let s = &item.subject;
        let measure = s.measure.as_deref().unwrap_or("");
        let row = s.row.map(|r| format!(" (row {r})")).unwrap_or_default();
        let _ = writeln!(
            b,
            "<tr id=\"{id}-item-{i}\" class=\"{}\"><td>{i}</td><td>{}</td><td>{}{row}</td><td>{}</td><td>{}</td></tr>",
            if item.verdict.is_failure() { "fail" } else { "pass" },
            escape(&s.path),
            escape(measure),
            item.verdict,
            escape(&item.detail)
        );
    }
    b.push_str("</table>\n");
    page(&report.name, &b)
}

fn index_page(suite: &SuiteReport) -> String {
    let mut b = String::new();
    let overall = if suite.overall_pass { "PASS" } else { "FAIL" };
    let _ = writeln!(b, "<h1>Repository checks</h1>");
    let _ = writeln!(b, "<p>Repository: <code id=\"repo-root\">{}</code></p>", escape(&suite.repo_root));
    if let Some(ts) = &suite.generated_at {
        let _ = writeln!(b, "<p>Generated: <span id=\"generated-at\">{}</span></p>", escape(ts));
    }
    let _ = writeln!(b, "<p>Overall: <strong id=\"overall\">{overall}</strong></p>");
    if suite.reports.is_empty() {
        b.push_str("<p id=\"no-checks\">No checks were run.</p>\n");
    }
    b.push_str("<ul id=\"checks\">\n");
    for report in &suite.reports {
        let id = report.id;
        let (class, label) = status(report);
        let _ = writeln!(
            b,
            "<li id=\"{id}\"><a href=\"{}\">{}</a> <span class=\"{class}\">{label}</span> [{}]\n<ul>",
            report.id.file_name(),
            escape(&report.name),
            report.enforcement
        );
        for (v, line) in Verdict::ALL
            .iter()
            .filter(|v| report.counts.get(**v) > 0)
            .zip(report.summary_lines())
        {
            let _ = writeln!(b, "<li id=\"{id}-summary-{v}\">{}</li>", escape(&line));
        }
        b.push_str("</ul></li>\n");
    }
    b.push_str("</ul>\n");
    page("Repository checks", &b)
}

/// Renders the suite without touching the filesystem.
pub fn build_suite_bundle(suite: &SuiteReport, outdir: &Path) -> ReportBundle {
    let mut files = BTreeMap::new();
    for report in &suite.reports {
        files.insert(report.id.file_name(), check_page(report));
    }
    files.insert(INDEX_HTML.to_string(), index_page(suite));
    // an empty selection yields the index alone
    if !suite.reports.is_empty() {
        files.insert(SUITE_JSON.to_string(), suite.to_json_string());
    }
    ReportBundle {
        outdir: outdir.to_path_buf(),
        files,
    }
}

/// One HTML page per check (`<check name>.html`), `index.html` and
/// `suite.json`.
pub fn render_suite(suite: &SuiteReport, outdir: &Path) -> Result<ReportBundle, ReportError> {
    let bundle = build_suite_bundle(suite, outdir);
    write_files(outdir, &bundle.files)?;
    Ok(bundle)
}

/// One definition of a measure, as found in a particular file.
#[derive(Debug, Clone)]
pub struct DictionaryEntry {
    pub path: String,
    pub entry: MeasureEntry,
    pub references: BTreeMap<String, ReferenceEntry>,
}

#[derive(Debug, Clone)]
pub struct DictionaryPage {
    pub measure_id: String,
    pub slug: String,
    /// More than one when the same id is defined in several files.
    pub definitions: Vec<DictionaryEntry>,
}

impl DictionaryPage {
    pub fn category(&self) -> &str {
        self.definitions
            .iter()
            .find_map(|d| d.entry.category.as_deref().filter(|c| !c.trim().is_empty()))
            .unwrap_or(UNCATEGORIZED)
    }

    pub fn title(&self) -> &str {
        self.definitions
            .iter()
            .find_map(|d| d.entry.short_name.as_deref().filter(|s| !s.trim().is_empty()))
            .unwrap_or(&self.measure_id)
    }
}

/// Collects the concrete measures of a snapshot, one page per measure id.
/// Files that fail to parse contribute nothing; the checks report them.
pub fn dictionary_pages(snapshot: &RepoSnapshot) -> Vec<DictionaryPage> {
    let mut by_id: BTreeMap<String, Vec<DictionaryEntry>> = BTreeMap::new();
    for parsed in &snapshot.measure_info_files {
        let Ok(file) = &parsed.result else { continue };
        let expanded = expand_file(file);
        for entry in expanded.file.entries.values() {
            if entry.present_keys().is_empty() {
                continue;
            }
            by_id.entry(entry.measure_id.clone()).or_default().push(DictionaryEntry {
                path: parsed.path.clone(),
                entry: entry.clone(),
                references: expanded.file.references.clone(),
            });
        }
    }
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    by_id
        .into_iter()
        .map(|(measure_id, definitions)| {
            let base = slug(&measure_id);
            let n = used.entry(base.clone()).or_default();
            *n += 1;
            let slug = if *n == 1 { base } else { format!("{base}-{n}") };
            DictionaryPage {
                measure_id,
                slug,
                definitions,
            }
        })
        .collect()
}

fn field_row(b: &mut String, key: &str, value: Option<&str>) {
    if let Some(v) = value.filter(|v| !v.trim().is_empty()) {
        let _ = writeln!(b, "<tr><th>{key}</th><td id=\"field-{key}\">{}</td></tr>", escape(v));
    }
}

fn reference_text(r: &ReferenceEntry) -> String {
    let get = |k: &str| match r.fields.get(k) {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Array(a)) => Some(
            a.iter()
                .map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()))
                .collect::<Vec<_>>()
                .join(", "),
        ),
        Some(Value::Null) | None => None,
        Some(other) => Some(other.to_string()),
    };
    let mut parts = Vec::new();
    if let Some(a) = get("author") {
        parts.push(a);
    }
    if let Some(y) = get("year") {
        parts.push(format!("({y})"));
    }
    if let Some(t) = get("title") {
        parts.push(t);
    }
    if let Some(j) = get("journal") {
        parts.push(j);
    }
    let mut text = escape(&parts.join(" "));
    if text.is_empty() {
        text = escape(&r.ref_id);
    }
    if let Some(url) = get("url") {
        let _ = write!(text, " <a href=\"{0}\">{0}</a>", escape(&url));
    }
    text
}

fn definition_html(b: &mut String, def: &DictionaryEntry, category_href: &str, category: &str) {
    let e = &def.entry;
    let _ = writeln!(b, "<p>Defined in <code>{}</code></p>", escape(&def.path));
    b.push_str("<table class=\"fields\">\n");
    field_row(b, "short_name", e.short_name.as_deref());
    field_row(b, "long_name", e.long_name.as_deref());
    field_row(b, "short_description", e.short_description.as_deref());
    field_row(b, "long_description", e.long_description.as_deref());
    field_row(b, "unit", e.unit.as_deref());
    field_row(b, "measure_type", e.measure_type.as_deref());
    field_row(b, "data_type", e.data_type.as_deref());
    field_row(b, "aggregation_method", e.aggregation_method.as_deref());
    field_row(b, "equity_category", e.equity_category.as_deref());
    if e.category.as_deref().is_some_and(|c| !c.trim().is_empty()) {
        let _ = writeln!(
            b,
            "<tr><th>category</th><td id=\"field-category\"><a href=\"{category_href}\">{}</a></td></tr>",
            escape(category)
        );
    }
    if let Some(layer) = &e.layer {
        if !layer.source.trim().is_empty() {
            let _ = writeln!(
                b,
                "<tr><th>layer</th><td id=\"field-layer\"><a href=\"{0}\">{0}</a></td></tr>",
                escape(&layer.source)
            );
        }
    }
    if let Some(statement) = e.statement.as_deref().filter(|s| !s.trim().is_empty()) {
        let _ = writeln!(
            b,
            "<tr><th>statement</th><td id=\"field-statement\"><code>{}</code></td></tr>",
            escape(statement)
        );
    }
    b.push_str("</table>\n");
    if let Some(sources) = e.sources.as_ref().filter(|s| !s.is_empty()) {
        b.push_str("<h2>Sources</h2>\n<ul class=\"sources\">\n");
        for s in sources {
            let mut line = escape(&s.name);
            if let Some(url) = s.url.as_deref().filter(|u| !u.is_empty()) {
                line = format!("<a href=\"{}\">{line}</a>", escape(url));
            }
            if let Some(loc) = s.location.as_deref().filter(|l| !l.is_empty()) {
                let _ = write!(line, ", {}", escape(loc));
            }
            if let Some(date) = s.date_accessed.as_deref().filter(|d| !d.is_empty()) {
                let _ = write!(line, " (accessed {})", escape(date));
            }
            let _ = writeln!(b, "<li>{line}</li>");
        }
        b.push_str("</ul>\n");
    }
    if let Some(citations) = e.citations.as_ref().filter(|c| !c.is_empty()) {
        b.push_str("<h2>Citations</h2>\n<ul class=\"citations\">\n");
        for key in citations {
            match def.references.get(key) {
                Some(r) => {
                    let _ = writeln!(b, "<li id=\"cite-{}\">{}</li>", slug(key), reference_text(r));
                }
                None => {
                    let _ = writeln!(
                        b,
                        "<li id=\"cite-{}\"><span class=\"unresolved\">{UNRESOLVED_MARKER}: {}</span></li>",
                        slug(key),
                        escape(key)
                    );
                }
            }
        }
        b.push_str("</ul>\n");
    }
}

fn measure_page(p: &DictionaryPage) -> String {
    let category = p.category();
    let category_href = format!("../categories/{}.html", slug(category));
    let mut b = String::new();
    let _ = writeln!(
        b,
        "<p><a href=\"../{INDEX_HTML}\">All measures</a> | <a href=\"{category_href}\">{}</a></p>",
        escape(category)
    );
    let _ = writeln!(b, "<h1 id=\"measure-title\">{}</h1>", escape(p.title()));
    let _ = writeln!(b, "<p>Measure id: <code id=\"measure-id\">{}</code></p>", escape(&p.measure_id));
    if p.definitions.len() > 1 {
        let _ = writeln!(
            b,
            "<p id=\"duplicate-definitions\">Defined in {} files.</p>",
            p.definitions.len()
        );
    }
    for def in &p.definitions {
        b.push_str("<section>\n");
        definition_html(&mut b, def, &category_href, category);
        b.push_str("</section>\n");
    }
    page(p.title(), &b)
}

fn listing(b: &mut String, pages: &[&DictionaryPage], prefix: &str) {
    b.push_str("<ul id=\"measures\">\n");
    for p in pages {
        let _ = writeln!(
            b,
            "<li id=\"m-{0}\"><a href=\"{prefix}measures/{0}.html\">{1}</a> <code>{2}</code></li>",
            p.slug,
            escape(p.title()),
            escape(&p.measure_id)
        );
    }
    b.push_str("</ul>\n");
}

/// Renders the dictionary without touching the filesystem.
pub fn build_dictionary(snapshot: &RepoSnapshot) -> BTreeMap<String, String> {
    let pages = dictionary_pages(snapshot);
    let mut files = BTreeMap::new();
    let mut categories: BTreeMap<&str, Vec<&DictionaryPage>> = BTreeMap::new();
    for p in &pages {
        files.insert(format!("measures/{}.html", p.slug), measure_page(p));
        categories.entry(p.category()).or_default().push(p);
    }
    let mut alphabetical: Vec<&DictionaryPage> = pages.iter().collect();
    alphabetical.sort_by(|a, b| {
        (a.title().to_lowercase(), &a.measure_id).cmp(&(b.title().to_lowercase(), &b.measure_id))
    });
    for (category, members) in &mut categories {
        members.sort_by_key(|p| (p.title().to_lowercase(), p.measure_id.clone()));
        let mut b = String::new();
        let _ = writeln!(b, "<p><a href=\"../{INDEX_HTML}\">All measures</a></p>");
        let _ = writeln!(b, "<h1>{}</h1>", escape(category));
        listing(&mut b, members, "../");
        files.insert(format!("categories/{}.html", slug(category)), page(category, &b));
    }
    let mut b = String::new();
    b.push_str("<h1>Data dictionary</h1>\n<h2>Categories</h2>\n<ul id=\"categories\">\n");
    for (category, members) in &categories {
        let _ = writeln!(
            b,
            "<li><a href=\"categories/{}.html\">{}</a> ({})</li>",
            slug(category),
            escape(category),
            members.len()
        );
    }
    let _ = writeln!(b, "</ul>\n<h2>All measures ({})</h2>", pages.len());
    listing(&mut b, &alphabetical, "");
    files.insert(INDEX_HTML.to_string(), page("Data dictionary", &b));
    files
}

/// Static data dictionary: `index.html`, `measures/<slug>.html`,
/// `categories/<slug>.html`.
pub fn render_dictionary(snapshot: &RepoSnapshot, outdir: &Path) -> Result<ReportBundle, ReportError> {
    let files = build_dictionary(snapshot);
    write_files(outdir, &files)?;
    Ok(ReportBundle {
        outdir: outdir.to_path_buf(),
        files,
    })
}

pub fn fair_report_json(report: &FairReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("fair report serializes");
    s.push('\n');
    s
}

pub fn fair_report_html(report: &FairReport) -> String {
    let mut b = String::new();
    b.push_str("<h1>FAIR maturity self-assessment</h1>\n");
    if let Some(a) = &report.assessor {
        let _ = writeln!(b, "<p>Assessor: {}</p>", escape(a));
    }
    if let Some(d) = &report.date {
        let _ = writeln!(b, "<p>Date: {}</p>", escape(d));
    }
    let _ = writeln!(
        b,
        "<p>Assessed <span id=\"assessed\">{}</span> of {} indicators.</p>",
        report.assessed, report.registry_size
    );
    b.push_str("<table id=\"areas\">\n<tr><th>area</th><th>0</th><th>1</th><th>2</th><th>3</th><th>4</th><th>mean (levels 1-4)</th></tr>\n");
    for s in &report.areas {
        let area = s.area;
        let _ = write!(b, "<tr id=\"area-{area:?}\"><th>{}</th>", area.label());
        for n in s.histogram {
            let _ = write!(b, "<td>{n}</td>");
        }
        let mean = s.mean_level.map(|m| format!("{m:.2}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(b, "<td>{mean}</td></tr>");
    }
    b.push_str("</table>\n<h2>Gaps (level 1)</h2>\n");
    if report.essential_gap {
        b.push_str("<p id=\"essential-gap\" class=\"fail\">At least one Essential indicator is not being considered.</p>\n");
    }
    b.push_str("<table id=\"gaps\">\n<tr><th>indicator</th><th>principle</th><th>priority</th><th>text</th></tr>\n");
    for g in &report.gaps {
        let _ = writeln!(
            b,
            "<tr id=\"gap-{0}\"><td>{0}</td><td>{1}</td><td>{2}</td><td>{3}</td></tr>",
            escape(&g.indicator_id),
            escape(&g.principle),
            g.priority,
            escape(&g.text)
        );
    }
    b.push_str("</table>\n");
    page("FAIR maturity", &b)
}

/// Writes `fair_report.json` and `fair_report.html`.
pub fn render_fair(report: &FairReport, outdir: &Path) -> Result<ReportBundle, ReportError> {
    let files: BTreeMap<String, String> = [
        ("fair_report.json".to_string(), fair_report_json(report)),
        ("fair_report.html".to_string(), fair_report_html(report)),
    ]
    .into_iter()
    .collect();
    write_files(outdir, &files)?;
    Ok(ReportBundle {
        outdir: outdir.to_path_buf(),
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{CheckId, CheckItem, Subject, Tier};

    fn suite(reports: Vec<CheckReport>) -> SuiteReport {
        SuiteReport {
            repo_root: "repo".into(),
            overall_pass: reports.iter().all(CheckReport::passed),
            enforcement: CheckId::ALL.iter().map(|c| (*c, Tier::Enforced)).collect(),
            reports,
            generated_at: None,
        }
    }

    fn counted(valid: usize, invalid: usize) -> CheckReport {
        let mut items = Vec::new();
        for i in 0..valid {
            items.push(CheckItem::valid(Subject::measure("m.json", format!("v{i:03}"))));
        }
        for i in 0..invalid {
            items.push(CheckItem::new(Subject::measure("m.json", format!("x{i:03}")), Verdict::Invalid, "bad"));
        }
        CheckReport::new(CheckId::T2, items)
    }

    #[test]
    fn single_check_bundle_names() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = render_suite(&suite(vec![counted(1, 0)]), dir.path()).unwrap();
        let names: Vec<&str> = bundle.files.keys().map(String::as_str).collect();
        assert_eq!(names, vec!["index.html", "suite.json", "test_percent_data.html"]);
        let mut on_disk: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        on_disk.sort();
        assert_eq!(on_disk, vec!["index.html", "suite.json", "test_percent_data.html"]);
    }

    #[test]
    fn index_has_summary_lines() {
        let bundle = build_suite_bundle(&suite(vec![counted(141, 93)]), Path::new("out"));
        let index = bundle.index().unwrap();
        assert!(index.contains("<li id=\"T2-summary-valid\">141/234 (60.3%) valid</li>"));
        let page = &bundle.files["test_percent_data.html"];
        assert!(page.contains("<tr id=\"T2-count-invalid\"><th>invalid</th><td>93</td>"));
    }

    #[test]
    fn empty_suite_is_index_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = suite(vec![]);
        s.overall_pass = true;
        let bundle = render_suite(&s, dir.path()).unwrap();
        assert_eq!(bundle.files.keys().collect::<Vec<_>>(), vec!["index.html"]);
        assert!(bundle.index().unwrap().contains("No checks were run."));
    }

    #[test]
    fn unwritable_outdir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        fs::write(&file, "x").unwrap();
        assert!(render_suite(&suite(vec![]), &file.join("sub")).is_err());
    }
}
