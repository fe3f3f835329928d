mod common;

use std::fs;

use common::*;
use serde_json::{json, Value};

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn clean_fixture_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = run_cli(&["check", "--repo", s(&fixture("clean")), "--out", s(out.path())]);
    assert_eq!(o.code, 0, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.contains("overall: PASS"));
    assert!(out.path().join("test_percent_data.html").is_file());
    assert!(out.path().join("suite.json").is_file());
}

#[test]
fn long_file_name_fails_t13() {
    let out = tempfile::tempdir().unwrap();
    let o = run_cli(&["check", "--repo", s(&fixture("dirty")), "--tests", "T13", "--out", s(out.path())]);
    assert_eq!(o.code, 1, "{}{}", o.stdout, o.stderr);
    let files: Vec<String> = read_tree(out.path()).into_keys().collect();
    assert_eq!(files, vec!["index.html", "suite.json", "test_file_name_len.html"]);
}

#[test]
fn unknown_check_is_a_usage_error() {
    let out = tempfile::tempdir().unwrap();
    let o = run_cli(&["check", "--repo", s(&fixture("clean")), "--tests", "T99", "--out", s(out.path())]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("T99"));
    assert!(read_tree(out.path()).is_empty());
}

#[test]
fn bad_flags_and_paths_exit_2() {
    assert_eq!(run_cli(&["check", "--no-such-flag"]).code, 2);
    assert_eq!(run_cli(&["check", "--repo", "/definitely/not/here"]).code, 2);
    assert_eq!(run_cli(&["check", "--strict", "--dev"]).code, 2);
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), ".commons-lint.toml", "[checks]\nno_such_setting = 1\n");
    let o = run_cli(&["check", "--repo", s(dir.path()), "--out", s(&dir.path().join("r"))]);
    assert_eq!(o.code, 2, "{}", o.stderr);
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["check", "expand", "dict", "fair", "scan"] {
        let o = run_cli(&[sub, "--help"]);
        assert_eq!(o.code, 0, "{sub}");
        assert!(o.stdout.contains("Usage"), "{sub}");
    }
}

#[test]
fn dev_mode_relaxes_configured_tiers() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    write(&repo, &format!("docs/{}.md", "x".repeat(120)), "x");
    write(&repo, ".commons-lint.toml", "[enforcement.dev]\nT13 = \"warn\"\n");
    let out = dir.path().join("r");
    assert_eq!(run_cli(&["check", "--repo", s(&repo), "--out", s(&out)]).code, 1);
    let o = run_cli(&["check", "--repo", s(&repo), "--out", s(&out), "--dev"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    assert!(o.stdout.contains("T13 test_file_name_len [warn] FAIL"));
}

#[test]
fn stdout_summary_matches_sidecar() {
    let out = tempfile::tempdir().unwrap();
    let o = run_cli(&["check", "--repo", s(&fixture("dirty")), "--out", s(out.path())]);
    let suite: Value = serde_json::from_str(&fs::read_to_string(out.path().join("suite.json")).unwrap()).unwrap();
    for report in suite["reports"].as_array().unwrap() {
        let total = report["total"].as_u64().unwrap();
        let valid = report["counts"]["valid"].as_u64().unwrap();
        let pct = commons_lint::format_percentage(valid, total).unwrap();
        assert!(o.stdout.contains(&format!("{valid}/{total} ({pct}) valid")));
    }
}

#[test]
fn timestamp_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("a");
    let stamped = dir.path().join("b");
    run_cli(&["check", "--repo", s(&fixture("clean")), "--out", s(&plain)]);
    run_cli(&["check", "--repo", s(&fixture("clean")), "--out", s(&stamped), "--timestamp", "2024-01-01T00:00:00Z"]);
    let a = fs::read_to_string(plain.join("suite.json")).unwrap();
    let b = fs::read_to_string(stamped.join("suite.json")).unwrap();
    assert!(!a.contains("generated_at"));
    assert!(b.contains("\"generated_at\": \"2024-01-01T00:00:00Z\""));
}

#[test]
fn expand_19_by_5() {
    let dir = tempfile::tempdir().unwrap();
    let categories: Vec<String> = (0..19).map(|i| format!("naics{i:02}")).collect();
    let mut entry = full_entry("{variant} ({category})", "count");
    entry["categories"] = json!(categories);
    entry["variants"] = json!(["jobs", "wages", "firms", "growth", "share"]);
    let input = json!({ "{category}_{variant}": entry });
    let mi = dir.path().join("mi.json");
    fs::write(&mi, serde_json::to_string(&input).unwrap()).unwrap();
    let out = dir.path().join("mi.expanded.json");
    let o = run_cli(&["expand", "--in", s(&mi), "--out", s(&out)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let expanded: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let obj = expanded.as_object().unwrap();
    assert_eq!(obj.len(), 95);
    assert!(obj.contains_key("naics07_wages"));
    assert!(!obj.values().any(|v| v.get("categories").is_some()));
    assert!(!fs::read_to_string(&out).unwrap().contains("{category}"));
}

#[test]
fn expand_reports_collisions() {
    let dir = tempfile::tempdir().unwrap();
    let mi = dir.path().join("mi.json");
    let input = json!({
        "a_{variant}": { "variants": ["x", "y"] },
        "a_x": { "short_name": "clash" }
    });
    fs::write(&mi, input.to_string()).unwrap();
    let out = dir.path().join("out.json");
    let o = run_cli(&["expand", "--in", s(&mi), "--out", s(&out)]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("a_x"));
    assert!(!out.exists());
}

#[test]
fn expand_rejects_invalid_json() {
    let dir = tempfile::tempdir().unwrap();
    let mi = dir.path().join("mi.json");
    fs::write(&mi, "{\"a\": {},}").unwrap();
    let o = run_cli(&["expand", "--in", s(&mi), "--out", s(&dir.path().join("o.json"))]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 1"), "{}", o.stderr);
}

#[test]
fn fair_flags_essential_gap() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    fs::write(&a, r#"{"levels": {"RDA-A2-01M": 1, "RDA-F1-01M": 4}}"#).unwrap();
    let out = dir.path().join("fair");
    let o = run_cli(&["fair", "--assessment", s(&a), "--out", s(&out)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("gap: RDA-A2-01M (A2, Essential) level 1"));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("fair_report.json")).unwrap()).unwrap();
    assert_eq!(report["essential_gap"], json!(true));
    assert_eq!(report["gaps"][0]["indicator_id"], json!("RDA-A2-01M"));
    assert!(fs::read_to_string(out.join("fair_report.html")).unwrap().contains("id=\"gap-RDA-A2-01M\""));
}

#[test]
fn fair_csv_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    fs::write(&csv, "indicator_id,level\nRDA-F2-01M,3\n").unwrap();
    let out = dir.path().join("fair");
    assert_eq!(run_cli(&["fair", "--assessment", s(&csv), "--out", s(&out)]).code, 0);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"levels": {"RDA-Z9-99M": 2}}"#).unwrap();
    let o = run_cli(&["fair", "--assessment", s(&bad), "--out", s(&out)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("RDA-Z9-99M"));
    fs::write(&bad, r#"{"levels": {"RDA-A2-01M": 7}}"#).unwrap();
    assert_eq!(run_cli(&["fair", "--assessment", s(&bad), "--out", s(&out)]).code, 2);
}

#[test]
fn dict_on_empty_repo() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("empty");
    fs::create_dir(&repo).unwrap();
    let out = dir.path().join("site");
    let o = run_cli(&["dict", "--repo", s(&repo), "--out", s(&out)]);
    assert_eq!(o.code, 0);
    let files: Vec<String> = read_tree(&out).into_keys().collect();
    assert_eq!(files, vec!["index.html"]);
    assert!(fs::read_to_string(out.join("index.html")).unwrap().contains("All measures (0)"));
}

#[test]
fn dict_pages_and_links() {
    let out = tempfile::tempdir().unwrap();
    let o = run_cli(&["dict", "--repo", s(&fixture("clean")), "--out", s(out.path())]);
    assert_eq!(o.code, 0);
    let tree = read_tree(out.path());
    for page in [
        "measures/perc_no_computer.html",
        "measures/perc_cable_subscription.html",
        "categories/broadband.html",
    ] {
        assert!(tree.contains_key(page), "{page}");
    }
    let page = String::from_utf8(tree["measures/perc_no_computer.html"].clone()).unwrap();
    assert!(page.contains("American Community Survey"));
    assert!(page.contains("<td id=\"field-short_name\">No computer</td>"));
    // every href is relative and resolves inside the site
    let href = regex::Regex::new(r#"href="([^"]+)""#).unwrap();
    for (name, bytes) in &tree {
        let html = String::from_utf8(bytes.clone()).unwrap();
        let base = std::path::Path::new(name).parent().unwrap();
        for cap in href.captures_iter(&html) {
            let target = &cap[1];
            if target.starts_with("http") {
                continue;
            }
            assert!(!target.starts_with('/'), "{name}: {target}");
            assert!(out.path().join(base).join(target).is_file(), "{name}: {target}");
        }
    }
}

#[test]
fn dict_marks_unresolved_citations() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    let mut entry = full_entry("Cited", "percent");
    entry["citations"] = json!(["known", "ghost"]);
    let info = json!({ "cited": entry, "_references": { "known": { "title": "A paper", "year": 2020 } } });
    write(&repo, "data/distribution/measure_info.json", &info.to_string());
    let out = dir.path().join("site");
    assert_eq!(run_cli(&["dict", "--repo", s(&repo), "--out", s(&out)]).code, 0);
    let page = fs::read_to_string(out.join("measures/cited.html")).unwrap();
    assert!(page.contains("unresolved reference: ghost"));
    assert!(page.contains("(2020) A paper"));
}

#[test]
fn scan_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    let mut entry = full_entry(&"n".repeat(41), "percent");
    entry["unit"] = json!("acre");
    entry["citations"] = json!(["nowhere"]);
    entry["sources"] = json!([{ "name": "", "url": "not a url" }]);
    write(&repo, "data/distribution/measure_info.json", &json!({ "m": entry }).to_string());
    let o = run_cli(&["scan", "--repo", s(&repo)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    let info = &v["measure_info_files"][0];
    assert_eq!(info["unresolved_citations"][0]["key"], json!("nowhere"));
    let diag = &info["diagnostics"][0];
    assert_eq!(diag["char_limits"][0]["field"], json!("short_name"));
    assert_eq!(diag["vocabulary"][0]["value"], json!("acre"));
    assert_eq!(diag["references"].as_array().unwrap().len(), 2);
}
