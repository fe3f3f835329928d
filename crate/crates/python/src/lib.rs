//! Python bindings for the repository linter.
//!
//! Structured results cross the boundary as JSON and are decoded with the
//! standard `json` module, so callers get plain dicts and lists.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use lint::checks::CheckId;
use lint::config::LintConfig;
use lint::fair::{parse_assessment, score_assessment, Registry};
use lint::metadata::{check_char_limits, parse_measure_info, render_statement, MeasureEntry, StatementValue, ValueFormat};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn config(repo: &Path, path: Option<PathBuf>) -> PyResult<LintConfig> {
    LintConfig::resolve(path.as_deref(), repo).map_err(value_err)
}

fn selected(tests: Option<&str>) -> PyResult<Option<Vec<CheckId>>> {
    tests.map(CheckId::parse_list).transpose().map_err(value_err)
}

/// `100*count/total` to one decimal with a `%` sign.
#[pyfunction]
fn format_percentage(count: u64, total: u64) -> PyResult<String> {
    lint::format_percentage(count, total).map_err(value_err)
}

/// Names of the checks in catalog order, as `(id, name)` pairs.
#[pyfunction]
fn checks() -> Vec<(String, &'static str)> {
    CheckId::ALL.iter().map(|c| (c.to_string(), c.name())).collect()
}

/// Parsed `measure_info` file with its dynamic entries.
#[pyclass(module = "commons_lint")]
struct MeasureInfo {
    inner: lint::MeasureInfoFile,
}

#[pymethods]
impl MeasureInfo {
    #[staticmethod]
    #[pyo3(signature = (text, path = "measure_info.json"))]
    fn parse(text: &str, path: &str) -> PyResult<Self> {
        let inner = parse_measure_info(text.as_bytes(), path).map_err(value_err)?;
        Ok(MeasureInfo { inner })
    }

    #[getter]
    fn path(&self) -> &str {
        &self.inner.path
    }

    fn measure_ids(&self) -> Vec<String> {
        self.inner.entries.keys().cloned().collect()
    }

    fn dynamic_ids(&self) -> Vec<String> {
        self.inner.entries.values().filter(|e| e.is_dynamic()).map(|e| e.measure_id.clone()).collect()
    }

    fn reference_ids(&self) -> Vec<String> {
        self.inner.references.keys().cloned().collect()
    }

    /// Concrete version of the file; raises `ValueError` on expansion errors.
    fn expand(&self) -> PyResult<MeasureInfo> {
        let expanded = lint::expand_file(&self.inner);
        if let Some(e) = expanded.errors.first() {
            return Err(value_err(e));
        }
        Ok(MeasureInfo { inner: expanded.file })
    }

    /// Canonical JSON text.
    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        loads(py, &self.inner.to_json_string())
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }

    fn __repr__(&self) -> String {
        format!("MeasureInfo(path={:?}, entries={})", self.inner.path, self.inner.entries.len())
    }
}

/// Over-limit text fields of one entry given as a JSON object.
#[pyfunction]
fn char_limit_violations(entry_json: &str) -> PyResult<Vec<(String, usize, usize)>> {
    let value: serde_json::Value = serde_json::from_str(entry_json).map_err(value_err)?;
    let entry = MeasureEntry::from_value("entry", &value).map_err(value_err)?;
    let schema = LintConfig::with_defaults().schema;
    Ok(check_char_limits(&entry, &schema)
        .into_iter()
        .map(|v| (v.field, v.length, v.limit))
        .collect())
}

/// Fills a statement template from a dict of placeholder values.
#[pyfunction]
#[pyo3(signature = (template, context, measure_type = None))]
fn render(template: &str, context: &Bound<'_, PyDict>, measure_type: Option<&str>) -> PyResult<String> {
    let mut values = BTreeMap::new();
    for (k, v) in context.iter() {
        let key: String = k.extract()?;
        let value = match v.extract::<f64>() {
            Ok(n) if !v.is_instance_of::<pyo3::types::PyString>() => StatementValue::Number(n),
            _ => StatementValue::Text(v.str()?.to_string()),
        };
        values.insert(key, value);
    }
    let allowed: BTreeSet<String> = LintConfig::with_defaults().schema.statement_placeholders;
    render_statement(template, &values, ValueFormat::for_measure_type(measure_type), &allowed).map_err(value_err)
}

/// Runs the check suite and returns the suite report as a dict.
#[pyfunction]
#[pyo3(signature = (repo, tests = None, config_path = None))]
fn check_repo<'py>(
    py: Python<'py>,
    repo: PathBuf,
    tests: Option<&str>,
    config_path: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(&repo, config_path)?;
    let ids = selected(tests)?;
    let suite = lint::cli::check_repo(&repo, &cfg, ids.as_deref(), None).map_err(|e| PyOSError::new_err(format!("{e:#}")))?;
    loads(py, &suite.to_json_string())
}

/// Runs the suite, writes HTML/JSON reports to `out` and returns the exit code.
#[pyfunction]
#[pyo3(signature = (repo, out, tests = None, config_path = None))]
fn write_reports(repo: PathBuf, out: PathBuf, tests: Option<&str>, config_path: Option<PathBuf>) -> PyResult<i32> {
    let cfg = config(&repo, config_path)?;
    let ids = selected(tests)?;
    let suite = lint::cli::check_repo(&repo, &cfg, ids.as_deref(), None).map_err(|e| PyOSError::new_err(format!("{e:#}")))?;
    lint::report::render_suite(&suite, &out).map_err(|e| PyOSError::new_err(e.to_string()))?;
    Ok(suite.exit_code())
}

/// Writes the data dictionary site; returns the number of measure pages.
#[pyfunction]
#[pyo3(signature = (repo, out, config_path = None))]
fn write_dictionary(repo: PathBuf, out: PathBuf, config_path: Option<PathBuf>) -> PyResult<usize> {
    let cfg = config(&repo, config_path)?;
    let snapshot = lint::scan_repo(&repo, &cfg).map_err(|e| PyOSError::new_err(e.to_string()))?;
    let bundle = lint::report::render_dictionary(&snapshot, &out).map_err(|e| PyOSError::new_err(e.to_string()))?;
    Ok(bundle.files.keys().filter(|k| k.starts_with("measures/")).count())
}

/// Scores a FAIR self-assessment (JSON text, or CSV when `csv` is true).
#[pyfunction]
#[pyo3(signature = (assessment, csv = false))]
fn score_fair<'py>(py: Python<'py>, assessment: &str, csv: bool) -> PyResult<Bound<'py, PyAny>> {
    let registry = Registry::shipped();
    let mapping = LintConfig::with_defaults().fair;
    let parsed = parse_assessment(assessment, csv, &registry, &mapping).map_err(value_err)?;
    let report = score_assessment(&parsed, &registry).map_err(value_err)?;
    loads(py, &lint::report::fair_report_json(&report))
}

/// The shipped FAIR indicator registry as `(id, principle, priority, text)`.
#[pyfunction]
fn fair_indicators() -> Vec<(String, String, String, String)> {
    Registry::shipped()
        .indicators()
        .iter()
        .map(|i| (i.indicator_id.clone(), i.principle.clone(), i.priority.to_string(), i.text.clone()))
        .collect()
}

#[pymodule]
fn commons_lint(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MeasureInfo>()?;
    m.add_function(wrap_pyfunction!(format_percentage, m)?)?;
    m.add_function(wrap_pyfunction!(checks, m)?)?;
    m.add_function(wrap_pyfunction!(char_limit_violations, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(check_repo, m)?)?;
    m.add_function(wrap_pyfunction!(write_reports, m)?)?;
    m.add_function(wrap_pyfunction!(write_dictionary, m)?)?;
    m.add_function(wrap_pyfunction!(score_fair, m)?)?;
    m.add_function(wrap_pyfunction!(fair_indicators, m)?)?;
    Ok(())
}
