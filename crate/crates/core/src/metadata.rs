//! Core metadata schema and the `measure_info.json` file format.
//!
//! A `measure_info` file is a JSON object keyed by measure id. The reserved
//! top-level key `_references` holds the bibliography that entries cite.
//! No element is mandatory, so every field of [`MeasureEntry`] is optional and
//! a present-but-blank value (`""`, `[]`, `null`) is kept distinct from an
//! absent one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::de::{Deserializer, MapAccess, Visitor};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{Map, Value};
use thiserror::Error;

/// Reserved file-level key holding reference entries.
pub const REFERENCES_KEY: &str = "_references";

/// The sixteen core metadata elements an entry may carry.
pub const CORE_ELEMENTS: [&str; 16] = [
    "aggregation_method",
    "category",
    "citations",
    "data_type",
    "equity_category",
    "layer",
    "long_description",
    "long_name",
    "measure_type",
    "short_description",
    "short_name",
    "sources",
    "statement",
    "unit",
    "categories",
    "variants",
];

/// Core elements holding plain text.
pub const TEXT_ELEMENTS: [&str; 11] = [
    "aggregation_method",
    "category",
    "data_type",
    "equity_category",
    "long_description",
    "long_name",
    "measure_type",
    "short_description",
    "short_name",
    "statement",
    "unit",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetadataError {
    #[error("{path}: malformed JSON at line {line}, column {column} (byte {offset}): {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },
    #[error("{path}: duplicate key `{key}`")]
    DuplicateKey { path: String, key: String },
    #[error("{path}: {message}")]
    Structure { path: String, message: String },
}

impl MetadataError {
    /// True when the bytes were not readable JSON at all.
    pub fn is_syntax(&self) -> bool {
        matches!(self, MetadataError::Syntax { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceRef {
    pub name: String,
    pub url: Option<String>,
    pub location: Option<String>,
    pub date_accessed: Option<String>,
    /// Any other keys found on the source object.
    pub extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerRef {
    pub source: String,
    pub extra: BTreeMap<String, Value>,
}

/// One token on a dynamic-metadata axis (`categories` or `variants`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AxisSpec {
    pub token: String,
    /// Element name → replacement text, applied after placeholder substitution.
    pub overrides: BTreeMap<String, String>,
}

impl AxisSpec {
    pub fn new(token: impl Into<String>) -> Self {
        AxisSpec {
            token: token.into(),
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReferenceEntry {
    pub ref_id: String,
    pub fields: BTreeMap<String, Value>,
}

/// One measure's core metadata record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasureEntry {
    pub measure_id: String,
    pub aggregation_method: Option<String>,
    pub category: Option<String>,
    pub citations: Option<Vec<String>>,
    pub data_type: Option<String>,
    pub equity_category: Option<String>,
    pub layer: Option<LayerRef>,
    pub long_description: Option<String>,
    pub long_name: Option<String>,
    pub measure_type: Option<String>,
    pub short_description: Option<String>,
    pub short_name: Option<String>,
    pub sources: Option<Vec<SourceRef>>,
    pub statement: Option<String>,
    pub unit: Option<String>,
    pub categories: Option<Vec<AxisSpec>>,
    pub variants: Option<Vec<AxisSpec>>,
    /// Keys outside the core element set, preserved verbatim.
    pub extra: BTreeMap<String, Value>,
}

fn blank_str(s: &str) -> bool {
    s.trim().is_empty()
}

fn blank_value(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::String(s) => blank_str(s),
        Value::Array(a) => a.is_empty(),
        Value::Object(o) => o.is_empty(),
        _ => false,
    }
}

impl MeasureEntry {
    pub fn new(measure_id: impl Into<String>) -> Self {
        MeasureEntry {
            measure_id: measure_id.into(),
            ..Default::default()
        }
    }

    /// Dynamic entries carry a non-empty `categories` or `variants` axis.
    pub fn is_dynamic(&self) -> bool {
        self.categories.as_ref().is_some_and(|c| !c.is_empty())
            || self.variants.as_ref().is_some_and(|v| !v.is_empty())
    }

    /// Value of a plain-text element, or of an extra key holding a string.
    pub fn text(&self, key: &str) -> Option<&str> {
        let field = match key {
            "aggregation_method" => &self.aggregation_method,
            "category" => &self.category,
            "data_type" => &self.data_type,
            "equity_category" => &self.equity_category,
            "long_description" => &self.long_description,
            "long_name" => &self.long_name,
            "measure_type" => &self.measure_type,
            "short_description" => &self.short_description,
            "short_name" => &self.short_name,
            "statement" => &self.statement,
            "unit" => &self.unit,
            other => return self.extra.get(other).and_then(Value::as_str),
        };
        field.as_deref()
    }

    /// Every key present on the entry, paired with whether its value is blank.
    pub fn present_keys(&self) -> Vec<(String, bool)> {
        let mut keys = Vec::new();
        let mut push = |k: &str, blank: bool| keys.push((k.to_string(), blank));
        for key in TEXT_ELEMENTS {
            if let Some(v) = self.text(key) {
                push(key, blank_str(v));
            }
        }
        if let Some(c) = &self.citations {
            push("citations", c.iter().all(|s| blank_str(s)));
        }
        if let Some(l) = &self.layer {
            push("layer", blank_str(&l.source) && l.extra.is_empty());
        }
        if let Some(s) = &self.sources {
            push("sources", s.is_empty());
        }
        if let Some(c) = &self.categories {
            push("categories", c.is_empty());
        }
        if let Some(v) = &self.variants {
            push("variants", v.is_empty());
        }
        for (k, v) in &self.extra {
            push(k, blank_value(v));
        }
        keys.sort();
        keys
    }

    /// JSON object form of the entry (without its id). Keys come out sorted.
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        let mut put_str = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), Value::String(v.clone()));
            }
        };
        put_str("aggregation_method", &self.aggregation_method);
        put_str("category", &self.category);
        put_str("data_type", &self.data_type);
        put_str("equity_category", &self.equity_category);
        put_str("long_description", &self.long_description);
        put_str("long_name", &self.long_name);
        put_str("measure_type", &self.measure_type);
        put_str("short_description", &self.short_description);
        put_str("short_name", &self.short_name);
        put_str("statement", &self.statement);
        put_str("unit", &self.unit);
        if let Some(c) = &self.citations {
            map.insert(
                "citations".into(),
                Value::Array(c.iter().cloned().map(Value::String).collect()),
            );
        }
        if let Some(l) = &self.layer {
            let mut o: Map<String, Value> = l.extra.clone().into_iter().collect();
            o.insert("source".into(), Value::String(l.source.clone()));
            map.insert("layer".into(), Value::Object(o));
        }
        if let Some(s) = &self.sources {
            map.insert(
                "sources".into(),
                Value::Array(s.iter().map(source_to_value).collect()),
            );
        }
        if let Some(c) = &self.categories {
            map.insert("categories".into(), axis_to_value(c));
        }
        if let Some(v) = &self.variants {
            map.insert("variants".into(), axis_to_value(v));
        }
        for (k, v) in &self.extra {
            map.insert(k.clone(), v.clone());
        }
        Value::Object(map)
    }

    /// Builds an entry from its JSON object form.
    pub fn from_value(measure_id: &str, value: &Value) -> Result<Self, String> {
        let obj = value
            .as_object()
            .ok_or_else(|| format!("entry `{measure_id}` is not a JSON object"))?;
        let mut entry = MeasureEntry::new(measure_id);
        for (key, v) in obj {
            let at = |msg: &str| format!("{measure_id}.{key}: {msg}");
            match key.as_str() {
                "aggregation_method" => entry.aggregation_method = Some(as_text(v).map_err(|e| at(&e))?),
                "category" => entry.category = Some(as_text(v).map_err(|e| at(&e))?),
                "data_type" => entry.data_type = Some(as_text(v).map_err(|e| at(&e))?),
                "equity_category" => entry.equity_category = Some(as_text(v).map_err(|e| at(&e))?),
                "long_description" => entry.long_description = Some(as_text(v).map_err(|e| at(&e))?),
                "long_name" => entry.long_name = Some(as_text(v).map_err(|e| at(&e))?),
                "measure_type" => entry.measure_type = Some(as_text(v).map_err(|e| at(&e))?),
                "short_description" => entry.short_description = Some(as_text(v).map_err(|e| at(&e))?),
                "short_name" => entry.short_name = Some(as_text(v).map_err(|e| at(&e))?),
                "statement" => entry.statement = Some(as_text(v).map_err(|e| at(&e))?),
                "unit" => entry.unit = Some(as_text(v).map_err(|e| at(&e))?),
                "citations" => entry.citations = Some(as_citations(v).map_err(|e| at(&e))?),
                "layer" => entry.layer = Some(as_layer(v).map_err(|e| at(&e))?),
                "sources" => entry.sources = Some(as_sources(v).map_err(|e| at(&e))?),
                "categories" => entry.categories = Some(as_axis(v).map_err(|e| at(&e))?),
                "variants" => entry.variants = Some(as_axis(v).map_err(|e| at(&e))?),
                _ => {
                    entry.extra.insert(key.clone(), v.clone());
                }
            }
        }
        Ok(entry)
    }
}

fn as_text(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Null => Ok(String::new()),
        other => Err(format!("expected a string, found {}", kind_of(other))),
    }
}

fn as_citations(v: &Value) -> Result<Vec<String>, String> {
    match v {
        Value::Null => Ok(Vec::new()),
        Value::String(s) if blank_str(s) => Ok(Vec::new()),
        Value::String(s) => Ok(vec![s.clone()]),
        Value::Array(items) => items
            .iter()
            .map(|i| {
                i.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| "citation keys must be strings".to_string())
            })
            .collect(),
        other => Err(format!("expected citation keys, found {}", kind_of(other))),
    }
}

fn as_layer(v: &Value) -> Result<LayerRef, String> {
    match v {
        Value::Null => Ok(LayerRef::default()),
        Value::String(s) => Ok(LayerRef {
            source: s.clone(),
            extra: BTreeMap::new(),
        }),
        Value::Object(o) => {
            let mut layer = LayerRef::default();
            for (k, v) in o {
                if k == "source" {
                    layer.source = as_text(v)?;
                } else {
                    layer.extra.insert(k.clone(), v.clone());
                }
            }
            Ok(layer)
        }
        other => Err(format!("expected a layer object, found {}", kind_of(other))),
    }
}

fn as_source(v: &Value) -> Result<SourceRef, String> {
    let o = v
        .as_object()
        .ok_or_else(|| format!("expected a source object, found {}", kind_of(v)))?;
    let mut src = SourceRef::default();
    for (k, v) in o {
        match k.as_str() {
            "name" => src.name = as_text(v)?,
            "url" => src.url = Some(as_text(v)?),
            "location" => src.location = Some(as_text(v)?),
            "date_accessed" => {
                // years are commonly written as bare numbers
                src.date_accessed = Some(match v {
                    Value::Number(n) => n.to_string(),
                    other => as_text(other)?,
                })
            }
            _ => {
                src.extra.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(src)
}

fn as_sources(v: &Value) -> Result<Vec<SourceRef>, String> {
    match v {
        Value::Null => Ok(Vec::new()),
        Value::Object(_) => Ok(vec![as_source(v)?]),
        Value::Array(items) => items.iter().map(as_source).collect(),
        other => Err(format!("expected sources, found {}", kind_of(other))),
    }
}

fn as_axis(v: &Value) -> Result<Vec<AxisSpec>, String> {
    let one = |item: &Value| -> Result<AxisSpec, String> {
        match item {
            Value::String(s) => Ok(AxisSpec::new(s.clone())),
            Value::Object(o) => {
                let token = o
                    .get("token")
                    .and_then(Value::as_str)
                    .ok_or("axis object needs a string `token`")?;
                let mut spec = AxisSpec::new(token);
                if let Some(ov) = o.get("overrides") {
                    let ov = ov.as_object().ok_or("`overrides` must be an object")?;
                    for (k, v) in ov {
                        let text = v.as_str().ok_or("override values must be strings")?;
                        spec.overrides.insert(k.clone(), text.to_string());
                    }
                }
                if let Some(k) = o.keys().find(|k| *k != "token" && *k != "overrides") {
                    return Err(format!("unexpected axis key `{k}`"));
                }
                Ok(spec)
            }
            other => Err(format!("expected an axis token, found {}", kind_of(other))),
        }
    };
    match v {
        Value::Null => Ok(Vec::new()),
        Value::String(s) if blank_str(s) => Ok(Vec::new()),
        Value::Array(items) => items.iter().map(one).collect(),
        other => Ok(vec![one(other)?]),
    }
}

fn source_to_value(s: &SourceRef) -> Value {
    let mut o: Map<String, Value> = s.extra.clone().into_iter().collect();
    if !s.name.is_empty() {
        o.insert("name".into(), Value::String(s.name.clone()));
    }
    for (k, v) in [
        ("url", &s.url),
        ("location", &s.location),
        ("date_accessed", &s.date_accessed),
    ] {
        if let Some(v) = v {
            o.insert(k.into(), Value::String(v.clone()));
        }
    }
    Value::Object(o)
}

fn axis_to_value(axis: &[AxisSpec]) -> Value {
    Value::Array(
        axis.iter()
            .map(|a| {
                if a.overrides.is_empty() {
                    Value::String(a.token.clone())
                } else {
                    let overrides = a
                        .overrides
                        .iter()
                        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                        .collect();
                    serde_json::json!({ "token": a.token, "overrides": Value::Object(overrides) })
                }
            })
            .collect(),
    )
}

fn kind_of(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Parsed `measure_info` file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasureInfoFile {
    /// Repository-relative path, `/`-separated.
    pub path: String,
    pub entries: BTreeMap<String, MeasureEntry>,
    pub references: BTreeMap<String, ReferenceEntry>,
}

impl MeasureInfoFile {
    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        for (id, entry) in &self.entries {
            root.insert(id.clone(), entry.to_value());
        }
        if !self.references.is_empty() {
            let refs = self
                .references
                .iter()
                .map(|(id, r)| (id.clone(), Value::Object(r.fields.clone().into_iter().collect())))
                .collect();
            root.insert(REFERENCES_KEY.into(), Value::Object(refs));
        }
        Value::Object(root)
    }

    /// Canonical serialization: 2-space indentation, sorted keys, trailing newline.
    pub fn to_json_string(&self) -> String {
        to_canonical_json(&self.to_value())
    }
}

/// Pretty-prints with sorted keys and a trailing newline.
pub fn to_canonical_json(value: &Value) -> String {
    // serde_json's default Map is a BTreeMap, so keys already come out sorted.
    let mut out = serde_json::to_string_pretty(value).expect("serializing a Value cannot fail");
    out.push('\n');
    out
}

/// JSON object read as ordered (key, raw value) pairs so duplicates can be seen.
struct RawPairs(Vec<(String, Box<RawValue>)>);

impl<'de> Deserialize<'de> for RawPairs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawPairs;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawPairs, A::Error> {
                let mut pairs = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Box<RawValue>>()? {
                    pairs.push((k, v));
                }
                Ok(RawPairs(pairs))
            }
        }
        d.deserialize_map(V)
    }
}

fn line_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in bytes.split(|b| *b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(bytes.len());
        }
        offset += l.len() + 1;
    }
    bytes.len()
}

fn syntax_error(path: &str, bytes: &[u8], e: &serde_json::Error) -> MetadataError {
    MetadataError::Syntax {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        offset: line_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    }
}

/// Checks that `bytes` are a readable JSON document.
pub fn check_json_syntax(path: &str, bytes: &[u8]) -> Result<(), MetadataError> {
    serde_json::from_slice::<serde::de::IgnoredAny>(bytes)
        .map(|_| ())
        .map_err(|e| syntax_error(path, bytes, &e))
}

fn unique_pairs(
    path: &str,
    scope: Option<&str>,
    raw: &RawValue,
) -> Result<Vec<(String, Value)>, MetadataError> {
    let structure = |message: String| MetadataError::Structure {
        path: path.to_string(),
        message,
    };
    let pairs: RawPairs = serde_json::from_str(raw.get()).map_err(|_| {
        structure(match scope {
            Some(s) => format!("`{s}` must be a JSON object"),
            None => "top level must be a JSON object".to_string(),
        })
    })?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(pairs.0.len());
    for (k, v) in pairs.0 {
        if !seen.insert(k.clone()) {
            let key = match scope {
                Some(s) => format!("{s}.{k}"),
                None => k,
            };
            return Err(MetadataError::DuplicateKey {
                path: path.to_string(),
                key,
            });
        }
        let value: Value = serde_json::from_str(v.get()).map_err(|e| structure(e.to_string()))?;
        out.push((k, value));
    }
    Ok(out)
}

/// Parses the raw bytes of a `measure_info` file.
///
/// Unknown element keys are kept on the entry; rejecting them is the job of
/// [`validate_entry_keys`]. Duplicate measure ids, duplicate element keys and
/// duplicate reference ids are errors.
pub fn parse_measure_info(bytes: &[u8], path: &str) -> Result<MeasureInfoFile, MetadataError> {
    let root: Box<RawValue> =
        serde_json::from_slice(bytes).map_err(|e| syntax_error(path, bytes, &e))?;
    let structure = |message: String| MetadataError::Structure {
        path: path.to_string(),
        message,
    };
    let mut file = MeasureInfoFile {
        path: path.to_string(),
        ..Default::default()
    };
    let root_pairs: RawPairs = serde_json::from_str(root.get())
        .map_err(|_| structure("top level must be a JSON object".into()))?;
    let mut seen = BTreeSet::new();
    for (key, raw) in root_pairs.0 {
        if !seen.insert(key.clone()) {
            return Err(MetadataError::DuplicateKey {
                path: path.to_string(),
                key,
            });
        }
        if key == REFERENCES_KEY {
            for (ref_id, value) in unique_pairs(path, Some(REFERENCES_KEY), &raw)? {
                let fields = match value {
                    Value::Object(o) => o.into_iter().collect(),
                    other => {
                        return Err(structure(format!(
                            "reference `{ref_id}` must be an object, found {}",
                            kind_of(&other)
                        )))
                    }
                };
                file.references
                    .insert(ref_id.clone(), ReferenceEntry { ref_id, fields });
            }
            continue;
        }
        let pairs = unique_pairs(path, Some(&key), &raw)?;
        let value = Value::Object(pairs.into_iter().collect());
        let entry = MeasureEntry::from_value(&key, &value).map_err(structure)?;
        file.entries.insert(key, entry);
    }
    Ok(file)
}

/// Schema knobs for entry validation: allowed keys, vocabularies and limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaConfig {
    pub allowed_keys: BTreeSet<String>,
    /// Extra entry-level structural keys accepted alongside `allowed_keys`.
    pub reserved_keys: BTreeSet<String>,
    /// Keys every entry is expected to carry with a non-blank value.
    pub expected_keys: BTreeSet<String>,
    pub vocabularies: BTreeMap<String, BTreeSet<String>>,
    pub char_limits: BTreeMap<String, usize>,
    pub statement_placeholders: BTreeSet<String>,
}

fn set_of(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for SchemaConfig {
    fn default() -> Self {
        let vocabularies = [
            ("aggregation_method", &["count", "mean", "median", "percent", "sum"][..]),
            ("category", &["Broadband"][..]),
            ("data_type", &["decimal", "integer", "string"][..]),
            ("equity_category", &["Accessibility"][..]),
            ("measure_type", &["count", "decimal", "percent"][..]),
            ("region_type", &["block group", "county", "tract"][..]),
            ("unit", &["household", "person"][..]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), set_of(v)))
        .collect();
        SchemaConfig {
            allowed_keys: set_of(&CORE_ELEMENTS),
            reserved_keys: BTreeSet::new(),
            expected_keys: set_of(&[
                "aggregation_method",
                "category",
                "data_type",
                "equity_category",
                "long_description",
                "long_name",
                "measure_type",
                "short_description",
                "short_name",
                "sources",
                "statement",
                "unit",
            ]),
            vocabularies,
            char_limits: [("long_name", 55), ("short_name", 40), ("short_description", 100)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            statement_placeholders: set_of(&["region.name", "value", "year"]),
        }
    }
}

/// Key-level findings for one entry.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct KeyReport {
    /// Present keys inside `allowed_keys ∪ reserved_keys`.
    pub allowed_present: Vec<String>,
    /// Present keys outside the allowed set.
    pub disallowed: Vec<String>,
    /// Expected keys that are not present.
    pub absent: Vec<String>,
    /// Expected keys that are present with a blank value.
    pub blank: Vec<String>,
}

impl KeyReport {
    pub fn is_clean(&self) -> bool {
        self.disallowed.is_empty() && self.absent.is_empty() && self.blank.is_empty()
    }
}

pub fn validate_entry_keys(entry: &MeasureEntry, schema: &SchemaConfig) -> KeyReport {
    let mut report = KeyReport::default();
    let present = entry.present_keys();
    let present_names: BTreeSet<&str> = present.iter().map(|(k, _)| k.as_str()).collect();
    for (key, blank) in &present {
        if schema.allowed_keys.contains(key) || schema.reserved_keys.contains(key) {
            report.allowed_present.push(key.clone());
            if *blank && schema.expected_keys.contains(key) {
                report.blank.push(key.clone());
            }
        } else {
            report.disallowed.push(key.clone());
        }
    }
    report.absent = schema
        .expected_keys
        .iter()
        .filter(|k| !present_names.contains(k.as_str()))
        .cloned()
        .collect();
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitViolation {
    pub field: String,
    pub length: usize,
    pub limit: usize,
}

/// Over-limit text fields. Length is counted in Unicode scalar values and the
/// limit itself is allowed.
pub fn check_char_limits(entry: &MeasureEntry, schema: &SchemaConfig) -> Vec<LimitViolation> {
    schema
        .char_limits
        .iter()
        .filter_map(|(field, &limit)| {
            let length = entry.text(field)?.chars().count();
            (length > limit).then(|| LimitViolation {
                field: field.clone(),
                length,
                limit,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VocabularyViolation {
    pub field: String,
    pub value: String,
}

/// Non-blank controlled-vocabulary fields whose value is not a configured term.
/// Matching is case-sensitive; fields without a vocabulary are not checked.
pub fn check_vocabulary(entry: &MeasureEntry, schema: &SchemaConfig) -> Vec<VocabularyViolation> {
    schema
        .vocabularies
        .iter()
        .filter(|(_, terms)| !terms.is_empty())
        .filter_map(|(field, terms)| {
            let value = entry.text(field)?;
            (!blank_str(value) && !terms.contains(value)).then(|| VocabularyViolation {
                field: field.clone(),
                value: value.to_string(),
            })
        })
        .collect()
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z][A-Za-z0-9+.\-]*://[^\s/?#]+[^\s]*$").unwrap())
}

/// Problems with the `sources` and `layer` structures of an entry.
pub fn check_references(entry: &MeasureEntry) -> Vec<String> {
    let mut issues = Vec::new();
    for (i, src) in entry.sources.iter().flatten().enumerate() {
        if blank_str(&src.name) {
            issues.push(format!("sources[{i}]: missing name"));
        }
        if let Some(url) = src.url.as_deref().filter(|u| !blank_str(u)) {
            if !url_regex().is_match(url) {
                issues.push(format!("sources[{i}]: `{url}` is not a URL"));
            }
        }
    }
    if let Some(layer) = &entry.layer {
        if blank_str(&layer.source) {
            issues.push("layer: missing source".to_string());
        }
    }
    issues
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitationResolution<'a> {
    pub measure_id: &'a str,
    pub key: &'a str,
    /// `None` when the key has no `_references` entry.
    pub reference: Option<&'a ReferenceEntry>,
}

impl CitationResolution<'_> {
    pub fn is_resolved(&self) -> bool {
        self.reference.is_some()
    }
}

pub fn resolve_citations(file: &MeasureInfoFile) -> Vec<CitationResolution<'_>> {
    file.entries
        .values()
        .flat_map(|entry| {
            entry.citations.iter().flatten().map(|key| CitationResolution {
                measure_id: &entry.measure_id,
                key,
                reference: file.references.get(key),
            })
        })
        .collect()
}

/// How `{value}` is rendered in a statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueFormat {
    /// One decimal and a trailing `%`.
    Percent,
    /// Rounded integer with comma thousands separators.
    Count,
    Raw,
}

impl ValueFormat {
    pub fn for_measure_type(measure_type: Option<&str>) -> Self {
        match measure_type {
            Some("percent") => ValueFormat::Percent,
            Some("count") => ValueFormat::Count,
            _ => ValueFormat::Raw,
        }
    }

    pub fn format(self, v: f64) -> String {
        match self {
            ValueFormat::Percent => format!("{v:.1}%"),
            ValueFormat::Count => group_thousands(v.round() as i64),
            ValueFormat::Raw => v.to_string(),
        }
    }
}

fn group_thousands(n: i64) -> String {
    let digits = n.unsigned_abs().to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    if n < 0 {
        out.insert(0, '-');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementValue {
    Number(f64),
    Text(String),
}

impl From<f64> for StatementValue {
    fn from(v: f64) -> Self {
        StatementValue::Number(v)
    }
}

impl From<&str> for StatementValue {
    fn from(v: &str) -> Self {
        StatementValue::Text(v.to_string())
    }
}

impl From<String> for StatementValue {
    fn from(v: String) -> Self {
        StatementValue::Text(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("unknown placeholder `{{{0}}}`")]
    UnknownPlaceholder(String),
    #[error("no value supplied for placeholder `{{{0}}}`")]
    MissingValue(String),
    #[error("unbalanced brace at byte {0}")]
    Malformed(usize),
}

fn placeholder_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([^{}]*)\}").unwrap())
}

fn path_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$").unwrap())
}

/// Placeholder paths appearing in `template`, in order.
pub fn statement_placeholders(template: &str) -> Result<Vec<&str>, RenderError> {
    let mut names = Vec::new();
    let mut last = 0;
    for cap in placeholder_regex().captures_iter(template) {
        let whole = cap.get(0).unwrap();
        if let Some(pos) = template[last..whole.start()].find(['{', '}']) {
            return Err(RenderError::Malformed(last + pos));
        }
        let name = cap.get(1).unwrap().as_str();
        if !path_regex().is_match(name) {
            return Err(RenderError::Malformed(whole.start()));
        }
        names.push(name);
        last = whole.end();
    }
    if let Some(pos) = template[last..].find(['{', '}']) {
        return Err(RenderError::Malformed(last + pos));
    }
    Ok(names)
}

/// Fills a `{dotted.path}` statement template. `{value}` numbers are formatted
/// with `value_format`; other numbers render as-is.
pub fn render_statement(
    template: &str,
    context: &BTreeMap<String, StatementValue>,
    value_format: ValueFormat,
    allowed: &BTreeSet<String>,
) -> Result<String, RenderError> {
    let names = statement_placeholders(template)?;
    for name in &names {
        if !allowed.contains(*name) {
            return Err(RenderError::UnknownPlaceholder(name.to_string()));
        }
        if !context.contains_key(*name) {
            return Err(RenderError::MissingValue(name.to_string()));
        }
    }
    let rendered = placeholder_regex().replace_all(template, |cap: &regex::Captures| {
        let name = &cap[1];
        match &context[name] {
            StatementValue::Number(v) if name == "value" => value_format.format(*v),
            StatementValue::Number(v) => v.to_string(),
            StatementValue::Text(s) => s.clone(),
        }
    });
    Ok(rendered.into_owned())
}
