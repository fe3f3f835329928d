//! Repository walk, file classification and tabular parsing.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use flate2::read::GzDecoder;
use regex::Regex;
use serde::Serialize;
use thiserror::Error;
use walkdir::WalkDir;

use crate::config::{ConfigError, LintConfig, ScanConfig};
use crate::metadata::{check_json_syntax, parse_measure_info, MeasureInfoFile, MetadataError};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("cannot read repository {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    MeasureInfo,
    TabularData,
    LayerData,
    Code,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifiedFile {
    /// Repository-relative, `/`-separated.
    pub path: String,
    pub kind: FileKind,
    /// Path contains a `data/distribution` segment pair.
    pub in_distribution: bool,
    /// `code/distribution` directory paired with a distribution file.
    pub sibling_code_dir: Option<String>,
}

impl ClassifiedFile {
    pub fn basename(&self) -> &str {
        basename(&self.path)
    }

    /// Directory holding the file, `""` at the root.
    pub fn dir(&self) -> &str {
        parent_dir(&self.path)
    }
}

pub fn basename(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

pub fn parent_dir(path: &str) -> &str {
    path.rfind('/').map_or("", |i| &path[..i])
}

/// Prefix before the first `data/distribution` segment pair, if any.
fn distribution_prefix(path: &str) -> Option<String> {
    let segments: Vec<&str> = path.split('/').collect();
    // the last segment is the file name itself
    let dirs = &segments[..segments.len().saturating_sub(1)];
    dirs.windows(2)
        .position(|w| w[0] == "data" && w[1] == "distribution")
        .map(|i| dirs[..i].iter().map(|s| format!("{s}/")).collect())
}

/// Pure classification of a repository-relative path.
pub struct Classifier {
    metadata: Regex,
    config: ScanConfig,
}

impl Classifier {
    pub fn new(config: &ScanConfig) -> Result<Self, ConfigError> {
        let metadata = Regex::new(&config.metadata_pattern).map_err(|e| ConfigError::Regex {
            pattern: config.metadata_pattern.clone(),
            message: e.to_string(),
        })?;
        Ok(Classifier {
            metadata,
            config: config.clone(),
        })
    }

    fn has_extension(name: &str, exts: &[String]) -> bool {
        exts.iter().any(|e| name.ends_with(&format!(".{}", e.to_ascii_lowercase())))
    }

    /// Compression suffix stripped from a tabular file name, if any.
    pub fn tabular_compression(&self, name: &str) -> Option<Option<String>> {
        let lower = name.to_ascii_lowercase();
        if Self::has_extension(&lower, &self.config.tabular_extensions) {
            return Some(None);
        }
        for comp in &self.config.compression_extensions {
            let suffix = format!(".{}", comp.to_ascii_lowercase());
            if let Some(stem) = lower.strip_suffix(&suffix) {
                if Self::has_extension(stem, &self.config.tabular_extensions) {
                    return Some(Some(comp.to_ascii_lowercase()));
                }
            }
        }
        None
    }

    pub fn is_json(&self, path: &str) -> bool {
        let name = basename(path);
        self.metadata.is_match(name)
            || Self::has_extension(&name.to_ascii_lowercase(), &self.config.json_extensions)
    }

    pub fn classify(&self, path: &str) -> ClassifiedFile {
        let name = basename(path);
        let lower = name.to_ascii_lowercase();
        let kind = if self.metadata.is_match(name) {
            FileKind::MeasureInfo
        } else if self.tabular_compression(name).is_some() {
            FileKind::TabularData
        } else if Self::has_extension(&lower, &self.config.layer_extensions) {
            FileKind::LayerData
        } else if parent_dir(path).split('/').any(|s| s == self.config.code_segment) {
            FileKind::Code
        } else {
            FileKind::Other
        };
        let prefix = distribution_prefix(path);
        ClassifiedFile {
            path: path.to_string(),
            kind,
            in_distribution: prefix.is_some(),
            sibling_code_dir: prefix.map(|p| format!("{p}{}/distribution", self.config.code_segment)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DataTable {
    pub path: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub distinct_measures: BTreeSet<String>,
    pub distinct_measure_types: BTreeSet<String>,
    pub distinct_region_types: BTreeSet<String>,
}

impl DataTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column<'a>(&'a self, name: &str) -> Option<impl Iterator<Item = &'a str> + 'a> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(move |r| r[i].as_str()))
    }

    fn distinct(&self, name: &str) -> BTreeSet<String> {
        self.column(name)
            .map(|c| c.map(str::to_string).collect())
            .unwrap_or_default()
    }

    /// Builds a table from CSV text with a header row.
    pub fn from_reader<R: Read>(path: &str, reader: R, config: &ScanConfig) -> Result<Self, TableError> {
        let err = |message: String| TableError {
            path: path.to_string(),
            message,
        };
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);
        let headers = csv.headers().map_err(|e| err(e.to_string()))?.clone();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(err("empty file: no header row".into()));
        }
        let columns: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths { pos, expected_len, len } => err(format!(
                    "ragged row at line {}: {len} fields, header has {expected_len}",
                    pos.as_ref().map_or(0, |p| p.line())
                )),
                _ => err(e.to_string()),
            })?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        let mut table = DataTable {
            path: path.to_string(),
            columns,
            rows,
            distinct_measures: BTreeSet::new(),
            distinct_measure_types: BTreeSet::new(),
            distinct_region_types: BTreeSet::new(),
        };
        table.distinct_measures = table.distinct(&config.measure_column);
        table.distinct_measure_types = table.distinct(&config.measure_type_column);
        table.distinct_region_types = table.distinct(&config.region_type_column);
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{path}: {message}")]
pub struct TableError {
    pub path: String,
    pub message: String,
}

/// Reads a delimited file from disk, decompressing `.gz` transparently.
pub fn parse_data_table(file: &Path, config: &ScanConfig) -> Result<DataTable, TableError> {
    let display = file.display().to_string();
    let err = |message: String| TableError {
        path: display.clone(),
        message,
    };
    let handle = File::open(file).map_err(|e| err(e.to_string()))?;
    let name = file.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let classifier = Classifier::new(config).map_err(|e| err(e.to_string()))?;
    match classifier.tabular_compression(name) {
        Some(Some(comp)) if comp == "gz" => {
            DataTable::from_reader(&display, GzDecoder::new(handle), config)
        }
        Some(Some(comp)) => Err(err(format!("unsupported compression `.{comp}`"))),
        _ => DataTable::from_reader(&display, handle, config),
    }
}

/// Outcome of parsing one file during the scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T, E> {
    pub path: String,
    pub result: Result<T, E>,
}

/// JSON validity of one JSON-bearing file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonFile {
    pub path: String,
    pub error: Option<String>,
}

/// Immutable scan of a repository tree.
#[derive(Debug, Clone)]
pub struct RepoSnapshot {
    pub root: PathBuf,
    /// Sorted by path.
    pub files: Vec<ClassifiedFile>,
    pub measure_info_files: Vec<Parsed<MeasureInfoFile, MetadataError>>,
    pub data_tables: Vec<Parsed<DataTable, TableError>>,
    pub json_files: Vec<JsonFile>,
    pub scan_timestamp: SystemTime,
}

impl RepoSnapshot {
    /// Field-wise equality ignoring `scan_timestamp`.
    pub fn same_content(&self, other: &RepoSnapshot) -> bool {
        self.root == other.root
            && self.files == other.files
            && self.measure_info_files == other.measure_info_files
            && self.data_tables == other.data_tables
            && self.json_files == other.json_files
    }

    pub fn file(&self, path: &str) -> Option<&ClassifiedFile> {
        self.files
            .binary_search_by(|f| f.path.as_str().cmp(path))
            .ok()
            .map(|i| &self.files[i])
    }
}

fn rel_path(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Walks `root` and eagerly parses metadata, JSON and tabular files. Parse
/// failures are recorded on the snapshot rather than returned.
pub fn scan_repo(root: &Path, config: &LintConfig) -> Result<RepoSnapshot, ScanError> {
    let io_err = |source: io::Error| ScanError::Io {
        path: root.display().to_string(),
        source,
    };
    let meta = std::fs::metadata(root).map_err(io_err)?;
    if !meta.is_dir() {
        return Err(io_err(io::Error::new(io::ErrorKind::NotADirectory, "not a directory")));
    }
    let classifier = Classifier::new(&config.scan)?;
    let ignore: BTreeSet<&str> = config.scan.ignore.iter().map(String::as_str).collect();

    let mut files = Vec::new();
    let walker = WalkDir::new(root).follow_links(false).into_iter().filter_entry(|e| {
        e.depth() == 0 || !ignore.contains(e.file_name().to_string_lossy().as_ref())
    });
    for entry in walker {
        let entry = entry.map_err(|e| io_err(e.into()))?;
        if entry.file_type().is_file() {
            files.push(classifier.classify(&rel_path(root, entry.path())));
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));

    let mut measure_info_files = Vec::new();
    let mut data_tables = Vec::new();
    let mut json_files = Vec::new();
    for file in &files {
        let abs = root.join(&file.path);
        if classifier.is_json(&file.path) {
            let bytes = std::fs::read(&abs);
            let syntax = match &bytes {
                Ok(b) => check_json_syntax(&file.path, b).err().map(|e| e.to_string()),
                Err(e) => Some(format!("{}: {e}", file.path)),
            };
            json_files.push(JsonFile {
                path: file.path.clone(),
                error: syntax,
            });
            if file.kind == FileKind::MeasureInfo {
                let result = match bytes {
                    Ok(b) => parse_measure_info(&b, &file.path),
                    Err(e) => Err(MetadataError::Structure {
                        path: file.path.clone(),
                        message: e.to_string(),
                    }),
                };
                measure_info_files.push(Parsed {
                    path: file.path.clone(),
                    result,
                });
            }
        }
        if file.kind == FileKind::TabularData {
            let result = parse_data_table(&abs, &config.scan).map(|mut t| {
                t.path = file.path.clone();
                t
            });
            let result = result.map_err(|mut e| {
                e.path = file.path.clone();
                e
            });
            data_tables.push(Parsed {
                path: file.path.clone(),
                result,
            });
        }
    }

    Ok(RepoSnapshot {
        root: root.to_path_buf(),
        files,
        measure_info_files,
        data_tables,
        json_files,
        scan_timestamp: SystemTime::now(),
    })
}
