//! FAIR maturity scoring against the RDA FAIR Data Maturity Model indicators.
//!
//! The indicator registry ships as a tab-separated data file
//! (`data/rda_indicators.tsv`) and can be replaced without code changes.
//! Assessments map indicator ids to maturity levels:
//!
//! | level | meaning                                   |
//! |-------|-------------------------------------------|
//! | 0     | not applicable                            |
//! | 1     | not being considered yet                  |
//! | 2     | under consideration or in planning phase  |
//! | 3     | in implementation phase                   |
//! | 4     | fully implemented                         |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::FairConfig;

/// Registry shipped with the crate.
pub const SHIPPED_REGISTRY: &str = include_str!("../data/rda_indicators.tsv");

pub const EXPECTED_INDICATORS: usize = 41;

/// The fifteen FAIR guiding principles.
pub const PRINCIPLES: [&str; 15] = [
    "F1", "F2", "F3", "F4", "A1", "A1.1", "A1.2", "A2", "I1", "I2", "I3", "R1", "R1.1", "R1.2",
    "R1.3",
];

pub const MAX_LEVEL: u8 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("registry line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate indicator id `{0}`")]
    DuplicateId(String),
    #[error("unknown priority `{priority}` for `{id}`")]
    UnknownPriority { id: String, priority: String },
    #[error("unknown principle `{principle}` for `{id}`")]
    UnknownPrinciple { id: String, principle: String },
    #[error("registry has {0} indicators, expected {EXPECTED_INDICATORS}")]
    Count(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FairError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("unknown indicator `{0}`")]
    UnknownIndicator(String),
    #[error("unknown FAIR principle `{0}`")]
    UnknownPrinciple(String),
    #[error("level {level} for `{id}` is outside 0..=4")]
    LevelOutOfRange { id: String, level: i64 },
    #[error("unknown progress category `{0}`")]
    UnknownProgress(String),
    #[error("invalid assessment input: {0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    Essential,
    Important,
    Useful,
}

impl FromStr for Priority {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim() {
            "Essential" => Ok(Priority::Essential),
            "Important" => Ok(Priority::Important),
            "Useful" => Ok(Priority::Useful),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// FAIR area, the first letter of a principle code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Area {
    F,
    A,
    I,
    R,
}

impl Area {
    pub const ALL: [Area; 4] = [Area::F, Area::A, Area::I, Area::R];

    pub fn of_principle(principle: &str) -> Option<Area> {
        match principle.chars().next()? {
            'F' => Some(Area::F),
            'A' => Some(Area::A),
            'I' => Some(Area::I),
            'R' => Some(Area::R),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Area::F => "Findable",
            Area::A => "Accessible",
            Area::I => "Interoperable",
            Area::R => "Reusable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicator {
    pub indicator_id: String,
    pub principle: String,
    pub text: String,
    pub priority: Priority,
}

impl Indicator {
    pub fn area(&self) -> Area {
        Area::of_principle(&self.principle).expect("principle validated at load")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    indicators: Vec<Indicator>,
}

impl Registry {
    pub fn shipped() -> Self {
        load_indicator_registry(SHIPPED_REGISTRY).expect("shipped registry is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, FairError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FairError::Input(format!("{}: {e}", path.display())))?;
        Ok(load_indicator_registry(&text)?)
    }

    pub fn indicators(&self) -> &[Indicator] {
        &self.indicators
    }

    pub fn get(&self, id: &str) -> Option<&Indicator> {
        self.indicators.iter().find(|i| i.indicator_id == id)
    }

    pub fn for_principle<'a>(&'a self, principle: &'a str) -> impl Iterator<Item = &'a Indicator> + 'a {
        self.indicators.iter().filter(move |i| i.principle == principle)
    }

    pub fn len(&self) -> usize {
        self.indicators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicators.is_empty()
    }
}

/// Parses a registry file: tab-separated `principle, indicator_id, priority,
/// text` with a header row.
pub fn load_indicator_registry(source: &str) -> Result<Registry, RegistryError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .quoting(false)
        .from_reader(source.as_bytes());
    let mut indicators = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| RegistryError::Malformed {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(RegistryError::Malformed {
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let (principle, id, priority, text) = (
            record[0].trim(),
            record[1].trim(),
            record[2].trim(),
            record[3].trim(),
        );
        if !PRINCIPLES.contains(&principle) {
            return Err(RegistryError::UnknownPrinciple {
                id: id.into(),
                principle: principle.into(),
            });
        }
        let priority = priority.parse().map_err(|_| RegistryError::UnknownPriority {
            id: id.into(),
            priority: priority.into(),
        })?;
        if !seen.insert(id.to_string()) {
            return Err(RegistryError::DuplicateId(id.into()));
        }
        indicators.push(Indicator {
            indicator_id: id.into(),
            principle: principle.into(),
            text: text.into(),
            priority,
        });
    }
    if indicators.len() != EXPECTED_INDICATORS {
        return Err(RegistryError::Count(indicators.len()));
    }
    Ok(Registry { indicators })
}

/// Hand-authored maturity self-assessment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FairAssessment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    pub levels: BTreeMap<String, u8>,
}

impl FairAssessment {
    pub fn validate(&self, registry: &Registry) -> Result<(), FairError> {
        for (id, &level) in &self.levels {
            if registry.get(id).is_none() {
                return Err(FairError::UnknownIndicator(id.clone()));
            }
            if level > MAX_LEVEL {
                return Err(FairError::LevelOutOfRange {
                    id: id.clone(),
                    level: level.into(),
                });
            }
        }
        Ok(())
    }
}

/// Three-way progress rubric per guiding principle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Progress {
    Achieving,
    WorkingTowards,
    NotAddressing,
}

impl FromStr for Progress {
    type Err = FairError;
    fn from_str(s: &str) -> Result<Self, FairError> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        match norm.as_str() {
            "achieving" => Ok(Progress::Achieving),
            "workingtowards" => Ok(Progress::WorkingTowards),
            "notaddressing" => Ok(Progress::NotAddressing),
            _ => Err(FairError::UnknownProgress(s.to_string())),
        }
    }
}

impl Progress {
    pub fn level(self, mapping: &FairConfig) -> u8 {
        match self {
            Progress::Achieving => mapping.achieving,
            Progress::WorkingTowards => mapping.working_towards,
            Progress::NotAddressing => mapping.not_addressing,
        }
    }
}

fn normalize_principle(p: &str) -> &str {
    p.trim().trim_end_matches('.')
}

/// Spreads each principle's progress category onto every indicator with that
/// principle code.
pub fn convert_checklist(
    checklist: &BTreeMap<String, Progress>,
    registry: &Registry,
    mapping: &FairConfig,
) -> Result<FairAssessment, FairError> {
    let mut levels = BTreeMap::new();
    for (principle, progress) in checklist {
        let principle = normalize_principle(principle);
        if !PRINCIPLES.contains(&principle) {
            return Err(FairError::UnknownPrinciple(principle.to_string()));
        }
        let level = progress.level(mapping);
        if level > MAX_LEVEL {
            return Err(FairError::LevelOutOfRange {
                id: principle.to_string(),
                level: level.into(),
            });
        }
        for indicator in registry.for_principle(principle) {
            levels.insert(indicator.indicator_id.clone(), level);
        }
    }
    Ok(FairAssessment {
        levels,
        ..Default::default()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaSummary {
    pub area: Area,
    /// Number of assessed indicators at each level 0..=4.
    pub histogram: [usize; 5],
    pub assessed: usize,
    /// Mean over levels 1..=4; level 0 (not applicable) is excluded.
    pub mean_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub indicator_id: String,
    pub principle: String,
    pub priority: Priority,
    pub level: u8,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairReport {
    pub areas: Vec<AreaSummary>,
    /// Indicators at level 1, Essential first, then by id.
    pub gaps: Vec<Gap>,
    pub essential_gap: bool,
    pub assessed: usize,
    pub registry_size: usize,
    pub coverage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

impl FairReport {
    pub fn essential_gaps(&self) -> impl Iterator<Item = &Gap> {
        self.gaps.iter().filter(|g| g.priority == Priority::Essential)
    }
}

pub fn score_assessment(assessment: &FairAssessment, registry: &Registry) -> Result<FairReport, FairError> {
    assessment.validate(registry)?;
    let mut areas: BTreeMap<Area, AreaSummary> = Area::ALL
        .iter()
        .map(|&area| {
            (
                area,
                AreaSummary {
                    area,
                    histogram: [0; 5],
                    assessed: 0,
                    mean_level: None,
                },
            )
        })
        .collect();
    let mut sums: BTreeMap<Area, (u32, u32)> = BTreeMap::new();
    let mut gaps = Vec::new();
    for (id, &level) in &assessment.levels {
        let indicator = registry.get(id).expect("validated");
        let summary = areas.get_mut(&indicator.area()).expect("all areas present");
        summary.histogram[level as usize] += 1;
        summary.assessed += 1;
        if level > 0 {
            let s = sums.entry(indicator.area()).or_default();
            s.0 += u32::from(level);
            s.1 += 1;
        }
        if level == 1 {
            gaps.push(Gap {
                indicator_id: id.clone(),
                principle: indicator.principle.clone(),
                priority: indicator.priority,
                level,
                text: indicator.text.clone(),
            });
        }
    }
    for (area, (sum, n)) in sums {
        areas.get_mut(&area).expect("all areas present").mean_level = Some(f64::from(sum) / f64::from(n));
    }
    gaps.sort_by(|a, b| (a.priority, &a.indicator_id).cmp(&(b.priority, &b.indicator_id)));
    let assessed = assessment.levels.len();
    Ok(FairReport {
        areas: areas.into_values().collect(),
        essential_gap: gaps.iter().any(|g| g.priority == Priority::Essential),
        gaps,
        assessed,
        registry_size: registry.len(),
        coverage: assessed as f64 / registry.len() as f64,
        assessor: assessment.assessor.clone(),
        date: assessment.date.clone(),
    })
}

/// Accepted assessment inputs. JSON may hold `levels` (indicator → 0..4),
/// `checklist` (principle → progress category), or a bare indicator → level
/// object; CSV holds `indicator_id,level` rows.
pub fn parse_assessment(
    text: &str,
    is_csv: bool,
    registry: &Registry,
    mapping: &FairConfig,
) -> Result<FairAssessment, FairError> {
    if is_csv {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut levels = BTreeMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| FairError::Input(e.to_string()))?;
            let id = record.get(0).unwrap_or_default().trim().to_string();
            let level = parse_level(&id, record.get(1).unwrap_or_default().trim())?;
            levels.insert(id, level);
        }
        let a = FairAssessment { levels, ..Default::default() };
        a.validate(registry)?;
        return Ok(a);
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| FairError::Input(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| FairError::Input("assessment must be a JSON object".into()))?;
    let meta = |k: &str| obj.get(k).and_then(|v| v.as_str()).map(str::to_string);
    let mut assessment = if let Some(checklist) = obj.get("checklist") {
        let checklist = checklist
            .as_object()
            .ok_or_else(|| FairError::Input("`checklist` must be an object".into()))?;
        let mut parsed = BTreeMap::new();
        for (principle, progress) in checklist {
            let progress = progress
                .as_str()
                .ok_or_else(|| FairError::UnknownProgress(progress.to_string()))?;
            parsed.insert(principle.clone(), progress.parse()?);
        }
        convert_checklist(&parsed, registry, mapping)?
    } else {
        let levels = match obj.get("levels") {
            Some(l) => l
                .as_object()
                .ok_or_else(|| FairError::Input("`levels` must be an object".into()))?,
            None => obj,
        };
        let mut out = BTreeMap::new();
        for (id, v) in levels {
            if matches!(id.as_str(), "assessor" | "date") && !obj.contains_key("levels") {
                continue;
            }
            let level = v
                .as_i64()
                .ok_or_else(|| FairError::Input(format!("level for `{id}` must be an integer")))?;
            out.insert(id.clone(), clamp_level(id, level)?);
        }
        FairAssessment { levels: out, ..Default::default() }
    };
    assessment.assessor = meta("assessor");
    assessment.date = meta("date");
    assessment.validate(registry)?;
    Ok(assessment)
}

fn parse_level(id: &str, raw: &str) -> Result<u8, FairError> {
    let level: i64 = raw
        .parse()
        .map_err(|_| FairError::Input(format!("level for `{id}` must be an integer, found `{raw}`")))?;
    clamp_level(id, level)
}

fn clamp_level(id: &str, level: i64) -> Result<u8, FairError> {
    u8::try_from(level)
        .ok()
        .filter(|l| *l <= MAX_LEVEL)
        .ok_or(FairError::LevelOutOfRange { id: id.to_string(), level })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_registry_loads() {
        let r = Registry::shipped();
        assert_eq!(r.len(), 41);
        let a2 = r.get("RDA-A2-01M").unwrap();
        assert_eq!(a2.priority, Priority::Essential);
        assert_eq!(a2.principle, "A2");
        assert_eq!(r.get("RDA-A1.2-01D").unwrap().priority, Priority::Useful);
    }

    #[test]
    fn registry_errors() {
        let mut lines: Vec<&str> = SHIPPED_REGISTRY.lines().collect();
        let removed = lines.remove(5);
        assert_eq!(load_indicator_registry(&lines.join("\n")), Err(RegistryError::Count(40)));
        lines.push(removed);
        lines.push(removed);
        assert!(matches!(load_indicator_registry(&lines.join("\n")), Err(RegistryError::DuplicateId(_))));
        let bad = SHIPPED_REGISTRY.replacen("Essential", "Critical", 1);
        assert!(matches!(load_indicator_registry(&bad), Err(RegistryError::UnknownPriority { .. })));
    }

    #[test]
    fn all_fours_have_no_gaps() {
        let r = Registry::shipped();
        let levels = r.indicators().iter().map(|i| (i.indicator_id.clone(), 4)).collect();
        let report = score_assessment(&FairAssessment { levels, ..Default::default() }, &r).unwrap();
        assert!(report.gaps.is_empty());
        assert!(!report.essential_gap);
        assert_eq!(report.coverage, 1.0);
        for area in &report.areas {
            assert_eq!(area.histogram[4], area.assessed);
            assert_eq!(area.mean_level, Some(4.0));
        }
    }

    #[test]
    fn level_zero_is_not_a_gap_nor_averaged() {
        let r = Registry::shipped();
        let levels = [("RDA-A2-01M".to_string(), 0), ("RDA-A1-01M".to_string(), 2)].into_iter().collect();
        let report = score_assessment(&FairAssessment { levels, ..Default::default() }, &r).unwrap();
        assert!(report.gaps.is_empty());
        let a = report.areas.iter().find(|s| s.area == Area::A).unwrap();
        assert_eq!(a.histogram, [1, 0, 1, 0, 0]);
        assert_eq!(a.mean_level, Some(2.0));
    }

    #[test]
    fn essential_gap_is_flagged_first() {
        let r = Registry::shipped();
        let levels = [
            ("RDA-I3-01D".to_string(), 1),
            ("RDA-A2-01M".to_string(), 1),
            ("RDA-I3-01M".to_string(), 1),
        ]
        .into_iter()
        .collect();
        let report = score_assessment(&FairAssessment { levels, ..Default::default() }, &r).unwrap();
        let ids: Vec<_> = report.gaps.iter().map(|g| g.indicator_id.as_str()).collect();
        assert_eq!(ids, vec!["RDA-A2-01M", "RDA-I3-01M", "RDA-I3-01D"]);
        assert!(report.essential_gap);
    }

    #[test]
    fn unknown_indicator_and_bad_level() {
        let r = Registry::shipped();
        let a = FairAssessment { levels: [("RDA-X9-01M".to_string(), 2)].into_iter().collect(), ..Default::default() };
        assert_eq!(score_assessment(&a, &r), Err(FairError::UnknownIndicator("RDA-X9-01M".into())));
        let a = FairAssessment { levels: [("RDA-A2-01M".to_string(), 5)].into_iter().collect(), ..Default::default() };
        assert!(matches!(score_assessment(&a, &r), Err(FairError::LevelOutOfRange { .. })));
    }

    #[test]
    fn checklist_mapping() {
        let r = Registry::shipped();
        let mapping = FairConfig::default();
        let one = |p: &str, g: Progress| convert_checklist(&[(p.to_string(), g)].into_iter().collect(), &r, &mapping);
        let a = one("A2", Progress::NotAddressing).unwrap();
        assert_eq!(a.levels, [("RDA-A2-01M".to_string(), 1)].into_iter().collect());
        let f1 = one("F1", Progress::WorkingTowards).unwrap();
        assert_eq!(f1.levels.len(), 4);
        assert!(f1.levels.values().all(|l| *l == 2));
        assert!(["RDA-F1-01M", "RDA-F1-01D", "RDA-F1-02M", "RDA-F1-02D"].iter().all(|i| f1.levels.contains_key(*i)));
        assert_eq!(one("F9", Progress::Achieving), Err(FairError::UnknownPrinciple("F9".into())));
        let all: BTreeMap<_, _> = PRINCIPLES.iter().map(|p| (p.to_string(), Progress::Achieving)).collect();
        let a = convert_checklist(&all, &r, &mapping).unwrap();
        assert_eq!(a.levels.len(), 41);
        assert!(a.levels.values().all(|l| *l == 4));
    }

    #[test]
    fn progress_labels_parse_loosely() {
        assert_eq!("Working Towards".parse::<Progress>().unwrap(), Progress::WorkingTowards);
        assert_eq!("not_addressing".parse::<Progress>().unwrap(), Progress::NotAddressing);
        assert!("maybe".parse::<Progress>().is_err());
    }

    #[test]
    fn assessment_inputs() {
        let r = Registry::shipped();
        let m = FairConfig::default();
        let a = parse_assessment(r#"{"assessor": "team", "levels": {"RDA-A2-01M": 1}}"#, false, &r, &m).unwrap();
        assert_eq!(a.assessor.as_deref(), Some("team"));
        assert_eq!(a.levels["RDA-A2-01M"], 1);
        let bare = parse_assessment(r#"{"RDA-A2-01M": 3, "date": "2023-08-13"}"#, false, &r, &m).unwrap();
        assert_eq!(bare.levels.len(), 1);
        assert_eq!(bare.date.as_deref(), Some("2023-08-13"));
        let csv = parse_assessment("indicator_id,level\nRDA-A2-01M,1\nRDA-F2-01M,4\n", true, &r, &m).unwrap();
        assert_eq!(csv.levels.len(), 2);
        let cl = parse_assessment(r#"{"checklist": {"A2.": "Not Addressing"}}"#, false, &r, &m).unwrap();
        assert_eq!(cl.levels["RDA-A2-01M"], 1);
        assert!(parse_assessment(r#"{"levels": {"RDA-A2-01M": -1}}"#, false, &r, &m).is_err());
    }
}
