#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use commons_lint::fair::Progress;
use serde_json::{json, Value};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_commons-lint"))
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str]) -> Output {
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn write(root: &Path, rel: &str, content: &str) {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, content).unwrap();
}

/// Every file under `dir`, relative path → bytes.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Self-evaluation of the commons against the FAIR guiding principles.
pub fn table3_checklist() -> BTreeMap<String, Progress> {
    let mut c = BTreeMap::new();
    for p in ["F1", "F2", "F4", "I1", "I2", "R1", "R1.1", "R1.3"] {
        c.insert(p.to_string(), Progress::WorkingTowards);
    }
    for p in ["F3", "A1", "A1.1", "A1.2", "R1.2"] {
        c.insert(p.to_string(), Progress::Achieving);
    }
    for p in ["A2", "I3"] {
        c.insert(p.to_string(), Progress::NotAddressing);
    }
    c
}

/// A complete, schema-clean measure entry.
pub fn full_entry(short_name: &str, measure_type: &str) -> Value {
    json!({
        "aggregation_method": "percent",
        "category": "Broadband",
        "data_type": "decimal",
        "equity_category": "Accessibility",
        "long_description": "Long description.",
        "long_name": format!("{short_name} (long)"),
        "measure_type": measure_type,
        "short_description": "Short description.",
        "short_name": short_name,
        "sources": [{"name": "American Community Survey", "url": "https://www.census.gov/"}],
        "statement": "In {region.name}, the value was {value} in {year}.",
        "unit": "household"
    })
}

/// Small deterministic generator so random fixtures need no extra crates.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.below(100) < percent
    }
}

pub const MEASURE_POOL: [&str; 7] = ["m_a", "m_b", "m_c", "m_d", "m_e", "m_f", "m_g"];

/// One randomly generated project: `proj<i>/data/distribution/...`.
#[derive(Debug, Clone)]
pub struct RandomProject {
    pub dir: String,
    pub info_measures: BTreeSet<String>,
    /// table path → rows of (measure, value, measure_type)
    pub tables: BTreeMap<String, Vec<(String, String, String)>>,
}

/// Writes a random repository of at most 10 files and at most 5 measures per
/// file and returns its description.
pub fn random_repo(root: &Path, seed: u64) -> Vec<RandomProject> {
    let mut rng = Lcg::new(seed);
    let n_projects = 1 + rng.below(2) as usize;
    let mut projects = Vec::new();
    for p in 0..n_projects {
        let dir = format!("proj{p}/data/distribution");
        let mut info_measures = BTreeSet::new();
        for m in MEASURE_POOL {
            if info_measures.len() < 5 && rng.chance(45) {
                info_measures.insert(m.to_string());
            }
        }
        let mut info = serde_json::Map::new();
        for m in &info_measures {
            info.insert(m.clone(), full_entry(m, "percent"));
        }
        write(root, &format!("{dir}/measure_info.json"), &serde_json::to_string_pretty(&Value::Object(info)).unwrap());
        write(root, &format!("proj{p}/code/distribution/build.R"), "# code\n");
        let n_tables = 1 + rng.below(2) as usize;
        let mut tables = BTreeMap::new();
        for t in 0..n_tables {
            let path = format!("{dir}/table{t}.csv");
            let mut measures: Vec<&str> = MEASURE_POOL.iter().copied().filter(|_| rng.chance(40)).collect();
            measures.truncate(5);
            let mut rows = Vec::new();
            for m in measures {
                let mtype = if rng.chance(80) { "percent" } else { "count" };
                let style = rng.below(4);
                for _ in 0..(1 + rng.below(4)) {
                    let v = match style {
                        0 => format!("{:.2}", rng.below(100) as f64 / 100.0),
                        1 => format!("{}", rng.below(120) as i64 - 10),
                        2 => "NA".to_string(),
                        _ => format!("{:.1}", rng.below(1000) as f64 / 10.0),
                    };
                    rows.push((m.to_string(), v, mtype.to_string()));
                }
            }
            let mut csv = String::from("geoid,year,measure,value,measure_type\n");
            for (i, (m, v, ty)) in rows.iter().enumerate() {
                csv.push_str(&format!("{i},2021,{m},{v},{ty}\n"));
            }
            write(root, &path, &csv);
            tables.insert(path, rows);
        }
        projects.push(RandomProject {
            dir,
            info_measures,
            tables,
        });
    }
    projects
}

/// Expected T5 failures: (table, measure) pairs absent from the project's
/// measure_info.
pub fn brute_missing(projects: &[RandomProject]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for p in projects {
        for (table, rows) in &p.tables {
            for (m, _, _) in rows {
                if !p.info_measures.contains(m) {
                    out.insert((table.clone(), m.clone()));
                }
            }
        }
    }
    out
}

/// Expected T14 failures: (measure_info, measure) pairs absent from every
/// table of the project.
pub fn brute_extra(projects: &[RandomProject]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for p in projects {
        let data: BTreeSet<&String> = p.tables.values().flatten().map(|(m, _, _)| m).collect();
        for m in &p.info_measures {
            if !data.contains(m) {
                out.insert((format!("{}/measure_info.json", p.dir), m.clone()));
            }
        }
    }
    out
}

/// Expected T2 failures by a direct scan of percent rows.
pub fn brute_percent(projects: &[RandomProject]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for p in projects {
        for (table, rows) in &p.tables {
            let mut by_measure: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for (m, v, ty) in rows {
                if ty != "percent" {
                    continue;
                }
                let values = by_measure.entry(m).or_default();
                if let Ok(x) = v.parse::<f64>() {
                    values.push(x);
                }
            }
            for (m, values) in by_measure {
                let out_of_range = values.iter().any(|x| *x < 0.0 || *x > 100.0);
                let fraction = values.len() >= 3 && values.iter().all(|x| *x <= 1.0);
                if out_of_range || fraction {
                    out.insert((table.clone(), m.to_string()));
                }
            }
        }
    }
    out
}
