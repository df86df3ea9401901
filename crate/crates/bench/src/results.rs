//! Result files.
//!
//! One run writes under `<root>/<challenge>/<ek>/<teacher>/`:
//! `seed_<k>.jsonl` (evaluation records), `seed_<k>.curriculum.jsonl`
//! (teacher snapshots), `seed_<k>.teacher.jsonl` (ADR boundary or SPDL
//! distribution updates, when the teacher keeps them) and, when recorded,
//! `seed_<k>.student.jsonl` (every training episode).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use acl_core::harness::{Challenge, EvalRecord, RunOutput, TeacherTrace};
use acl_core::stats::{Comparison, RunGroup};
use acl_core::teacher::{EkLevel, TeacherKind};
use acl_core::AclError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, BenchResult};

pub const RESULTS_ENV: &str = "ACL_RESULTS_DIR";
pub const DEFAULT_ROOT: &str = "results";

/// Output root: an explicit path, else `$ACL_RESULTS_DIR`, else `results`.
pub fn results_root(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(RESULTS_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT)),
    }
}

pub fn run_dir(root: &Path, challenge: Challenge, ek: EkLevel, teacher: TeacherKind) -> PathBuf {
    root.join(challenge.name()).join(ek.to_string()).join(teacher.name())
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> BenchResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).expect("result types serialize");
        writeln!(w, "{line}").map_err(|e| BenchError::io(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> BenchResult<Vec<T>> {
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BenchError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|source| BenchError::Json { path: path.display().to_string(), line: i + 1, source })?;
        out.push(item);
    }
    Ok(out)
}

/// Paths of the files one run writes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub records: PathBuf,
    pub curriculum: PathBuf,
    pub teacher: Option<PathBuf>,
    pub student: Option<PathBuf>,
}

pub fn write_run(root: &Path, out: &RunOutput) -> BenchResult<RunFiles> {
    let first = out
        .records
        .first()
        .ok_or_else(|| BenchError::Argument("run has no evaluation records".into()))?;
    let dir = run_dir(root, first.challenge, first.ek, first.teacher);
    let stem = format!("seed_{}", first.seed);
    let records = dir.join(format!("{stem}.jsonl"));
    write_jsonl(&records, &out.records)?;
    let curriculum = dir.join(format!("{stem}.curriculum.jsonl"));
    write_jsonl(&curriculum, &out.curriculum)?;
    let teacher_path = dir.join(format!("{stem}.teacher.jsonl"));
    let teacher = match &out.teacher_trace {
        TeacherTrace::None => None,
        TeacherTrace::Adr(updates) => write_jsonl(&teacher_path, updates).map(|_| Some(teacher_path))?,
        TeacherTrace::Spdl(updates) => write_jsonl(&teacher_path, updates).map(|_| Some(teacher_path))?,
    };
    let student = match &out.trajectory {
        Some(steps) => {
            let p = dir.join(format!("{stem}.student.jsonl"));
            write_jsonl(&p, steps)?;
            Some(p)
        }
        None => None,
    };
    Ok(RunFiles { records, curriculum, teacher, student })
}

fn is_record_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name.strip_prefix("seed_")
        .and_then(|s| s.strip_suffix(".jsonl"))
        .is_some_and(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
}

/// Evaluation-record files under `paths` (files or directories), sorted.
pub fn find_record_files(paths: &[PathBuf]) -> BenchResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        for entry in walkdir::WalkDir::new(p).sort_by_file_name() {
            let entry = entry.map_err(|e| {
                let path = e.path().unwrap_or(p).to_path_buf();
                BenchError::io(&path, e.into())
            })?;
            if entry.file_type().is_file() && is_record_file(entry.path()) {
                files.push(entry.into_path());
            }
        }
    }
    files.sort();
    files.dedup();
    Ok(files)
}

/// Loads every run under `paths`, grouped by teacher name with seeds in
/// ascending order. All runs must share one challenge and EK level.
pub fn load_groups(paths: &[PathBuf]) -> BenchResult<BTreeMap<String, RunGroup>> {
    let files = find_record_files(paths)?;
    if files.is_empty() {
        return Err(BenchError::Argument("no seed_<k>.jsonl files found".into()));
    }
    let mut runs: BTreeMap<String, Vec<(u64, Vec<EvalRecord>)>> = BTreeMap::new();
    let mut setting: Option<(Challenge, EkLevel)> = None;
    for f in &files {
        let records: Vec<EvalRecord> = read_jsonl(f)?;
        let Some(first) = records.first() else { continue };
        let this = (first.challenge, first.ek);
        if *setting.get_or_insert(this) != this {
            return Err(AclError::InvalidConfig("runs to compare must share one challenge and EK level".into()).into());
        }
        runs.entry(first.teacher.name().to_string()).or_default().push((first.seed, records));
    }
    let mut groups = BTreeMap::new();
    for (name, mut seeds) in runs {
        seeds.sort_by_key(|s| s.0);
        let episodes: Vec<u64> = seeds[0].1.iter().map(|r| r.episode).collect();
        let mut curves = Vec::with_capacity(seeds.len());
        for (seed, records) in &seeds {
            if records.iter().map(|r| r.episode).ne(episodes.iter().copied()) {
                return Err(AclError::MismatchedGrids(format!("{name} seed {seed}")).into());
            }
            curves.push(records.iter().map(|r| r.pct_mastered).collect());
        }
        groups.insert(name, RunGroup { episodes, runs: curves });
    }
    Ok(groups)
}

/// Final outcome of one run, a row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub teacher: String,
    pub seed: u64,
    pub embodiment: String,
    pub learner: String,
    pub final_pct_mastered: f64,
    pub final_capability: f64,
}

impl SummaryRow {
    pub fn of(out: &RunOutput) -> Option<Self> {
        let last = out.records.last()?;
        Some(SummaryRow {
            teacher: last.teacher.name().to_string(),
            seed: last.seed,
            embodiment: out.embodiment.name().to_string(),
            learner: out.learner.name().to_string(),
            final_pct_mastered: last.pct_mastered,
            final_capability: out.final_capability,
        })
    }
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> BenchResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

pub fn read_summary(path: &Path) -> BenchResult<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<SummaryRow>, _>>()?)
}

/// Adds `rows` to the summary at `path`, replacing rows of the same
/// teacher and seed; the file stays sorted by teacher and seed.
pub fn merge_summary(path: &Path, rows: &[SummaryRow]) -> BenchResult<()> {
    let mut all: BTreeMap<(String, u64), SummaryRow> = BTreeMap::new();
    if path.exists() {
        for r in read_summary(path)? {
            all.insert((r.teacher.clone(), r.seed), r);
        }
    }
    for r in rows {
        all.insert((r.teacher.clone(), r.seed), r.clone());
    }
    write_summary(path, &all.into_values().collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCsvRow {
    pub teacher: String,
    pub seeds: usize,
    pub final_mean: f64,
    pub final_std: f64,
    pub final_p: f64,
    /// One character per evaluation point: `*` where p < 0.05 against the
    /// baseline, `.` elsewhere.
    pub significance: String,
}

pub fn comparison_rows(c: &Comparison) -> Vec<ComparisonCsvRow> {
    c.rows
        .iter()
        .map(|r| ComparisonCsvRow {
            teacher: r.group.clone(),
            seeds: r.seeds,
            final_mean: r.final_mean,
            final_std: r.final_std,
            final_p: *r.p_values.last().unwrap_or(&1.0),
            significance: r.stars.iter().map(|s| if *s { '*' } else { '.' }).collect(),
        })
        .collect()
}

pub fn write_comparison(path: &Path, c: &Comparison) -> BenchResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in comparison_rows(c) {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Final-performance table for the terminal.
pub fn format_comparison(c: &Comparison) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<12} {:>5} {:>15} {:>10}  vs {}", "teacher", "seeds", "final %", "p", c.baseline);
    for r in comparison_rows(c) {
        let mark = if r.teacher != c.baseline && r.final_p < acl_core::stats::SIGNIFICANCE { "*" } else { "" };
        let _ = writeln!(
            s,
            "{:<12} {:>5} {:>7.1} ± {:<5.1} {:>10.3e}{mark}",
            r.teacher, r.seeds, r.final_mean, r.final_std, r.final_p
        );
    }
    s
}
