//! Many (teacher, seed) runs of one challenge, executed in parallel.

use std::path::{Path, PathBuf};

use acl_core::harness::{run_experiment_with, ChallengeConfig, RunOptions, RunOutput};
use acl_core::teacher::{EkLevel, HyperParams, TeacherKind};
use rayon::prelude::*;

use crate::error::BenchResult;
use crate::results::{merge_summary, write_run, SummaryRow};

#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub config: ChallengeConfig,
    pub teachers: Vec<TeacherKind>,
    pub ek: EkLevel,
    pub seeds: Vec<u64>,
    pub hp: HyperParams,
    pub options: RunOptions,
}

impl BatchSpec {
    pub fn jobs(&self) -> Vec<(TeacherKind, u64)> {
        self.teachers.iter().flat_map(|t| self.seeds.iter().map(move |s| (*t, *s))).collect()
    }

    pub fn run_one(&self, teacher: TeacherKind, seed: u64) -> BenchResult<RunOutput> {
        Ok(run_experiment_with(&self.config, teacher, self.ek, seed, &self.hp, self.options)?)
    }
}

/// Runs every job, writes each run's files under `root` and merges the
/// outcomes into the `summary.csv` next to the teacher directories.
/// `on_done` sees each run as it finishes (in completion order). Returns
/// this batch's rows, sorted by teacher and seed.
pub fn run_batch(
    spec: &BatchSpec,
    root: &Path,
    on_done: impl Fn(&RunOutput) + Sync,
) -> BenchResult<(Vec<SummaryRow>, PathBuf)> {
    let mut rows = spec
        .jobs()
        .into_par_iter()
        .map(|(teacher, seed)| {
            let out = spec.run_one(teacher, seed)?;
            write_run(root, &out)?;
            on_done(&out);
            Ok(SummaryRow::of(&out).expect("runs always evaluate at episode 0"))
        })
        .collect::<BenchResult<Vec<_>>>()?;
    rows.sort_by(|a, b| (&a.teacher, a.seed).cmp(&(&b.teacher, b.seed)));
    let summary = root.join(spec.config.challenge.name()).join(spec.ek.to_string()).join("summary.csv");
    merge_summary(&summary, &rows)?;
    Ok((rows, summary))
}
