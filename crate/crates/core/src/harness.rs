//! Experiment protocol: challenge configurations, fixed test sets, and the
//! teacher/student loop with periodic evaluation.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adr::AdrUpdate;
use crate::error::{AclError, Result};
use crate::procgen::{CppnWeights, ThetaSpace};
use crate::stats::pct_mastered;
use crate::spdl::SpdlUpdate;
use crate::student::{DifficultyModel, Embodiment, LearnerProfile, StudentParams, StudentStep, SyntheticStudent};
use crate::task_space::{BoxSpace, ShuffleMap, Task};
use crate::teacher::{
    ek_setup, initial_distribution, make_teacher, target_distribution, teacher_cycle, EkLevel, ExpertKnowledge,
    HyperParams, Teacher, TeacherKind, MASTERY_THRESHOLD,
};

pub const DEFAULT_BUDGET: u64 = 20_000;
pub const DEFAULT_EVAL_EVERY: u64 = 500;
/// Finer evaluation grid of the forgetting challenge, for recovery times.
pub const FORGETTING_EVAL_EVERY: u64 = 100;
pub const DEFAULT_SEEDS: usize = 32;
pub const PARKOUR_SEEDS: usize = 48;
pub const TEST_SET_SIZE: usize = 100;
/// Tasks drawn from the teacher at each curriculum snapshot.
pub const SNAPSHOT_TASKS: usize = 100;
/// Curriculum snapshots per run.
pub const SNAPSHOTS_PER_RUN: u64 = 80;
/// Cuts per dimension of the rugged challenge.
pub const RUGGED_CUTS: usize = 2;

const STREAM_ENV: u64 = 0;
const STREAM_TEACHER: u64 = 1;
const STREAM_STUDENT: u64 = 2;
const STREAM_MONITOR: u64 = 3;

/// Independent random stream `k` of a run seed.
pub fn run_stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Challenge {
    MostlyUnfeasible,
    MostlyTrivial,
    Forgetting,
    Rugged,
    DiverseStudents,
    Parkour,
}

impl Challenge {
    pub const ALL: [Challenge; 6] = [
        Challenge::MostlyUnfeasible,
        Challenge::MostlyTrivial,
        Challenge::Forgetting,
        Challenge::Rugged,
        Challenge::DiverseStudents,
        Challenge::Parkour,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Challenge::MostlyUnfeasible => "mostly_unfeasible",
            Challenge::MostlyTrivial => "mostly_trivial",
            Challenge::Forgetting => "forgetting",
            Challenge::Rugged => "rugged",
            Challenge::DiverseStudents => "diverse_students",
            Challenge::Parkour => "parkour",
        }
    }
}

impl fmt::Display for Challenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Challenge {
    type Err = AclError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_").to_ascii_lowercase();
        Challenge::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| AclError::InvalidConfig(format!("unknown challenge `{s}`")))
    }
}

/// The space of the original Stump Tracks, used for every Stump test set.
pub fn stump_eval_space() -> BoxSpace {
    BoxSpace::new(vec![0.0, 0.0], vec![3.0, 6.0]).expect("valid space")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChallengeConfig {
    pub challenge: Challenge,
    pub space: BoxSpace,
    /// Easy task that centers the High expert-knowledge initial
    /// distribution. Parkour has none.
    pub anchor: Option<Task>,
    pub budget: u64,
    pub eval_every: u64,
    pub seeds: usize,
    /// Student resets, as fractions of the budget.
    pub reset_fractions: Vec<f64>,
    pub theta_space: ThetaSpace,
}

impl ChallengeConfig {
    pub fn new(challenge: Challenge) -> Self {
        let stump = |lo: f64, hi: f64| BoxSpace::new(vec![lo, 0.0], vec![hi, 6.0]).expect("valid space");
        let base = Self {
            challenge,
            space: stump_eval_space(),
            anchor: Some(Task(vec![0.0, 6.0])),
            budget: DEFAULT_BUDGET,
            eval_every: DEFAULT_EVAL_EVERY,
            seeds: DEFAULT_SEEDS,
            reset_fractions: Vec::new(),
            theta_space: ThetaSpace::Medium,
        };
        match challenge {
            Challenge::MostlyUnfeasible => Self { space: stump(0.0, 9.0), ..base },
            Challenge::MostlyTrivial => Self { space: stump(-3.0, 3.0), ..base },
            Challenge::Forgetting => Self { reset_fractions: vec![0.35, 0.7], eval_every: FORGETTING_EVAL_EVERY, ..base },
            Challenge::Rugged | Challenge::DiverseStudents => base,
            Challenge::Parkour => Self {
                space: ThetaSpace::Medium.parkour_space(),
                anchor: None,
                seeds: PARKOUR_SEEDS,
                ..base
            },
        }
    }

    pub fn with_budget(mut self, budget: u64, eval_every: u64) -> Self {
        self.budget = budget;
        self.eval_every = eval_every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.eval_every == 0 || !self.budget.is_multiple_of(self.eval_every) {
            return Err(AclError::InvalidConfig("budget must be a positive multiple of eval_every".into()));
        }
        if self.seeds == 0 {
            return Err(AclError::InvalidConfig("need at least one seed".into()));
        }
        Ok(())
    }

    /// Episodes at which the student is reset, `⌈f · E⌉` for each fraction.
    pub fn resets(&self) -> Vec<u64> {
        self.reset_fractions.iter().map(|f| libm::ceil(f * self.budget as f64) as u64).collect()
    }

    /// Episodes between curriculum snapshots.
    pub fn snapshot_every(&self) -> u64 {
        (self.budget / SNAPSHOTS_PER_RUN).max(1)
    }

    /// Embodiment and learner of the student for `seed`.
    pub fn student_profile(&self, seed: u64) -> (Embodiment, LearnerProfile) {
        match self.challenge {
            Challenge::DiverseStudents => {
                let emb = if seed.is_multiple_of(2) { Embodiment::ShortWalker } else { Embodiment::Spider };
                let learner = if (seed / 2).is_multiple_of(2) { LearnerProfile::Sac } else { LearnerProfile::Ppo };
                (emb, learner)
            }
            Challenge::Parkour => {
                let emb = [Embodiment::WalkerType, Embodiment::SwimmerType, Embodiment::ClimberType][(seed % 3) as usize];
                (emb, LearnerProfile::Sac)
            }
            _ => (Embodiment::Default, LearnerProfile::Sac),
        }
    }

    /// Difficulty model of the run with `seed`; the rugged challenge draws
    /// its shuffle map from `env`.
    pub fn difficulty_model(&self, embodiment: Embodiment, env: &mut ChaCha8Rng) -> Result<DifficultyModel> {
        Ok(match self.challenge {
            Challenge::Rugged => DifficultyModel::stump_shuffled(ShuffleMap::build(&self.space, RUGGED_CUTS, env)?, embodiment),
            Challenge::Parkour => DifficultyModel::parkour(embodiment, Arc::new(CppnWeights::canonical())),
            _ => DifficultyModel::stump(embodiment),
        })
    }
}

/// `side × side` grid of cell centers over a 2D space.
pub fn grid_2d(space: &BoxSpace, side: usize) -> Vec<Task> {
    let mut tasks = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let u = [(i as f64 + 0.5) / side as f64, (j as f64 + 0.5) / side as f64];
            tasks.push(space.denormalize(&u));
        }
    }
    tasks
}

/// Fixed test set of a challenge. Stump challenges share a 10×10 grid over
/// the original Stump Tracks space; Parkour crosses a 5×5 θ grid (θ3 in a
/// Latin square) with four in-niche (creeper, water) settings of the
/// embodiment.
pub fn make_test_set(challenge: Challenge, embodiment: Embodiment) -> Vec<Task> {
    if challenge != Challenge::Parkour {
        return grid_2d(&stump_eval_space(), 10);
    }
    let b = ThetaSpace::Medium.bounds();
    let at = |d: usize, k: usize| b[d].0 + (k as f64 + 0.5) / 5.0 * (b[d].1 - b[d].0);
    let niches: [(f64, f64, f64); 4] = match embodiment {
        Embodiment::SwimmerType => [(2.0, 2.5, 0.825), (2.0, 2.5, 0.875), (2.0, 2.5, 0.925), (2.0, 2.5, 0.975)],
        Embodiment::ClimberType => [(2.0, 0.625, 0.05), (2.0, 0.625, 0.15), (2.0, 1.875, 0.05), (2.0, 1.875, 0.15)],
        _ => [(2.0, 2.5, 0.025), (2.0, 2.5, 0.075), (2.0, 2.5, 0.125), (2.0, 2.5, 0.175)],
    };
    let mut tasks = Vec::with_capacity(TEST_SET_SIZE);
    for (mc, dc, tau) in niches {
        for i in 0..5 {
            for j in 0..5 {
                tasks.push(Task(vec![at(0, i), at(1, j), at(2, (i + j) % 5), mc, dc, tau]));
            }
        }
    }
    tasks
}

/// Knowledge the teacher actually receives: SPDL without High knowledge
/// gets a random initial distribution (reusing the Low one) and the
/// default target.
pub fn teacher_knowledge(
    kind: TeacherKind,
    space: &BoxSpace,
    ek: &ExpertKnowledge,
    env: &mut ChaCha8Rng,
) -> ExpertKnowledge {
    let mut ek = ek.clone();
    if kind == TeacherKind::Spdl && ek.level != EkLevel::High {
        if ek.initial.is_none() {
            ek.initial = Some(initial_distribution(space, space.uniform_sample(env).0));
        }
        ek.target = Some(target_distribution(space));
    }
    ek
}

/// Teachers that can run at `level` without extra knowledge beyond what
/// the setup provides.
pub fn permitted_teachers(level: EkLevel) -> Vec<TeacherKind> {
    let space = stump_eval_space();
    let mut env = run_stream(0, STREAM_ENV);
    let anchor = Task(vec![0.0, 6.0]);
    let ek = ek_setup(&space, level, (level == EkLevel::High).then_some(&anchor), &mut env).expect("valid setup");
    TeacherKind::ALL
        .into_iter()
        .filter(|k| k.check_requirements(&teacher_knowledge(*k, &space, &ek, &mut env)).is_ok())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub episode: u64,
    pub pct_mastered: f64,
    /// Mean training return since the previous evaluation; absent before
    /// the first episode.
    pub avg_train_return: Option<f64>,
    pub teacher: TeacherKind,
    pub challenge: Challenge,
    pub ek: EkLevel,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSnapshot {
    pub episode: u64,
    pub tasks: Vec<Task>,
}

/// Parameter history of teachers that keep one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "teacher", content = "updates", rename_all = "snake_case")]
pub enum TeacherTrace {
    None,
    Adr(Vec<AdrUpdate>),
    Spdl(Vec<SpdlUpdate>),
}

impl TeacherTrace {
    pub fn of(teacher: &Teacher) -> Self {
        match teacher {
            Teacher::Adr(t) => TeacherTrace::Adr(t.history().to_vec()),
            Teacher::Spdl(t) => TeacherTrace::Spdl(t.history().to_vec()),
            _ => TeacherTrace::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub records: Vec<EvalRecord>,
    pub curriculum: Vec<CurriculumSnapshot>,
    pub embodiment: Embodiment,
    pub learner: LearnerProfile,
    pub shuffle: Option<ShuffleMap>,
    pub final_capability: f64,
    pub teacher_trace: TeacherTrace,
    /// Every training episode, when requested.
    pub trajectory: Option<Vec<StudentStep>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct RunOptions {
    /// Parameters of the default learner profile.
    pub student: StudentParams,
    pub record_trajectory: bool,
}


/// Percentage of the test set mastered by the student, without training it.
pub fn evaluate_student(student: &SyntheticStudent, tests: &[Task]) -> Result<f64> {
    let returns = tests.iter().map(|t| student.evaluate(t)).collect::<Result<Vec<f64>>>()?;
    pct_mastered(&returns, MASTERY_THRESHOLD)
}

/// Runs one teacher on one challenge for the whole budget.
pub fn run_experiment(
    cfg: &ChallengeConfig,
    kind: TeacherKind,
    level: EkLevel,
    seed: u64,
    hp: &HyperParams,
) -> Result<RunOutput> {
    run_experiment_with(cfg, kind, level, seed, hp, RunOptions::default())
}

/// As [`run_experiment`], with explicit student parameters and tracing.
pub fn run_experiment_with(
    cfg: &ChallengeConfig,
    kind: TeacherKind,
    level: EkLevel,
    seed: u64,
    hp: &HyperParams,
    opts: RunOptions,
) -> Result<RunOutput> {
    cfg.validate()?;
    let mut env = run_stream(seed, STREAM_ENV);
    let (embodiment, learner) = cfg.student_profile(seed);
    let model = cfg.difficulty_model(embodiment, &mut env)?;
    let shuffle = model.shuffle.clone();

    let anchor = match level {
        EkLevel::High => Some(cfg.anchor.as_ref().ok_or_else(|| {
            AclError::MissingExpertKnowledge(format!("{} has no easy anchor for high expert knowledge", cfg.challenge))
        })?),
        _ => None,
    };
    let ek = ek_setup(&cfg.space, level, anchor, &mut env)?;
    let teacher_ek = teacher_knowledge(kind, &cfg.space, &ek, &mut env);
    let teacher_seed = run_stream(seed, STREAM_TEACHER).next_u64();
    let mut teacher = make_teacher(kind, &cfg.space, &teacher_ek, hp, teacher_seed)?;

    let params = match learner {
        LearnerProfile::Sac => opts.student,
        other => other.params(),
    };
    let student_seed = run_stream(seed, STREAM_STUDENT).next_u64();
    let mut student = SyntheticStudent::new(params, model, cfg.resets(), student_seed);
    let mut monitor = run_stream(seed, STREAM_MONITOR);
    let tests = make_test_set(cfg.challenge, embodiment);

    let mut records = Vec::with_capacity((cfg.budget / cfg.eval_every + 1) as usize);
    let mut curriculum = Vec::new();
    let mut trajectory = opts.record_trajectory.then(|| Vec::with_capacity(cfg.budget as usize));
    let mut window = (0.0, 0usize);
    let snapshot_every = cfg.snapshot_every();
    for ep in 0..=cfg.budget {
        if ep % cfg.eval_every == 0 {
            records.push(EvalRecord {
                episode: ep,
                pct_mastered: evaluate_student(&student, &tests)?,
                avg_train_return: (window.1 > 0).then(|| window.0 / window.1 as f64),
                teacher: kind,
                challenge: cfg.challenge,
                ek: level,
                seed,
            });
            window = (0.0, 0);
        }
        if ep % snapshot_every == 0 {
            curriculum.push(CurriculumSnapshot { episode: ep, tasks: teacher.non_exploratory_sample(SNAPSHOT_TASKS, &mut monitor) });
        }
        if ep == cfg.budget {
            break;
        }
        let fb = teacher_cycle(&mut teacher, &mut student, &teacher_ek, ep);
        if let Some(steps) = trajectory.as_mut() {
            steps.push(StudentStep {
                episode: ep,
                capability: student.capability(),
                difficulty: student.model().difficulty(&fb.task)?,
                episodic_return: fb.episodic_return,
            });
        }
        window.0 += fb.episodic_return;
        window.1 += 1;
    }
    Ok(RunOutput {
        records,
        curriculum,
        embodiment,
        learner,
        shuffle,
        final_capability: student.capability(),
        teacher_trace: TeacherTrace::of(&teacher),
        trajectory,
    })
}

/// Episodes after `reset` until the test score first reaches `level` again,
/// or `None` if it never does. Uses the evaluation records of one run.
pub fn recovery_time(records: &[EvalRecord], reset: u64, level: f64) -> Option<u64> {
    records.iter().find(|r| r.episode > reset && r.pct_mastered >= level).map(|r| r.episode - reset)
}

/// Total post-reset recovery time of one run. Each reset's window ends at the
/// next reset (or `budget`); a reset whose pre-reset level is not regained
/// within its window counts as the whole window.
pub fn total_recovery(records: &[EvalRecord], resets: &[u64], budget: u64) -> u64 {
    let mut total = 0;
    for (i, &reset) in resets.iter().enumerate() {
        let end = resets.get(i + 1).copied().unwrap_or(budget);
        let window = end - reset;
        let level = match around_reset(records, reset) {
            Some((before, _)) => before,
            None => {
                total += window;
                continue;
            }
        };
        let t = records
            .iter()
            .find(|r| r.episode > reset && r.episode <= end && r.pct_mastered >= level)
            .map_or(window, |r| r.episode - reset);
        total += t;
    }
    total
}

/// Test score at the last evaluation before `reset` and at the first one
/// after it.
pub fn around_reset(records: &[EvalRecord], reset: u64) -> Option<(f64, f64)> {
    let before = records.iter().rev().find(|r| r.episode <= reset)?;
    let after = records.iter().find(|r| r.episode > reset)?;
    Some((before.pct_mastered, after.pct_mastered))
}

impl EvalRecord {
    pub fn key(&self) -> alloc::string::String {
        format!("{}/{}/{}/seed_{}", self.challenge, self.ek, self.teacher, self.seed)
    }
}
