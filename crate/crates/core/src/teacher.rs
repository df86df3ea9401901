//! Common teacher contract: expert-knowledge setups, the teacher factory and
//! hyperparameter tables, and the episodic teacher/student cycle.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adr::{Adr, AdrParams};
use crate::error::{AclError, Result};
use crate::gaussian::GaussianDist;
use crate::gmm_teachers::{AlpGmm, CovarGmm, GmmParams};
use crate::riac::{Riac, RiacParams};
use crate::spdl::{Spdl, SpdlParams};
use crate::task_space::{BoxSpace, Task};

pub const MASTERY_THRESHOLD: f64 = 230.0;

/// Standard deviation of initial distributions, as a fraction of each
/// dimension's range.
pub const INITIAL_STD_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EkLevel {
    None,
    Low,
    High,
}

impl EkLevel {
    pub const ALL: [EkLevel; 3] = [EkLevel::None, EkLevel::Low, EkLevel::High];

    pub fn name(self) -> &'static str {
        match self {
            EkLevel::None => "none",
            EkLevel::Low => "low",
            EkLevel::High => "high",
        }
    }
}

impl fmt::Display for EkLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EkLevel {
    type Err = AclError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "no" => Ok(EkLevel::None),
            "low" => Ok(EkLevel::Low),
            "high" => Ok(EkLevel::High),
            other => Err(AclError::InvalidConfig(format!("unknown expert-knowledge level `{other}`"))),
        }
    }
}

/// Prior knowledge handed to a teacher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertKnowledge {
    pub level: EkLevel,
    pub initial: Option<GaussianDist>,
    pub target: Option<GaussianDist>,
    pub mastery_threshold: Option<f64>,
}

impl ExpertKnowledge {
    pub fn none() -> Self {
        Self { level: EkLevel::None, initial: None, target: None, mastery_threshold: None }
    }

    pub fn is_mastered(&self, episodic_return: f64) -> bool {
        self.mastery_threshold.is_some_and(|t| episodic_return > t)
    }
}

/// Initial distribution centered on `mean` with stds of 10% of each range.
pub fn initial_distribution(space: &BoxSpace, mean: Vec<f64>) -> GaussianDist {
    let stds: Vec<f64> = space.ranges().iter().map(|r| INITIAL_STD_RATIO * r).collect();
    GaussianDist::diagonal(mean, &stds).expect("finite stds")
}

/// Target distribution: space center, stds of a quarter of each range.
pub fn target_distribution(space: &BoxSpace) -> GaussianDist {
    let stds: Vec<f64> = space.ranges().iter().map(|r| r / 4.0).collect();
    GaussianDist::diagonal(space.center().0, &stds).expect("finite stds")
}

/// Builds the knowledge available at `level`. `anchor` is the easy task the
/// High setup centers its initial distribution on, and must be given exactly
/// when `level` is High.
pub fn ek_setup<R: Rng + ?Sized>(
    space: &BoxSpace,
    level: EkLevel,
    anchor: Option<&Task>,
    rng: &mut R,
) -> Result<ExpertKnowledge> {
    match (level, anchor) {
        (EkLevel::None, None) => Ok(ExpertKnowledge::none()),
        (EkLevel::Low, None) => {
            let mean = space.uniform_sample(rng).0;
            Ok(ExpertKnowledge {
                level,
                initial: Some(initial_distribution(space, mean)),
                target: None,
                mastery_threshold: Some(MASTERY_THRESHOLD),
            })
        }
        (EkLevel::High, Some(a)) => {
            space.check_dims(a)?;
            Ok(ExpertKnowledge {
                level,
                initial: Some(initial_distribution(space, a.0.clone())),
                target: Some(target_distribution(space)),
                mastery_threshold: Some(MASTERY_THRESHOLD),
            })
        }
        (EkLevel::High, None) => Err(AclError::InvalidExpertKnowledge("high expert knowledge needs an anchor task")),
        (_, Some(_)) => Err(AclError::InvalidExpertKnowledge("an anchor task is only used by high expert knowledge")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TeacherKind {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "adr")]
    Adr,
    #[serde(rename = "riac")]
    Riac,
    #[serde(rename = "covar-gmm")]
    CovarGmm,
    #[serde(rename = "alp-gmm")]
    AlpGmm,
    #[serde(rename = "spdl")]
    Spdl,
}

impl TeacherKind {
    pub const ALL: [TeacherKind; 6] = [
        TeacherKind::Random,
        TeacherKind::Adr,
        TeacherKind::Riac,
        TeacherKind::CovarGmm,
        TeacherKind::AlpGmm,
        TeacherKind::Spdl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TeacherKind::Random => "random",
            TeacherKind::Adr => "adr",
            TeacherKind::Riac => "riac",
            TeacherKind::CovarGmm => "covar-gmm",
            TeacherKind::AlpGmm => "alp-gmm",
            TeacherKind::Spdl => "spdl",
        }
    }

    pub fn needs_initial(self) -> bool {
        matches!(self, TeacherKind::Adr | TeacherKind::Spdl)
    }

    pub fn needs_target(self) -> bool {
        matches!(self, TeacherKind::Spdl)
    }

    pub fn needs_threshold(self) -> bool {
        matches!(self, TeacherKind::Adr)
    }

    /// Checks the knowledge this teacher cannot run without.
    pub fn check_requirements(self, ek: &ExpertKnowledge) -> Result<()> {
        let missing = (self.needs_initial() && ek.initial.is_none())
            || (self.needs_target() && ek.target.is_none())
            || (self.needs_threshold() && ek.mastery_threshold.is_none());
        if !missing {
            return Ok(());
        }
        Err(AclError::MissingExpertKnowledge(match self {
            TeacherKind::Adr => "ADR requires initial distribution and mastery threshold".to_string(),
            TeacherKind::Spdl => "SPDL requires initial and target distributions".to_string(),
            _ => unreachable!("teacher without requirements"),
        }))
    }
}

impl fmt::Display for TeacherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TeacherKind {
    type Err = AclError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.to_ascii_lowercase().chars().filter(|c| !matches!(c, '-' | '_' | ' ')).collect();
        match key.as_str() {
            "random" => Ok(TeacherKind::Random),
            "adr" => Ok(TeacherKind::Adr),
            "riac" => Ok(TeacherKind::Riac),
            "covargmm" => Ok(TeacherKind::CovarGmm),
            "alpgmm" => Ok(TeacherKind::AlpGmm),
            "spdl" => Ok(TeacherKind::Spdl),
            "goalgan" | "settersolver" => Err(AclError::UnsupportedTeacher(format!(
                "{s} trains a deep generative model and is not available in this toolkit"
            ))),
            _ => Err(AclError::UnknownTeacher(s.to_string())),
        }
    }
}

/// Hyperparameters of every teacher, starting from the tuned defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub adr: AdrParams,
    pub riac: RiacParams,
    pub covar_gmm: GmmParams,
    pub alp_gmm: GmmParams,
    pub spdl: SpdlParams,
    /// Covar-GMM weights components by `max(0, cov)` instead of `|cov|`.
    pub covar_positive_only: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            adr: AdrParams::default(),
            riac: RiacParams::default(),
            covar_gmm: GmmParams::COVAR_GMM,
            alp_gmm: GmmParams::ALP_GMM,
            spdl: SpdlParams::default(),
            covar_positive_only: false,
        }
    }
}

fn count(key: &str, value: f64, min: usize) -> Result<usize> {
    if libm::trunc(value) != value || value < min as f64 || !value.is_finite() {
        return Err(AclError::InvalidHyperParameter {
            key: key.to_string(),
            reason: format!("expected an integer >= {min}, got {value}"),
        });
    }
    Ok(value as usize)
}

fn probability(key: &str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(AclError::InvalidHyperParameter {
            key: key.to_string(),
            reason: format!("expected a probability, got {value}"),
        });
    }
    Ok(value)
}

fn non_negative(key: &str, value: f64) -> Result<f64> {
    if !(value >= 0.0) {
        return Err(AclError::InvalidHyperParameter {
            key: key.to_string(),
            reason: format!("expected a non-negative value, got {value}"),
        });
    }
    Ok(value)
}

impl HyperParams {
    /// Overrides one hyperparameter, using the names of the tuning table
    /// (`t_H`, `max_s`, `r_p`, `epsilon`, ...).
    pub fn set(&mut self, teacher: TeacherKind, key: &str, value: f64) -> Result<()> {
        let unknown = || AclError::UnknownHyperParameter { teacher: teacher.name().to_string(), key: key.to_string() };
        match teacher {
            TeacherKind::Random => return Err(unknown()),
            TeacherKind::Adr => {
                let p = &mut self.adr;
                match key {
                    "t_L" | "t_low" => p.t_low = value,
                    "t_H" | "t_high" => p.t_high = value,
                    "p_b" => p.boundary_prob = probability(key, value)?,
                    "m" => p.buffer_size = count(key, value, 1)?,
                    "delta" | "Δ" => p.step = non_negative(key, value)?,
                    _ => return Err(unknown()),
                }
            }
            TeacherKind::Riac => {
                let p = &mut self.riac;
                match key {
                    "max_s" => p.max_region_size = count(key, value, 2)?,
                    "n" => p.split_candidates = count(key, value, 1)?,
                    "min_d" => {
                        if !(value > 0.0 && value < 0.5) {
                            return Err(AclError::InvalidHyperParameter {
                                key: key.to_string(),
                                reason: format!("expected a ratio in (0, 0.5), got {value}"),
                            });
                        }
                        p.min_dim_ratio = value
                    }
                    "explore" => p.explore_prob = probability(key, value)?,
                    _ => return Err(unknown()),
                }
            }
            TeacherKind::CovarGmm | TeacherKind::AlpGmm => {
                if teacher == TeacherKind::CovarGmm && key == "positive_only" {
                    self.covar_positive_only = value != 0.0;
                    return Ok(());
                }
                let p = if teacher == TeacherKind::CovarGmm { &mut self.covar_gmm } else { &mut self.alp_gmm };
                match key {
                    "n" => p.fit_rate = count(key, value, 2)?,
                    "max_k" => p.max_k = count(key, value, 2)?,
                    "r_p" => p.random_prob = probability(key, value)?,
                    "r_min" => p.return_range.0 = value,
                    "r_max" => p.return_range.1 = value,
                    _ => return Err(unknown()),
                }
            }
            TeacherKind::Spdl => {
                let p = &mut self.spdl;
                match key {
                    "offset" => p.offset = count(key, value, 1)? as u64,
                    "step" => p.step = count(key, value, 1)? as u64,
                    "K_alpha" | "k_alpha" => p.k_alpha = count(key, value, 0)? as u64,
                    "zeta" => p.zeta = non_negative(key, value)?,
                    "epsilon" => p.epsilon = non_negative(key, value)?,
                    "alpha" => p.alpha_override = Some(non_negative(key, value)?),
                    _ => return Err(unknown()),
                }
            }
        }
        Ok(())
    }
}

/// The (task, return) record an episode sends back to its teacher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeFeedback {
    pub task: Task,
    pub episodic_return: f64,
    pub mastered: bool,
    pub episode_index: u64,
}

/// Uniform sampling over the whole space.
#[derive(Debug, Clone)]
pub struct RandomTeacher {
    space: BoxSpace,
    rng: ChaCha8Rng,
}

impl RandomTeacher {
    pub fn new(space: BoxSpace, rng: ChaCha8Rng) -> Self {
        Self { space, rng }
    }

    pub fn sample_task(&mut self) -> Task {
        self.space.uniform_sample(&mut self.rng)
    }
}

#[derive(Debug, Clone)]
pub enum Teacher {
    Random(RandomTeacher),
    Adr(Adr),
    Riac(Riac),
    CovarGmm(CovarGmm),
    AlpGmm(AlpGmm),
    Spdl(Spdl),
}

impl Teacher {
    pub fn kind(&self) -> TeacherKind {
        match self {
            Teacher::Random(_) => TeacherKind::Random,
            Teacher::Adr(_) => TeacherKind::Adr,
            Teacher::Riac(_) => TeacherKind::Riac,
            Teacher::CovarGmm(_) => TeacherKind::CovarGmm,
            Teacher::AlpGmm(_) => TeacherKind::AlpGmm,
            Teacher::Spdl(_) => TeacherKind::Spdl,
        }
    }

    pub fn sample_task(&mut self) -> Task {
        match self {
            Teacher::Random(t) => t.sample_task(),
            Teacher::Adr(t) => t.sample_task(),
            Teacher::Riac(t) => t.sample_task(),
            Teacher::CovarGmm(t) => t.sample_task(),
            Teacher::AlpGmm(t) => t.sample_task(),
            Teacher::Spdl(t) => t.sample_task(),
        }
    }

    /// Delivers one episode's outcome. `value` estimates the student's
    /// expected return on a task; only SPDL queries it.
    pub fn observe(&mut self, fb: &EpisodeFeedback, value: &dyn Fn(&Task) -> f64) {
        match self {
            Teacher::Random(_) => {}
            Teacher::Adr(t) => t.observe(fb.episodic_return, fb.episode_index),
            Teacher::Riac(t) => t.observe(&fb.task, fb.episodic_return),
            Teacher::CovarGmm(t) => t.observe(&fb.task, fb.episodic_return),
            Teacher::AlpGmm(t) => t.observe(&fb.task, fb.episodic_return),
            Teacher::Spdl(t) => t.observe(&fb.task, value),
        }
    }

    /// Draws from the teacher's current curriculum without its exploration
    /// mechanisms, leaving the teacher untouched. Mixture teachers that have
    /// not fitted yet fall back to their bootstrap distribution.
    pub fn non_exploratory_sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Task> {
        match self {
            Teacher::Random(t) => (0..count).map(|_| t.space.uniform_sample(rng)).collect(),
            Teacher::Adr(t) => t.non_exploratory_sample(count, rng),
            Teacher::Riac(t) => t.non_exploratory_sample(count, rng),
            Teacher::CovarGmm(t) => t.non_exploratory_sample(count, rng),
            Teacher::AlpGmm(t) => t.non_exploratory_sample(count, rng),
            Teacher::Spdl(t) => t.non_exploratory_sample(count, rng),
        }
    }
}

/// Builds a teacher with hyperparameters `hp`, checking the knowledge it
/// needs. Mixture teachers bootstrap from the initial distribution only when
/// the level is High.
pub fn make_teacher(
    kind: TeacherKind,
    space: &BoxSpace,
    ek: &ExpertKnowledge,
    hp: &HyperParams,
    seed: u64,
) -> Result<Teacher> {
    kind.check_requirements(ek)?;
    let rng = ChaCha8Rng::seed_from_u64(seed);
    let space = space.clone();
    let bootstrap = if ek.level == EkLevel::High { ek.initial.clone() } else { None };
    Ok(match kind {
        TeacherKind::Random => Teacher::Random(RandomTeacher::new(space, rng)),
        TeacherKind::Adr => {
            let anchor = Task(ek.initial.as_ref().expect("checked").mean().to_vec());
            Teacher::Adr(Adr::new(space, hp.adr, &anchor, rng))
        }
        TeacherKind::Riac => Teacher::Riac(Riac::new(space, hp.riac, rng)),
        TeacherKind::CovarGmm => {
            let mut t = CovarGmm::new(space, hp.covar_gmm, bootstrap, rng);
            t.positive_only = hp.covar_positive_only;
            Teacher::CovarGmm(t)
        }
        TeacherKind::AlpGmm => Teacher::AlpGmm(AlpGmm::new(space, hp.alp_gmm, bootstrap, rng)),
        TeacherKind::Spdl => Teacher::Spdl(Spdl::new(
            space,
            hp.spdl,
            ek.initial.clone().expect("checked"),
            ek.target.clone().expect("checked"),
            rng,
        )),
    })
}

/// A learner the teacher can train and query.
pub trait Student {
    /// Trains one episode on `task` and returns its episodic return.
    fn train(&mut self, task: &Task, episode_index: u64) -> f64;
    /// Noise-free expected return on `task`, without learning.
    fn predict_return(&self, task: &Task) -> f64;
}

/// One teacher/student interaction: sample, train, report back.
pub fn teacher_cycle<S: Student + ?Sized>(
    teacher: &mut Teacher,
    student: &mut S,
    ek: &ExpertKnowledge,
    episode_index: u64,
) -> EpisodeFeedback {
    let task = teacher.sample_task();
    let episodic_return = student.train(&task, episode_index);
    let fb = EpisodeFeedback {
        mastered: episodic_return > ek.mastery_threshold.unwrap_or(MASTERY_THRESHOLD),
        task,
        episodic_return,
        episode_index,
    };
    let s: &S = student;
    teacher.observe(&fb, &|t| s.predict_return(t));
    fb
}
