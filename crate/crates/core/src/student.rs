//! Synthetic students: a scalar capability that grows when trained on tasks
//! slightly harder than what the student masters, and difficulty models that
//! map tasks to that same scale.

use alloc::sync::Arc;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{AclError, Result};
use crate::procgen::{terrain_profiles, CppnWeights, TerrainSpec};
use crate::task_space::{ShuffleMap, Task};
use crate::teacher::{Student, MASTERY_THRESHOLD};

/// Largest difficulty any student can reach.
pub const FEASIBILITY_CAP: f64 = 2.4;
/// Difficulty assigned to tasks no student can solve, above the cap.
pub const UNFEASIBLE_MARGIN: f64 = 10.0;
pub const MAX_RETURN: f64 = 300.0;
pub const MIN_RETURN: f64 = -100.0;
/// Stump spacing below which spacing adds difficulty.
pub const COMFORT_SPACING: f64 = 2.0;

/// Columns of the Parkour difficulty probe (one every 5 track columns).
pub const PARKOUR_PROBE_COLUMNS: usize = 40;
pub const ROUGHNESS_BASE: f64 = 0.15;
pub const ROUGHNESS_GAIN: f64 = 8.0;
pub const CLEARANCE_COMFORT: f64 = 2.0;
pub const CLEARANCE_GAIN: f64 = 0.5;
pub const CREEPER_GAP_GAIN: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embodiment {
    Default,
    ShortWalker,
    Spider,
    WalkerType,
    SwimmerType,
    ClimberType,
}

impl Embodiment {
    pub fn name(self) -> &'static str {
        match self {
            Embodiment::Default => "default",
            Embodiment::ShortWalker => "short_walker",
            Embodiment::Spider => "spider",
            Embodiment::WalkerType => "walker_type",
            Embodiment::SwimmerType => "swimmer_type",
            Embodiment::ClimberType => "climber_type",
        }
    }

    /// Multiplier on stump difficulty.
    pub fn scale(self) -> f64 {
        match self {
            Embodiment::ShortWalker => 1.3,
            Embodiment::Spider => 0.7,
            _ => 1.0,
        }
    }

    /// Whether a Parkour task with water level `tau` and creeper spacing
    /// `spacing` lies in this embodiment's milieu.
    pub fn in_niche(self, tau: f64, spacing: f64) -> bool {
        match self {
            Embodiment::SwimmerType => tau >= 0.8,
            Embodiment::ClimberType => tau <= 0.2 && spacing <= 2.5,
            _ => tau <= 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyKind {
    Stump,
    StumpShuffled,
    ParkourNiche,
}

/// Maps tasks to difficulties on the capability scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyModel {
    pub kind: DifficultyKind,
    pub shuffle: Option<ShuffleMap>,
    pub embodiment: Embodiment,
    pub feasibility_cap: f64,
    cppn: Option<Arc<CppnWeights>>,
}

/// `max(0, μ_s)`, plus `2 − Δ_s` when stumps are closer than 2.
pub fn stump_difficulty(mean_height: f64, spacing: f64) -> f64 {
    let h = mean_height.max(0.0);
    if spacing >= COMFORT_SPACING {
        h
    } else {
        h + (COMFORT_SPACING - spacing)
    }
}

/// Mean absolute ground slope and smallest ceiling clearance of a terrain
/// probed at [`PARKOUR_PROBE_COLUMNS`] columns.
pub fn terrain_probe(theta: [f64; 3], weights: &CppnWeights) -> (f64, f64) {
    let mut spec = TerrainSpec::new(theta, 0.0, 0.0, 0.0);
    spec.columns = PARKOUR_PROBE_COLUMNS;
    spec.smoothing /= (crate::procgen::DEFAULT_COLUMNS / PARKOUR_PROBE_COLUMNS) as f64;
    let (ground, ceiling) = terrain_profiles(&spec, weights);
    let dx = spec.column_x(1);
    let slope = ground.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (dx * (ground.len() - 1) as f64);
    let clearance = ground.iter().zip(&ceiling).map(|(g, c)| c - g).fold(f64::INFINITY, f64::min);
    (slope, clearance)
}

impl DifficultyModel {
    pub fn stump(embodiment: Embodiment) -> Self {
        Self { kind: DifficultyKind::Stump, shuffle: None, embodiment, feasibility_cap: FEASIBILITY_CAP, cppn: None }
    }

    pub fn stump_shuffled(map: ShuffleMap, embodiment: Embodiment) -> Self {
        Self {
            kind: DifficultyKind::StumpShuffled,
            shuffle: Some(map),
            embodiment,
            feasibility_cap: FEASIBILITY_CAP,
            cppn: None,
        }
    }

    pub fn parkour(embodiment: Embodiment, weights: Arc<CppnWeights>) -> Self {
        Self {
            kind: DifficultyKind::ParkourNiche,
            shuffle: None,
            embodiment,
            feasibility_cap: FEASIBILITY_CAP,
            cppn: Some(weights),
        }
    }

    pub fn unfeasible_difficulty(&self) -> f64 {
        self.feasibility_cap + UNFEASIBLE_MARGIN
    }

    pub fn difficulty(&self, task: &Task) -> Result<f64> {
        match self.kind {
            DifficultyKind::Stump | DifficultyKind::StumpShuffled => {
                if task.dims() != 2 {
                    return Err(AclError::DimensionMismatch { expected: 2, got: task.dims() });
                }
                let t = match &self.shuffle {
                    Some(map) => map.interpolate(task)?,
                    None => task.clone(),
                };
                Ok(self.embodiment.scale() * stump_difficulty(t[0], t[1]))
            }
            DifficultyKind::ParkourNiche => {
                let spec = TerrainSpec::from_task(task.coords())?;
                if !self.embodiment.in_niche(spec.water_level, spec.creeper_spacing) {
                    return Ok(self.unfeasible_difficulty());
                }
                let weights = self.cppn.as_ref().expect("parkour model carries its CPPN");
                let (slope, clearance) = terrain_probe(spec.theta, weights);
                if clearance <= 0.0 {
                    return Ok(self.unfeasible_difficulty());
                }
                let tight = CLEARANCE_GAIN * (CLEARANCE_COMFORT - clearance).max(0.0);
                let rough = ROUGHNESS_GAIN * (slope - ROUGHNESS_BASE).max(0.0);
                Ok(match self.embodiment {
                    Embodiment::SwimmerType => 0.5 * rough + tight,
                    Embodiment::ClimberType => rough + tight + CREEPER_GAP_GAIN * spec.creeper_spacing,
                    _ => rough + tight,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentParams {
    /// Starting capability `c0`.
    pub initial_capability: f64,
    /// Learning rate `η`, capability gained per episode at the ZPD's near edge.
    pub learning_rate: f64,
    /// ZPD width `w`.
    pub zpd_width: f64,
    /// Std of the training reward noise `σ_R`.
    pub reward_noise: f64,
    /// Margin `b` over which the reward falls from 300 to 0.
    pub margin: f64,
    /// Training on mastered tasks still adds `0.1 η`.
    pub consolidation: bool,
}

impl Default for StudentParams {
    fn default() -> Self {
        Self {
            initial_capability: 0.8,
            learning_rate: 0.001,
            zpd_width: 1.0,
            reward_noise: 10.0,
            margin: 0.5,
            consolidation: true,
        }
    }
}

/// Two learning profiles with different speed/breadth trade-offs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerProfile {
    /// Fast, narrow learner.
    Sac,
    /// Slower learner with a wider zone of proximal development.
    Ppo,
}

impl LearnerProfile {
    pub fn name(self) -> &'static str {
        match self {
            LearnerProfile::Sac => "sac",
            LearnerProfile::Ppo => "ppo",
        }
    }

    pub fn params(self) -> StudentParams {
        match self {
            LearnerProfile::Sac => StudentParams::default(),
            LearnerProfile::Ppo => StudentParams { learning_rate: 0.0006, zpd_width: 1.5, ..StudentParams::default() },
        }
    }
}

/// One training episode as seen by the student.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentStep {
    pub episode: u64,
    pub capability: f64,
    pub difficulty: f64,
    pub episodic_return: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticStudent {
    params: StudentParams,
    model: DifficultyModel,
    capability: f64,
    resets: Vec<u64>,
    noise: Normal<f64>,
    rng: ChaCha8Rng,
}

/// Noise-free reward of a student with capability `c` on difficulty `d`.
pub fn reward(c: f64, d: f64, margin: f64) -> f64 {
    (MAX_RETURN * ((c - d + margin) / margin).clamp(0.0, 1.0)).max(MIN_RETURN)
}

impl SyntheticStudent {
    pub fn new(params: StudentParams, model: DifficultyModel, resets: Vec<u64>, seed: u64) -> Self {
        Self {
            noise: Normal::new(0.0, params.reward_noise.max(0.0)).expect("finite noise"),
            capability: params.initial_capability,
            params,
            model,
            resets,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn params(&self) -> &StudentParams {
        &self.params
    }

    pub fn model(&self) -> &DifficultyModel {
        &self.model
    }

    pub fn capability(&self) -> f64 {
        self.capability
    }

    pub fn resets(&self) -> &[u64] {
        &self.resets
    }

    /// Trains one episode; a scheduled reset at `episode` happens first.
    pub fn train_episode(&mut self, task: &Task, episode: u64) -> Result<StudentStep> {
        if self.resets.contains(&episode) {
            self.capability = self.params.initial_capability;
        }
        let d = self.model.difficulty(task)?;
        let c = self.capability;
        let noise = if self.params.reward_noise > 0.0 { self.noise.sample(&mut self.rng) } else { 0.0 };
        let r = (reward(c, d, self.params.margin) + noise).max(MIN_RETURN);

        let (eta, w) = (self.params.learning_rate, self.params.zpd_width);
        let cap = self.model.feasibility_cap;
        if d > c && d <= c + w {
            self.capability = cap.min(c + eta * (1.0 - (d - c) / w));
        } else if d <= c && self.params.consolidation {
            self.capability = cap.min(c + 0.1 * eta);
        }
        self.capability = self.capability.max(c);
        Ok(StudentStep { episode, capability: self.capability, difficulty: d, episodic_return: r })
    }

    /// Noise-free return on `task` at the current capability, without
    /// learning.
    pub fn evaluate(&self, task: &Task) -> Result<f64> {
        let d = self.model.difficulty(task)?;
        Ok(reward(self.capability, d, self.params.margin))
    }

    /// Whether the noise-free return on difficulty `d` exceeds the mastery
    /// threshold.
    pub fn masters_difficulty(&self, d: f64) -> bool {
        reward(self.capability, d, self.params.margin) > MASTERY_THRESHOLD
    }
}

impl Student for SyntheticStudent {
    fn train(&mut self, task: &Task, episode_index: u64) -> f64 {
        self.train_episode(task, episode_index).expect("task matches the difficulty model").episodic_return
    }

    fn predict_return(&self, task: &Task) -> f64 {
        self.evaluate(task).expect("task matches the difficulty model")
    }
}
