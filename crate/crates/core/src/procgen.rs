//! Procedural generation: Stump Tracks stump sequences and CPPN-encoded
//! Parkour terrains with creepers and a water level.

use alloc::vec;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AclError, Result};
use crate::task_space::BoxSpace;

/// Seed of the canonical CPPN shipped with the toolkit.
pub const CANONICAL_CPPN_SEED: u64 = 42;
pub const CPPN_INPUTS: usize = 4;
pub const CPPN_HIDDEN: usize = 64;
pub const CPPN_OUTPUTS: usize = 2;

pub const DEFAULT_SMOOTHING: f64 = 10.0;
pub const DEFAULT_COLUMNS: usize = 200;
pub const TRACK_LENGTH: f64 = 100.0;
pub const STARTPAD_GROUND: f64 = 0.0;
pub const STARTPAD_CEILING: f64 = 5.0;
/// Lowest height the ground can reach; water level 0.
pub const GROUND_MIN: f64 = -10.0;
/// World units per unit of CPPN output.
pub const OUTPUT_SCALE: f64 = 0.1;
pub const CREEPER_WIDTH: f64 = 0.25;
pub const HEIGHT_STD: f64 = 0.1;
/// Stumps start after the startpad.
pub const STUMP_START: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Softplus,
    Linear,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(x),
            Activation::Softplus => x.max(0.0) + libm::log1p(libm::exp(-x.abs())),
            Activation::Linear => x,
        }
    }
}

/// One dense layer stored as an augmented `rows × (inputs + 1)` row-major
/// matrix whose last column is the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseLayer {
    pub fn inputs(&self) -> usize {
        self.cols - 1
    }

    fn forward(&self, input: &[f64], act: Activation, out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut s = row[self.cols - 1];
            for (w, x) in row.iter().zip(input) {
                s += w * x;
            }
            out.push(act.apply(s));
        }
    }
}

pub const CPPN_ACTIVATIONS: [Activation; 5] =
    [Activation::Tanh, Activation::Softplus, Activation::Tanh, Activation::Softplus, Activation::Linear];

/// Fixed random CPPN: input `(x, θ1, θ2, θ3)`, four hidden layers of 64
/// units, two linear outputs (ground and ceiling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CppnWeights {
    pub layers: Vec<DenseLayer>,
}

impl CppnWeights {
    /// Draws every entry from N(0, 1), layer by layer in row-major order.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let widths = [CPPN_INPUTS, CPPN_HIDDEN, CPPN_HIDDEN, CPPN_HIDDEN, CPPN_HIDDEN, CPPN_OUTPUTS];
        let layers = widths
            .windows(2)
            .map(|w| {
                let (rows, cols) = (w[1], w[0] + 1);
                let data = (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect();
                DenseLayer { rows, cols, data }
            })
            .collect();
        Self { layers }
    }

    pub fn canonical() -> Self {
        Self::init(CANONICAL_CPPN_SEED)
    }

    /// Checks the fixed architecture.
    pub fn validate(&self) -> Result<()> {
        let widths = [CPPN_INPUTS, CPPN_HIDDEN, CPPN_HIDDEN, CPPN_HIDDEN, CPPN_HIDDEN, CPPN_OUTPUTS];
        if self.layers.len() != widths.len() - 1 {
            return Err(AclError::InvalidConfig("CPPN must have 5 layers".into()));
        }
        for (l, w) in self.layers.iter().zip(widths.windows(2)) {
            if l.rows != w[1] || l.cols != w[0] + 1 || l.data.len() != l.rows * l.cols {
                return Err(AclError::InvalidConfig("CPPN layer has the wrong shape".into()));
            }
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.data.len()).sum()
    }

    /// `(y, y_c)` at position `x` for generation parameters `theta`.
    pub fn forward(&self, x: f64, theta: &[f64; 3]) -> (f64, f64) {
        let mut a = vec![x, theta[0], theta[1], theta[2]];
        let mut b = Vec::with_capacity(CPPN_HIDDEN);
        for (layer, act) in self.layers.iter().zip(CPPN_ACTIVATIONS) {
            layer.forward(&a, act, &mut b);
            core::mem::swap(&mut a, &mut b);
        }
        (a[0], a[1])
    }
}

/// Bounds on θ. The 6D Parkour space appends creepers (height, spacing) and
/// the water level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaSpace {
    Easy,
    Medium,
    Hard,
}

impl ThetaSpace {
    pub fn bounds(self) -> [(f64, f64); 3] {
        match self {
            ThetaSpace::Easy => [(-0.25, -0.05), (0.8, 1.0), (0.0, 0.2)],
            ThetaSpace::Medium => [(-0.35, 0.05), (0.6, 1.0), (-0.1, 0.3)],
            ThetaSpace::Hard => [(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "easy" => Some(ThetaSpace::Easy),
            "medium" => Some(ThetaSpace::Medium),
            "hard" => Some(ThetaSpace::Hard),
            _ => None,
        }
    }

    /// `θ × μ_c ∈ [0,4] × Δ_c ∈ [0,5] × τ ∈ [0,1]`.
    pub fn parkour_space(self) -> BoxSpace {
        let mut b: Vec<(f64, f64)> = self.bounds().to_vec();
        b.extend([(0.0, 4.0), (0.0, 5.0), (0.0, 1.0)]);
        BoxSpace::from_bounds(&b).expect("valid bounds")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainSpec {
    pub theta: [f64; 3],
    pub creeper_height: f64,
    pub creeper_spacing: f64,
    pub water_level: f64,
    pub smoothing: f64,
    pub columns: usize,
}

impl TerrainSpec {
    pub fn new(theta: [f64; 3], creeper_height: f64, creeper_spacing: f64, water_level: f64) -> Self {
        Self {
            theta,
            creeper_height,
            creeper_spacing,
            water_level,
            smoothing: DEFAULT_SMOOTHING,
            columns: DEFAULT_COLUMNS,
        }
    }

    /// From a 6D Parkour task `(θ1, θ2, θ3, μ_c, Δ_c, τ)`.
    pub fn from_task(coords: &[f64]) -> Result<Self> {
        if coords.len() != 6 {
            return Err(AclError::DimensionMismatch { expected: 6, got: coords.len() });
        }
        Ok(Self::new([coords[0], coords[1], coords[2]], coords[3], coords[4], coords[5]))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.water_level) {
            return Err(AclError::InvalidConfig("water level must lie in [0, 1]".into()));
        }
        if !(0.0..=4.0).contains(&self.creeper_height) || !(0.0..=5.0).contains(&self.creeper_spacing) {
            return Err(AclError::InvalidConfig("creepers must satisfy height in [0, 4] and spacing in [0, 5]".into()));
        }
        if !(self.smoothing > 0.0) || self.columns < 2 {
            return Err(AclError::InvalidConfig("smoothing must be positive and columns at least 2".into()));
        }
        if self.theta.iter().any(|t| !t.is_finite()) {
            return Err(AclError::InvalidConfig("theta must be finite".into()));
        }
        Ok(())
    }

    /// World x of column `i`.
    pub fn column_x(&self, i: usize) -> f64 {
        i as f64 * TRACK_LENGTH / self.columns as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Creeper {
    pub x: f64,
    pub h: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terrain {
    pub ground: Vec<f64>,
    pub ceiling: Vec<f64>,
    pub creepers: Vec<Creeper>,
    pub water_y: f64,
}

impl Terrain {
    /// Smallest ceiling-to-ground gap; non-positive when they cross.
    pub fn min_clearance(&self) -> f64 {
        self.ground.iter().zip(&self.ceiling).map(|(g, c)| c - g).fold(f64::INFINITY, f64::min)
    }
}

/// Startpad-aligned ground and ceiling profiles, `columns` points at
/// CPPN inputs `x_i = i / δ`, outputs scaled by [`OUTPUT_SCALE`].
pub fn terrain_profiles(spec: &TerrainSpec, weights: &CppnWeights) -> (Vec<f64>, Vec<f64>) {
    let mut ground = Vec::with_capacity(spec.columns);
    let mut ceiling = Vec::with_capacity(spec.columns);
    for i in 0..spec.columns {
        let (y, yc) = weights.forward(i as f64 / spec.smoothing, &spec.theta);
        ground.push(OUTPUT_SCALE * y);
        ceiling.push(OUTPUT_SCALE * yc);
    }
    let (y0, yc0) = (ground[0], ceiling[0]);
    ground.iter_mut().for_each(|y| *y = (*y - y0) + STARTPAD_GROUND);
    ceiling.iter_mut().for_each(|y| *y = (*y - yc0) + STARTPAD_CEILING);
    (ground, ceiling)
}

/// Water surface height for level `tau`.
pub fn water_height(tau: f64, ceiling: &[f64]) -> f64 {
    let top = ceiling.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (1.0 - tau) * GROUND_MIN + tau * top
}

pub fn generate_terrain<R: Rng + ?Sized>(spec: &TerrainSpec, weights: &CppnWeights, rng: &mut R) -> Result<Terrain> {
    spec.validate()?;
    let (ground, ceiling) = terrain_profiles(spec, weights);
    let height = Normal::new(spec.creeper_height, HEIGHT_STD).expect("positive std");
    let step = spec.creeper_spacing + CREEPER_WIDTH;
    let mut creepers = Vec::new();
    let mut j = 0usize;
    loop {
        let x = j as f64 * step;
        if x >= TRACK_LENGTH {
            break;
        }
        let h: f64 = height.sample(rng);
        creepers.push(Creeper { x, h: h.max(0.0), w: CREEPER_WIDTH });
        j += 1;
    }
    let water_y = water_height(spec.water_level, &ceiling);
    Ok(Terrain { ground, ceiling, creepers, water_y })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub x: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpTrackSpec {
    pub mean_height: f64,
    pub spacing: f64,
    pub stumps: Vec<Stump>,
}

/// Stumps every `spacing` units from the end of the startpad, heights drawn
/// from N(`mean_height`, 0.1) and clamped at 0. Negative means are accepted
/// only with `allow_negative`.
pub fn generate_stumps<R: Rng + ?Sized>(
    mean_height: f64,
    spacing: f64,
    allow_negative: bool,
    rng: &mut R,
) -> Result<StumpTrackSpec> {
    if !(spacing > 0.0) {
        return Err(AclError::ZeroSpacing);
    }
    if mean_height < 0.0 && !allow_negative {
        return Err(AclError::InvalidConfig("negative stump height needs the clamped variant".into()));
    }
    let height = Normal::new(mean_height, HEIGHT_STD).expect("positive std");
    let mut stumps = Vec::new();
    let mut j = 0usize;
    loop {
        let x = STUMP_START + j as f64 * spacing;
        if x >= TRACK_LENGTH {
            break;
        }
        let h: f64 = height.sample(rng);
        stumps.push(Stump { x, h: h.max(0.0) });
        j += 1;
    }
    Ok(StumpTrackSpec { mean_height, spacing, stumps })
}
