#![allow(dead_code)]

use std::path::PathBuf;

use acl_core::procgen::{terrain_profiles, water_height, CppnWeights, TerrainSpec};
use serde::{Deserialize, Serialize};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub const WEIGHTS_FIXTURE: &str = "cppn_seed42.bin";
pub const PINNED_FIXTURE: &str = "terrain_pinned.json";
pub const THETA_ZERO_FIXTURE: &str = "theta_zero.json";

/// Ground/ceiling profiles of one pinned (θ, δ, μ_c, Δ_c, τ) tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedTerrain {
    pub theta: [f64; 3],
    pub smoothing: f64,
    pub creeper_height: f64,
    pub creeper_spacing: f64,
    pub water_level: f64,
    pub ground: Vec<f64>,
    pub ceiling: Vec<f64>,
    pub water_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub ground: Vec<f64>,
    pub ceiling: Vec<f64>,
}

/// (θ, δ, μ_c, Δ_c, τ)
pub const PINNED: [([f64; 3], f64, f64, f64, f64); 5] = [
    ([-0.3, 0.7, 0.1], 10.0, 1.0, 2.0, 0.1),
    ([0.05, 1.0, -0.1], 5.0, 2.5, 0.5, 0.9),
    ([-1.0, 1.0, 0.5], 20.0, 4.0, 5.0, 0.5),
    ([0.5, -0.5, -1.0], 2.0, 0.0, 0.0, 1.0),
    ([-0.1, 0.9, 0.0], 40.0, 3.0, 1.0, 0.0),
];

pub fn pinned_spec(i: usize) -> TerrainSpec {
    let (theta, smoothing, mc, dc, tau) = PINNED[i];
    let mut spec = TerrainSpec::new(theta, mc, dc, tau);
    spec.smoothing = smoothing;
    spec
}

pub fn compute_pinned(w: &CppnWeights) -> Vec<PinnedTerrain> {
    (0..PINNED.len())
        .map(|i| {
            let spec = pinned_spec(i);
            let (ground, ceiling) = terrain_profiles(&spec, w);
            let water_y = water_height(spec.water_level, &ceiling);
            PinnedTerrain {
                theta: spec.theta,
                smoothing: spec.smoothing,
                creeper_height: spec.creeper_height,
                creeper_spacing: spec.creeper_spacing,
                water_level: spec.water_level,
                ground,
                ceiling,
                water_y,
            }
        })
        .collect()
}

pub fn compute_theta_zero(w: &CppnWeights) -> Profile {
    let (ground, ceiling) = terrain_profiles(&TerrainSpec::new([0.0; 3], 0.0, 0.0, 0.0), w);
    Profile { ground, ceiling }
}

pub fn load_json<T: serde::de::DeserializeOwned>(name: &str) -> T {
    let text = std::fs::read_to_string(fixtures_dir().join(name)).expect("fixture present");
    serde_json::from_str(&text).expect("fixture parses")
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
