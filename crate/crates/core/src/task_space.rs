//! Axis-aligned continuous task spaces.
//!
//! Besides sampling and clipping, this module carries the tile-shuffling
//! transform used to build rugged difficulty landscapes: every dimension is
//! cut into `k` equal-width tiles, the tiles are permuted with a seeded
//! shuffle, and tasks are mapped piecewise-affinely from their original tile
//! into the shuffled one.

use alloc::format;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AclError, Result};

/// A point of a task space, in task units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Task(pub Vec<f64>);

impl Task {
    pub fn new(coords: Vec<f64>) -> Self {
        Task(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for Task {
    fn from(v: Vec<f64>) -> Self {
        Task(v)
    }
}

impl core::ops::Index<usize> for Task {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// An n-dimensional box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(AclError::InvalidSpace("space needs at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(AclError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(AclError::InvalidSpace(format!(
                    "dimension {d}: lower bound {lo} must be finite and below upper bound {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(bounds.iter().map(|b| b.0).collect(), bounds.iter().map(|b| b.1).collect())
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn ranges(&self) -> Vec<f64> {
        (0..self.dims()).map(|d| self.range(d)).collect()
    }

    pub fn center(&self) -> Task {
        Task((0..self.dims()).map(|d| 0.5 * (self.lower[d] + self.upper[d])).collect())
    }

    pub fn volume(&self) -> f64 {
        self.ranges().iter().product()
    }

    pub fn contains(&self, task: &Task) -> bool {
        task.dims() == self.dims()
            && task
                .coords()
                .iter()
                .enumerate()
                .all(|(d, &x)| self.lower[d] <= x && x <= self.upper[d])
    }

    pub fn check_dims(&self, task: &Task) -> Result<()> {
        if task.dims() != self.dims() {
            return Err(AclError::DimensionMismatch { expected: self.dims(), got: task.dims() });
        }
        Ok(())
    }

    /// Each coordinate drawn independently and uniformly in its bounds.
    pub fn uniform_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Task {
        Task(
            (0..self.dims())
                .map(|d| self.lower[d] + self.range(d) * rng.random::<f64>())
                .collect(),
        )
    }

    pub fn clip(&self, task: &Task) -> Result<Task> {
        self.check_dims(task)?;
        Ok(self.clip_unchecked(task.coords()))
    }

    pub(crate) fn clip_unchecked(&self, coords: &[f64]) -> Task {
        Task(
            coords
                .iter()
                .enumerate()
                .map(|(d, &x)| x.clamp(self.lower[d], self.upper[d]))
                .collect(),
        )
    }

    /// Maps a task to the unit cube.
    pub fn normalize(&self, task: &Task) -> Vec<f64> {
        task.coords()
            .iter()
            .enumerate()
            .map(|(d, &x)| (x - self.lower[d]) / self.range(d))
            .collect()
    }

    /// Inverse of [`normalize`](Self::normalize).
    pub fn denormalize(&self, unit: &[f64]) -> Task {
        Task(
            unit.iter()
                .enumerate()
                .map(|(d, &u)| self.lower[d] + u * self.range(d))
                .collect(),
        )
    }
}

/// Per-dimension tile permutation built by cutting a space into `k` tiles per
/// dimension and shuffling the tile order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleMap {
    k: usize,
    dims: usize,
    original: Vec<Vec<[f64; 2]>>,
    shuffled: Vec<Vec<[f64; 2]>>,
}

impl ShuffleMap {
    /// Cuts each dimension of `space` into `k` equal tiles and shuffles each
    /// dimension's tile list independently.
    pub fn build<R: Rng + ?Sized>(space: &BoxSpace, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(AclError::ZeroCuts);
        }
        let mut original = Vec::with_capacity(space.dims());
        let mut shuffled = Vec::with_capacity(space.dims());
        for d in 0..space.dims() {
            let min = space.lower()[d];
            let size = (space.upper()[d] - min).abs() / k as f64;
            let tiles: Vec<[f64; 2]> = (0..k)
                .map(|j| [min + j as f64 * size, min + (j + 1) as f64 * size])
                .collect();
            let mut perm = tiles.clone();
            perm.shuffle(rng);
            original.push(tiles);
            shuffled.push(perm);
        }
        Ok(Self { k, dims: space.dims(), original, shuffled })
    }

    pub fn cuts(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn original(&self) -> &[Vec<[f64; 2]>] {
        &self.original
    }

    pub fn shuffled(&self) -> &[Vec<[f64; 2]>] {
        &self.shuffled
    }

    pub fn is_identity(&self) -> bool {
        self.original == self.shuffled
    }

    /// Maps a task into the shuffled space.
    ///
    /// A coordinate on a shared tile edge belongs to the first tile (in
    /// scan order) whose closed interval contains it.
    pub fn interpolate(&self, task: &Task) -> Result<Task> {
        self.map_with(task, &self.original, &self.shuffled)
    }

    /// Inverse of [`interpolate`](Self::interpolate) on tile interiors.
    pub fn invert(&self, task: &Task) -> Result<Task> {
        self.map_with(task, &self.shuffled, &self.original)
    }

    fn map_with(&self, task: &Task, from: &[Vec<[f64; 2]>], to: &[Vec<[f64; 2]>]) -> Result<Task> {
        if task.dims() != self.dims {
            return Err(AclError::DimensionMismatch { expected: self.dims, got: task.dims() });
        }
        let mut out = Vec::with_capacity(self.dims);
        for d in 0..self.dims {
            let x = task[d];
            let j = locate_tile(&from[d], x).ok_or(AclError::OutsideSpace { dim: d, value: x })?;
            let [ol, oh] = from[d][j];
            let [sl, sh] = to[d][j];
            let frac = ((x - ol) / (oh - ol)).clamp(0.0, 1.0);
            out.push(sl + frac * (sh - sl));
        }
        Ok(Task(out))
    }
}

/// Index of the first closed tile containing `x`. Coordinates that miss
/// every tile only through rounding at the outer edges are assigned to the
/// nearest end tile.
fn locate_tile(tiles: &[[f64; 2]], x: f64) -> Option<usize> {
    if let Some(j) = tiles.iter().position(|&[l, h]| l <= x && x <= h) {
        return Some(j);
    }
    // Tiles are ordered by position in the original layout but not in the
    // shuffled one; find the outer edges explicitly.
    let lo = tiles.iter().map(|t| t[0]).fold(f64::INFINITY, f64::min);
    let hi = tiles.iter().map(|t| t[1]).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (hi - lo).abs().max(1.0);
    if x < lo && x >= lo - tol {
        tiles.iter().position(|t| t[0] == lo)
    } else if x > hi && x <= hi + tol {
        tiles.iter().position(|t| t[1] == hi)
    } else {
        None
    }
}
