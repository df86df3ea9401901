//! RIAC: recursive hyperbox splitting driven by per-region absolute
//! learning progress.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gmm::pick_weighted;
use crate::task_space::{BoxSpace, Task};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiacParams {
    /// `max_s`: records in a leaf that trigger a split attempt.
    pub max_region_size: usize,
    /// `n`: split candidates evaluated per attempt.
    pub split_candidates: usize,
    /// `min_d`: smallest child width, as a fraction of the space's range.
    pub min_dim_ratio: f64,
    /// Probability of picking a leaf uniformly at random.
    pub explore_prob: f64,
}

impl Default for RiacParams {
    fn default() -> Self {
        Self { max_region_size: 150, split_candidates: 75, min_dim_ratio: 0.1, explore_prob: 0.1 }
    }
}

/// `|mean(newest half) - mean(oldest half)|` of the returns, zero for fewer
/// than two records. With an odd count the middle record is ignored.
pub fn region_alp(returns: &[f64]) -> f64 {
    let half = returns.len() / 2;
    if half == 0 {
        return 0.0;
    }
    let old: f64 = returns[..half].iter().sum::<f64>() / half as f64;
    let new: f64 = returns[returns.len() - half..].iter().sum::<f64>() / half as f64;
    (new - old).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub bounds: Vec<(f64, f64)>,
    pub records: Vec<(Task, f64)>,
    pub alp: f64,
    pub children: Option<(usize, usize)>,
    pub split: Option<SplitCandidate>,
}

impl Region {
    fn leaf(bounds: Vec<(f64, f64)>, records: Vec<(Task, f64)>) -> Self {
        let returns: Vec<f64> = records.iter().map(|r| r.1).collect();
        Self { bounds, alp: region_alp(&returns), records, children: None, split: None }
    }

    pub fn contains(&self, task: &Task) -> bool {
        self.bounds.iter().enumerate().all(|(d, (l, h))| *l <= task[d] && task[d] <= *h)
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(l, h)| h - l).product()
    }
}

/// A split candidate: dimension and cut position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub dim: usize,
    pub value: f64,
}

/// Nested snapshot for visualization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSnapshot {
    pub bounds: Vec<(f64, f64)>,
    pub alp: f64,
    pub children: Vec<RegionSnapshot>,
}

#[derive(Debug, Clone)]
pub struct Riac {
    space: BoxSpace,
    params: RiacParams,
    regions: Vec<Region>,
    rng: ChaCha8Rng,
}

impl Riac {
    pub fn new(space: BoxSpace, params: RiacParams, rng: ChaCha8Rng) -> Self {
        let root = Region::leaf(
            (0..space.dims()).map(|d| (space.lower()[d], space.upper()[d])).collect(),
            Vec::new(),
        );
        Self { space, params, regions: vec![root], rng }
    }

    pub fn params(&self) -> &RiacParams {
        &self.params
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.regions.len()).filter(|&i| self.regions[i].children.is_none()).collect()
    }

    fn leaf_of(&self, task: &Task) -> usize {
        let mut i = 0;
        while let (Some((l, r)), Some(c)) = (self.regions[i].children, self.regions[i].split) {
            i = if task[c.dim] < c.value { l } else { r };
        }
        i
    }

    /// Whether cutting region `idx` at `c` leaves both children at least
    /// `min_d` wide.
    pub fn is_valid_split(&self, bounds: &[(f64, f64)], c: SplitCandidate) -> bool {
        let (lo, hi) = bounds[c.dim];
        let min_w = self.params.min_dim_ratio * self.space.range(c.dim);
        c.value - lo >= min_w && hi - c.value >= min_w
    }

    /// Score of a candidate: `|ALP(left) - ALP(right)|` over the records each
    /// child would receive (order preserved).
    pub fn split_score(records: &[(Task, f64)], c: SplitCandidate) -> f64 {
        let (left, right): (Vec<f64>, Vec<f64>) = {
            let mut l = Vec::new();
            let mut r = Vec::new();
            for (t, ret) in records {
                if t[c.dim] < c.value {
                    l.push(*ret)
                } else {
                    r.push(*ret)
                }
            }
            (l, r)
        };
        (region_alp(&left) - region_alp(&right)).abs()
    }

    /// Highest-scoring valid candidate, first one on ties.
    pub fn best_split(&self, bounds: &[(f64, f64)], records: &[(Task, f64)], candidates: &[SplitCandidate]) -> Option<SplitCandidate> {
        let mut best: Option<(SplitCandidate, f64)> = None;
        for &c in candidates {
            if !self.is_valid_split(bounds, c) {
                continue;
            }
            let s = Self::split_score(records, c);
            if best.is_none_or(|b| s > b.1) {
                best = Some((c, s));
            }
        }
        best.map(|b| b.0)
    }

    fn draw_candidates(&mut self, bounds: &[(f64, f64)]) -> Vec<SplitCandidate> {
        let dims = self.space.dims();
        (0..self.params.split_candidates)
            .map(|_| {
                let dim = self.rng.random_range(0..dims);
                let (lo, hi) = bounds[dim];
                let min_w = self.params.min_dim_ratio * self.space.range(dim);
                let (a, b) = (lo + min_w, hi - min_w);
                let u = self.rng.random::<f64>();
                // an empty valid interval yields an invalid candidate that gets discarded
                let value = if a <= b { a + u * (b - a) } else { lo + u * (hi - lo) };
                SplitCandidate { dim, value }
            })
            .collect()
    }

    pub fn observe(&mut self, task: &Task, episodic_return: f64) {
        let i = self.leaf_of(task);
        {
            let leaf = &mut self.regions[i];
            leaf.records.push((task.clone(), episodic_return));
            let returns: Vec<f64> = leaf.records.iter().map(|r| r.1).collect();
            leaf.alp = region_alp(&returns);
        }
        if self.regions[i].records.len() < self.params.max_region_size {
            return;
        }
        let bounds = self.regions[i].bounds.clone();
        let candidates = self.draw_candidates(&bounds);
        match self.best_split(&bounds, &self.regions[i].records, &candidates) {
            Some(c) => self.split(i, c),
            None => {
                let leaf = &mut self.regions[i];
                let drop = leaf.records.len() / 2;
                leaf.records.drain(..drop);
                let returns: Vec<f64> = leaf.records.iter().map(|r| r.1).collect();
                leaf.alp = region_alp(&returns);
            }
        }
    }

    fn split(&mut self, i: usize, c: SplitCandidate) {
        let records = core::mem::take(&mut self.regions[i].records);
        let bounds = self.regions[i].bounds.clone();
        let (mut lb, mut rb) = (bounds.clone(), bounds);
        lb[c.dim].1 = c.value;
        rb[c.dim].0 = c.value;
        let (l, r): (Vec<_>, Vec<_>) = records.into_iter().partition(|(t, _)| t[c.dim] < c.value);
        let li = self.regions.len();
        self.regions.push(Region::leaf(lb, l));
        self.regions.push(Region::leaf(rb, r));
        self.regions[i].children = Some((li, li + 1));
        self.regions[i].split = Some(c);
    }

    fn leaf_weights(&self, leaves: &[usize]) -> Vec<f64> {
        leaves.iter().map(|&i| self.regions[i].alp + 1e-9).collect()
    }


    pub fn sample_task(&mut self) -> Task {
        let leaves = self.leaves();
        let leaf = if self.rng.random::<f64>() < self.params.explore_prob {
            leaves[self.rng.random_range(0..leaves.len())]
        } else {
            leaves[pick_weighted(&self.leaf_weights(&leaves), &mut self.rng)]
        };
        sample_in_bounds(&self.regions[leaf].bounds, &mut self.rng)
    }

    /// ALP-proportional draws without the uniform-leaf fallback.
    pub fn non_exploratory_sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Task> {
        let leaves = self.leaves();
        let w = self.leaf_weights(&leaves);
        (0..count)
            .map(|_| {
                let leaf = leaves[pick_weighted(&w, rng)];
                sample_in_bounds(&self.regions[leaf].bounds, rng)
            })
            .collect()
    }

    pub fn snapshot(&self) -> RegionSnapshot {
        fn walk(regions: &[Region], i: usize) -> RegionSnapshot {
            let r = &regions[i];
            RegionSnapshot {
                bounds: r.bounds.clone(),
                alp: r.alp,
                children: match r.children {
                    Some((a, b)) => vec![walk(regions, a), walk(regions, b)],
                    None => Vec::new(),
                },
            }
        }
        walk(&self.regions, 0)
    }

    #[cfg(test)]
    fn push_leaf_for_test(&mut self, bounds: Vec<(f64, f64)>, alp: f64) {
        let mut leaf = Region::leaf(bounds, Vec::new());
        leaf.alp = alp;
        self.regions.push(leaf);
    }
}

fn sample_in_bounds<R: Rng + ?Sized>(bounds: &[(f64, f64)], rng: &mut R) -> Task {
    Task(bounds.iter().map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect())
}
