//! Self-paced teacher: a diagonal Gaussian task distribution that moves
//! toward a target Gaussian at a pace set by the student's value estimates,
//! under a KL trust region.
//!
//! Each update tilts the pending tasks by their estimated returns
//! (exponential weights with the temperature chosen so the effective sample
//! size stays at least half the batch), moment-matches a candidate, blends it
//! toward the target with weight `alpha`, and finally bisects along the
//! parameter segment from the old distribution until
//! `KL(new || old) <= epsilon`.

use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian::{kl_diagonal, GaussianDist};
use crate::task_space::{BoxSpace, Task};

pub const MIN_VARIANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpdlParams {
    /// Episodes before the first update.
    pub offset: u64,
    /// Episodes between updates.
    pub step: u64,
    /// Number of initial updates run with `alpha = 0`.
    pub k_alpha: u64,
    /// Target ratio between the KL penalty and the expected return.
    pub zeta: f64,
    /// Trust-region bound on `KL(new || old)`.
    pub epsilon: f64,
    /// Fixed `alpha` instead of the schedule (`f64::INFINITY` jumps to the
    /// target).
    pub alpha_override: Option<f64>,
}

impl Default for SpdlParams {
    fn default() -> Self {
        Self { offset: 200, step: 100, k_alpha: 0, zeta: 0.05, epsilon: 0.8, alpha_override: None }
    }
}

/// One distribution update, for time-series export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdlUpdate {
    pub episode: u64,
    pub mean: Vec<f64>,
    pub variances: Vec<f64>,
    pub alpha: f64,
    pub kl_step: f64,
    pub kl_to_target: f64,
}

/// Diagonal Gaussian by mean and variances.
#[derive(Debug, Clone, PartialEq)]
struct Params {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl Params {
    fn of(g: &GaussianDist) -> Self {
        Self { mean: g.mean().to_vec(), var: g.variances().into_iter().map(|v| v.max(MIN_VARIANCE)).collect() }
    }

    fn kl(&self, other: &Params) -> f64 {
        kl_diagonal(&self.mean, &self.var, &other.mean, &other.var)
    }

    fn lerp(&self, other: &Params, t: f64) -> Params {
        Params {
            mean: self.mean.iter().zip(&other.mean).map(|(a, b)| a + t * (b - a)).collect(),
            var: self.var.iter().zip(&other.var).map(|(a, b)| a + t * (b - a)).collect(),
        }
    }

    fn into_dist(self) -> GaussianDist {
        GaussianDist::from_variances(self.mean, &self.var).expect("valid variances")
    }
}

#[derive(Debug, Clone)]
pub struct Spdl {
    space: BoxSpace,
    params: SpdlParams,
    current: GaussianDist,
    target: GaussianDist,
    alpha: f64,
    pending: Vec<Task>,
    episodes: u64,
    updates: u64,
    history: Vec<SpdlUpdate>,
    rng: ChaCha8Rng,
}

impl Spdl {
    pub fn new(space: BoxSpace, params: SpdlParams, initial: GaussianDist, target: GaussianDist, rng: ChaCha8Rng) -> Self {
        let current = Params::of(&initial).into_dist();
        let target = Params::of(&target).into_dist();
        Self {
            space,
            params,
            current,
            target,
            alpha: 0.0,
            pending: Vec::new(),
            episodes: 0,
            updates: 0,
            history: Vec::new(),
            rng,
        }
    }

    pub fn params(&self) -> &SpdlParams {
        &self.params
    }

    pub fn current(&self) -> &GaussianDist {
        &self.current
    }

    pub fn target(&self) -> &GaussianDist {
        &self.target
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pending(&self) -> &[Task] {
        &self.pending
    }

    pub fn history(&self) -> &[SpdlUpdate] {
        &self.history
    }

    pub fn sample_task(&mut self) -> Task {
        self.current.sample_clipped(&self.space, &mut self.rng)
    }

    pub fn non_exploratory_sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Task> {
        (0..count).map(|_| self.current.sample_clipped(&self.space, rng)).collect()
    }

    /// Records an episode; runs an update at `offset` and every `step`
    /// episodes after it.
    pub fn observe(&mut self, task: &Task, value: &dyn Fn(&Task) -> f64) {
        self.pending.push(task.clone());
        self.episodes += 1;
        let p = &self.params;
        if self.episodes >= p.offset && (self.episodes - p.offset).is_multiple_of(p.step.max(1)) {
            self.update(value);
        }
    }

    /// One distribution update from the pending tasks. Skipped when nothing
    /// is pending.
    pub fn update(&mut self, value: &dyn Fn(&Task) -> f64) {
        if self.pending.is_empty() {
            return;
        }
        let returns: Vec<f64> = self.pending.iter().map(value).collect();
        let points: Vec<Vec<f64>> = self.pending.iter().map(|t| t.0.clone()).collect();
        let candidate = tilted_moments(&points, &returns);

        let old = Params::of(&self.current);
        let target = Params::of(&self.target);
        let alpha = match self.params.alpha_override {
            Some(a) => a.max(0.0),
            None if self.updates < self.params.k_alpha => 0.0,
            None => {
                let mean_j = returns.iter().sum::<f64>() / returns.len() as f64;
                (self.params.zeta * mean_j / old.kl(&target).max(1e-6)).max(0.0)
            }
        };
        let blended = if alpha.is_infinite() {
            target.clone()
        } else {
            let w = alpha / (1.0 + alpha);
            candidate.lerp(&target, w)
        };
        let new = trust_region(&old, blended, self.params.epsilon);

        let kl_step = new.kl(&old);
        let kl_to_target = new.kl(&target);
        self.history.push(SpdlUpdate {
            episode: self.episodes,
            mean: new.mean.clone(),
            variances: new.var.clone(),
            alpha,
            kl_step,
            kl_to_target,
        });
        self.current = new.into_dist();
        self.alpha = alpha;
        self.updates += 1;
        self.pending.clear();
    }
}

/// Effective sample size `(Σw)² / Σw²`.
fn ess(w: &[f64]) -> f64 {
    let s: f64 = w.iter().sum();
    let s2: f64 = w.iter().map(|x| x * x).sum();
    s * s / s2
}

fn tilt_weights(returns: &[f64], eta: f64) -> Vec<f64> {
    let max = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    returns.iter().map(|j| libm::exp((j - max) / eta)).collect()
}

/// Smallest temperature (by log-space bisection) whose exponential weights
/// keep the effective sample size at or above half the batch.
pub fn tilt_temperature(returns: &[f64]) -> Option<f64> {
    let max = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = returns.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    if !(spread > 0.0) {
        return None;
    }
    let need = returns.len() as f64 / 2.0;
    let (mut lo, mut hi) = (libm::log(spread * 1e-8), libm::log(spread * 1e8));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ess(&tilt_weights(returns, libm::exp(mid))) >= need {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(libm::exp(hi))
}

/// Weighted mean and per-dimension variance of `points` under the tilted
/// weights (uniform weights when all returns are equal).
fn tilted_moments(points: &[Vec<f64>], returns: &[f64]) -> Params {
    let w = match tilt_temperature(returns) {
        Some(eta) => tilt_weights(returns, eta),
        None => alloc::vec![1.0; returns.len()],
    };
    weighted_moments(points, &w)
}

fn weighted_moments(points: &[Vec<f64>], w: &[f64]) -> Params {
    let d = points[0].len();
    let total: f64 = w.iter().sum();
    let mut mean = alloc::vec![0.0; d];
    for (p, wi) in points.iter().zip(w) {
        for k in 0..d {
            mean[k] += wi * p[k];
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);
    let mut var = alloc::vec![0.0; d];
    for (p, wi) in points.iter().zip(w) {
        for k in 0..d {
            var[k] += wi * (p[k] - mean[k]) * (p[k] - mean[k]);
        }
    }
    var.iter_mut().for_each(|v| *v = (*v / total).max(MIN_VARIANCE));
    Params { mean, var }
}

/// Pulls `new` back toward `old` along the parameter segment until
/// `KL(new || old) <= epsilon`, aiming for `[0.95 ε, ε]`.
fn trust_region(old: &Params, new: Params, epsilon: f64) -> Params {
    if new.kl(old) <= epsilon {
        return new;
    }
    if !(epsilon > 0.0) {
        return old.clone();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let kl = old.lerp(&new, mid).kl(old);
        if kl > epsilon {
            hi = mid;
        } else {
            lo = mid;
            if kl >= 0.95 * epsilon {
                break;
            }
        }
    }
    old.lerp(&new, lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;

    fn space() -> BoxSpace {
        BoxSpace::new(vec![0.0, 0.0], vec![3.0, 6.0]).unwrap()
    }

    fn spdl(params: SpdlParams) -> Spdl {
        let init = GaussianDist::diagonal(vec![0.0, 6.0], &[0.3, 0.6]).unwrap();
        let target = GaussianDist::diagonal(vec![1.5, 3.0], &[0.75, 1.5]).unwrap();
        Spdl::new(space(), params, init, target, ChaCha8Rng::seed_from_u64(1))
    }

    fn fill(s: &mut Spdl, n: usize) {
        for _ in 0..n {
            let t = s.sample_task();
            s.pending.push(t);
        }
    }

    #[test]
    fn infinite_alpha_jumps_to_target() {
        let mut s = spdl(SpdlParams { alpha_override: Some(f64::INFINITY), epsilon: 1e9, ..SpdlParams::default() });
        fill(&mut s, 50);
        s.update(&|_| 100.0);
        assert_eq!(s.current().mean(), s.target().mean());
        assert_eq!(s.current().variances(), s.target().variances());
    }

    #[test]
    fn zero_epsilon_never_moves() {
        let mut s = spdl(SpdlParams { epsilon: 0.0, ..SpdlParams::default() });
        let before = s.current().clone();
        for _ in 0..5 {
            fill(&mut s, 50);
            s.update(&|t| t[0] * 10.0);
        }
        assert_eq!(s.current(), &before);
    }

    #[test]
    fn uniform_returns_give_plain_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random::<f64>() * 3.0, rng.random::<f64>() * 6.0]).collect();
        let got = tilted_moments(&points, &vec![7.0; 40]);
        // oracle: unweighted population moments
        for d in 0..2 {
            let m = points.iter().map(|p| p[d]).sum::<f64>() / 40.0;
            let v = points.iter().map(|p| (p[d] - m) * (p[d] - m)).sum::<f64>() / 40.0;
            assert!((got.mean[d] - m).abs() < 1e-12);
            assert!((got.var[d] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn tilting_keeps_half_the_batch() {
        let returns: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let eta = tilt_temperature(&returns).unwrap();
        let e = ess(&tilt_weights(&returns, eta));
        assert!((50.0..50.5).contains(&e), "{e}");
    }

    #[test]
    fn update_skipped_without_pending() {
        let mut s = spdl(SpdlParams::default());
        s.update(&|_| 1.0);
        assert!(s.history().is_empty());
    }

    #[test]
    fn schedule_offset_then_step() {
        let mut s = spdl(SpdlParams::default());
        let mut updates_at = Vec::new();
        for ep in 1..=420u64 {
            let t = s.sample_task();
            s.observe(&t, &|t| 300.0 - 10.0 * t[0]);
            if s.history().len() > updates_at.len() {
                updates_at.push(ep);
                assert!(s.pending().is_empty());
            }
        }
        assert_eq!(updates_at, vec![200, 300, 400]);
    }

    #[test]
    fn trust_region_respected() {
        let mut s = spdl(SpdlParams { epsilon: 0.05, ..SpdlParams::default() });
        for _ in 0..10 {
            let old = s.current().clone();
            fill(&mut s, 100);
            s.update(&|t| 300.0 - 50.0 * t[0]);
            let kl = crate::gaussian::kl_between(s.current(), &old);
            assert!(kl <= 0.05 + 1e-6, "{kl}");
        }
    }

    #[test]
    fn samples_clipped_and_point_mass() {
        let init = GaussianDist::point(vec![1.0, 2.0]);
        let target = GaussianDist::diagonal(vec![1.5, 3.0], &[0.75, 1.5]).unwrap();
        let mut s = Spdl::new(space(), SpdlParams::default(), init, target, ChaCha8Rng::seed_from_u64(4));
        for _ in 0..100 {
            let t = s.sample_task();
            assert!((t[0] - 1.0).abs() < 1e-3 && (t[1] - 2.0).abs() < 1e-3);
        }
        let mut s = spdl(SpdlParams::default());
        for _ in 0..1000 {
            assert!(space().contains(&s.sample_task()));
        }
    }
}
