//! Learning-progress teachers built on Gaussian mixtures: ALP-GMM and
//! Covar-GMM.
//!
//! Both keep a sliding window of the last `fit_rate` episodes, refit a
//! mixture on it every `fit_rate` episodes, and pick the component to sample
//! from according to a learning-progress signal carried by an auxiliary
//! coordinate. Task coordinates are fitted in the unit cube of the space.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gaussian::GaussianDist;
use crate::gmm::{pick_weighted, select_k_by_aic, GaussianMixture};
use crate::task_space::{BoxSpace, Task};

/// Hyperparameters shared by both mixture teachers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmParams {
    /// `n`: episodes between fits, also the window length.
    pub fit_rate: usize,
    /// `max_k`: largest mixture considered.
    pub max_k: usize,
    /// `r_p`: probability of a uniform draw after bootstrap.
    pub random_prob: f64,
    /// Return range used to normalize competences and ALP values.
    pub return_range: (f64, f64),
}

impl GmmParams {
    pub const ALP_GMM: GmmParams =
        GmmParams { fit_rate: 150, max_k: 10, random_prob: 0.05, return_range: (-100.0, 300.0) };
    pub const COVAR_GMM: GmmParams =
        GmmParams { fit_rate: 150, max_k: 15, random_prob: 0.1, return_range: (-100.0, 300.0) };
}

/// Every task seen so far (unit coordinates) with its return.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlpHistory {
    points: Vec<Vec<f64>>,
    returns: Vec<f64>,
}

impl AlpHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, unit_task: Vec<f64>, episodic_return: f64) {
        self.points.push(unit_task);
        self.returns.push(episodic_return);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Absolute learning progress of a new `(task, return)` pair: the absolute
/// return difference with the nearest previously seen task (Euclidean
/// distance in unit coordinates, earliest wins ties). Zero on an empty
/// history.
pub fn alp_of(unit_task: &[f64], episodic_return: f64, history: &AlpHistory) -> f64 {
    let mut best = f64::INFINITY;
    let mut best_ret = None;
    for (p, r) in history.points.iter().zip(&history.returns) {
        let d: f64 = p.iter().zip(unit_task).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best {
            best = d;
            best_ret = Some(*r);
        }
    }
    best_ret.map_or(0.0, |r| (episodic_return - r).abs())
}

/// Shared bootstrap / mixture sampling logic.
#[derive(Debug, Clone)]
struct MixtureSampler {
    space: BoxSpace,
    params: GmmParams,
    initial: Option<GaussianDist>,
    mixture: Option<GaussianMixture>,
    since_fit: usize,
}

impl MixtureSampler {
    fn bootstrap<R: Rng + ?Sized>(&self, rng: &mut R) -> Task {
        match &self.initial {
            Some(g) => g.sample_clipped(&self.space, rng),
            None => self.space.uniform_sample(rng),
        }
    }

    fn from_component<R: Rng + ?Sized>(&self, m: &GaussianMixture, k: usize, rng: &mut R) -> Task {
        let idx: Vec<usize> = (0..self.space.dims()).collect();
        let unit = m.sample_component_marginal(k, &idx, rng);
        let task = self.space.denormalize(&unit);
        self.space.clip_unchecked(task.coords())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, weights: impl Fn(&GaussianMixture) -> Vec<f64>, explore: bool) -> Task {
        let Some(m) = &self.mixture else {
            return self.bootstrap(rng);
        };
        if explore && rng.random::<f64>() < self.params.random_prob {
            return self.space.uniform_sample(rng);
        }
        let mut w = weights(m);
        if !(w.iter().sum::<f64>() > 0.0) {
            w = alloc::vec![1.0; m.len()];
        }
        let k = pick_weighted(&w, rng);
        self.from_component(m, k, rng)
    }
}

/// ALP-GMM teacher.
#[derive(Debug, Clone)]
pub struct AlpGmm {
    sampler: MixtureSampler,
    history: AlpHistory,
    window: VecDeque<(Vec<f64>, f64)>,
    rng: ChaCha8Rng,
}

impl AlpGmm {
    pub fn new(space: BoxSpace, params: GmmParams, initial: Option<GaussianDist>, rng: ChaCha8Rng) -> Self {
        Self {
            sampler: MixtureSampler { space, params, initial, mixture: None, since_fit: 0 },
            history: AlpHistory::new(),
            window: VecDeque::new(),
            rng,
        }
    }

    pub fn params(&self) -> &GmmParams {
        &self.sampler.params
    }

    pub fn mixture(&self) -> Option<&GaussianMixture> {
        self.sampler.mixture.as_ref()
    }

    pub fn history(&self) -> &AlpHistory {
        &self.history
    }

    /// ALP values currently in the fitting window, oldest first.
    pub fn window_alps(&self) -> Vec<f64> {
        self.window.iter().map(|w| w.1).collect()
    }

    fn alp_weights(m: &GaussianMixture) -> Vec<f64> {
        let a = m.dims() - 1;
        m.components().iter().map(|c| c.mean[a].max(0.0)).collect()
    }

    pub fn sample_task(&mut self) -> Task {
        self.sampler.sample(&mut self.rng, Self::alp_weights, true)
    }

    pub fn non_exploratory_sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Task> {
        (0..count).map(|_| self.sampler.sample(rng, Self::alp_weights, false)).collect()
    }

    pub fn observe(&mut self, task: &Task, episodic_return: f64) {
        let unit = self.sampler.space.normalize(task);
        let alp = alp_of(&unit, episodic_return, &self.history);
        self.history.push(unit.clone(), episodic_return);
        self.window.push_back((unit, alp));
        let n = self.sampler.params.fit_rate;
        while self.window.len() > n {
            self.window.pop_front();
        }
        self.sampler.since_fit += 1;
        if self.sampler.since_fit >= n {
            self.sampler.since_fit = 0;
            let (lo, hi) = self.sampler.params.return_range;
            let scale = (hi - lo).abs().max(1e-12);
            let points: Vec<Vec<f64>> = self
                .window
                .iter()
                .map(|(u, a)| {
                    let mut p = u.clone();
                    p.push(a / scale);
                    p
                })
                .collect();
            if let Ok(sel) = select_k_by_aic(&points, self.sampler.params.max_k, &mut self.rng) {
                self.sampler.mixture = Some(sel.mixture);
            }
        }
    }

    /// Replaces the fitted mixture (ALP coordinate last, in normalized units).
    pub fn set_mixture(&mut self, m: GaussianMixture) {
        self.sampler.mixture = Some(m);
    }
}

/// Covar-GMM teacher.
#[derive(Debug, Clone)]
pub struct CovarGmm {
    sampler: MixtureSampler,
    window: VecDeque<(Vec<f64>, f64)>,
    /// Weight components by `max(0, cov)` instead of `|cov|`.
    pub positive_only: bool,
    rng: ChaCha8Rng,
}

impl CovarGmm {
    pub fn new(space: BoxSpace, params: GmmParams, initial: Option<GaussianDist>, rng: ChaCha8Rng) -> Self {
        Self {
            sampler: MixtureSampler { space, params, initial, mixture: None, since_fit: 0 },
            window: VecDeque::new(),
            positive_only: false,
            rng,
        }
    }

    pub fn params(&self) -> &GmmParams {
        &self.sampler.params
    }

    pub fn mixture(&self) -> Option<&GaussianMixture> {
        self.sampler.mixture.as_ref()
    }

    /// Maps a return onto `[0, 1]` using the configured return range.
    pub fn competence(&self, episodic_return: f64) -> f64 {
        let (lo, hi) = self.sampler.params.return_range;
        ((episodic_return - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Time/competence covariance read off each component.
    pub fn component_weights(m: &GaussianMixture, positive_only: bool) -> Vec<f64> {
        let d = m.dims();
        let (t, c) = (d - 2, d - 1);
        m.components()
            .iter()
            .map(|comp| {
                let cov = comp.covariance[(t, c)];
                let v = if positive_only { cov.max(0.0) } else { cov.abs() };
                v + 1e-9
            })
            .collect()
    }

    pub fn sample_task(&mut self) -> Task {
        let pos = self.positive_only;
        self.sampler.sample(&mut self.rng, |m| Self::component_weights(m, pos), true)
    }

    pub fn non_exploratory_sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Task> {
        let pos = self.positive_only;
        (0..count)
            .map(|_| self.sampler.sample(rng, |m| Self::component_weights(m, pos), false))
            .collect()
    }

    /// Fit points for the current window: unit task, time in `[0, 1]`,
    /// competence in `[0, 1]`.
    pub fn window_points(&self) -> Vec<Vec<f64>> {
        let len = self.window.len();
        let denom = (len.max(2) - 1) as f64;
        self.window
            .iter()
            .enumerate()
            .map(|(i, (u, comp))| {
                let mut p = u.clone();
                p.push(if len > 1 { i as f64 / denom } else { 0.0 });
                p.push(*comp);
                p
            })
            .collect()
    }

    pub fn observe(&mut self, task: &Task, episodic_return: f64) {
        let unit = self.sampler.space.normalize(task);
        let comp = self.competence(episodic_return);
        self.window.push_back((unit, comp));
        let n = self.sampler.params.fit_rate;
        while self.window.len() > n {
            self.window.pop_front();
        }
        self.sampler.since_fit += 1;
        if self.sampler.since_fit >= n {
            self.sampler.since_fit = 0;
            let points = self.window_points();
            if let Ok(sel) = select_k_by_aic(&points, self.sampler.params.max_k, &mut self.rng) {
                self.sampler.mixture = Some(sel.mixture);
            }
        }
    }

    pub fn set_mixture(&mut self, m: GaussianMixture) {
        self.sampler.mixture = Some(m);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmm::MixtureComponent;
    use crate::linalg::Matrix;
    use alloc::vec;
    use rand::SeedableRng;

    fn space() -> BoxSpace {
        BoxSpace::new(vec![0.0, 0.0], vec![3.0, 6.0]).unwrap()
    }

    #[test]
    fn alp_examples() {
        let mut h = AlpHistory::new();
        assert_eq!(alp_of(&[0.5, 0.5], 10.0, &h), 0.0);
        h.push(vec![0.2, 0.2], 100.0);
        h.push(vec![0.9, 0.9], -50.0);
        assert_eq!(alp_of(&[0.25, 0.2], 250.0, &h), 150.0);
        assert_eq!(alp_of(&[0.9, 0.9], -50.0, &h), 0.0);
    }

    #[test]
    fn bootstrap_is_uniform_without_ek() {
        let mut t = AlpGmm::new(space(), GmmParams::ALP_GMM, None, ChaCha8Rng::seed_from_u64(1));
        let mut reference = ChaCha8Rng::seed_from_u64(1);
        let expected = space().uniform_sample(&mut reference);
        assert_eq!(t.sample_task(), expected);
    }

    fn two_component(alps: [f64; 2]) -> GaussianMixture {
        let comp = |x: f64, a: f64| MixtureComponent {
            weight: 0.5,
            mean: vec![x, 0.5, a],
            covariance: Matrix::from_diagonal(&[1e-4, 1e-4, 1e-4]),
        };
        GaussianMixture::new(vec![comp(0.1, alps[0]), comp(0.9, alps[1])])
    }

    #[test]
    fn component_choice_proportional_to_alp() {
        let mut t = AlpGmm::new(space(), GmmParams { random_prob: 0.0, ..GmmParams::ALP_GMM }, None, ChaCha8Rng::seed_from_u64(2));
        t.set_mixture(two_component([0.9, 0.0]));
        for _ in 0..500 {
            let task = t.sample_task();
            assert!(task[0] < 1.5, "{task:?}");
        }
        // all non-positive ALP: uniform over components
        t.set_mixture(two_component([0.0, -0.1]));
        let left = (0..2000).filter(|_| t.sample_task()[0] < 1.5).count();
        assert!((left as f64 / 2000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn full_random_prob_is_uniform() {
        let mut t = AlpGmm::new(space(), GmmParams { random_prob: 1.0, ..GmmParams::ALP_GMM }, None, ChaCha8Rng::seed_from_u64(3));
        t.set_mixture(two_component([1.0, 0.0]));
        let right = (0..4000).filter(|_| t.sample_task()[0] > 1.5).count();
        assert!((right as f64 / 4000.0 - 0.5).abs() < 0.04);
    }

    #[test]
    fn bootstrap_follows_initial_gaussian() {
        let g = GaussianDist::diagonal(vec![1.0, 3.0], &[0.3, 0.6]).unwrap();
        let mut t = AlpGmm::new(space(), GmmParams::ALP_GMM, Some(g), ChaCha8Rng::seed_from_u64(4));
        let n = 149;
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let task = t.sample_task();
            sum[0] += task[0];
            sum[1] += task[1];
            t.observe(&task, 0.0);
        }
        assert!(t.mixture().is_none());
        assert!((sum[0] / n as f64 - 1.0).abs() < 3.0 * 0.3 / (n as f64).sqrt());
        assert!((sum[1] / n as f64 - 3.0).abs() < 3.0 * 0.6 / (n as f64).sqrt());
    }

    #[test]
    fn refits_every_n_and_window_is_bounded() {
        let params = GmmParams { fit_rate: 20, max_k: 3, ..GmmParams::ALP_GMM };
        let mut t = AlpGmm::new(space(), params, None, ChaCha8Rng::seed_from_u64(5));
        for i in 0..45 {
            let task = t.sample_task();
            t.observe(&task, (i % 7) as f64 * 10.0);
            assert_eq!(t.mixture().is_some(), i >= 19);
        }
        assert_eq!(t.window_alps().len(), 20);
        assert!(t.window_alps().iter().all(|a| *a >= 0.0));
    }

    #[test]
    fn competence_endpoints() {
        let t = CovarGmm::new(space(), GmmParams::COVAR_GMM, None, ChaCha8Rng::seed_from_u64(0));
        assert_eq!(t.competence(-100.0), 0.0);
        assert_eq!(t.competence(300.0), 1.0);
        assert_eq!(t.competence(500.0), 1.0);
        assert_eq!(t.competence(100.0), 0.5);
    }

    #[test]
    fn improving_region_dominates_covar_weights() {
        // Left half: returns rise over time. Right half: constant returns.
        let params = GmmParams { fit_rate: 200, max_k: 2, random_prob: 0.0, ..GmmParams::COVAR_GMM };
        let mut t = CovarGmm::new(space(), params, None, ChaCha8Rng::seed_from_u64(7));
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for i in 0..200 {
            let left = i % 2 == 0;
            let x = if left { 0.2 + 0.3 * rng.random::<f64>() } else { 2.5 + 0.3 * rng.random::<f64>() };
            let y = 3.0 + rng.random::<f64>();
            let r = if left { -100.0 + 2.0 * i as f64 } else { 150.0 };
            t.observe(&Task(vec![x, y]), r);
        }
        let m = t.mixture().unwrap().clone();
        let w = CovarGmm::component_weights(&m, false);
        let d = m.dims();
        let (best, _) = w.iter().enumerate().fold((0, 0.0), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
        assert!(m.components()[best].mean[0] < 0.5);
        assert!(m.components()[best].covariance[(d - 2, d - 1)] > 0.0);
        let left = (0..1000).filter(|_| t.sample_task()[0] < 1.5).count();
        assert!(left > 900, "{left}");
    }

    #[test]
    fn constant_returns_give_near_uniform_component_choice() {
        let params = GmmParams { fit_rate: 100, max_k: 2, ..GmmParams::COVAR_GMM };
        let mut t = CovarGmm::new(space(), params, None, ChaCha8Rng::seed_from_u64(9));
        for _ in 0..100 {
            let task = t.sample_task();
            t.observe(&task, 50.0);
        }
        let w = CovarGmm::component_weights(t.mixture().unwrap(), false);
        let max = w.iter().cloned().fold(0.0, f64::max);
        assert!(max < 1e-6, "{w:?}");
    }
}
