//! Automatic Domain Randomization: a uniform box around an easy starting
//! task whose faces move outward or inward depending on the returns
//! obtained when tasks are pinned to them.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::task_space::{BoxSpace, Task};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdrParams {
    /// `t_L`: below this mean return a boundary shrinks.
    pub t_low: f64,
    /// `t_H`: above this mean return an upper boundary expands.
    pub t_high: f64,
    /// `p_b`: probability of probing a boundary.
    pub boundary_prob: f64,
    /// `m`: buffer length that triggers an update.
    pub buffer_size: usize,
    /// `Δ`: boundary step, task units.
    pub step: f64,
}

impl Default for AdrParams {
    fn default() -> Self {
        Self { t_low: 0.0, t_high: 180.0, boundary_prob: 0.7, buffer_size: 10, step: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Low,
    High,
}

/// One boundary move, for time-series export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdrUpdate {
    pub episode: u64,
    pub dim: usize,
    pub side: Side,
    pub mean_return: f64,
    pub phi_low: Vec<f64>,
    pub phi_high: Vec<f64>,
    /// The move was cut short by the opposite boundary or the space bound.
    pub clamped: bool,
}

#[derive(Debug, Clone)]
pub struct Adr {
    space: BoxSpace,
    params: AdrParams,
    phi_low: Vec<f64>,
    phi_high: Vec<f64>,
    buffers_low: Vec<Vec<f64>>,
    buffers_high: Vec<Vec<f64>>,
    probe: Option<(usize, Side)>,
    history: Vec<AdrUpdate>,
    rng: ChaCha8Rng,
}

impl Adr {
    /// Starts from a zero-width box at `anchor` (clamped into the space).
    pub fn new(space: BoxSpace, params: AdrParams, anchor: &Task, rng: ChaCha8Rng) -> Self {
        let start = space.clip_unchecked(anchor.coords()).0;
        let d = space.dims();
        Self {
            space,
            params,
            phi_low: start.clone(),
            phi_high: start,
            buffers_low: vec![Vec::new(); d],
            buffers_high: vec![Vec::new(); d],
            probe: None,
            history: Vec::new(),
            rng,
        }
    }

    pub fn params(&self) -> &AdrParams {
        &self.params
    }

    pub fn phi_low(&self) -> &[f64] {
        &self.phi_low
    }

    pub fn phi_high(&self) -> &[f64] {
        &self.phi_high
    }

    pub fn pending_probe(&self) -> Option<(usize, Side)> {
        self.probe
    }

    pub fn history(&self) -> &[AdrUpdate] {
        &self.history
    }

    pub fn buffer(&self, dim: usize, side: Side) -> &[f64] {
        match side {
            Side::Low => &self.buffers_low[dim],
            Side::High => &self.buffers_high[dim],
        }
    }

    fn box_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.phi_low
            .iter()
            .zip(&self.phi_high)
            .map(|(l, h)| l + (h - l) * rng.random::<f64>())
            .collect()
    }

    pub fn sample_task(&mut self) -> Task {
        let mut lambda = {
            let rng = &mut self.rng;
            self.phi_low
                .iter()
                .zip(&self.phi_high)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect::<Vec<f64>>()
        };
        self.probe = None;
        if self.rng.random::<f64>() < self.params.boundary_prob {
            let j = self.rng.random_range(0..self.space.dims());
            let side = if self.rng.random::<f64>() < 0.5 { Side::Low } else { Side::High };
            lambda[j] = match side {
                Side::Low => self.phi_low[j],
                Side::High => self.phi_high[j],
            };
            self.probe = Some((j, side));
        }
        Task(lambda)
    }

    /// Box draws with no boundary pinning.
    pub fn non_exploratory_sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Task> {
        (0..count).map(|_| Task(self.box_sample(rng))).collect()
    }

    pub fn observe(&mut self, episodic_return: f64, episode: u64) {
        let Some((j, side)) = self.probe.take() else {
            return;
        };
        let buf = match side {
            Side::Low => &mut self.buffers_low[j],
            Side::High => &mut self.buffers_high[j],
        };
        buf.push(episodic_return);
        if buf.len() < self.params.buffer_size {
            return;
        }
        let mean = buf.iter().sum::<f64>() / buf.len() as f64;
        buf.clear();

        let p = self.params;
        let (lo_bound, hi_bound) = (self.space.lower()[j], self.space.upper()[j]);
        let mut clamped = false;
        let moved = match side {
            Side::Low => {
                let target = if mean < p.t_low {
                    Some(self.phi_low[j] + p.step)
                } else if mean > p.t_low {
                    Some(self.phi_low[j] - p.step)
                } else {
                    None
                };
                target.map(|t| {
                    let v = t.clamp(lo_bound, self.phi_high[j]);
                    clamped = v != t;
                    self.phi_low[j] = v;
                })
            }
            Side::High => {
                let target = if mean < p.t_low {
                    Some(self.phi_high[j] - p.step)
                } else if mean > p.t_high {
                    Some(self.phi_high[j] + p.step)
                } else {
                    None
                };
                target.map(|t| {
                    let v = t.clamp(self.phi_low[j], hi_bound);
                    clamped = v != t;
                    self.phi_high[j] = v;
                })
            }
        };
        if moved.is_some() {
            self.history.push(AdrUpdate {
                episode,
                dim: j,
                side,
                mean_return: mean,
                phi_low: self.phi_low.clone(),
                phi_high: self.phi_high.clone(),
                clamped,
            });
        }
    }
}
