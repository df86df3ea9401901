//! Gaussian mixture models fitted by expectation-maximization, with
//! AIC-based selection of the number of components.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AclError, Result};
use crate::linalg::Matrix;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Ridge added to every fitted covariance.
pub const COVARIANCE_REG: f64 = 1e-6;
pub const EM_MAX_ITER: usize = 100;
/// Stop once the mean per-point log-likelihood changes by less than this.
pub const EM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub covariance: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    components: Vec<MixtureComponent>,
}

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    /// Free parameter count: weights (minus one), means and full covariances.
    pub fn num_params(&self) -> usize {
        let d = self.dims();
        self.len() * (1 + d + d * (d + 1) / 2) - 1
    }

    pub fn log_likelihood(&self, points: &[Vec<f64>]) -> f64 {
        let cache = DensityCache::new(self);
        points.iter().map(|x| log_sum_exp(&cache.weighted_log_densities(x))).sum()
    }

    pub fn aic(&self, points: &[Vec<f64>]) -> f64 {
        2.0 * self.num_params() as f64 - 2.0 * self.log_likelihood(points)
    }

    /// Posterior component probabilities for one point.
    pub fn responsibilities(&self, x: &[f64]) -> Vec<f64> {
        let cache = DensityCache::new(self);
        let mut lw = cache.weighted_log_densities(x);
        let lse = log_sum_exp(&lw);
        for v in lw.iter_mut() {
            *v = libm::exp(*v - lse);
        }
        lw
    }

    /// Draws a component index by weight.
    pub fn pick_component<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let w: Vec<f64> = self.components.iter().map(|c| c.weight).collect();
        pick_weighted(&w, rng)
    }

    /// Draws the coordinates `idx` from component `k`'s marginal.
    pub fn sample_component_marginal<R: Rng + ?Sized>(
        &self,
        k: usize,
        idx: &[usize],
        rng: &mut R,
    ) -> Vec<f64> {
        let c = &self.components[k];
        let mut cov = c.covariance.submatrix(idx);
        cov.add_to_diagonal(1e-12);
        let ch = cov.cholesky().expect("regularized covariance");
        let z: Vec<f64> = (0..idx.len()).map(|_| StandardNormal.sample(rng)).collect();
        let lz = ch.mul_vec(&z);
        idx.iter().zip(lz).map(|(&i, v)| c.mean[i] + v).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let k = self.pick_component(rng);
        let idx: Vec<usize> = (0..self.dims()).collect();
        self.sample_component_marginal(k, &idx, rng)
    }
}

/// Samples an index with probability proportional to `weights` (which must
/// be non-negative with a positive sum).
pub fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // rounding: return the last index with positive weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

struct DensityCache {
    entries: Vec<Option<(f64, crate::linalg::Cholesky)>>,
    means: Vec<Vec<f64>>,
}

impl DensityCache {
    fn new(m: &GaussianMixture) -> Self {
        let entries = m
            .components
            .iter()
            .map(|c| {
                if c.weight <= 0.0 {
                    return None;
                }
                let ch = c.covariance.cholesky()?;
                let d = c.mean.len() as f64;
                let norm = libm::log(c.weight) - 0.5 * (d * LN_2PI + ch.log_det());
                Some((norm, ch))
            })
            .collect();
        Self { entries, means: m.components.iter().map(|c| c.mean.clone()).collect() }
    }

    fn weighted_log_densities(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        let mut diff = vec![0.0; x.len()];
        self.weighted_log_densities_into(x, &mut diff, &mut out);
        out
    }

    fn weighted_log_densities_into(&self, x: &[f64], diff: &mut [f64], out: &mut [f64]) {
        for ((e, mu), o) in self.entries.iter().zip(&self.means).zip(out.iter_mut()) {
            *o = match e {
                None => f64::NEG_INFINITY,
                Some((norm, ch)) => {
                    for ((d, a), b) in diff.iter_mut().zip(x).zip(mu) {
                        *d = a - b;
                    }
                    norm - 0.5 * ch.mahalanobis_sq(diff)
                }
            };
        }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + libm::log(v.iter().map(|x| libm::exp(x - m)).sum::<f64>())
}

/// Result of one EM run.
#[derive(Debug, Clone)]
pub struct EmFit {
    pub mixture: GaussianMixture,
    /// Log-likelihood of the data under the parameters entering each
    /// E-step, followed by the final parameters' value.
    pub log_likelihoods: Vec<f64>,
}

impl EmFit {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihoods.last().expect("at least one evaluation")
    }
}

/// Fits a `k`-component full-covariance mixture by EM.
///
/// Seeds are chosen by farthest-point traversal from a random first point;
/// iteration stops once the mean per-point log-likelihood change drops
/// below [`EM_TOL`] or after [`EM_MAX_ITER`] iterations.
pub fn em_fit<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Result<EmFit> {
    let n = points.len();
    if k == 0 || n < k {
        return Err(AclError::TooFewPoints { needed: k.max(1), got: n });
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(AclError::DimensionMismatch { expected: d, got: 0 });
    }

    let seeds = farthest_point_seeds(points, k, rng);
    let mut resp = vec![0.0; n * k];
    for (i, x) in points.iter().enumerate() {
        let nearest = seeds
            .iter()
            .enumerate()
            .map(|(j, &s)| (j, sq_dist(x, &points[s])))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0;
        resp[i * k + nearest] = 1.0;
    }
    let mut mixture = m_step(points, &resp, k, None);

    let mut lls = Vec::new();
    for _ in 0..EM_MAX_ITER {
        let ll = e_step(&mixture, points, &mut resp);
        let converged = lls.last().is_some_and(|prev: &f64| ((ll - prev) / n as f64).abs() < EM_TOL);
        lls.push(ll);
        if converged {
            return Ok(EmFit { mixture, log_likelihoods: lls });
        }
        mixture = m_step(points, &resp, k, Some(&mixture));
    }
    lls.push(mixture.log_likelihood(points));
    Ok(EmFit { mixture, log_likelihoods: lls })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn farthest_point_seeds<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.len();
    let mut seeds = vec![rng.random_range(0..n)];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[seeds[0]])).collect();
    while seeds.len() < k {
        let (far, _) = min_d
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        seeds.push(far);
        for (i, p) in points.iter().enumerate() {
            min_d[i] = min_d[i].min(sq_dist(p, &points[far]));
        }
    }
    seeds
}

/// Fills `resp` with posterior responsibilities; returns the log-likelihood.
fn e_step(m: &GaussianMixture, points: &[Vec<f64>], resp: &mut [f64]) -> f64 {
    let k = m.len();
    let cache = DensityCache::new(m);
    let mut lw = vec![0.0; k];
    let mut diff = vec![0.0; m.dims()];
    let mut ll = 0.0;
    for (i, x) in points.iter().enumerate() {
        cache.weighted_log_densities_into(x, &mut diff, &mut lw);
        let lse = log_sum_exp(&lw);
        ll += lse;
        for j in 0..k {
            resp[i * k + j] = libm::exp(lw[j] - lse);
        }
    }
    ll
}

fn m_step(points: &[Vec<f64>], resp: &[f64], k: usize, prev: Option<&GaussianMixture>) -> GaussianMixture {
    let n = points.len();
    let d = points[0].len();
    let mut comps = Vec::with_capacity(k);
    for j in 0..k {
        let nk: f64 = (0..n).map(|i| resp[i * k + j]).sum();
        if nk < 1e-12 {
            // Starved component: keep its shape but give it no mass.
            let old = prev.map(|p| p.components[j].clone()).unwrap_or_else(|| MixtureComponent {
                weight: 0.0,
                mean: points[0].clone(),
                covariance: Matrix::identity(d),
            });
            comps.push(MixtureComponent { weight: 0.0, ..old });
            continue;
        }
        let mut mean = vec![0.0; d];
        for (i, x) in points.iter().enumerate() {
            let r = resp[i * k + j];
            for a in 0..d {
                mean[a] += r * x[a];
            }
        }
        for v in mean.iter_mut() {
            *v /= nk;
        }
        let mut cov = Matrix::zeros(d);
        for (i, x) in points.iter().enumerate() {
            let r = resp[i * k + j];
            for a in 0..d {
                let da = x[a] - mean[a];
                for b in 0..=a {
                    cov[(a, b)] += r * da * (x[b] - mean[b]);
                }
            }
        }
        for a in 0..d {
            for b in 0..=a {
                let v = cov[(a, b)] / nk;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        cov.add_to_diagonal(COVARIANCE_REG);
        comps.push(MixtureComponent { weight: nk / n as f64, mean, covariance: cov });
    }
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    for c in comps.iter_mut() {
        c.weight /= total;
    }
    GaussianMixture { components: comps }
}

/// Outcome of AIC model selection.
#[derive(Debug, Clone)]
pub struct ModelSelection {
    pub mixture: GaussianMixture,
    pub k: usize,
    /// `(k, aic)` for every candidate fitted.
    pub scores: Vec<(usize, f64)>,
}

/// Fits `k = 2..=k_max` (capped at the number of points) and keeps the fit
/// with the lowest AIC; ties go to the smaller `k`.
pub fn select_k_by_aic<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k_max: usize,
    rng: &mut R,
) -> Result<ModelSelection> {
    if points.len() < 2 {
        return Err(AclError::TooFewPoints { needed: 2, got: points.len() });
    }
    let hi = k_max.min(points.len()).max(1);
    let lo = 2.min(hi);
    let mut best: Option<(usize, f64, GaussianMixture)> = None;
    let mut scores = Vec::new();
    for k in lo..=hi {
        let fit = em_fit(points, k, rng)?;
        let aic = 2.0 * fit.mixture.num_params() as f64 - 2.0 * fit.final_log_likelihood();
        scores.push((k, aic));
        if best.as_ref().is_none_or(|b| aic < b.1) {
            best = Some((k, aic, fit.mixture));
        }
    }
    let (k, _, mixture) = best.expect("at least one candidate");
    Ok(ModelSelection { mixture, k, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blob<R: Rng>(center: &[f64], sd: f64, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                center
                    .iter()
                    .map(|c| { let z: f64 = StandardNormal.sample(rng); c + sd * z })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn single_component_is_sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = blob(&[1.0, -2.0], 0.7, 200, &mut rng);
        let fit = em_fit(&pts, 1, &mut rng).unwrap();
        let c = &fit.mixture.components()[0];
        let n = pts.len() as f64;
        let mx: f64 = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let my: f64 = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p[0] - mx) * (p[0] - mx)).sum::<f64>() / n;
        assert!((c.mean[0] - mx).abs() < 1e-12 && (c.mean[1] - my).abs() < 1e-12);
        assert!((c.covariance[(0, 1)] - sxy).abs() < 1e-12);
        assert!((c.covariance[(0, 0)] - sxx - COVARIANCE_REG).abs() < 1e-12);
        assert!((c.weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn separated_clusters_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = blob(&[-5.0, 0.0], 1.0, 300, &mut rng);
        let b = blob(&[5.0, 0.0], 1.0, 300, &mut rng);
        let oracle = |pts: &[Vec<f64>]| -> Vec<f64> {
            (0..2).map(|d| pts.iter().map(|p| p[d]).sum::<f64>() / pts.len() as f64).collect()
        };
        let (ma, mb) = (oracle(&a), oracle(&b));
        let mut pts = a;
        pts.extend(b);
        let fit = em_fit(&pts, 2, &mut rng).unwrap();
        let mut means: Vec<Vec<f64>> = fit.mixture.components().iter().map(|c| c.mean.clone()).collect();
        means.sort_by(|x, y| x[0].partial_cmp(&y[0]).unwrap());
        for (m, o) in means.iter().zip([ma, mb]) {
            assert!(sq_dist(m, &o).sqrt() < 0.2, "{m:?} vs {o:?}");
        }
    }

    #[test]
    fn log_likelihood_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut pts = blob(&[0.0, 0.0], 1.0, 100, &mut rng);
        pts.extend(blob(&[2.0, 1.0], 0.5, 80, &mut rng));
        let fit = em_fit(&pts, 3, &mut rng).unwrap();
        for w in fit.log_likelihoods.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{w:?}");
        }
    }

    #[test]
    fn responsibilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = blob(&[0.0, 0.0, 0.0], 1.0, 60, &mut rng);
        let fit = em_fit(&pts, 3, &mut rng).unwrap();
        for p in &pts {
            let r = fit.mixture.responsibilities(p);
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let w: f64 = fit.mixture.components().iter().map(|c| c.weight).sum();
        assert!((w - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(matches!(em_fit(&pts, 3, &mut rng), Err(AclError::TooFewPoints { .. })));
    }

    #[test]
    fn aic_prefers_two_for_single_blob() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pts = blob(&[0.0, 0.0], 0.1, 150, &mut rng);
        let sel = select_k_by_aic(&pts, 10, &mut rng).unwrap();
        let aic2 = sel.scores.iter().find(|s| s.0 == 2).unwrap().1;
        let aic10 = sel.scores.iter().find(|s| s.0 == 10).unwrap().1;
        assert!(aic2 < aic10, "{:?}", sel.scores);
        let argmin = sel
            .scores
            .iter()
            .fold((0, f64::INFINITY), |b, s| if s.1 < b.1 { *s } else { b });
        assert_eq!(sel.k, argmin.0);
        assert!((sel.mixture.aic(&pts) - argmin.1).abs() < 1e-6);
    }

    #[test]
    fn aic_single_candidate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pts = blob(&[0.0, 0.0], 1.0, 50, &mut rng);
        let sel = select_k_by_aic(&pts, 2, &mut rng).unwrap();
        assert_eq!(sel.k, 2);
        assert_eq!(sel.scores.len(), 1);
    }

    #[test]
    fn aic_finds_three_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut pts = blob(&[0.0, 0.0], 0.3, 100, &mut rng);
        pts.extend(blob(&[6.0, 0.0], 0.3, 100, &mut rng));
        pts.extend(blob(&[0.0, 6.0], 0.3, 100, &mut rng));
        let sel = select_k_by_aic(&pts, 10, &mut rng).unwrap();
        assert_eq!(sel.k, 3, "{:?}", sel.scores);
    }

    #[test]
    fn mixture_sampling_matches_weights() {
        let m = GaussianMixture::new(vec![
            MixtureComponent { weight: 0.2, mean: vec![0.0], covariance: Matrix::identity(1) },
            MixtureComponent { weight: 0.5, mean: vec![10.0], covariance: Matrix::identity(1) },
            MixtureComponent { weight: 0.3, mean: vec![20.0], covariance: Matrix::identity(1) },
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[m.pick_component(&mut rng)] += 1;
        }
        for (c, w) in counts.iter().zip([0.2, 0.5, 0.3]) {
            assert!((*c as f64 / n as f64 - w).abs() < 0.01);
        }
    }
}
