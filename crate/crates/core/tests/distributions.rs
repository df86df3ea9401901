use acl_core::adr::{Adr, AdrParams};
use acl_core::gaussian::kl_diagonal;
use acl_core::procgen::{generate_stumps, terrain_profiles, CppnWeights, TerrainSpec, ThetaSpace};
use acl_core::{BoxSpace, ShuffleMap, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal_log_pdf(x: f64, m: f64, v: f64) -> f64 {
    -(x - m) * (x - m) / (2.0 * v) - 0.5 * (2.0 * std::f64::consts::PI * v).ln()
}

#[test]
fn kl_matches_numerical_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let (pm, pv) = (rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0));
        let (qm, qv) = (rng.random_range(-2.0..2.0), rng.random_range(0.2..3.0));
        let n = 200_000;
        let (a, b) = (-40.0, 40.0);
        let h = (b - a) / n as f64;
        let integral: f64 = (0..=n)
            .map(|i| {
                let x = a + i as f64 * h;
                let lp = normal_log_pdf(x, pm, pv);
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * lp.exp() * (lp - normal_log_pdf(x, qm, qv))
            })
            .sum::<f64>()
            * h;
        let got = kl_diagonal(&[pm], &[pv], &[qm], &[qv]);
        assert!((got - integral).abs() < 1e-6, "{got} vs {integral}");
    }
}

#[test]
fn adr_probe_frequency_matches_boundary_prob() {
    let space = BoxSpace::new(vec![0.0, 0.0], vec![3.0, 6.0]).unwrap();
    for pb in [0.3, 0.7] {
        let params = AdrParams { boundary_prob: pb, ..AdrParams::default() };
        let mut adr = Adr::new(space.clone(), params, &Task(vec![1.0, 3.0]), ChaCha8Rng::seed_from_u64(3));
        let n = 20_000;
        let mut probes = 0;
        for ep in 0..n {
            adr.sample_task();
            probes += usize::from(adr.pending_probe().is_some());
            adr.observe(100.0, ep);
        }
        let f = probes as f64 / n as f64;
        assert!((f - pb).abs() <= 0.02, "p_b {pb}: {f}");
    }
}

#[test]
fn stump_heights_follow_clamped_normal() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut hs = Vec::new();
    while hs.len() < 100_000 {
        hs.extend(generate_stumps(2.0, 0.5, false, &mut rng).unwrap().stumps.iter().map(|s| s.h));
    }
    let m = hs.iter().sum::<f64>() / hs.len() as f64;
    let sd = (hs.iter().map(|h| (h - m).powi(2)).sum::<f64>() / (hs.len() - 1) as f64).sqrt();
    assert!((m - 2.0).abs() <= 0.01, "{m}");
    assert!((sd - 0.1).abs() <= 0.01, "{sd}");

    let neg = generate_stumps(-3.0, 0.5, true, &mut rng).unwrap();
    assert!(!neg.stumps.is_empty() && neg.stumps.iter().all(|s| s.h == 0.0));
}

#[test]
fn uniform_samples_have_box_moments() {
    let space = BoxSpace::new(vec![-3.0, 0.0, 2.0], vec![9.0, 6.0, 4.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 200_000;
    let mut sum = [0.0; 3];
    for _ in 0..n {
        let t = space.uniform_sample(&mut rng);
        for d in 0..3 {
            sum[d] += t[d];
        }
    }
    for d in 0..3 {
        let mid = (space.lower()[d] + space.upper()[d]) / 2.0;
        let se = space.range(d) / (12.0 * n as f64).sqrt();
        assert!((sum[d] / n as f64 - mid).abs() < 5.0 * se);
    }
}

#[test]
fn shuffle_preserves_uniform_occupancy() {
    // 16 cells, 15 degrees of freedom; 0.999 quantile of chi-square
    const CHI2_CRIT: f64 = 37.70;
    let space = BoxSpace::new(vec![-3.0, 0.0], vec![9.0, 6.0]).unwrap();
    let k = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let map = ShuffleMap::build(&space, k, &mut rng).unwrap();
    assert!(!map.is_identity());
    let n = 64_000;
    let mut counts = vec![0usize; k * k];
    for _ in 0..n {
        let t = map.interpolate(&space.uniform_sample(&mut rng)).unwrap();
        let cell = |d: usize| (((t[d] - space.lower()[d]) / space.range(d) * k as f64) as usize).min(k - 1);
        counts[cell(0) * k + cell(1)] += 1;
    }
    let e = n as f64 / (k * k) as f64;
    let chi2: f64 = counts.iter().map(|c| (*c as f64 - e).powi(2) / e).sum();
    assert!(chi2 < CHI2_CRIT, "{chi2}");
}

fn profiles(theta: [f64; 3], w: &CppnWeights) -> Vec<f64> {
    let (g, c) = terrain_profiles(&TerrainSpec::new(theta, 0.0, 0.0, 0.0), w);
    g.into_iter().chain(c).collect()
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn draw(bounds: &[(f64, f64); 3], rng: &mut ChaCha8Rng) -> [f64; 3] {
    [0, 1, 2].map(|d| rng.random_range(bounds[d].0..=bounds[d].1))
}

#[test]
fn nearby_encodings_give_similar_terrains() {
    let w = CppnWeights::canonical();
    let b = ThetaSpace::Hard.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut near, mut far) = (0.0, 0.0);
    for i in 0..100 {
        let theta = draw(&b, &mut rng);
        let base = profiles(theta, &w);
        let mut moved = theta;
        moved[i % 3] += 1e-3;
        near += sup_dist(&base, &profiles(moved, &w));
        far += sup_dist(&base, &profiles(draw(&b, &mut rng), &w));
    }
    assert!(near <= 0.1 * far, "near {near} far {far}");
}

#[test]
fn medium_space_has_crossing_and_open_terrains() {
    let w = CppnWeights::canonical();
    let b = ThetaSpace::Medium.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 10_000;
    let crossing = (0..n)
        .filter(|_| {
            let (g, c) = terrain_profiles(&TerrainSpec::new(draw(&b, &mut rng), 0.0, 0.0, 0.0), &w);
            g.iter().zip(&c).any(|(g, c)| c - g <= 0.0)
        })
        .count();
    assert!(crossing > 0 && crossing < n, "{crossing}/{n}");
}
