//! Summary statistics, Welch's t-test and run comparison tables.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{AclError, Result};

pub const SIGNIFICANCE: f64 = 0.05;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    libm::sqrt(variance(xs))
}

/// Standard error of the mean.
pub fn std_error(xs: &[f64]) -> f64 {
    std_dev(xs) / libm::sqrt(xs.len() as f64)
}

/// Percentage of returns strictly above `threshold`.
pub fn pct_mastered(returns: &[f64], threshold: f64) -> Result<f64> {
    if returns.is_empty() {
        return Err(AclError::EmptyInput("returns"));
    }
    let n = returns.iter().filter(|r| **r > threshold).count();
    Ok(100.0 * n as f64 / returns.len() as f64)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (x + 0.5) * libm::log(t) - t + libm::log(a)
}

/// Continued fraction of the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of Student's t distribution with `df` degrees of
/// freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Welch's unequal-variance t-test, two-sided.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AclError::DegenerateSamples("each sample needs at least two values"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let se2 = va + vb;
    if !(se2 > 0.0) {
        return Err(AclError::DegenerateSamples("both samples are constant"));
    }
    let t = (mean(a) - mean(b)) / libm::sqrt(se2);
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(WelchResult { t, df, p: t_two_sided_p(t, df) })
}

/// Welch test that treats two constant samples as equal (`p = 1`) or
/// perfectly separated (`p = 0`).
pub fn welch_or_constant(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    match welch_t_test(a, b) {
        Err(AclError::DegenerateSamples("both samples are constant")) => {
            let d = mean(a) - mean(b);
            Ok(if d == 0.0 {
                WelchResult { t: 0.0, df: f64::NAN, p: 1.0 }
            } else {
                WelchResult { t: d.signum() * f64::INFINITY, df: f64::NAN, p: 0.0 }
            })
        }
        other => other,
    }
}

/// Evaluation curves of one group of runs (one teacher, many seeds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunGroup {
    pub episodes: Vec<u64>,
    /// One curve per seed, aligned with `episodes`.
    pub runs: Vec<Vec<f64>>,
}

impl RunGroup {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.runs.iter().map(|r| r[i]).collect()
    }

    pub fn final_values(&self) -> Vec<f64> {
        self.column(self.episodes.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub group: String,
    pub seeds: usize,
    pub final_mean: f64,
    pub final_std: f64,
    /// Per evaluation point, p-value against the baseline (1 for the
    /// baseline itself).
    pub p_values: Vec<f64>,
    pub stars: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub episodes: Vec<u64>,
    /// Sorted by group name.
    pub rows: Vec<ComparisonRow>,
}

/// Tests every group against `baseline` at each evaluation point.
pub fn compare_runs(groups: &BTreeMap<String, RunGroup>, baseline: &str) -> Result<Comparison> {
    let base = groups
        .get(baseline)
        .ok_or_else(|| AclError::InvalidConfig(alloc::format!("baseline group `{baseline}` not found")))?;
    if groups.len() < 2 {
        return Err(AclError::InvalidConfig("need at least two groups".into()));
    }
    let mut rows = Vec::new();
    for (name, g) in groups {
        if g.episodes != base.episodes {
            return Err(AclError::MismatchedGrids(name.clone()));
        }
        if g.runs.len() < 2 {
            return Err(AclError::DegenerateSamples("each group needs at least two seeds"));
        }
        if g.runs.iter().any(|r| r.len() != g.episodes.len()) {
            return Err(AclError::MismatchedGrids(name.clone()));
        }
        let mut p_values = Vec::with_capacity(g.episodes.len());
        for i in 0..g.episodes.len() {
            let p = if name == baseline { 1.0 } else { welch_or_constant(&g.column(i), &base.column(i))?.p };
            p_values.push(p);
        }
        let fin = g.final_values();
        rows.push(ComparisonRow {
            group: name.clone(),
            seeds: g.runs.len(),
            final_mean: mean(&fin),
            final_std: std_dev(&fin),
            stars: p_values.iter().map(|p| *p < SIGNIFICANCE).collect(),
            p_values,
        });
    }
    Ok(Comparison { baseline: baseline.into(), episodes: base.episodes.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pct_examples() {
        assert_eq!(pct_mastered(&[231.0, 229.0, 300.0, -100.0], 230.0).unwrap(), 50.0);
        assert_eq!(pct_mastered(&[230.0, 0.0], 230.0).unwrap(), 0.0);
        assert!(pct_mastered(&[], 230.0).is_err());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - 0.5 * libm::log(core::f64::consts::PI)).abs() < 1e-14);
        assert!((ln_gamma(10.0) - libm::log(362_880.0)).abs() < 1e-12);
    }

    #[test]
    fn welch_fixture() {
        let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.t, -1.0);
        assert_eq!(r.df, 8.0);
        assert!((r.p - 0.346_593_507_087_39).abs() < 1e-10, "{}", r.p);
    }

    #[test]
    fn welch_symmetry_and_identity() {
        let a = [1.0, 4.0, 2.5, 3.0];
        let b = [0.5, 1.0, 7.0];
        let x = welch_t_test(&a, &b).unwrap();
        let y = welch_t_test(&b, &a).unwrap();
        assert_eq!(x.t, -y.t);
        assert_eq!(x.p, y.p);
        let z = welch_t_test(&a, &a).unwrap();
        assert_eq!((z.t, z.p), (0.0, 1.0));
        assert!(welch_t_test(&[1.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn t_p_known_values() {
        // df = 1 is Cauchy: p = 1 - 2 atan(|t|) / π
        for t in [0.3, 1.0, 4.0] {
            let want = 1.0 - 2.0 * libm::atan(t) / core::f64::consts::PI;
            assert!((t_two_sided_p(t, 1.0) - want).abs() < 1e-13);
        }
        // df = 2: p = 1 - |t| / sqrt(2 + t²)
        for t in [0.3, 1.0, 4.0] {
            let want = 1.0 - t / libm::sqrt(2.0 + t * t);
            assert!((t_two_sided_p(t, 2.0) - want).abs() < 1e-13);
        }
    }

    fn group(runs: Vec<Vec<f64>>) -> RunGroup {
        RunGroup { episodes: vec![0, 500], runs }
    }

    #[test]
    fn compare_self_has_no_stars() {
        let g = group(vec![vec![0.0, 10.0], vec![1.0, 20.0], vec![0.0, 15.0]]);
        let mut m = BTreeMap::new();
        m.insert("random".into(), g.clone());
        m.insert("same".into(), g);
        let c = compare_runs(&m, "random").unwrap();
        assert!(c.rows.iter().all(|r| r.stars.iter().all(|s| !s)));
        assert_eq!(c.rows[0].group, "random");
    }

    #[test]
    fn compare_separated_and_mismatched() {
        let lo: Vec<Vec<f64>> = (0..32).map(|i| vec![0.0, i as f64 * 1e-3]).collect();
        let hi: Vec<Vec<f64>> = (0..32).map(|i| vec![0.0, 100.0 + i as f64 * 1e-3]).collect();
        let mut m = BTreeMap::new();
        m.insert("random".into(), group(lo));
        m.insert("alp-gmm".into(), group(hi));
        let c = compare_runs(&m, "random").unwrap();
        assert_eq!(c.rows[0].group, "alp-gmm");
        assert!(c.rows[0].p_values[1] < 1e-10);
        assert_eq!(c.rows[0].p_values[0], 1.0);
        m.insert("other".into(), RunGroup { episodes: vec![0, 400], runs: vec![vec![0.0, 1.0]; 2] });
        assert!(matches!(compare_runs(&m, "random"), Err(AclError::MismatchedGrids(_))));
    }
}
