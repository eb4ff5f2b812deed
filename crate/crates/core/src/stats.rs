//! Two-sample nonparametric tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub rejected: bool,
}

impl TestResult {
    pub fn new(statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            p_value,
            rejected: p_value < alpha,
        }
    }
}

fn check(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        Err(Error::EmptySample)
    } else {
        Ok(())
    }
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi theta form converges fast for small arguments.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-m * m * c).exp()
            })
            .sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        2.0 * s
    }
    .clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_test(x: &[f64], y: &[f64], alpha: f64) -> Result<TestResult> {
    check(x)?;
    check(y)?;
    let (xs, ys) = (sorted(x), sorted(y));
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = (n * m / (n + m)).sqrt();
    Ok(TestResult::new(d, kolmogorov_sf(en * d), alpha))
}

/// Midranks (1-based) of the pooled sample plus the tie group sizes.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let mut e = k;
        while e + 1 < order.len() && pooled[order[e + 1]] == pooled[order[k]] {
            e += 1;
        }
        let r = (k + e) as f64 / 2.0 + 1.0;
        for &idx in &order[k..=e] {
            ranks[idx] = r;
        }
        ties.push(e - k + 1);
        k = e + 1;
    }
    (ranks, ties)
}

fn tie_term(ties: &[usize]) -> f64 {
    ties.iter().map(|&t| (t * t * t - t) as f64).sum()
}

/// Largest per-sample size for which the rank-sum p-value is enumerated exactly.
pub const EXACT_RANKSUM_LIMIT: usize = 10;

/// How the rank-sum p-value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RanksumMethod {
    /// Exact up to [`EXACT_RANKSUM_LIMIT`] observations per sample, normal beyond.
    #[default]
    Auto,
    Exact,
    /// Normal approximation with tie and continuity corrections.
    Normal,
}

/// Rank-sum statistic `U` of `x` and its two-sided p-value.
pub fn ranksum_p(x: &[f64], y: &[f64], method: RanksumMethod) -> Result<(f64, f64)> {
    check(x)?;
    check(y)?;
    let (n1, n2) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let exact = match method {
        RanksumMethod::Auto => n1 <= EXACT_RANKSUM_LIMIT && n2 <= EXACT_RANKSUM_LIMIT,
        RanksumMethod::Exact => true,
        RanksumMethod::Normal => false,
    };
    let p = if exact {
        exact_ranksum_p(&ranks, n1, r1)
    } else {
        let nn = (n1 + n2) as f64;
        let mean = (n1 * n2) as f64 / 2.0;
        let var = (n1 * n2) as f64 / 12.0 * ((nn + 1.0) - tie_term(&ties) / (nn * (nn - 1.0)));
        if var <= 0.0 {
            1.0
        } else {
            let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
            2.0 * Normal::standard().sf(z)
        }
    };
    Ok((u, p.min(1.0)))
}

/// Wilcoxon rank-sum (Mann-Whitney) test. The statistic is `U` for `x`.
///
/// Exact two-sided p-value over all rank assignments when both samples have at
/// most ten observations; otherwise the normal approximation with tie and
/// continuity corrections.
pub fn ranksum_test(x: &[f64], y: &[f64], alpha: f64) -> Result<TestResult> {
    let (u, p) = ranksum_p(x, y, RanksumMethod::Auto)?;
    Ok(TestResult::new(u, p, alpha))
}

/// `P(|W - E[W]| >= |w - E[W]|)` where `W` is the rank sum of a uniformly
/// random `n1`-subset of `ranks`.
fn exact_ranksum_p(ranks: &[f64], n1: usize, observed: f64) -> f64 {
    // Midranks are multiples of 1/2, so doubled ranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s.
    let mut ways = vec![vec![0f64; max_sum + 1]; n1 + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                let add = ways[k - 1][s - r];
                if add > 0.0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let total: f64 = ways[n1].iter().sum();
    let expected2 = n1 as f64 * (ranks.len() + 1) as f64;
    let dev = (2.0 * observed - expected2).abs();
    let extreme: f64 = ways[n1]
        .iter()
        .enumerate()
        .filter(|&(s, _)| (s as f64 - expected2).abs() >= dev - 1e-9)
        .map(|(_, &w)| w)
        .sum();
    extreme / total
}

/// Kruskal-Wallis H test with tie correction and a chi-square reference.
pub fn kruskal_wallis_test(groups: &[&[f64]], alpha: f64) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidParameter("kruskal-wallis needs at least two groups".into()));
    }
    for g in groups {
        check(g)?;
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let nn = pooled.len() as f64;
    let (ranks, ties) = midranks(&pooled);
    let mut offset = 0;
    let mut acc = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        acc += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = 12.0 / (nn * (nn + 1.0)) * acc - 3.0 * (nn + 1.0);
    let correction = 1.0 - tie_term(&ties) / (nn * nn * nn - nn);
    if correction <= 0.0 {
        return Ok(TestResult::new(0.0, 1.0, alpha));
    }
    let h = (h / correction).max(0.0);
    let chi = ChiSquared::new((groups.len() - 1) as f64).expect("positive degrees of freedom");
    Ok(TestResult::new(h, chi.sf(h), alpha))
}

/// The three tests applied to one pair of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestTriple {
    pub ks: TestResult,
    pub ranksum: TestResult,
    pub kruskal_wallis: TestResult,
}

impl TestTriple {
    pub fn all_rejected(&self) -> bool {
        self.ks.rejected && self.ranksum.rejected && self.kruskal_wallis.rejected
    }
}

pub fn run_all(x: &[f64], y: &[f64], alpha: f64) -> Result<TestTriple> {
    Ok(TestTriple {
        ks: ks_test(x, y, alpha)?,
        ranksum: ranksum_test(x, y, alpha)?,
        kruskal_wallis: kruskal_wallis_test(&[x, y], alpha)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = DEFAULT_ALPHA;

    fn range(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(f64::from).collect()
    }

    #[test]
    fn ks_examples() {
        let x = range(1, 20);
        let same = ks_test(&x, &x, A).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        assert!(!same.rejected);

        let far = ks_test(&x, &range(101, 120), A).unwrap();
        assert_eq!(far.statistic, 1.0);
        assert!(far.rejected);

        let shifted = ks_test(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0], A).unwrap();
        assert_eq!(shifted.statistic, 0.25);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Tabulated critical values of the Kolmogorov distribution.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-3);
        assert!((kolmogorov_sf(1.2238) - 0.10).abs() < 1e-3);
        // Both branches agree where they meet.
        assert!((kolmogorov_sf(1.1799) - kolmogorov_sf(1.1801)).abs() < 1e-3);
    }

    #[test]
    fn ranksum_examples() {
        let x = range(1, 5);
        let same = ranksum_test(&x, &x, A).unwrap();
        assert!((same.p_value - 1.0).abs() < 1e-12);

        let low = ranksum_test(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0], A).unwrap();
        assert_eq!(low.statistic, 0.0);
        // Two extreme assignments out of C(6,3) = 20.
        assert!((low.p_value - 0.1).abs() < 1e-12);

        let tiny = ranksum_test(&[1.0, 2.0], &[3.0, 4.0], A).unwrap();
        assert!((tiny.p_value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ranksum_normal_approximation() {
        // n1 = n2 = 12, disjoint: U = 0, mean 72, var 12*12*25/12 = 300.
        let x = range(1, 12);
        let y = range(13, 24);
        let r = ranksum_test(&x, &y, A).unwrap();
        let z = (72.0 - 0.5) / 300f64.sqrt();
        let expected = 2.0 * Normal::standard().sf(z);
        assert!((r.p_value - expected).abs() < 1e-12);
        assert!(r.rejected);
    }

    #[test]
    fn kruskal_wallis_examples() {
        let g = [1.0, 2.0, 3.0];
        let same = kruskal_wallis_test(&[&g, &g], A).unwrap();
        assert!(same.statistic.abs() < 1e-12);
        assert!((same.p_value - 1.0).abs() < 1e-12);

        let split = kruskal_wallis_test(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]], A).unwrap();
        assert!((split.statistic - 27.0 / 7.0).abs() < 1e-12);

        let c = [2.0, 2.0];
        let flat = kruskal_wallis_test(&[&c, &c, &c], A).unwrap();
        assert_eq!(flat.statistic, 0.0);
        assert_eq!(flat.p_value, 1.0);
    }

    #[test]
    fn empty_samples_rejected() {
        assert!(matches!(ks_test(&[], &[1.0], A), Err(Error::EmptySample)));
        assert!(matches!(ranksum_test(&[1.0], &[], A), Err(Error::EmptySample)));
        assert!(matches!(kruskal_wallis_test(&[&[1.0], &[]], A), Err(Error::EmptySample)));
    }

    #[test]
    fn midranks_with_ties() {
        let (r, t) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, vec![1, 1, 2]);
    }
}
