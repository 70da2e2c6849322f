//! Two-sample Wilcoxon rank-sum (Mann-Whitney U) test and small summaries.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::StatsError;

/// Combined size up to which p-values come from the exact distribution.
pub const EXACT_LIMIT: usize = 20;
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// First sample tends to be larger.
    Greater,
    /// First sample tends to be smaller.
    Less,
    None,
}

impl Direction {
    pub const fn mark(self) -> &'static str {
        match self {
            Direction::Greater => "+",
            Direction::Less => "-",
            Direction::None => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Mann-Whitney U of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    pub direction: Direction,
}

impl RankSumResult {
    /// `+`/`-` when significant, empty otherwise.
    pub fn mark(&self) -> &'static str {
        if self.significant {
            self.direction.mark()
        } else {
            ""
        }
    }
}

/// Midranks doubled so that ties stay integral, in input order of `a ++ b`.
pub(crate) fn doubled_ranks(values: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 averaged, doubled.
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

/// Number of ways to pick `n` of `weights` for every possible weight sum.
fn subset_sum_counts(weights: &[u64], n: usize) -> Vec<f64> {
    let total: u64 = weights.iter().sum();
    let width = total as usize + 1;
    // counts[k][s]: subsets of size k with sum s.
    let mut counts = vec![vec![0.0f64; width]; n + 1];
    counts[0][0] = 1.0;
    for &w in weights {
        let w = w as usize;
        for k in (1..=n).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            let (src, dst) = (&lower[k - 1], &mut upper[0]);
            for s in (w..width).rev() {
                dst[s] += src[s - w];
            }
        }
    }
    counts.pop().unwrap_or_default()
}

fn exact_p(doubled_sum_a: u64, ranks: &[u64], n: usize) -> f64 {
    let counts = subset_sum_counts(ranks, n);
    let total: f64 = counts.iter().sum();
    let obs = doubled_sum_a as usize;
    let lower: f64 = counts[..=obs].iter().sum();
    let upper: f64 = counts[obs..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

fn approx_p(u: f64, n: f64, m: f64, tie_sizes: &[usize]) -> f64 {
    let big_n = n + m;
    let ties: f64 = tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = n * m / 12.0 * ((big_n + 1.0) - ties / (big_n * (big_n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let dev = (libm::fabs(u - n * m / 2.0) - 0.5).max(0.0);
    (2.0 * normal_sf(dev / libm::sqrt(var))).min(1.0)
}

/// Two-sided test. Exact (tie-aware) when `|a| + |b| <= 20`, otherwise the
/// normal approximation with tie and continuity corrections.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSumResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_sizes) = doubled_ranks(&combined);
    let (n, m) = (a.len(), b.len());
    let doubled_sum_a: u64 = ranks[..n].iter().sum();
    let u = doubled_sum_a as f64 / 2.0 - (n * (n + 1)) as f64 / 2.0;
    let p_value = if n + m <= EXACT_LIMIT {
        exact_p(doubled_sum_a, &ranks, n)
    } else {
        approx_p(u, n as f64, m as f64, &tie_sizes)
    };
    let centre = (n * m) as f64 / 2.0;
    let direction = if u > centre {
        Direction::Greater
    } else if u < centre {
        Direction::Less
    } else {
        Direction::None
    };
    Ok(RankSumResult {
        statistic: u,
        p_value,
        significant: p_value < SIGNIFICANCE,
        direction,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    libm::sqrt(values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_triples() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        assert!(!r.significant);
        assert_eq!(r.direction, Direction::Less);
    }

    #[test]
    fn identical_samples() {
        let a = [3.0, 1.0, 2.0, 2.0];
        let r = wilcoxon_rank_sum(&a, &a).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.direction, Direction::None);
        assert_eq!(r.mark(), "");
    }

    #[test]
    fn all_tied_large_sample() {
        let r = wilcoxon_rank_sum(&[1.0; 15], &[1.0; 15]).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn separated_thirties_are_significant() {
        let a: Vec<f64> = (0..30).map(|i| (i % 5) as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| (10 + i % 5) as f64).collect();
        let r = wilcoxon_rank_sum(&b, &a).unwrap();
        assert!(r.p_value < 1e-6);
        assert_eq!(r.mark(), "+");
    }

    #[test]
    fn symmetric_in_argument_order() {
        let a = [1.0, 4.0, 4.0, 9.0, 2.5];
        let b = [3.0, 4.0, 8.0, 8.0];
        let ab = wilcoxon_rank_sum(&a, &b).unwrap();
        let ba = wilcoxon_rank_sum(&b, &a).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.statistic + ba.statistic, 20.0);
    }

    #[test]
    fn empty_sample_error() {
        assert_eq!(wilcoxon_rank_sum(&[], &[1.0]), Err(StatsError::EmptySample));
    }

    #[test]
    fn doubled_midranks() {
        let (r, ties) = doubled_ranks(&[10.0, 20.0, 10.0, 30.0]);
        assert_eq!(r, vec![3, 6, 3, 8]);
        assert_eq!(ties, vec![2, 1, 1]);
    }

    #[test]
    fn summaries() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(std_dev(&[1.0, 3.0]), 1.0);
        assert_eq!(mean(&[]), 0.0);
    }
}
