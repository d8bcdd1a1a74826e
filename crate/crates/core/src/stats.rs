//! Small statistical helpers for summaries and equivalence checks.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and (n-1)-denominator standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// `mean +- 1.96 sd / sqrt(n)`.
pub fn normal_ci(mean: f64, sd: f64, n: usize) -> (f64, f64) {
    let half = 1.96 * sd / (n as f64).sqrt();
    (mean - half, mean + half)
}

/// Standard error of the mean of replicate estimates.
pub fn replicate_se(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    mean_sd(xs).1 / (xs.len() as f64).sqrt()
}

/// Total variation distance between two PMFs given as maps.
pub fn total_variation<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Empirical PMF of a sample.
pub fn empirical_pmf<K: Ord + Clone>(xs: impl IntoIterator<Item = K>) -> BTreeMap<K, f64> {
    let mut counts: BTreeMap<K, u64> = BTreeMap::new();
    let mut n = 0u64;
    for x in xs {
        *counts.entry(x).or_insert(0) += 1;
        n += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

/// Chi-square test of homogeneity for two samples of categorical counts.
/// Categories with small expected counts are pooled into one bin.
/// Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_two_sample<K: Ord + Clone>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> (f64, usize, f64) {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let total = (na + nb) as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for k in keys {
        let ca = a.get(k).copied().unwrap_or(0) as f64;
        let cb = b.get(k).copied().unwrap_or(0) as f64;
        let min_expected = (ca + cb) * (na.min(nb) as f64) / total;
        if min_expected < 5.0 {
            pool.0 += ca;
            pool.1 += cb;
        } else {
            bins.push((ca, cb));
        }
    }
    if pool.0 + pool.1 > 0.0 {
        bins.push(pool);
    }
    if bins.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let mut stat = 0.0;
    for &(ca, cb) in &bins {
        let row = ca + cb;
        let ea = row * na as f64 / total;
        let eb = row * nb as f64 / total;
        if ea > 0.0 {
            stat += (ca - ea).powi(2) / ea;
        }
        if eb > 0.0 {
            stat += (cb - eb).powi(2) / eb;
        }
    }
    let df = bins.len() - 1;
    let p = 1.0 - ChiSquared::new(df as f64).expect("df >= 1").cdf(stat);
    (stat, df, p)
}

pub fn counts<K: Ord + Clone>(xs: impl IntoIterator<Item = K>) -> BTreeMap<K, u64> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}
