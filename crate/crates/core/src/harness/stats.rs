//! Distances and test statistics used by the experiments.

use std::collections::HashMap;
use std::hash::Hash;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exact total variation distance between two finite count tables, as a
/// reduced fraction `(num, den)`.
pub fn exact_tv<K: Eq + Hash>(a: &HashMap<K, u64>, b: &HashMap<K, u64>) -> (u128, u128) {
    let na: u128 = a.values().map(|&c| c as u128).sum();
    let nb: u128 = b.values().map(|&c| c as u128).sum();
    if na == 0 || nb == 0 {
        return (u128::from(na != nb), 1);
    }
    let diff = |x: u128, y: u128| x.abs_diff(y);
    let mut num: u128 = a
        .iter()
        .map(|(k, &ca)| diff(ca as u128 * nb, b.get(k).copied().unwrap_or(0) as u128 * na))
        .sum();
    num += b
        .iter()
        .filter(|(k, _)| !a.contains_key(*k))
        .map(|(_, &cb)| cb as u128 * na)
        .sum::<u128>();
    let den = 2 * na * nb;
    let g = gcd(num, den);
    (num / g, den / g)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Total variation between the empirical distributions of two count vectors.
pub fn empirical_tv(a: &[u64], b: &[u64]) -> f64 {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return 0.0;
    }
    0.5 * a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na as f64 - y as f64 / nb as f64).abs())
        .sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test; bins empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareTest {
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let total = na + nb;
    let mut statistic = 0.0;
    let mut used = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        used += 1;
        for (obs, n) in [(x as f64, na), (y as f64, nb)] {
            let expected = n * col / total;
            statistic += (obs - expected).powi(2) / expected;
        }
    }
    let dof = used.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map_or(1.0, |d| d.sf(statistic))
    };
    ChiSquareTest { statistic, dof, p_value }
}

/// Two-sample Kolmogorov–Smirnov statistic: the best single-threshold advantage
/// `max_tau |F_a(tau) - F_b(tau)|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Asymptotic p-value of a two-sample KS statistic (Kolmogorov distribution).
pub fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
    if n == 0 || m == 0 {
        return 1.0;
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
