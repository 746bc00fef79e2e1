//! Small statistics toolkit shared by tests, games and reports.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bits::Bits;
use crate::fixtures::Pmf;

/// z-value of a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n` at the given z.
pub fn wilson(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn wilson95(successes: u64, n: u64) -> (f64, f64) {
    wilson(successes, n, Z95)
}

/// Standard error of a Bernoulli proportion estimate.
pub fn std_error(p_hat: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

/// Upper `q` quantile of the chi-square distribution.
pub fn chi_square_quantile(dof: usize, q: f64) -> f64 {
    ChiSquared::new(dof.max(1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub dof: usize,
}

impl GoodnessOfFit {
    pub fn passes(&self, q: f64) -> bool {
        self.statistic < chi_square_quantile(self.dof, q)
    }
}

/// Pearson statistic of `samples` against `expected`; outcomes outside the
/// support make the statistic infinite.
pub fn chi_square_gof(samples: &[Bits], expected: &Pmf) -> GoodnessOfFit {
    let mut counts: BTreeMap<&Bits, u64> = BTreeMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    let n = samples.len() as f64;
    let mut stat = 0.0;
    if counts.keys().any(|d| !expected.contains_key(*d)) {
        stat = f64::INFINITY;
    }
    for (d, &p) in expected {
        let e = n * p;
        let o = counts.get(d).copied().unwrap_or(0) as f64;
        if e > 0.0 {
            stat += (o - e).powi(2) / e;
        }
    }
    GoodnessOfFit {
        statistic: stat,
        dof: expected.len().saturating_sub(1),
    }
}

/// Pearson statistic of bucket counts against equal expectation.
pub fn chi_square_uniform(counts: &[u64]) -> GoodnessOfFit {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let statistic = if e == 0.0 {
        0.0
    } else {
        counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
    };
    GoodnessOfFit {
        statistic,
        dof: counts.len().saturating_sub(1),
    }
}
