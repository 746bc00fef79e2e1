//! Min-entropy of channels: exact from enumerated pmfs, or a collision
//! (Rényi-2) estimate from samples.

use std::collections::HashMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::History;
use crate::channel::{Channel, ChannelSource, DocumentSource};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyMethod {
    Exact,
    CollisionEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinEntropyReport {
    pub bits: f64,
    pub method: EntropyMethod,
    /// Zero for the exact method.
    pub sample_count: usize,
}

/// Minimum over `histories` of `-log2 max_d Pr[C_h = d]`.
pub fn min_entropy_exact<'a>(
    channel: &dyn Channel,
    histories: impl IntoIterator<Item = &'a History>,
) -> Result<MinEntropyReport> {
    let mut bits = f64::INFINITY;
    for h in histories {
        let pmf = channel.pmf(h)?.ok_or(Error::NoExactPmf)?;
        let max = pmf.values().copied().fold(0.0, f64::max);
        bits = bits.min(-max.log2());
    }
    if bits.is_infinite() {
        return Err(Error::InvalidParameter("empty history set".into()));
    }
    Ok(MinEntropyReport {
        bits: bits.max(0.0),
        method: EntropyMethod::Exact,
        sample_count: 0,
    })
}

/// `-log2` of the empirical collision probability of `n` samples of `C_h`.
///
/// The collision entropy upper-bounds min-entropy by at most a factor of 2,
/// so on non-flat distributions this overestimates.
pub fn min_entropy_estimate(
    channel: &dyn Channel,
    h: &History,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<MinEntropyReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let mut source = ChannelSource::new(channel, h)?;
    let mut counts = HashMap::new();
    for _ in 0..n {
        *counts.entry(source.draw(rng)?).or_insert(0u64) += 1;
    }
    let pairs: f64 = counts
        .values()
        .map(|&c| (c * c.saturating_sub(1)) as f64)
        .sum();
    let collision = pairs / (n as f64 * (n as f64 - 1.0));
    let bits = if collision > 0.0 {
        -collision.log2()
    } else {
        (n as f64).log2() * 2.0
    };
    Ok(MinEntropyReport {
        bits: bits.max(0.0),
        method: EntropyMethod::CollisionEstimate,
        sample_count: n,
    })
}
