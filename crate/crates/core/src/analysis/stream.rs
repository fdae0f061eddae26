//! Deterministic workload generators for the measurement harness.

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{invalid, AnalysisError};

/// Shape of a generated item stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StreamKind {
    /// Items drawn uniformly from a universe of `10 * count` labels;
    /// duplicates are possible.
    Uniform,
    /// `count` distinct labels, shuffled.
    UniformUnique,
    /// Rank-frequency skewed draws over a universe of `count` labels with
    /// exponent `s` (weights proportional to rank^-s).
    Zipf(f64),
}

/// Inverse-CDF sampler over rank weights rank^-s for ranks 1..=universe.
struct RankSkew {
    cumulative: Vec<f64>,
}

impl RankSkew {
    fn new(universe: usize, s: f64) -> Self {
        let mut cumulative = Vec::with_capacity(universe);
        let mut acc = 0.0;
        for rank in 1..=universe {
            acc += (rank as f64).powf(-s);
            cumulative.push(acc);
        }
        let total = acc;
        for c in &mut cumulative {
            *c /= total;
        }
        RankSkew { cumulative }
    }
}

impl Distribution<usize> for RankSkew {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        // first rank whose cumulative mass reaches u (ranks are 0-based here)
        self.cumulative.partition_point(|c| *c < u)
    }
}

/// Produce `count` byte-string items of the requested shape, reproducibly
/// from `seed`.
pub fn generate_stream(
    kind: StreamKind,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<u8>>, AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        StreamKind::Uniform => {
            let universe = count.saturating_mul(10).max(1);
            Ok((0..count)
                .map(|_| label(rng.gen_range(0..universe)))
                .collect())
        }
        StreamKind::UniformUnique => {
            let mut items: Vec<Vec<u8>> = (0..count).map(label).collect();
            // Fisher-Yates so ordering does not correlate with label value
            for i in (1..items.len()).rev() {
                let j = rng.gen_range(0..=i);
                items.swap(i, j);
            }
            Ok(items)
        }
        StreamKind::Zipf(s) => {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid("s", "skew exponent must be finite and positive"));
            }
            if count == 0 {
                return Ok(Vec::new());
            }
            let skew = RankSkew::new(count, s);
            Ok((0..count).map(|_| label(skew.sample(&mut rng))).collect())
        }
    }
}

fn label(i: usize) -> Vec<u8> {
    format!("item-{i}").into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn streams_are_reproducible_and_seed_sensitive() {
        for kind in [StreamKind::Uniform, StreamKind::UniformUnique, StreamKind::Zipf(1.0)] {
            let a = generate_stream(kind, 500, 7).unwrap();
            let b = generate_stream(kind, 500, 7).unwrap();
            let c = generate_stream(kind, 500, 8).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn unique_stream_has_no_duplicates_and_exact_count() {
        let items = generate_stream(StreamKind::UniformUnique, 2_000, 3).unwrap();
        assert_eq!(items.len(), 2_000);
        let distinct: std::collections::HashSet<_> = items.iter().collect();
        assert_eq!(distinct.len(), 2_000);
    }

    #[test]
    fn skewed_stream_rank_ratio_matches_exponent_one() {
        // At s = 1 the most frequent label should appear about twice as
        // often as the second most frequent.
        let items = generate_stream(StreamKind::Zipf(1.0), 200_000, 11).unwrap();
        let mut freq: HashMap<&[u8], usize> = HashMap::new();
        for it in &items {
            *freq.entry(it.as_slice()).or_default() += 1;
        }
        let mut counts: Vec<usize> = freq.values().copied().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let ratio = counts[0] as f64 / counts[1] as f64;
        assert!((ratio - 2.0).abs() < 0.1, "rank1/rank2 = {ratio}");
    }

    #[test]
    fn zipf_rejects_bad_exponent() {
        assert!(generate_stream(StreamKind::Zipf(0.0), 10, 1).is_err());
        assert!(generate_stream(StreamKind::Zipf(f64::NAN), 10, 1).is_err());
    }

    #[test]
    fn uniform_stream_draws_from_wider_universe() {
        let items = generate_stream(StreamKind::Uniform, 5_000, 5).unwrap();
        assert_eq!(items.len(), 5_000);
        let distinct: std::collections::HashSet<_> = items.iter().collect();
        // with a 10x universe, a solid majority of draws are distinct
        assert!(distinct.len() > 3_500, "distinct = {}", distinct.len());
    }
}
