//! Approximate *near-neighbour* membership over fixed-length bit vectors
//! under Hamming distance. Each of `k` locality-sensitive functions samples
//! `g` coordinates of the probe; the (function id, sampled pattern) pair is
//! stored in one shared bit-array filter. A probe is judged *near* when at
//! least `t = ceil(k/2)` of its k patterns hit. Vectors close to a member
//! agree on most coordinates and keep matching patterns; far vectors
//! rarely match any. Distance-0 probes always hit all k patterns, so exact
//! members are never missed; nearby-but-not-identical members can be —
//! answers on the near side are probabilistic in both directions.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::classic::StandardBloomFilter;
use crate::hash::derive_seed;
use crate::support::{checked_k, invalid};

/// Bits allocated in the shared pattern filter per stored (function,
/// pattern) pair, and its probe count: sized so pattern-filter noise is
/// far below the vote threshold.
const PATTERN_BITS_PER_PAIR: u64 = 16;
const PATTERN_PROBES: usize = 8;
const SAMPLER_LANE: u64 = 0xD5;
const PATTERN_SEED_LANE: u64 = 0xD6;

#[derive(Clone, Debug)]
pub struct DistanceSensitiveFilter {
    dim: usize,
    eps: u32,
    delta: u32,
    k: usize,
    /// Votes required to answer near.
    t: usize,
    /// Coordinates sampled per function.
    samples: Vec<Vec<usize>>,
    patterns: StandardBloomFilter,
    expected_members: u64,
    seed: u64,
    items: u64,
}

impl DistanceSensitiveFilter {
    /// Vectors of `dim` bits; probes within Hamming distance `eps` of a
    /// member should answer near, probes beyond `delta` should not.
    /// `expected_members` sizes both the sampling depth and the pattern
    /// store.
    pub fn new(
        dim: usize,
        eps: u32,
        delta: u32,
        k: usize,
        expected_members: u64,
        seed: u64,
    ) -> Result<Self, FilterError> {
        let k = checked_k(k)?;
        if dim == 0 {
            return Err(invalid("dim", "vector length must be positive"));
        }
        if eps >= delta {
            return Err(invalid("eps", "near threshold must be below far threshold"));
        }
        if delta as usize > dim {
            return Err(invalid("delta", "far threshold cannot exceed the dimension"));
        }
        if expected_members == 0 {
            return Err(invalid("expected_members", "size the filter for at least one member"));
        }

        // sampling depth: deep enough that a vector at distance delta
        // matches a pattern with probability below 1/(3n); eps = 0 demands
        // exact membership, every coordinate sampled
        let g = if eps == 0 {
            dim
        } else {
            let p_far = 1.0 - delta as f64 / dim as f64;
            if p_far <= 0.0 {
                1
            } else {
                let raw = ((3.0 * expected_members as f64).ln() / (1.0 / p_far).ln()).ceil();
                (raw as usize).clamp(1, dim)
            }
        };
        let t = k.div_ceil(2);

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SAMPLER_LANE));
        let samples = (0..k)
            .map(|_| {
                let mut coords: Vec<usize> = (0..dim).collect();
                coords.shuffle(&mut rng);
                coords.truncate(g);
                coords
            })
            .collect();

        let pattern_bits = PATTERN_BITS_PER_PAIR
            .checked_mul(k as u64)
            .and_then(|b| b.checked_mul(expected_members))
            .ok_or_else(|| invalid("expected_members", "pattern store size overflows"))?;
        let patterns = StandardBloomFilter::new(
            pattern_bits,
            PATTERN_PROBES,
            derive_seed(seed, PATTERN_SEED_LANE),
        )?;

        Ok(DistanceSensitiveFilter {
            dim,
            eps,
            delta,
            k,
            t,
            samples,
            patterns,
            expected_members,
            seed,
            items: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sampling_depth(&self) -> usize {
        self.samples[0].len()
    }

    pub fn vote_threshold(&self) -> usize {
        self.t
    }

    fn check_len(&self, v: &BitVector) -> Result<(), FilterError> {
        if v.len() != self.dim {
            return Err(invalid("probe", "probe length must equal the filter dimension"));
        }
        Ok(())
    }

    /// (function id, sampled pattern) encoded for the pattern store.
    fn pattern_key(&self, fn_id: usize, v: &BitVector) -> Vec<u8> {
        let coords = &self.samples[fn_id];
        let mut key = Vec::with_capacity(4 + coords.len().div_ceil(8));
        key.extend_from_slice(&(fn_id as u32).to_le_bytes());
        let mut acc = 0u8;
        for (j, &c) in coords.iter().enumerate() {
            if v.get(c) {
                acc |= 1 << (j % 8);
            }
            if j % 8 == 7 {
                key.push(acc);
                acc = 0;
            }
        }
        if coords.len() % 8 != 0 {
            key.push(acc);
        }
        key
    }

    pub fn insert_vector(&mut self, v: &BitVector) -> Result<(), FilterError> {
        self.check_len(v)?;
        for i in 0..self.k {
            let key = self.pattern_key(i, v);
            self.patterns.insert(&key)?;
        }
        self.items += 1;
        Ok(())
    }

    /// How many of the probe's k patterns hit the store.
    pub fn votes(&self, v: &BitVector) -> Result<usize, FilterError> {
        self.check_len(v)?;
        Ok((0..self.k)
            .filter(|&i| self.patterns.query(&self.pattern_key(i, v)).is_present())
            .count())
    }

    /// Near ⇔ at least `t` of the k sampled patterns are stored.
    pub fn query_near(&self, v: &BitVector) -> Result<bool, FilterError> {
        Ok(self.votes(v)? >= self.t)
    }

    /// Item bytes read LSB-first as a bit vector, zero-padded or truncated
    /// to the filter dimension.
    fn bytes_to_vector(&self, item: &[u8]) -> BitVector {
        let mut v = BitVector::new(self.dim);
        for i in 0..self.dim {
            let byte = i / 8;
            if byte < item.len() && (item[byte] >> (i % 8)) & 1 == 1 {
                v.set(i);
            }
        }
        v
    }
}

impl MembershipFilter for DistanceSensitiveFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let v = self.bytes_to_vector(item);
        self.insert_vector(&v)
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let v = self.bytes_to_vector(item);
        match self.query_near(&v) {
            Ok(true) => QueryOutcome::present(),
            _ => QueryOutcome::absent(),
        }
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::DistanceSensitive {
                dim: self.dim,
                eps: self.eps,
                delta: self.delta,
                k: self.k,
                expected_members: self.expected_members,
            },
            self.seed,
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.patterns.allocated_bits()
    }
}
