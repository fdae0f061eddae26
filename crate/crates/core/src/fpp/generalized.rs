//! Bit array driven by two hash groups per item: one group clears bits and
//! the other sets them, with clearing taking precedence whenever the two
//! groups collide on a position. The array may start from an arbitrary bit
//! pattern — correctness of the stored set never depends on the initial
//! contents, which makes the structure usable on reused or dirty memory.
//! A query requires every clear-group position to be 0 and every set-group
//! position to be 1, so both false positives and false negatives occur at
//! rates that depend on the two group sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::HashFamily;
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct GeneralizedFilter {
    hashes: HashFamily,
    bits: BitVector,
    k_reset: usize,
    k_set: usize,
    items: u64,
}

impl GeneralizedFilter {
    pub fn new(m: u64, k_reset: usize, k_set: usize, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(m, k_reset, k_set, HashFamily::seeded(seed))
    }

    /// Like [`GeneralizedFilter::new`], but every bit starts set with
    /// probability `density`, mimicking deployment over uncleared memory.
    pub fn with_initial_density(
        m: u64,
        k_reset: usize,
        k_set: usize,
        seed: u64,
        density: f64,
        rng_seed: u64,
    ) -> Result<Self, FilterError> {
        if !(0.0..=1.0).contains(&density) {
            return Err(invalid("density", "must lie in [0, 1]"));
        }
        let mut filter = Self::new(m, k_reset, k_set, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for i in 0..filter.bits.len() {
            if rng.gen::<f64>() < density {
                filter.bits.set(i);
            }
        }
        Ok(filter)
    }

    pub fn with_family(
        m: u64,
        k_reset: usize,
        k_set: usize,
        hashes: HashFamily,
    ) -> Result<Self, FilterError> {
        let len = checked_len("m", m, 1)?;
        let k_reset = checked_k(k_reset)?;
        let k_set = checked_k(k_set)?;
        checked_k(k_reset + k_set)?;
        Ok(GeneralizedFilter {
            hashes,
            bits: BitVector::new(len),
            k_reset,
            k_set,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn set_bits(&self) -> u64 {
        self.bits.popcount() as u64
    }

    /// Positions the clearing group maps `item` to (indices `0..k_reset`
    /// of the shared family).
    fn reset_positions(&self, item: &[u8]) -> Vec<usize> {
        (0..self.k_reset)
            .map(|i| self.hashes.index_at(item, i, self.m()) as usize)
            .collect()
    }

    /// Positions the setting group maps `item` to (indices
    /// `k_reset..k_reset + k_set`).
    fn set_positions(&self, item: &[u8]) -> Vec<usize> {
        (self.k_reset..self.k_reset + self.k_set)
            .map(|i| self.hashes.index_at(item, i, self.m()) as usize)
            .collect()
    }
}

impl MembershipFilter for GeneralizedFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        // set first, then clear: on a collision between the two groups the
        // cleared state wins
        for pos in self.set_positions(item) {
            self.bits.set(pos);
        }
        for pos in self.reset_positions(item) {
            self.bits.clear(pos);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let zeros_ok = self.reset_positions(item).iter().all(|&p| !self.bits.get(p));
        let ones_ok = self.set_positions(item).iter().all(|&p| self.bits.get(p));
        if zeros_ok && ones_ok {
            QueryOutcome::present()
        } else {
            QueryOutcome::absent()
        }
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Generalized {
                m: self.m(),
                k_reset: self.k_reset,
                k_set: self.k_set,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.m()
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![self.items];
        out.extend_from_slice(self.bits.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_words = self.bits.len().div_ceil(64);
        let image = r.take_slice("bit array", n_words)?;
        check_bit_tail(image, self.bits.len(), 1)?;
        r.finish()?;
        self.bits = BitVector::from_words(image.to_vec(), self.bits.len());
        self.items = items;
        Ok(())
    }
}
