//! Bit-clearing filter: a classic bit array whose operator deliberately
//! clears selected set bits to suppress known false positives, accepting
//! that members sharing those bits become false negatives.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::HashFamily;
use crate::support::{check_bit_tail, checked_k, checked_len, WordReader};

#[derive(Clone, Debug)]
pub struct RetouchedFilter {
    hashes: HashFamily,
    bits: BitVector,
    k: usize,
    items: u64,
    cleared: u64,
}

impl RetouchedFilter {
    pub fn new(m: u64, k: usize, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(m, k, HashFamily::seeded(seed))
    }

    pub fn with_family(m: u64, k: usize, hashes: HashFamily) -> Result<Self, FilterError> {
        let len = checked_len("m", m, 1)?;
        let k = checked_k(k)?;
        Ok(RetouchedFilter {
            hashes,
            bits: BitVector::new(len),
            k,
            items: 0,
            cleared: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn set_bits(&self) -> usize {
        self.bits.popcount()
    }

    /// Total bits cleared by retouching so far.
    pub fn cleared_bits(&self) -> u64 {
        self.cleared
    }

    /// Clear up to `count` uniformly chosen set bits (without replacement),
    /// deterministically from `rng_seed`. Returns the cleared positions.
    pub fn retouch_random(&mut self, count: u64, rng_seed: u64) -> Vec<usize> {
        let mut set_positions: Vec<usize> = self.bits.iter_ones().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        set_positions.shuffle(&mut rng);
        set_positions.truncate(count as usize);
        for &pos in &set_positions {
            self.bits.clear(pos);
        }
        self.cleared += set_positions.len() as u64;
        set_positions
    }

    /// Clear bits until none of the listed false positives answers present,
    /// greedily choosing the position covering the most still-active listed
    /// items (ties broken toward the lowest position). Returns the cleared
    /// positions.
    pub fn retouch_targeted<I>(&mut self, false_positives: &[I]) -> Vec<usize>
    where
        I: AsRef<[u8]>,
    {
        let mut cleared = Vec::new();
        loop {
            let active: Vec<&I> = false_positives
                .iter()
                .filter(|fp| self.query(fp.as_ref()).is_present())
                .collect();
            if active.is_empty() {
                break;
            }
            let mut coverage: std::collections::BTreeMap<usize, usize> =
                std::collections::BTreeMap::new();
            for fp in &active {
                for pos in self.hashes.indices(fp.as_ref(), self.k, self.m()) {
                    *coverage.entry(pos as usize).or_default() += 1;
                }
            }
            // max coverage; BTreeMap order makes the lowest position win ties
            let (&best, _) = coverage
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .expect("active items imply nonempty coverage");
            self.bits.clear(best);
            self.cleared += 1;
            cleared.push(best);
        }
        cleared
    }
}

impl MembershipFilter for RetouchedFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        for pos in self.hashes.indices(item, self.k, self.m()) {
            self.bits.set(pos as usize);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let m = self.m();
        for i in 0..self.k {
            if !self.bits.get(self.hashes.index_at(item, i, m) as usize) {
                return QueryOutcome::absent();
            }
        }
        QueryOutcome::present()
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Retouched {
                m: self.m(),
                k: self.k,
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
        let mut out = vec![self.items, self.cleared];
        out.extend_from_slice(self.bits.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let cleared = r.take("cleared count")?;
        let n_words = self.bits.words().len();
        let image = r.take_slice("bit array", n_words)?;
        check_bit_tail(image, self.bits.len(), 2)?;
        r.finish()?;
        self.bits = BitVector::from_words(image.to_vec(), self.bits.len());
        self.items = items;
        self.cleared = cleared;
        Ok(())
    }
}
