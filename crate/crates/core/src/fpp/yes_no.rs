//! Membership filter with a veto list: a primary "yes" bit array answers
//! like the classic filter, and r small "no" arrays remember items that were
//! identified as false positives so they are rejected from then on.
//!
//! Recording a false positive can later veto a genuine member whose no-array
//! positions collide, so this variant trades false negatives for a lower
//! false-positive rate.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::{derive_seed, HashFamily};
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct YesNoFilter {
    yes_hashes: HashFamily,
    no_hashes: Vec<HashFamily>,
    yes: BitVector,
    no: Vec<BitVector>,
    k: usize,
    k_prime: usize,
    items: u64,
    vetoed: u64,
}

impl YesNoFilter {
    /// `p` bits for the yes array with `k` hashes; `r` no arrays of `q` bits
    /// each with `k_prime < k` hashes.
    pub fn new(
        p: u64,
        q: u64,
        r: usize,
        k: usize,
        k_prime: usize,
        seed: u64,
    ) -> Result<Self, FilterError> {
        let no_hashes = (0..r)
            .map(|i| HashFamily::seeded(derive_seed(seed, 1 + i as u64)))
            .collect();
        Self::with_families(p, q, r, k, k_prime, HashFamily::seeded(seed), no_hashes)
    }

    pub fn with_families(
        p: u64,
        q: u64,
        r: usize,
        k: usize,
        k_prime: usize,
        yes_hashes: HashFamily,
        no_hashes: Vec<HashFamily>,
    ) -> Result<Self, FilterError> {
        let p_len = checked_len("p", p, 1)?;
        let q_len = checked_len("q", q, 1)?;
        if r == 0 {
            return Err(invalid("r", "need at least one no-array"));
        }
        if r as u64 * q > crate::support::MAX_ALLOC_BITS {
            return Err(invalid("q", "combined no-array allocation is too large"));
        }
        let k = checked_k(k)?;
        let k_prime = checked_k(k_prime)?;
        if k_prime >= k {
            return Err(invalid(
                "k_prime",
                "the no-arrays must use fewer hashes than the yes array",
            ));
        }
        if no_hashes.len() != r {
            return Err(invalid("r", "need exactly one hash family per no-array"));
        }
        Ok(YesNoFilter {
            yes_hashes,
            no_hashes,
            yes: BitVector::new(p_len),
            no: (0..r).map(|_| BitVector::new(q_len)).collect(),
            k,
            k_prime,
            items: 0,
            vetoed: 0,
        })
    }

    pub fn p(&self) -> u64 {
        self.yes.len() as u64
    }

    pub fn q(&self) -> u64 {
        self.no[0].len() as u64
    }

    pub fn r(&self) -> usize {
        self.no.len()
    }

    /// Which no-array an item belongs to.
    fn selector(&self, item: &[u8]) -> usize {
        (self.yes_hashes.base(item) % self.no.len() as u64) as usize
    }

    fn yes_positive(&self, item: &[u8]) -> bool {
        let p = self.p();
        (0..self.k).all(|i| self.yes.get(self.yes_hashes.index_at(item, i, p) as usize))
    }

    fn no_vetoes(&self, item: &[u8]) -> bool {
        let s = self.selector(item);
        let q = self.q();
        (0..self.k_prime).all(|j| self.no[s].get(self.no_hashes[s].index_at(item, j, q) as usize))
    }

    /// Record `item` as a known false positive: future queries for it (and
    /// for anything colliding with it in its no-array) answer absent.
    pub fn record_false_positive(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let s = self.selector(item);
        let q = self.q();
        for j in 0..self.k_prime {
            let pos = self.no_hashes[s].index_at(item, j, q) as usize;
            self.no[s].set(pos);
        }
        self.vetoed += 1;
        Ok(())
    }

    /// Number of recorded false positives.
    pub fn recorded_false_positives(&self) -> u64 {
        self.vetoed
    }
}

impl MembershipFilter for YesNoFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let p = self.p();
        for i in 0..self.k {
            self.yes.set(self.yes_hashes.index_at(item, i, p) as usize);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if !self.yes_positive(item) || self.no_vetoes(item) {
            QueryOutcome::absent()
        } else {
            QueryOutcome::present()
        }
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::YesNo {
                p: self.p(),
                q: self.q(),
                r: self.r(),
                k: self.k,
                k_prime: self.k_prime,
            },
            self.yes_hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.p() + self.r() as u64 * self.q()
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![self.items, self.vetoed];
        out.extend_from_slice(self.yes.words());
        for no in &self.no {
            out.extend_from_slice(no.words());
        }
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let vetoed = r.take("veto count")?;
        let yes_words = self.yes.words().len();
        let yes_image = r.take_slice("yes array", yes_words)?;
        check_bit_tail(yes_image, self.yes.len(), 2)?;
        let mut no_images = Vec::with_capacity(self.no.len());
        let no_words = self.no[0].words().len();
        for i in 0..self.no.len() {
            let image = r.take_slice("no array", no_words)?;
            check_bit_tail(image, self.no[0].len(), 2 + yes_words + i * no_words)?;
            no_images.push(image);
        }
        r.finish()?;
        self.yes = BitVector::from_words(yes_image.to_vec(), self.yes.len());
        let q_len = self.no[0].len();
        self.no = no_images
            .into_iter()
            .map(|img| BitVector::from_words(img.to_vec(), q_len))
            .collect();
        self.items = items;
        self.vetoed = vetoed;
        Ok(())
    }
}
