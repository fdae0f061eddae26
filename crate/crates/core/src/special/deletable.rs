//! Deletion from a plain bit array without counters: the array is split
//! into fixed-size regions, and a one-bit-per-region collision map records
//! whether any insertion ever hit an already-set bit there. A bit in a
//! collision-free region is owned by exactly one insertion, so clearing it
//! can never erase anyone else — removal resets exactly those of an item's
//! bits, and reports the item not-deletable when all of its regions are
//! tainted.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::HashFamily;
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct DeletableFilter {
    hashes: HashFamily,
    data: BitVector,
    /// Bit `r` set ⇔ some insertion hit an already-set bit in region `r`.
    collisions: BitVector,
    k: usize,
    region_size: usize,
    items: u64,
}

impl DeletableFilter {
    /// `m_prime` data bits split into `regions` equal regions, plus one
    /// collision bit per region.
    pub fn new(m_prime: u64, k: usize, regions: usize, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(m_prime, k, regions, HashFamily::seeded(seed))
    }

    pub fn with_family(
        m_prime: u64,
        k: usize,
        regions: usize,
        hashes: HashFamily,
    ) -> Result<Self, FilterError> {
        let k = checked_k(k)?;
        let len = checked_len("m_prime", m_prime, 1)?;
        if regions == 0 {
            return Err(invalid("regions", "need at least one region"));
        }
        if len % regions != 0 {
            return Err(invalid(
                "regions",
                "region count must divide the data-bit count evenly",
            ));
        }
        Ok(DeletableFilter {
            hashes,
            data: BitVector::new(len),
            collisions: BitVector::new(regions),
            k,
            region_size: len / regions,
            items: 0,
        })
    }

    pub fn m_prime(&self) -> u64 {
        self.data.len() as u64
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn regions(&self) -> usize {
        self.collisions.len()
    }

    fn region_of(&self, pos: usize) -> usize {
        pos / self.region_size
    }

    /// Regions no insertion has ever collided in.
    pub fn collision_free_regions(&self) -> usize {
        self.collisions.len() - self.collisions.popcount()
    }

    /// Whether removing `item` now would clear at least one bit.
    pub fn removable(&self, item: &[u8]) -> bool {
        if !self.query(item).is_present() {
            return false;
        }
        let m = self.m_prime();
        (0..self.k).any(|i| {
            let pos = self.hashes.index_at(item, i, m) as usize;
            !self.collisions.get(self.region_of(pos))
        })
    }
}

impl MembershipFilter for DeletableFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let m = self.m_prime();
        for i in 0..self.k {
            let pos = self.hashes.index_at(item, i, m) as usize;
            if self.data.get(pos) {
                self.collisions.set(self.region_of(pos));
            }
            self.data.set(pos);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let m = self.m_prime();
        for i in 0..self.k {
            if !self.data.get(self.hashes.index_at(item, i, m) as usize) {
                return QueryOutcome::absent();
            }
        }
        QueryOutcome::present()
    }

    /// Clears the item's bits in collision-free regions only. `Removed`
    /// when at least one bit was cleared, `NotDeletable` when every region
    /// the item touches is tainted, `NotFound` when the item is absent.
    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        if !self.query(item).is_present() {
            return Ok(RemovalOutcome::NotFound);
        }
        let m = self.m_prime();
        let mut cleared = 0usize;
        for i in 0..self.k {
            let pos = self.hashes.index_at(item, i, m) as usize;
            if !self.collisions.get(self.region_of(pos)) && self.data.get(pos) {
                self.data.clear(pos);
                cleared += 1;
            }
        }
        if cleared == 0 {
            return Ok(RemovalOutcome::NotDeletable);
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Deletable {
                m_prime: self.m_prime(),
                k: self.k,
                regions: self.collisions.len(),
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        (self.data.len() + self.collisions.len()) as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut words = vec![self.items];
        words.extend_from_slice(self.collisions.words());
        words.extend_from_slice(self.data.words());
        Ok(words)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("items")?;
        let n_coll = self.collisions.words().len();
        let coll = r.take_slice("collision map", n_coll)?;
        check_bit_tail(coll, self.collisions.len(), 1)?;
        let data = r.take_slice("data bits", self.data.words().len())?;
        check_bit_tail(data, self.data.len(), 1 + n_coll)?;
        r.finish()?;
        self.collisions = BitVector::from_words(coll.to_vec(), self.collisions.len());
        self.data = BitVector::from_words(data.to_vec(), self.data.len());
        self.items = items;
        Ok(())
    }
}
