//! Counting cells extended with a per-cell fingerprint field: the field
//! accumulates the XOR of the fingerprints of the items in the cell, so a
//! cell holding exactly one item can verify the queried item's fingerprint
//! and reject most single-occupancy collisions.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::bits::CounterVector;
use crate::hash::{derive_seed, fingerprint, HashFamily};
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct FingerprintCountingFilter {
    hashes: HashFamily,
    counters: CounterVector,
    fields: CounterVector,
    k: usize,
    fingerprint_seed: u64,
    items: u64,
}

impl FingerprintCountingFilter {
    pub fn new(
        m: u64,
        k: usize,
        counter_width: u32,
        fingerprint_bits: u32,
        seed: u64,
    ) -> Result<Self, FilterError> {
        Self::with_family(
            m,
            k,
            counter_width,
            fingerprint_bits,
            HashFamily::seeded(seed),
        )
    }

    pub fn with_family(
        m: u64,
        k: usize,
        counter_width: u32,
        fingerprint_bits: u32,
        hashes: HashFamily,
    ) -> Result<Self, FilterError> {
        if !(1..=16).contains(&counter_width) {
            return Err(invalid("counter_width", "counter width must be in 1..=16"));
        }
        if !(1..=32).contains(&fingerprint_bits) {
            return Err(invalid("fingerprint_bits", "fingerprint width must be in 1..=32"));
        }
        let len = checked_len("m", m, (counter_width + fingerprint_bits) as u64)?;
        let k = checked_k(k)?;
        let fingerprint_seed = derive_seed(hashes.seed(), 0x5f);
        Ok(FingerprintCountingFilter {
            hashes,
            counters: CounterVector::new(len, counter_width),
            fields: CounterVector::new(len, fingerprint_bits),
            k,
            fingerprint_seed,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.counters.len() as u64
    }

    fn item_fingerprint(&self, item: &[u8]) -> u64 {
        fingerprint(item, self.fields.width(), self.fingerprint_seed)
            .expect("width validated at construction")
    }

    /// A probe cell accepts the item unless it is empty, or holds exactly
    /// one item whose fingerprint differs. Saturated counters are
    /// unreliable and accept conservatively.
    fn cell_accepts(&self, pos: usize, fp: u64) -> bool {
        match self.counters.get(pos) {
            0 => false,
            1 => self.fields.get(pos) == fp,
            _ => true,
        }
    }

    fn accepted(&self, item: &[u8]) -> bool {
        let fp = self.item_fingerprint(item);
        let m = self.m();
        (0..self.k).all(|i| self.cell_accepts(self.hashes.index_at(item, i, m) as usize, fp))
    }

    fn min_counter(&self, item: &[u8]) -> u64 {
        let m = self.m();
        (0..self.k)
            .map(|i| self.counters.get(self.hashes.index_at(item, i, m) as usize))
            .min()
            .unwrap_or(0)
    }
}

impl MembershipFilter for FingerprintCountingFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let fp = self.item_fingerprint(item);
        for pos in self.hashes.indices(item, self.k, self.m()) {
            self.counters.inc(pos as usize);
            self.fields.xor_assign(pos as usize, fp);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if self.accepted(item) {
            QueryOutcome::present()
        } else {
            QueryOutcome::absent()
        }
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        if !self.accepted(item) {
            return Ok(RemovalOutcome::NotFound);
        }
        let fp = self.item_fingerprint(item);
        for pos in self.hashes.indices(item, self.k, self.m()) {
            let _ = self.counters.dec(pos as usize);
            self.fields.xor_assign(pos as usize, fp);
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        if !self.accepted(item) {
            return Ok(0);
        }
        Ok(self.min_counter(item).max(1))
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::FpCbf {
                m: self.m(),
                k: self.k,
                counter_width: self.counters.width(),
                fingerprint_bits: self.fields.width(),
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        (self.counters.total_bits() + self.fields.total_bits()) as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![self.items];
        out.extend_from_slice(self.counters.words());
        out.extend_from_slice(self.fields.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let c_words = self.counters.words().len();
        let c_image = r.take_slice("counters", c_words)?;
        check_bit_tail(c_image, self.counters.len() * self.counters.width() as usize, 1)?;
        let f_words = self.fields.words().len();
        let f_image = r.take_slice("fingerprint fields", f_words)?;
        check_bit_tail(
            f_image,
            self.fields.len() * self.fields.width() as usize,
            1 + c_words,
        )?;
        r.finish()?;
        self.counters =
            CounterVector::from_words(c_image.to_vec(), self.counters.len(), self.counters.width());
        self.fields =
            CounterVector::from_words(f_image.to_vec(), self.fields.len(), self.fields.width());
        self.items = items;
        Ok(())
    }
}
