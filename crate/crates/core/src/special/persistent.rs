//! Time-segmented membership: the timeline is cut into fixed-width slots
//! of `granularity` ticks, each owning an independent bit-array filter
//! created on first use. An insertion lands only in the slot covering its
//! timestamp; a range query ORs the slots covering the interval, so its
//! false-positive chance compounds as 1 − (1−ε)^n over n slots. A logical
//! clock makes the byte-oriented interface single-slot: plain inserts and
//! queries go to the slot covering the current time.

use std::collections::BTreeMap;

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::classic::StandardBloomFilter;
use crate::hash::derive_seed;
use crate::support::{checked_k, checked_len, invalid};

#[derive(Clone, Debug)]
pub struct PersistentFilter {
    m: u64,
    k: usize,
    granularity: u64,
    seed: u64,
    /// Slot index → that slot's filter; absent slots have never been
    /// written and answer absent.
    slots: BTreeMap<u64, StandardBloomFilter>,
    current_time: u64,
    items: u64,
}

impl PersistentFilter {
    /// Each populated slot gets its own `m`-bit, `k`-probe filter;
    /// timestamps `t` map to slot `t / granularity`.
    pub fn new(m: u64, k: usize, granularity: u64, seed: u64) -> Result<Self, FilterError> {
        checked_len("m", m, 1)?;
        checked_k(k)?;
        if granularity == 0 {
            return Err(invalid("granularity", "slot width must be positive"));
        }
        Ok(PersistentFilter {
            m,
            k,
            granularity,
            seed,
            slots: BTreeMap::new(),
            current_time: 0,
            items: 0,
        })
    }

    pub fn granularity(&self) -> u64 {
        self.granularity
    }

    pub fn slot_of(&self, t: u64) -> u64 {
        t / self.granularity
    }

    pub fn populated_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn current_time(&self) -> u64 {
        self.current_time
    }

    /// Sets the logical clock used by the byte-oriented insert and query.
    pub fn set_time(&mut self, t: u64) {
        self.current_time = t;
    }

    pub fn insert_at(&mut self, item: &[u8], t: u64) -> Result<(), FilterError> {
        let idx = self.slot_of(t);
        let (m, k, seed) = (self.m, self.k, self.seed);
        let slot = match self.slots.entry(idx) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(StandardBloomFilter::new(m, k, derive_seed(seed, idx))?)
            }
        };
        slot.insert(item)?;
        self.items += 1;
        Ok(())
    }

    pub fn query_at(&self, item: &[u8], t: u64) -> QueryOutcome {
        match self.slots.get(&self.slot_of(t)) {
            Some(slot) => slot.query(item),
            None => QueryOutcome::absent(),
        }
    }

    /// Present iff any slot covering `[t1, t2]` reports present.
    pub fn query_range(&self, item: &[u8], t1: u64, t2: u64) -> Result<QueryOutcome, FilterError> {
        if t1 > t2 {
            return Err(invalid("t1", "range start must not exceed range end"));
        }
        let lo = self.slot_of(t1);
        let hi = self.slot_of(t2);
        for (_, slot) in self.slots.range(lo..=hi) {
            if slot.query(item).is_present() {
                return Ok(QueryOutcome::present());
            }
        }
        Ok(QueryOutcome::absent())
    }

    #[cfg(test)]
    pub(crate) fn slot_words(&self, idx: u64) -> Option<Vec<u64>> {
        self.slots.get(&idx).map(|s| s.bit_vector().words().to_vec())
    }
}

impl MembershipFilter for PersistentFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        self.insert_at(item, self.current_time)
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        self.query_at(item, self.current_time)
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Persistent {
                m: self.m,
                k: self.k,
                granularity: self.granularity,
            },
            self.seed,
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.slots.len() as u64 * self.m
    }
}
