//! Bit array paired with a value slot per position: each item designates
//! one of its own probe positions as its address (chosen by a separate
//! selector hash over the k candidates) and stores a 64-bit value there.
//! The first writer of a slot keeps it; a later conflicting write marks the
//! slot contested, after which lookups return membership without a value
//! rather than risk handing back the wrong one.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::{derive_seed, HashFamily};
use crate::support::{checked_k, checked_len};

#[derive(Clone, Debug)]
pub struct AttachedValueFilter {
    hashes: HashFamily,
    bits: BitVector,
    /// One candidate value per position; meaningful only where `bits` is
    /// set and the position is somebody's address.
    slots: Vec<u64>,
    /// Positions whose slot saw conflicting writes.
    contested: BitVector,
    k: usize,
    items: u64,
}

impl AttachedValueFilter {
    pub fn new(m: u64, k: usize, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(m, k, HashFamily::seeded(seed))
    }

    pub fn with_family(m: u64, k: usize, hashes: HashFamily) -> Result<Self, FilterError> {
        // each position carries its bit, a 64-bit slot, and a contested flag
        let len = checked_len("m", m, 66)?;
        let k = checked_k(k)?;
        Ok(AttachedValueFilter {
            hashes,
            bits: BitVector::new(len),
            slots: vec![0; len],
            contested: BitVector::new(len),
            k,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn positions(&self, item: &[u8]) -> Vec<u64> {
        self.hashes.indices(item, self.k, self.m())
    }

    /// The probe position an item stores its value at: one of its own k
    /// positions, picked by a hash independent of the probe sequence.
    pub fn address_of(&self, item: &[u8]) -> u64 {
        let selector = derive_seed(self.hashes.base(item), 0xB0) as usize % self.k;
        self.positions(item)[selector]
    }

    /// Inserts `item` carrying `value`, retrievable on later lookups while
    /// its address slot remains uncontested.
    pub fn insert_with_value(&mut self, item: &[u8], value: u64) -> Result<(), FilterError> {
        let address = self.address_of(item) as usize;
        for pos in self.positions(item) {
            self.bits.set(pos as usize);
        }
        // a zero value means "nothing to attach" and never touches the slot
        if value != 0 && !self.contested.get(address) {
            if self.slots[address] == 0 {
                self.slots[address] = value;
            } else if self.slots[address] != value {
                // a different value already lives here: mark, keep the first
                self.contested.set(address);
            }
        }
        self.items += 1;
        Ok(())
    }

    /// The value stored for `item`, if the filter holds it and the slot is
    /// neither empty nor contested.
    pub fn value_of(&self, item: &[u8]) -> Option<u64> {
        if !self.positions(item).iter().all(|&p| self.bits.get(p as usize)) {
            return None;
        }
        let address = self.address_of(item) as usize;
        if self.contested.get(address) || self.slots[address] == 0 {
            return None;
        }
        Some(self.slots[address])
    }

    pub fn contested_slots(&self) -> u64 {
        self.contested.popcount() as u64
    }
}

impl MembershipFilter for AttachedValueFilter {
    /// Plain insert attaches the item's own 64-bit base hash, so lookups
    /// can hand back a checkable token without the caller supplying one.
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        self.insert_with_value(item, self.hashes.base(item).max(1))
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if !self.positions(item).iter().all(|&p| self.bits.get(p as usize)) {
            return QueryOutcome::absent();
        }
        match self.value_of(item) {
            Some(value) => QueryOutcome::present().with_auxiliary(vec![value]),
            None => QueryOutcome::present(),
        }
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Bfah {
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
        // bit + slot + contested flag per position
        self.m() * 66
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    /// Builds a filter whose two items probe scripted positions; with k = 1
    /// the single probe position doubles as the address.
    fn two_item_conflict() -> AttachedValueFilter {
        let mut script = BTreeMap::new();
        script.insert(b"first".to_vec(), vec![5]);
        script.insert(b"second".to_vec(), vec![5]);
        AttachedValueFilter::with_family(16, 1, HashFamily::scripted(3, script)).unwrap()
    }

    #[test]
    fn first_writer_keeps_the_slot_and_the_second_contests_it() {
        let mut f = two_item_conflict();
        f.insert_with_value(b"first", 111).unwrap();
        assert_eq!(f.value_of(b"first"), Some(111));
        assert_eq!(f.contested_slots(), 0);

        f.insert_with_value(b"second", 222).unwrap();
        // both items answer present, neither value can be trusted now
        assert!(f.query(b"first").is_present());
        assert!(f.query(b"second").is_present());
        assert_eq!(f.value_of(b"first"), None);
        assert_eq!(f.value_of(b"second"), None);
        assert_eq!(f.contested_slots(), 1);
        assert_eq!(f.query(b"first").auxiliary, None);
    }

    #[test]
    fn rewriting_the_same_value_is_not_a_conflict() {
        let mut f = two_item_conflict();
        f.insert_with_value(b"first", 111).unwrap();
        f.insert_with_value(b"first", 111).unwrap();
        assert_eq!(f.contested_slots(), 0);
        assert_eq!(f.value_of(b"first"), Some(111));
    }

    #[test]
    fn non_overlapping_items_each_retrieve_their_own_value() {
        let mut f = AttachedValueFilter::new(4096, 4, 7).unwrap();
        for i in 0..40u64 {
            f.insert_with_value(format!("item-{i}").as_bytes(), 1000 + i)
                .unwrap();
        }
        let mut retrieved = 0;
        for i in 0..40u64 {
            let item = format!("item-{i}");
            assert!(f.query(item.as_bytes()).is_present(), "membership never lies");
            if let Some(v) = f.value_of(item.as_bytes()) {
                assert_eq!(v, 1000 + i, "a returned value must be the right one");
                retrieved += 1;
            }
        }
        // at this load nearly every address is private
        assert!(retrieved >= 35, "only {retrieved}/40 values retrievable");
    }

    #[test]
    fn plain_insert_attaches_a_checkable_token() {
        let mut f = AttachedValueFilter::new(2048, 3, 9).unwrap();
        f.insert(b"document").unwrap();
        let out = f.query(b"document");
        assert!(out.is_present());
        let aux = out.auxiliary.expect("uncontested address carries the token");
        assert_eq!(aux, vec![f.value_of(b"document").unwrap()]);
    }

    #[test]
    fn the_address_is_always_one_of_the_probe_positions() {
        let f = AttachedValueFilter::new(1024, 5, 13).unwrap();
        for i in 0..50 {
            let item = format!("item-{i}");
            let address = f.address_of(item.as_bytes());
            assert!(f.positions(item.as_bytes()).contains(&address));
        }
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(AttachedValueFilter::new(0, 3, 0).is_err());
        assert!(AttachedValueFilter::new(64, 0, 0).is_err());
    }
}
