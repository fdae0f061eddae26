//! Fingerprint table with two candidate buckets per item and eviction
//! chains. An item stores only a short fingerprint; its second bucket is
//! the first XOR a hash of that fingerprint, an involution that lets any
//! stored fingerprint compute its alternate bucket without the original
//! item. Inserting into two full buckets evicts a resident, which moves to
//! its own alternate, possibly evicting again up to `max_kicks`; a failed
//! chain is rolled back completely. Deletion removes one fingerprint copy,
//! so duplicates are supported and removal never strands other items.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::hash::{derive_seed, fingerprint, HashFamily};
use crate::support::{checked_len, invalid, WordReader};

/// Lane separating the fingerprint→bucket-offset hash from item hashing.
const ALT_LANE: u64 = 0xC0;
/// Lane feeding the deterministic victim-choice stream.
const KICK_LANE: u64 = 0xC1;
/// Empty-slot sentinel; fingerprints are never zero.
const EMPTY: u64 = 0;

#[derive(Clone, Debug)]
pub struct CuckooFilter {
    hashes: HashFamily,
    /// `buckets * slots_per_bucket` fingerprints, bucket-major, 0 = empty.
    slots: Vec<u64>,
    buckets: u64,
    slots_per_bucket: usize,
    fingerprint_bits: u32,
    max_kicks: usize,
    /// Monotone counter feeding victim selection; part of filter state so
    /// replayed traces stay deterministic.
    kick_counter: u64,
    items: u64,
}

impl CuckooFilter {
    /// `buckets` must be a power of two so the XOR bucket swap stays in
    /// range; each bucket holds `slots_per_bucket` fingerprints of
    /// `fingerprint_bits` bits.
    pub fn new(
        buckets: u64,
        slots_per_bucket: usize,
        fingerprint_bits: u32,
        max_kicks: usize,
        seed: u64,
    ) -> Result<Self, FilterError> {
        if buckets == 0 || !buckets.is_power_of_two() {
            return Err(invalid("buckets", "bucket count must be a power of two"));
        }
        if slots_per_bucket == 0 {
            return Err(invalid("slots_per_bucket", "buckets need at least one slot"));
        }
        if !(1..=32).contains(&fingerprint_bits) {
            return Err(invalid(
                "fingerprint_bits",
                "fingerprint width must be in 1..=32",
            ));
        }
        let total = buckets
            .checked_mul(slots_per_bucket as u64)
            .ok_or_else(|| invalid("buckets", "slot count overflows"))?;
        checked_len("slots", total, u64::from(fingerprint_bits))?;
        Ok(CuckooFilter {
            hashes: HashFamily::seeded(seed),
            slots: vec![EMPTY; total as usize],
            buckets,
            slots_per_bucket,
            fingerprint_bits,
            max_kicks,
            kick_counter: 0,
            items: 0,
        })
    }

    pub fn bucket_count(&self) -> u64 {
        self.buckets
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn occupied_slots(&self) -> usize {
        self.slots.iter().filter(|&&fp| fp != EMPTY).count()
    }

    pub fn load_factor(&self) -> f64 {
        self.occupied_slots() as f64 / self.slots.len() as f64
    }

    pub fn fingerprint_of(&self, item: &[u8]) -> Result<u64, FilterError> {
        Ok(fingerprint(item, self.fingerprint_bits, self.hashes.seed())?)
    }

    pub fn primary_bucket(&self, item: &[u8]) -> u64 {
        self.hashes.base(item) & (self.buckets - 1)
    }

    /// The other candidate bucket: XOR with a fingerprint-only hash, its
    /// own inverse, so it maps i1→i2 and i2→i1 alike.
    pub fn alternate_bucket(&self, bucket: u64, fp: u64) -> u64 {
        bucket ^ (derive_seed(fp, ALT_LANE) & (self.buckets - 1))
    }

    fn bucket_slots(&self, bucket: u64) -> std::ops::Range<usize> {
        let start = bucket as usize * self.slots_per_bucket;
        start..start + self.slots_per_bucket
    }

    fn place_in(&mut self, bucket: u64, fp: u64) -> bool {
        for s in self.bucket_slots(bucket) {
            if self.slots[s] == EMPTY {
                self.slots[s] = fp;
                return true;
            }
        }
        false
    }

    fn bucket_contains(&self, bucket: u64, fp: u64) -> bool {
        self.bucket_slots(bucket).any(|s| self.slots[s] == fp)
    }

    fn next_choice(&mut self, span: u64) -> u64 {
        self.kick_counter += 1;
        derive_seed(derive_seed(self.hashes.seed(), KICK_LANE), self.kick_counter) % span
    }

    /// Occupied (bucket, fingerprint) pairs, for table audits.
    pub fn occupied(&self) -> Vec<(u64, u64)> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, &fp)| fp != EMPTY)
            .map(|(s, &fp)| ((s / self.slots_per_bucket) as u64, fp))
            .collect()
    }
}

impl MembershipFilter for CuckooFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let fp = self.fingerprint_of(item)?;
        let i1 = self.primary_bucket(item);
        let i2 = self.alternate_bucket(i1, fp);
        if self.place_in(i1, fp) || self.place_in(i2, fp) {
            self.items += 1;
            return Ok(());
        }

        // evict: swap the incoming fingerprint with a random resident and
        // chase the resident to its alternate bucket
        let mut cur = fp;
        let mut bucket = if self.next_choice(2) == 0 { i1 } else { i2 };
        let mut journal: Vec<usize> = Vec::with_capacity(self.max_kicks);
        for _ in 0..self.max_kicks {
            let slot = self.bucket_slots(bucket).start
                + self.next_choice(self.slots_per_bucket as u64) as usize;
            std::mem::swap(&mut self.slots[slot], &mut cur);
            journal.push(slot);
            bucket = self.alternate_bucket(bucket, cur);
            if self.place_in(bucket, cur) {
                self.items += 1;
                return Ok(());
            }
        }
        // undo the whole chain so the failed insert leaves no trace
        for &slot in journal.iter().rev() {
            std::mem::swap(&mut self.slots[slot], &mut cur);
        }
        debug_assert_eq!(cur, fp, "rollback must hand back the original fingerprint");
        Err(FilterError::InsertionFailed(format!(
            "no slot found within {} relocations",
            self.max_kicks
        )))
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let Ok(fp) = self.fingerprint_of(item) else {
            return QueryOutcome::absent();
        };
        let i1 = self.primary_bucket(item);
        let i2 = self.alternate_bucket(i1, fp);
        if self.bucket_contains(i1, fp) || self.bucket_contains(i2, fp) {
            QueryOutcome::present()
        } else {
            QueryOutcome::absent()
        }
    }

    /// Removes one stored copy of the item's fingerprint.
    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        let fp = self.fingerprint_of(item)?;
        let i1 = self.primary_bucket(item);
        let i2 = self.alternate_bucket(i1, fp);
        for bucket in [i1, i2] {
            for s in self.bucket_slots(bucket) {
                if self.slots[s] == fp {
                    self.slots[s] = EMPTY;
                    self.items = self.items.saturating_sub(1);
                    return Ok(RemovalOutcome::Removed);
                }
            }
        }
        Ok(RemovalOutcome::NotFound)
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Cuckoo {
                buckets: self.buckets,
                slots_per_bucket: self.slots_per_bucket,
                fingerprint_bits: self.fingerprint_bits,
                max_kicks: self.max_kicks,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.slots.len() as u64 * self.fingerprint_bits as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut words = Vec::with_capacity(2 + self.slots.len());
        words.push(self.items);
        words.push(self.kick_counter);
        words.extend_from_slice(&self.slots);
        Ok(words)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("items")?;
        let kick_counter = r.take("kick counter")?;
        let slots = r.take_slice("slots", self.slots.len())?;
        r.finish()?;
        let limit = if self.fingerprint_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.fingerprint_bits) - 1
        };
        let mut occupied = 0u64;
        for (i, &fp) in slots.iter().enumerate() {
            if fp > limit {
                return Err(FilterError::Format {
                    offset: (2 + i) * 8,
                    reason: "fingerprint wider than the configured width".into(),
                });
            }
            if fp != EMPTY {
                occupied += 1;
            }
        }
        if occupied != items {
            return Err(FilterError::Format {
                offset: 0,
                reason: "item count disagrees with occupied slots".into(),
            });
        }
        self.slots = slots.to_vec();
        self.items = items;
        self.kick_counter = kick_counter;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xor_bucket_swap_is_an_involution() {
        // the defining identity: offset 12 maps 5 to 9 and 9 back to 5
        assert_eq!(5u64 ^ 12, 9);
        assert_eq!(9u64 ^ 12, 5);
        let f = CuckooFilter::new(64, 4, 12, 500, 3).unwrap();
        for i in 0..200u32 {
            let item = format!("inv-{i}");
            let fp = f.fingerprint_of(item.as_bytes()).unwrap();
            let i1 = f.primary_bucket(item.as_bytes());
            let i2 = f.alternate_bucket(i1, fp);
            assert_eq!(f.alternate_bucket(i2, fp), i1);
        }
    }

    #[test]
    fn insert_query_remove_round_trip() {
        let mut f = CuckooFilter::new(128, 4, 12, 500, 5).unwrap();
        f.insert(b"key").unwrap();
        assert!(f.query(b"key").is_present());
        assert_eq!(f.remove(b"key").unwrap(), RemovalOutcome::Removed);
        assert!(!f.query(b"key").is_present());
        assert_eq!(f.remove(b"key").unwrap(), RemovalOutcome::NotFound);
        assert_eq!(f.tracked_items(), 0);
    }

    #[test]
    fn duplicates_store_separate_copies() {
        let mut f = CuckooFilter::new(64, 4, 12, 500, 7).unwrap();
        f.insert(b"twice").unwrap();
        f.insert(b"twice").unwrap();
        assert_eq!(f.occupied_slots(), 2);
        assert_eq!(f.remove(b"twice").unwrap(), RemovalOutcome::Removed);
        assert!(f.query(b"twice").is_present(), "one copy left");
        assert_eq!(f.remove(b"twice").unwrap(), RemovalOutcome::Removed);
        assert!(!f.query(b"twice").is_present());
    }

    #[test]
    fn fills_to_eighty_four_percent_without_failures() {
        let mut f = CuckooFilter::new(256, 4, 12, 500, 11).unwrap();
        let target = (0.84 * (256.0 * 4.0)) as usize;
        for i in 0..target {
            f.insert(format!("fill-{i}").as_bytes())
                .unwrap_or_else(|e| panic!("insert {i} of {target} failed: {e}"));
        }
        assert_eq!(f.occupied_slots(), target);
        assert!((f.load_factor() - 0.84).abs() < 0.01);
        for i in 0..target {
            assert!(f.query(format!("fill-{i}").as_bytes()).is_present());
        }
    }

    #[test]
    fn every_stored_fingerprint_sits_in_a_candidate_bucket() {
        let mut f = CuckooFilter::new(256, 4, 12, 500, 13).unwrap();
        for i in 0..700u32 {
            f.insert(format!("audit-{i}").as_bytes()).unwrap();
        }
        for i in 0..250u32 {
            f.remove(format!("audit-{i}").as_bytes()).unwrap();
        }
        for i in 700..950u32 {
            f.insert(format!("audit-{i}").as_bytes()).unwrap();
        }
        // candidate pairs of everything ever inserted
        let mut legal: std::collections::BTreeSet<(u64, u64)> = std::collections::BTreeSet::new();
        for i in 0..950u32 {
            let item = format!("audit-{i}");
            let fp = f.fingerprint_of(item.as_bytes()).unwrap();
            let i1 = f.primary_bucket(item.as_bytes());
            legal.insert((i1, fp));
            legal.insert((f.alternate_bucket(i1, fp), fp));
        }
        for (bucket, fp) in f.occupied() {
            assert!(
                legal.contains(&(bucket, fp)),
                "fingerprint {fp:#x} in bucket {bucket} is reachable from no inserted item"
            );
        }
    }

    #[test]
    fn failed_insert_rolls_the_table_back() {
        // 2 buckets x 1 slot and single-bucket items: capacity is tiny
        let mut f = CuckooFilter::new(2, 1, 12, 8, 17).unwrap();
        let mut stored = Vec::new();
        let mut failed_at = None;
        for i in 0..20u32 {
            let before = f.occupied();
            let items_before = f.tracked_items();
            let kicks_before = f.kick_counter;
            match f.insert(format!("cram-{i}").as_bytes()) {
                Ok(()) => stored.push(i),
                Err(FilterError::InsertionFailed(_)) => {
                    assert_eq!(f.occupied(), before, "failed insert must not move residents");
                    assert_eq!(f.tracked_items(), items_before);
                    assert!(f.kick_counter > kicks_before, "eviction attempts were made");
                    failed_at = Some(i);
                    break;
                }
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        assert!(failed_at.is_some(), "a 2-slot table cannot absorb 20 items");
        for i in stored {
            assert!(f.query(format!("cram-{i}").as_bytes()).is_present());
        }
    }

    #[test]
    fn snapshot_round_trips_and_rejects_damage() {
        let mut f = CuckooFilter::new(64, 4, 12, 500, 19).unwrap();
        for i in 0..100u32 {
            f.insert(format!("s-{i}").as_bytes()).unwrap();
        }
        let words = f.state_words().unwrap();
        let mut copy = CuckooFilter::new(64, 4, 12, 500, 19).unwrap();
        copy.load_state(&words).unwrap();
        for i in 0..100u32 {
            assert!(copy.query(format!("s-{i}").as_bytes()).is_present());
        }
        assert_eq!(copy.tracked_items(), 100);

        let mut short = words.clone();
        short.pop();
        assert!(copy.load_state(&short).is_err());

        let mut wide = words.clone();
        let slot = wide.iter().skip(2).position(|&fp| fp != 0).unwrap() + 2;
        wide[slot] = 1 << 12; // beyond a 12-bit fingerprint
        assert!(copy.load_state(&wide).is_err());

        let mut miscounted = words.clone();
        miscounted[0] += 1;
        assert!(copy.load_state(&miscounted).is_err());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(CuckooFilter::new(0, 4, 12, 500, 0).is_err());
        assert!(CuckooFilter::new(48, 4, 12, 500, 0).is_err(), "not a power of two");
        assert!(CuckooFilter::new(64, 0, 12, 500, 0).is_err());
        assert!(CuckooFilter::new(64, 4, 0, 500, 0).is_err());
        assert!(CuckooFilter::new(64, 4, 33, 500, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        // removal is exact only for items actually inserted; colliding
        // fingerprints are filtered out so the bookkeeping stays sound
        #[test]
        fn distinct_fingerprint_members_track_removals_exactly(
            ids in proptest::collection::btree_set(0u16..400, 2..100),
            remove_count in 1usize..40,
            seed in any::<u64>(),
        ) {
            let mut f = CuckooFilter::new(256, 4, 12, 500, seed).unwrap();
            let mut seen_fps = std::collections::BTreeSet::new();
            let members: Vec<String> = ids
                .into_iter()
                .map(|i| format!("p-{i}"))
                .filter(|item| seen_fps.insert(f.fingerprint_of(item.as_bytes()).unwrap()))
                .collect();
            for item in &members {
                f.insert(item.as_bytes()).unwrap();
            }
            let cut = remove_count.min(members.len());
            for item in &members[..cut] {
                prop_assert_eq!(f.remove(item.as_bytes()).unwrap(), RemovalOutcome::Removed);
                prop_assert!(!f.query(item.as_bytes()).is_present());
                prop_assert_eq!(f.remove(item.as_bytes()).unwrap(), RemovalOutcome::NotFound);
            }
            for item in &members[cut..] {
                prop_assert!(f.query(item.as_bytes()).is_present());
            }
            prop_assert_eq!(f.tracked_items() as usize, members.len() - cut);
        }
    }
}
