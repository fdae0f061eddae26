//! One bit array answering two questions at once: half of an item's probes
//! land at plain positions (existence), the other half are shifted by a
//! small per-item or caller-chosen offset in `1..w_bar`, which encodes an
//! auxiliary attribute. Reading the attribute back means sweeping every
//! candidate offset and reporting the ones whose shifted probes are all
//! set. The array is `m + w_bar - 1` bits long so shifted probes never
//! wrap.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::{offset_of, HashFamily};
use crate::support::{checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct ShiftingFilter {
    hashes: HashFamily,
    bits: BitVector,
    m: u64,
    k: usize,
    w_bar: u64,
    items: u64,
}

impl ShiftingFilter {
    /// `m` base positions, `k` probes (even: half plain, half shifted),
    /// offsets drawn from `1..w_bar`.
    pub fn new(m: u64, k: usize, w_bar: u64, seed: u64) -> Result<Self, FilterError> {
        let k = checked_k(k)?;
        if k % 2 != 0 {
            return Err(invalid("k", "probe count must be even to split in half"));
        }
        if w_bar < 2 {
            return Err(invalid("w_bar", "offset range needs at least offset 1"));
        }
        if m == 0 {
            return Err(invalid("m", "base position range must be positive"));
        }
        let total = m
            .checked_add(w_bar - 1)
            .ok_or_else(|| invalid("m", "m + w_bar - 1 overflows"))?;
        let len = checked_len("m + w_bar - 1", total, 1)?;
        Ok(ShiftingFilter {
            hashes: HashFamily::seeded(seed),
            bits: BitVector::new(len),
            m,
            k,
            w_bar,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn max_offset_exclusive(&self) -> u64 {
        self.w_bar
    }

    /// The item's own offset in `1..w_bar`, derived from its hash.
    fn self_offset(&self, item: &[u8]) -> u64 {
        offset_of(item, self.w_bar, self.hashes.seed())
            .expect("constructor guarantees w_bar >= 2")
    }

    fn plain_positions(&self, item: &[u8]) -> Vec<usize> {
        (0..self.k / 2)
            .map(|i| self.hashes.index_at(item, i, self.m) as usize)
            .collect()
    }

    fn shifted_positions(&self, item: &[u8], offset: u64) -> Vec<usize> {
        (self.k / 2..self.k)
            .map(|i| (self.hashes.index_at(item, i, self.m) + offset) as usize)
            .collect()
    }

    /// Stores `item` carrying `offset` as its attribute.
    pub fn insert_with_offset(&mut self, item: &[u8], offset: u64) -> Result<(), FilterError> {
        if offset == 0 || offset >= self.w_bar {
            return Err(invalid("offset", "attribute offset must lie in 1..w_bar"));
        }
        for pos in self.plain_positions(item) {
            self.bits.set(pos);
        }
        for pos in self.shifted_positions(item, offset) {
            self.bits.set(pos);
        }
        self.items += 1;
        Ok(())
    }

    /// Every offset in `1..w_bar` whose shifted probes are all set — the
    /// stored attribute is always among them; extras are false readings.
    pub fn plausible_offsets(&self, item: &[u8]) -> Vec<u64> {
        if self.plain_positions(item).iter().any(|&p| !self.bits.get(p)) {
            return Vec::new();
        }
        (1..self.w_bar)
            .filter(|&off| {
                self.shifted_positions(item, off)
                    .iter()
                    .all(|&p| self.bits.get(p))
            })
            .collect()
    }

    /// Membership plus the plausible attribute offsets as auxiliary data.
    pub fn query_attribute(&self, item: &[u8]) -> QueryOutcome {
        let offsets = self.plausible_offsets(item);
        if offsets.is_empty() {
            QueryOutcome::absent()
        } else {
            QueryOutcome::present().with_auxiliary(offsets)
        }
    }
}

impl MembershipFilter for ShiftingFilter {
    /// Plain insertion uses the item's hash-derived offset for the second
    /// half, so membership needs no side channel.
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let offset = self.self_offset(item);
        for pos in self.plain_positions(item) {
            self.bits.set(pos);
        }
        for pos in self.shifted_positions(item, offset) {
            self.bits.set(pos);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let offset = self.self_offset(item);
        for pos in self.plain_positions(item) {
            if !self.bits.get(pos) {
                return QueryOutcome::absent();
            }
        }
        for pos in self.shifted_positions(item, offset) {
            if !self.bits.get(pos) {
                return QueryOutcome::absent();
            }
        }
        QueryOutcome::present()
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Shifting {
                m: self.m,
                k: self.k,
                w_bar: self.w_bar,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.bits.len() as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut words = vec![self.items];
        words.extend_from_slice(self.bits.words());
        Ok(words)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("items")?;
        let body = r.take_slice("bit array", self.bits.words().len())?;
        crate::support::check_bit_tail(body, self.bits.len(), 1)?;
        r.finish()?;
        self.bits = BitVector::from_words(body.to_vec(), self.bits.len());
        self.items = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn members_inserted_via_the_trait_are_always_found() {
        let mut f = ShiftingFilter::new(4096, 8, 64, 5).unwrap();
        for i in 0..100u32 {
            f.insert(format!("member-{i}").as_bytes()).unwrap();
        }
        for i in 0..100u32 {
            assert!(f.query(format!("member-{i}").as_bytes()).is_present());
        }
        assert_eq!(f.tracked_items(), 100);
        assert_eq!(f.allocated_bits(), 4096 + 63);
    }

    #[test]
    fn stored_attribute_is_always_among_the_plausible_offsets() {
        let mut f = ShiftingFilter::new(8192, 8, 16, 9).unwrap();
        let stored: Vec<(String, u64)> = (0..40u32)
            .map(|i| (format!("key-{i}"), (i as u64 % 15) + 1))
            .collect();
        for (item, off) in &stored {
            f.insert_with_offset(item.as_bytes(), *off).unwrap();
        }
        for (item, off) in &stored {
            let outcome = f.query_attribute(item.as_bytes());
            assert!(outcome.is_present());
            let offsets = f.plausible_offsets(item.as_bytes());
            assert!(
                offsets.contains(off),
                "true offset {off} missing from {offsets:?}"
            );
        }
    }

    #[test]
    fn a_lightly_loaded_filter_reads_attributes_back_exactly() {
        let mut f = ShiftingFilter::new(65536, 10, 8, 13).unwrap();
        for i in 0..20u32 {
            let off = (i as u64 % 7) + 1;
            f.insert_with_offset(format!("sparse-{i}").as_bytes(), off)
                .unwrap();
        }
        let mut exact = 0;
        for i in 0..20u32 {
            let off = (i as u64 % 7) + 1;
            if f.plausible_offsets(format!("sparse-{i}").as_bytes()) == vec![off] {
                exact += 1;
            }
        }
        assert!(
            exact >= 18,
            "at 0.03% fill nearly every attribute reads back uniquely, got {exact}/20"
        );
    }

    #[test]
    fn absent_items_report_no_offsets() {
        let mut f = ShiftingFilter::new(4096, 6, 32, 3).unwrap();
        f.insert_with_offset(b"present", 5).unwrap();
        assert!(!f.query_attribute(b"never-stored").is_present());
        assert!(f.plausible_offsets(b"never-stored").is_empty());
    }

    #[test]
    fn offset_bounds_are_enforced() {
        let mut f = ShiftingFilter::new(128, 4, 8, 1).unwrap();
        assert!(f.insert_with_offset(b"x", 0).is_err());
        assert!(f.insert_with_offset(b"x", 8).is_err());
        assert!(f.insert_with_offset(b"x", 7).is_ok());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(ShiftingFilter::new(128, 3, 8, 0).is_err(), "odd k");
        assert!(ShiftingFilter::new(128, 4, 1, 0).is_err(), "w_bar < 2");
        assert!(ShiftingFilter::new(0, 4, 8, 0).is_err());
    }

    #[test]
    fn snapshot_round_trips_and_rejects_damage() {
        let mut f = ShiftingFilter::new(512, 4, 16, 21).unwrap();
        for i in 0..10u32 {
            f.insert(format!("s-{i}").as_bytes()).unwrap();
        }
        let words = f.state_words().unwrap();
        let mut copy = ShiftingFilter::new(512, 4, 16, 21).unwrap();
        copy.load_state(&words).unwrap();
        for i in 0..10u32 {
            assert!(copy.query(format!("s-{i}").as_bytes()).is_present());
        }
        assert_eq!(copy.tracked_items(), 10);

        let mut truncated = words.clone();
        truncated.pop();
        assert!(copy.load_state(&truncated).is_err());

        // 512 + 15 = 527 bits: the top word has unused tail bits
        let mut tail_set = words.clone();
        let last = tail_set.len() - 1;
        tail_set[last] |= 1u64 << 63;
        assert!(copy.load_state(&tail_set).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn no_false_negatives_for_either_insert_style(
            trait_ids in proptest::collection::btree_set(0u16..500, 1..30),
            attr_ids in proptest::collection::btree_set(500u16..1000, 1..30),
            seed in any::<u64>(),
        ) {
            let mut f = ShiftingFilter::new(2048, 6, 32, seed).unwrap();
            for &i in &trait_ids {
                f.insert(format!("t-{i}").as_bytes()).unwrap();
            }
            for &i in &attr_ids {
                let off = (i as u64 % 31) + 1;
                f.insert_with_offset(format!("a-{i}").as_bytes(), off).unwrap();
            }
            for &i in &trait_ids {
                let item = format!("t-{i}");
                prop_assert!(f.query(item.as_bytes()).is_present());
            }
            for &i in &attr_ids {
                let off = (i as u64 % 31) + 1;
                let item = format!("a-{i}");
                prop_assert!(f.plausible_offsets(item.as_bytes()).contains(&off));
            }
        }
    }
}
