//! Invertible lookup table: each of `k` subtables stores per-cell a signed
//! occupancy count plus XOR-sums of the keys and values hashed into it.
//! Insertion and deletion are exact inverses, so the structure supports
//! full enumeration of its contents — repeatedly find a cell holding
//! exactly one pair ("pure"), read the pair out, peel it from its other
//! cells, and continue until the table is empty or stuck.

use crate::api::{
    RemovalOutcome, FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::hash::{derive_seed, HashFamily};
use crate::support::{checked_k, checked_len, invalid, WordReader};

const KEY_LANE: u64 = 0xA1;
const VALUE_LANE: u64 = 0xA2;
/// Lanes `SLOT_LANE_BASE + i` select the cell within subtable `i`. Each
/// subtable must hash independently: probes derived from one stride would
/// make any two keys that collide in two subtables collide in all of
/// them, and such a pair can never be peeled apart.
const SLOT_LANE_BASE: u64 = 0x1B00;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Cell {
    count: i64,
    key_sum: u64,
    value_sum: u64,
}

impl Cell {
    fn is_pure(&self) -> bool {
        self.count == 1
    }

    fn is_empty(&self) -> bool {
        self.count == 0 && self.key_sum == 0 && self.value_sum == 0
    }
}

#[derive(Clone, Debug)]
pub struct InvertibleFilter {
    hashes: HashFamily,
    cells: Vec<Cell>,
    k: usize,
    /// Cells per subtable (`cells.len() / k`).
    stripe: usize,
    /// Design capacity: the number of stored pairs the table is sized to
    /// enumerate reliably. Informational; nothing enforces it.
    rho: u64,
    items: u64,
}

impl InvertibleFilter {
    pub fn new(cells: usize, k: usize, rho: u64, seed: u64) -> Result<Self, FilterError> {
        let k = checked_k(k)?;
        // 192 bits per cell (count + two sums)
        checked_len("cells", cells as u64, 192)?;
        if cells == 0 || cells % k != 0 {
            return Err(invalid(
                "cells",
                "cell count must be a positive multiple of k",
            ));
        }
        Ok(InvertibleFilter {
            hashes: HashFamily::seeded(seed),
            cells: vec![Cell::default(); cells],
            k,
            stripe: cells / k,
            rho,
            items: 0,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The listing workload this table was sized for.
    pub fn capacity(&self) -> u64 {
        self.rho
    }

    /// One independently-hashed cell index per subtable, so the k probes
    /// never collide and cross-subtable collisions are uncorrelated.
    fn slots_for(&self, key: u64) -> Vec<usize> {
        let base = self.hashes.base(&key.to_le_bytes());
        (0..self.k)
            .map(|i| {
                let h = derive_seed(base, SLOT_LANE_BASE + i as u64);
                i * self.stripe + (h % self.stripe as u64) as usize
            })
            .collect()
    }

    pub fn insert_pair(&mut self, key: u64, value: u64) {
        for slot in self.slots_for(key) {
            let c = &mut self.cells[slot];
            c.count += 1;
            c.key_sum ^= key;
            c.value_sum ^= value;
        }
        self.items += 1;
    }

    /// Removes one (key, value) occurrence. The table cannot detect a
    /// deletion of something never inserted; counts simply go negative.
    pub fn remove_pair(&mut self, key: u64, value: u64) {
        for slot in self.slots_for(key) {
            let c = &mut self.cells[slot];
            c.count -= 1;
            c.key_sum ^= key;
            c.value_sum ^= value;
        }
        self.items = self.items.saturating_sub(1);
    }

    /// Looks `key` up. `Ok(None)` and pure-cell answers are definitive;
    /// when every cell is ambiguous the result is a best-effort guess.
    pub fn get(&self, key: u64) -> Result<Option<u64>, FilterError> {
        for slot in self.slots_for(key) {
            let c = &self.cells[slot];
            if c.is_empty() {
                return Ok(None);
            }
            if c.is_pure() {
                return if c.key_sum == key {
                    Ok(Some(c.value_sum))
                } else {
                    Ok(None)
                };
            }
        }
        Err(invalid("key", "all probed cells are ambiguous"))
    }

    fn is_clean(&self) -> bool {
        self.cells.iter().all(Cell::is_empty)
    }

    /// Peels the table: repeatedly extracts pairs from pure cells. Returns
    /// the recovered pairs and whether the table decoded completely.
    pub fn list_entries(&self) -> (Vec<(u64, u64)>, bool) {
        let mut work = self.clone();
        let mut out = Vec::new();
        let mut queue: Vec<usize> = (0..work.cells.len())
            .filter(|&i| work.cells[i].is_pure())
            .collect();
        while let Some(slot) = queue.pop() {
            let c = work.cells[slot];
            if !c.is_pure() {
                continue;
            }
            let (key, value) = (c.key_sum, c.value_sum);
            out.push((key, value));
            for s in work.slots_for(key) {
                let cell = &mut work.cells[s];
                cell.count -= 1;
                cell.key_sum ^= key;
                cell.value_sum ^= value;
                if cell.is_pure() {
                    queue.push(s);
                }
            }
        }
        (out, work.is_clean())
    }

    fn adapter_pair(&self, item: &[u8]) -> (u64, u64) {
        let base = self.hashes.base(item);
        (
            derive_seed(base, KEY_LANE),
            derive_seed(base, VALUE_LANE),
        )
    }
}

impl MembershipFilter for InvertibleFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let (key, value) = self.adapter_pair(item);
        self.insert_pair(key, value);
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let (key, value) = self.adapter_pair(item);
        match self.get(key) {
            Ok(Some(v)) if v == value => QueryOutcome::present_confirmed(),
            Ok(_) => QueryOutcome::absent(),
            // every probed cell shared: can't rule the key out
            Err(_) => QueryOutcome::present(),
        }
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        if !self.query(item).is_present() {
            return Ok(RemovalOutcome::NotFound);
        }
        let (key, value) = self.adapter_pair(item);
        self.remove_pair(key, value);
        Ok(RemovalOutcome::Removed)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        let (key, _) = self.adapter_pair(item);
        let low = self
            .slots_for(key)
            .into_iter()
            .map(|s| self.cells[s].count)
            .min()
            .unwrap_or(0);
        Ok(low.max(0) as u64)
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Iblt {
                cells: self.cells.len(),
                k: self.k,
                rho: self.rho,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.cells.len() as u64 * 192
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut words = Vec::with_capacity(1 + 3 * self.cells.len());
        words.push(self.items);
        for c in &self.cells {
            words.push(c.count as u64);
            words.push(c.key_sum);
            words.push(c.value_sum);
        }
        Ok(words)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("items")?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for _ in 0..self.cells.len() {
            let count = r.take("count")? as i64;
            let key_sum = r.take("key sum")?;
            let value_sum = r.take("value sum")?;
            if count == 0 && (key_sum != 0 || value_sum != 0) {
                return Err(invalid("state", "zero-count cell with nonzero sums"));
            }
            cells.push(Cell {
                count,
                key_sum,
                value_sum,
            });
        }
        r.finish()?;
        self.cells = cells;
        self.items = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn insert_then_remove_returns_to_all_zero() {
        let mut t = InvertibleFilter::new(120, 4, 10, 3).unwrap();
        let pairs: Vec<(u64, u64)> = (0..10u64).map(|i| (i * 7 + 1, i * 13 + 2)).collect();
        for &(k, v) in &pairs {
            t.insert_pair(k, v);
        }
        assert!(!t.is_clean());
        for &(k, v) in &pairs {
            t.remove_pair(k, v);
        }
        assert!(t.is_clean(), "insert and delete must be exact inverses");
        assert_eq!(t.tracked_items(), 0);
    }

    #[test]
    fn listing_recovers_everything_when_lightly_loaded() {
        let mut t = InvertibleFilter::new(300, 4, 50, 11).unwrap();
        let mut expect: Vec<(u64, u64)> = (0..50u64).map(|i| (i + 1000, i * 3)).collect();
        for &(k, v) in &expect {
            t.insert_pair(k, v);
        }
        let (mut got, complete) = t.list_entries();
        assert!(complete, "table sized at 6x load should peel completely");
        got.sort_unstable();
        expect.sort_unstable();
        assert_eq!(got, expect);
    }

    #[test]
    fn get_distinguishes_pure_empty_and_ambiguous() {
        let mut t = InvertibleFilter::new(60, 3, 5, 21).unwrap();
        t.insert_pair(42, 777);
        assert_eq!(t.get(42).unwrap(), Some(777));
        assert_eq!(t.get(9999).unwrap(), None);

        // overload a tiny table until some lookup path is all-shared
        let mut tiny = InvertibleFilter::new(3, 3, 2, 5).unwrap();
        for i in 0..6u64 {
            tiny.insert_pair(i, i);
        }
        assert!(
            tiny.get(100).is_err(),
            "a 1-cell-per-subtable table with 6 entries has no pure or empty cell"
        );
    }

    #[test]
    fn trait_adapter_round_trips_membership_and_removal() {
        let mut t = InvertibleFilter::new(200, 4, 20, 31).unwrap();
        for i in 0..20u32 {
            t.insert(format!("row-{i}").as_bytes()).unwrap();
        }
        for i in 0..20u32 {
            assert!(t.query(format!("row-{i}").as_bytes()).is_present());
        }
        assert!(!t.query(b"missing").is_present());
        assert_eq!(t.remove(b"missing").unwrap(), RemovalOutcome::NotFound);
        for i in 0..20u32 {
            assert_eq!(
                t.remove(format!("row-{i}").as_bytes()).unwrap(),
                RemovalOutcome::Removed
            );
        }
        assert!(t.is_clean());
    }

    #[test]
    fn count_estimate_tracks_duplicates() {
        let mut t = InvertibleFilter::new(120, 4, 10, 17).unwrap();
        for _ in 0..3 {
            t.insert(b"dup").unwrap();
        }
        assert_eq!(t.count_estimate(b"dup").unwrap(), 3);
        assert_eq!(t.count_estimate(b"other").unwrap(), 0);
    }

    #[test]
    fn snapshot_round_trips_and_rejects_damage() {
        let mut t = InvertibleFilter::new(60, 3, 5, 77).unwrap();
        for i in 0..5u64 {
            t.insert_pair(i, i + 100);
        }
        let words = t.state_words().unwrap();
        let mut copy = InvertibleFilter::new(60, 3, 5, 77).unwrap();
        copy.load_state(&words).unwrap();
        assert_eq!(copy.get(2).unwrap(), Some(102));
        assert_eq!(copy.tracked_items(), 5);

        let mut truncated = words.clone();
        truncated.pop();
        assert!(copy.load_state(&truncated).is_err());

        // find an empty cell and give it a key sum without a count
        let mut corrupt = words.clone();
        let empty_at = (0..60)
            .find(|&i| {
                corrupt[1 + 3 * i] == 0 && corrupt[2 + 3 * i] == 0 && corrupt[3 + 3 * i] == 0
            })
            .expect("a 60-cell table with 5 items has empty cells");
        corrupt[2 + 3 * empty_at] = 0xDEAD;
        assert!(copy.load_state(&corrupt).is_err());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(InvertibleFilter::new(0, 4, 1, 0).is_err());
        assert!(InvertibleFilter::new(10, 4, 1, 0).is_err(), "10 % 4 != 0");
        assert!(InvertibleFilter::new(12, 0, 1, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn peeling_a_sparse_table_recovers_the_exact_pair_set(
            seed in any::<u64>(),
            n in 1usize..40,
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut t = InvertibleFilter::new(240, 4, 40, seed ^ 0x5A5A).unwrap();
            let mut pairs = std::collections::BTreeMap::new();
            while pairs.len() < n {
                pairs.insert(rng.gen::<u64>(), rng.gen::<u64>());
            }
            for (&k, &v) in &pairs {
                t.insert_pair(k, v);
            }
            let (got, complete) = t.list_entries();
            prop_assert!(complete);
            let got: std::collections::BTreeMap<u64, u64> = got.into_iter().collect();
            prop_assert_eq!(got, pairs);
        }
    }
}
