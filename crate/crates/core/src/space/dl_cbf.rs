//! Counting filter stored as a d-left hash table: a single fingerprint per
//! item is routed into each of `d` subtables by an invertible affine
//! permutation, so the (bucket, remainder) pair seen by one subtable
//! uniquely determines the pair seen by every other. New items go to the
//! least-loaded candidate bucket, ties breaking toward the leftmost
//! subtable; repeats increment the matching cell's counter. Because routing
//! is a permutation, a remainder match inside a candidate bucket can only
//! come from the same fingerprint, which is what makes deletion safe.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::hash::{derive_seed, HashFamily};
use crate::support::{checked_len, invalid, WordReader};

/// Counter ceiling: cells budget four counter bits and stick at the top.
const COUNTER_MAX: u64 = 15;
const COUNTER_BITS: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Cell {
    remainder: u64,
    count: u64,
}

#[derive(Clone, Debug)]
pub struct DLeftCountingFilter {
    hashes: HashFamily,
    /// `buckets[sub * buckets_per_subtable + b]`, each at most
    /// `cells_per_bucket` long, cells kept in insertion order.
    buckets: Vec<Vec<Cell>>,
    subtables: usize,
    bucket_bits: u32,
    remainder_bits: u32,
    cells_per_bucket: usize,
    /// Odd multiplier and offset of each subtable's affine permutation.
    routes: Vec<(u64, u64)>,
    items: u64,
}

impl DLeftCountingFilter {
    pub fn new(
        subtables: usize,
        bucket_bits: u32,
        remainder_bits: u32,
        cells_per_bucket: usize,
        seed: u64,
    ) -> Result<Self, FilterError> {
        if subtables == 0 || subtables > 16 {
            return Err(invalid("subtables", "must lie in 1..=16"));
        }
        if bucket_bits == 0 || bucket_bits > 32 {
            return Err(invalid("bucket_bits", "must lie in 1..=32"));
        }
        if remainder_bits == 0 || remainder_bits > 48 {
            return Err(invalid("remainder_bits", "must lie in 1..=48"));
        }
        if bucket_bits + remainder_bits > 64 {
            return Err(invalid(
                "remainder_bits",
                "bucket and remainder bits must fit a 64-bit fingerprint",
            ));
        }
        if cells_per_bucket == 0 || cells_per_bucket > 64 {
            return Err(invalid("cells_per_bucket", "must lie in 1..=64"));
        }
        let total_cells = (subtables as u64)
            .checked_mul(1u64 << bucket_bits)
            .and_then(|v| v.checked_mul(cells_per_bucket as u64))
            .ok_or_else(|| invalid("bucket_bits", "table size overflows"))?;
        checked_len("table", total_cells, remainder_bits as u64 + COUNTER_BITS)?;
        let routes = (0..subtables)
            .map(|s| {
                (
                    derive_seed(seed, 2 * s as u64 + 0x20) | 1,
                    derive_seed(seed, 2 * s as u64 + 0x21),
                )
            })
            .collect();
        Ok(DLeftCountingFilter {
            hashes: HashFamily::seeded(seed),
            buckets: vec![Vec::new(); subtables << bucket_bits],
            subtables,
            bucket_bits,
            remainder_bits,
            cells_per_bucket,
            routes,
            items: 0,
        })
    }

    fn width(&self) -> u32 {
        self.bucket_bits + self.remainder_bits
    }

    fn width_mask(&self) -> u64 {
        if self.width() == 64 {
            u64::MAX
        } else {
            (1u64 << self.width()) - 1
        }
    }

    fn fingerprint(&self, item: &[u8]) -> u64 {
        self.hashes.base(item) & self.width_mask()
    }

    /// (bucket, remainder) for `fp` in subtable `sub`: an affine bijection
    /// of the fingerprint space, split into high and low fields.
    fn route(&self, sub: usize, fp: u64) -> (usize, u64) {
        let (a, b) = self.routes[sub];
        let permuted = a.wrapping_mul(fp).wrapping_add(b) & self.width_mask();
        let bucket = (permuted >> self.remainder_bits) as usize;
        let remainder = permuted & ((1u64 << self.remainder_bits) - 1);
        (bucket, remainder)
    }

    fn bucket_index(&self, sub: usize, bucket: usize) -> usize {
        (sub << self.bucket_bits) + bucket
    }

    /// Locates the (unique) cell holding `fp`, scanning subtables left to
    /// right.
    fn find(&self, fp: u64) -> Option<(usize, usize)> {
        for sub in 0..self.subtables {
            let (bucket, remainder) = self.route(sub, fp);
            let at = self.bucket_index(sub, bucket);
            if let Some(slot) = self.buckets[at].iter().position(|c| c.remainder == remainder) {
                return Some((at, slot));
            }
        }
        None
    }

    /// Occupied cells in each subtable, for load inspection.
    pub fn subtable_loads(&self) -> Vec<usize> {
        (0..self.subtables)
            .map(|sub| {
                (0..1usize << self.bucket_bits)
                    .map(|b| self.buckets[self.bucket_index(sub, b)].len())
                    .sum()
            })
            .collect()
    }

    pub fn occupied_cells(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    #[cfg(test)]
    fn check_structure(&self) {
        for bucket in &self.buckets {
            assert!(bucket.len() <= self.cells_per_bucket);
            for (i, cell) in bucket.iter().enumerate() {
                assert!(cell.count >= 1 && cell.count <= COUNTER_MAX);
                assert!(cell.remainder < (1u64 << self.remainder_bits));
                assert!(
                    !bucket[..i].iter().any(|c| c.remainder == cell.remainder),
                    "duplicate remainder within one bucket"
                );
            }
        }
    }
}

impl MembershipFilter for DLeftCountingFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let fp = self.fingerprint(item);
        if let Some((at, slot)) = self.find(fp) {
            let cell = &mut self.buckets[at][slot];
            cell.count = (cell.count + 1).min(COUNTER_MAX);
            self.items += 1;
            return Ok(());
        }
        let mut best: Option<(usize, u64)> = None;
        for sub in 0..self.subtables {
            let (bucket, remainder) = self.route(sub, fp);
            let at = self.bucket_index(sub, bucket);
            let load = self.buckets[at].len();
            if load < self.cells_per_bucket && best.map_or(true, |(b, _)| load < self.buckets[b].len())
            {
                best = Some((at, remainder));
            }
        }
        let Some((at, remainder)) = best else {
            return Err(FilterError::InsertionFailed(
                "all candidate buckets are full".into(),
            ));
        };
        self.buckets[at].push(Cell { remainder, count: 1 });
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        match self.find(self.fingerprint(item)) {
            Some((at, slot)) => {
                QueryOutcome::present().with_frequency(self.buckets[at][slot].count)
            }
            None => QueryOutcome::absent().with_frequency(0),
        }
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        let fp = self.fingerprint(item);
        let Some((at, slot)) = self.find(fp) else {
            return Ok(RemovalOutcome::NotFound);
        };
        let cell = &mut self.buckets[at][slot];
        if cell.count == COUNTER_MAX {
            // stuck counter: the true multiplicity is unknown, keep it
        } else if cell.count == 1 {
            self.buckets[at].remove(slot);
        } else {
            cell.count -= 1;
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        Ok(self
            .find(self.fingerprint(item))
            .map_or(0, |(at, slot)| self.buckets[at][slot].count))
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::DlCbf {
                subtables: self.subtables,
                bucket_bits: self.bucket_bits,
                remainder_bits: self.remainder_bits,
                cells_per_bucket: self.cells_per_bucket,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        (self.subtables as u64)
            * (1u64 << self.bucket_bits)
            * (self.cells_per_bucket as u64)
            * (self.remainder_bits as u64 + COUNTER_BITS)
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![self.items];
        for bucket in &self.buckets {
            out.push(bucket.len() as u64);
            for cell in bucket {
                out.push((cell.remainder << 8) | cell.count);
            }
        }
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let rem_limit = 1u64 << self.remainder_bits;
        let mut buckets = Vec::with_capacity(self.buckets.len());
        for _ in 0..self.buckets.len() {
            let len = r.take_at_most("bucket size", self.cells_per_bucket as u64)? as usize;
            let mut bucket = Vec::with_capacity(len);
            for _ in 0..len {
                let word = r.take("cell")?;
                let cell = Cell {
                    remainder: word >> 8,
                    count: word & 0xff,
                };
                if cell.remainder >= rem_limit {
                    return Err(r.bad("cell remainder out of range"));
                }
                if cell.count == 0 || cell.count > COUNTER_MAX {
                    return Err(r.bad("cell counter out of range"));
                }
                if bucket.iter().any(|c: &Cell| c.remainder == cell.remainder) {
                    return Err(r.bad("duplicate remainder within one bucket"));
                }
                bucket.push(cell);
            }
            buckets.push(bucket);
        }
        r.finish()?;
        self.buckets = buckets;
        self.items = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    #[test]
    fn each_route_permutes_the_fingerprint_space() {
        let f = DLeftCountingFilter::new(3, 4, 4, 4, 7).unwrap();
        for sub in 0..3 {
            let mut seen = vec![false; 256];
            for fp in 0u64..256 {
                let (bucket, remainder) = f.route(sub, fp);
                let image = (bucket as u64) << 4 | remainder;
                assert!(!seen[image as usize], "subtable {sub} repeats {image}");
                seen[image as usize] = true;
            }
        }
    }

    #[test]
    fn repeats_increment_a_single_cell() {
        let mut f = DLeftCountingFilter::new(4, 6, 16, 8, 3).unwrap();
        for _ in 0..5 {
            f.insert(b"same-item").unwrap();
        }
        assert_eq!(f.occupied_cells(), 1);
        assert_eq!(f.count_estimate(b"same-item").unwrap(), 5);
        assert_eq!(f.tracked_items(), 5);
        f.check_structure();
    }

    #[test]
    fn ties_prefer_the_leftmost_subtable() {
        let mut f = DLeftCountingFilter::new(4, 6, 16, 8, 3).unwrap();
        for i in 0..500 {
            f.insert(format!("item-{i}").as_bytes()).unwrap();
        }
        let loads = f.subtable_loads();
        assert_eq!(loads.iter().sum::<usize>(), f.occupied_cells());
        assert!(
            loads[0] > loads[3],
            "leftmost tie-breaking should skew load left: {loads:?}"
        );
        f.check_structure();
    }

    #[test]
    fn a_full_candidate_set_rejects_the_insert() {
        // one subtable, two buckets, one cell each: the third distinct
        // fingerprint has nowhere to go
        let mut f = DLeftCountingFilter::new(1, 1, 16, 1, 11).unwrap();
        let mut failed_at = None;
        for i in 0..32 {
            if f.insert(format!("item-{i}").as_bytes()).is_err() {
                failed_at = Some(i);
                break;
            }
        }
        let failed_at = failed_at.expect("a two-cell table must fill up");
        assert!(failed_at >= 2, "two cells admit at least two items");
        assert!(failed_at <= 8, "rejection should come quickly");
    }

    #[test]
    fn counters_stick_at_the_ceiling() {
        let mut f = DLeftCountingFilter::new(2, 4, 16, 4, 5).unwrap();
        for _ in 0..40 {
            f.insert(b"hot").unwrap();
        }
        assert_eq!(f.count_estimate(b"hot").unwrap(), 15);
        for _ in 0..40 {
            assert_eq!(f.remove(b"hot").unwrap(), RemovalOutcome::Removed);
            // a stuck cell refuses to decay
            assert_eq!(f.count_estimate(b"hot").unwrap(), 15);
        }
    }

    #[test]
    fn snapshot_roundtrip_and_damage_rejection() {
        let mut f = DLeftCountingFilter::new(3, 5, 12, 4, 9).unwrap();
        for i in 0..60 {
            for _ in 0..(1 + i % 3) {
                f.insert(format!("item-{i}").as_bytes()).unwrap();
            }
        }
        let words = f.state_words().unwrap();
        let mut g = DLeftCountingFilter::new(3, 5, 12, 4, 9).unwrap();
        g.load_state(&words).unwrap();
        assert_eq!(g.state_words().unwrap(), words);
        for i in 0..60 {
            let item = format!("item-{i}");
            assert_eq!(
                g.count_estimate(item.as_bytes()).unwrap(),
                f.count_estimate(item.as_bytes()).unwrap()
            );
        }
        assert!(g.load_state(&words[..words.len() - 1]).is_err());
        // walk the layout to the first stored cell and zero its counter byte
        let mut zeroed = words.clone();
        let mut idx = 1usize;
        let cell_at = loop {
            let len = zeroed[idx] as usize;
            idx += 1;
            if len > 0 {
                break idx;
            }
        };
        zeroed[cell_at] &= !0xff;
        assert!(g.load_state(&zeroed).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn counts_match_an_exact_multiset_replay(
            ops in proptest::collection::vec((any::<bool>(), 0u8..24), 1..120),
            seed in any::<u64>(),
        ) {
            let mut f = DLeftCountingFilter::new(3, 8, 24, 8, seed).unwrap();
            let mut truth: BTreeMap<u8, u64> = BTreeMap::new();
            for (is_insert, id) in ops {
                let item = format!("item-{id}");
                if is_insert {
                    if truth.get(&id).copied().unwrap_or(0) == COUNTER_MAX - 1 {
                        continue; // stay below the sticky ceiling
                    }
                    f.insert(item.as_bytes()).unwrap();
                    *truth.entry(id).or_insert(0) += 1;
                } else if truth.get(&id).copied().unwrap_or(0) > 0 {
                    prop_assert_eq!(f.remove(item.as_bytes()).unwrap(), RemovalOutcome::Removed);
                    let c = truth.get_mut(&id).unwrap();
                    *c -= 1;
                    if *c == 0 { truth.remove(&id); }
                }
            }
            f.check_structure();
            for id in 0u8..24 {
                let item = format!("item-{id}");
                prop_assert_eq!(
                    f.count_estimate(item.as_bytes()).unwrap(),
                    truth.get(&id).copied().unwrap_or(0),
                    "item {} diverged", id
                );
            }
        }
    }
}
