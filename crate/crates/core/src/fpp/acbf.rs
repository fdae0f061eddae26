//! Multi-level counter encoding: the first level is a plain bit array sized
//! independently of the counter depth, and each deeper level allocates one
//! slot per set bit of the level above it. A position's count is the length
//! of its chain of set bits, walked by rank (popcount-offset) indexing, with
//! a side map holding whatever exceeds the deepest level.
//!
//! Because membership is answered entirely by the (enlarged) first level,
//! this layout beats equal-budget fixed-width counters on false positives
//! while still representing every counter exactly.

use std::collections::BTreeMap;

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::HashFamily;
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct AccurateCountingFilter {
    hashes: HashFamily,
    /// `levels[0]` has a fixed configured size; deeper levels grow and
    /// shrink so that `levels[j + 1].len() == levels[j].popcount()`.
    levels: Vec<BitVector>,
    max_levels: usize,
    k: usize,
    /// Counts beyond the deepest level, keyed by first-level position.
    overflow: BTreeMap<u64, u64>,
    items: u64,
}

/// The first-level size that minimizes the false-positive rate when the
/// total budget matches `m_counters` four-bit counters: the bits not needed
/// for chain slots (about k*n of them) all go to the first level.
pub fn optimal_first_level(m_counters: u64, k: usize, n: u64) -> Result<u64, FilterError> {
    let budget = 4 * m_counters;
    let chain = k as u64 * n;
    if budget <= chain {
        return Err(invalid(
            "m_counters",
            "budget leaves no room for the first level (4m must exceed kn)",
        ));
    }
    Ok(budget - chain)
}

impl AccurateCountingFilter {
    pub fn new(level1: u64, k: usize, levels: usize, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(level1, k, levels, HashFamily::seeded(seed))
    }

    pub fn with_family(
        level1: u64,
        k: usize,
        levels: usize,
        hashes: HashFamily,
    ) -> Result<Self, FilterError> {
        let len = checked_len("level1", level1, 1)?;
        let k = checked_k(k)?;
        if levels == 0 {
            return Err(invalid("levels", "need at least one level"));
        }
        if levels > 64 {
            return Err(invalid("levels", "more than 64 levels is not supported"));
        }
        Ok(AccurateCountingFilter {
            hashes,
            levels: vec![BitVector::new(len)],
            max_levels: levels,
            k,
            overflow: BTreeMap::new(),
            items: 0,
        })
    }

    pub fn level1(&self) -> u64 {
        self.levels[0].len() as u64
    }

    pub fn max_levels(&self) -> usize {
        self.max_levels
    }

    /// Exact count stored for first-level position `pos`.
    pub fn position_count(&self, pos: u64) -> u64 {
        let mut j = 0usize;
        let mut at = pos as usize;
        let mut v = 0u64;
        loop {
            if j >= self.levels.len() || !self.levels[j].get(at) {
                break;
            }
            v += 1;
            if j + 1 == self.max_levels {
                break;
            }
            at = self.levels[j].rank(at);
            j += 1;
        }
        if v as usize == self.max_levels {
            v += self.overflow.get(&pos).copied().unwrap_or(0);
        }
        v
    }

    fn increment_position(&mut self, pos: usize) {
        let mut j = 0usize;
        let mut at = pos;
        loop {
            if !self.levels[j].get(at) {
                if j + 1 < self.max_levels {
                    // a set bit owns exactly one slot one level down; create
                    // it (empty) before the bit becomes visible to ranking
                    let r = self.levels[j].rank(at);
                    if self.levels.len() == j + 1 {
                        self.levels.push(BitVector::new(0));
                    }
                    self.levels[j + 1].insert_bit(r, false);
                }
                self.levels[j].set(at);
                return;
            }
            if j + 1 == self.max_levels {
                *self.overflow.entry(pos as u64).or_insert(0) += 1;
                return;
            }
            at = self.levels[j].rank(at);
            j += 1;
        }
    }

    /// Returns `false` if the position already held zero.
    fn decrement_position(&mut self, pos: usize) -> bool {
        // walk the set chain
        let mut path: Vec<(usize, usize)> = Vec::with_capacity(self.max_levels);
        let mut j = 0usize;
        let mut at = pos;
        loop {
            if j >= self.levels.len() || !self.levels[j].get(at) {
                break;
            }
            path.push((j, at));
            if j + 1 == self.max_levels {
                break;
            }
            at = self.levels[j].rank(at);
            j += 1;
        }
        let Some(&(j, at)) = path.last() else {
            return false;
        };
        if j + 1 == self.max_levels {
            if let Some(extra) = self.overflow.get_mut(&(pos as u64)) {
                *extra -= 1;
                if *extra == 0 {
                    self.overflow.remove(&(pos as u64));
                }
                return true;
            }
        }
        if j + 1 < self.max_levels && self.levels.len() > j + 1 {
            let r = self.levels[j].rank(at);
            debug_assert!(
                !self.levels[j + 1].get(r),
                "the deepest set bit must own an empty slot"
            );
            self.levels[j + 1].remove_bit(r);
        }
        self.levels[j].clear(at);
        while self.levels.len() > 1 && self.levels.last().unwrap().is_empty() {
            self.levels.pop();
        }
        true
    }

    fn probe_positions(&self, item: &[u8]) -> Vec<u64> {
        self.hashes.indices(item, self.k, self.level1())
    }

    fn min_count(&self, item: &[u8]) -> u64 {
        self.probe_positions(item)
            .into_iter()
            .map(|p| self.position_count(p))
            .min()
            .unwrap_or(0)
    }

    #[cfg(test)]
    fn check_structure(&self) {
        assert!(self.levels.len() <= self.max_levels);
        for j in 0..self.levels.len() - 1 {
            assert_eq!(
                self.levels[j + 1].len(),
                self.levels[j].popcount(),
                "level {} slot count must equal level {} occupancy",
                j + 2,
                j + 1
            );
        }
        for (&pos, &extra) in &self.overflow {
            assert!(extra > 0, "overflow entries must be positive");
            assert!(pos < self.level1());
        }
    }
}

impl MembershipFilter for AccurateCountingFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        for pos in self.probe_positions(item) {
            self.increment_position(pos as usize);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        // membership is decided by the first level alone
        let m1 = self.level1();
        for i in 0..self.k {
            if !self.levels[0].get(self.hashes.index_at(item, i, m1) as usize) {
                return QueryOutcome::absent().with_frequency(0);
            }
        }
        QueryOutcome::present().with_frequency(self.min_count(item))
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        if self.min_count(item) == 0 {
            return Ok(RemovalOutcome::NotFound);
        }
        for pos in self.probe_positions(item) {
            self.decrement_position(pos as usize);
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        Ok(self.min_count(item))
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Acbf {
                level1: self.level1(),
                k: self.k,
                levels: self.max_levels,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        let level_bits: u64 = self.levels.iter().map(|l| l.len() as u64).sum();
        // each overflow entry occupies a (position, count) pair off to the side
        level_bits + 128 * self.overflow.len() as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![
            self.items,
            self.levels.len() as u64,
            self.overflow.len() as u64,
        ];
        for level in &self.levels {
            out.push(level.len() as u64);
            out.extend_from_slice(level.words());
        }
        for (&pos, &extra) in &self.overflow {
            out.push(pos);
            out.push(extra);
        }
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_levels = r.take_at_most("level count", self.max_levels as u64)?;
        if n_levels == 0 {
            return Err(r.bad("at least the first level must be present"));
        }
        let n_overflow = r.take("overflow size")?;
        let mut levels = Vec::with_capacity(n_levels as usize);
        let mut prev_popcount = 0usize;
        for j in 0..n_levels {
            let len = r.take("level length")? as usize;
            if j == 0 && len != self.levels[0].len() {
                return Err(r.bad("first level size does not match this filter"));
            }
            if j > 0 && len != prev_popcount {
                return Err(r.bad("level size must equal the occupancy one level up"));
            }
            let n_words = len.div_ceil(64);
            let image = r.take_slice("level bits", n_words)?;
            check_bit_tail(image, len, 0)?;
            let level = BitVector::from_words(image.to_vec(), len);
            prev_popcount = level.popcount();
            levels.push(level);
        }
        if levels.len() > 1 && levels.last().unwrap().is_empty() {
            return Err(r.bad("trailing empty levels must be pruned"));
        }
        let mut overflow = BTreeMap::new();
        let mut last_pos = None;
        for _ in 0..n_overflow {
            let pos = r.take("overflow position")?;
            if pos >= self.levels[0].len() as u64 {
                return Err(r.bad("overflow position beyond the first level"));
            }
            if let Some(lp) = last_pos {
                if pos <= lp {
                    return Err(r.bad("overflow positions must be strictly increasing"));
                }
            }
            last_pos = Some(pos);
            let extra = r.take("overflow count")?;
            if extra == 0 {
                return Err(r.bad("overflow counts must be positive"));
            }
            overflow.insert(pos, extra);
        }
        r.finish()?;
        self.levels = levels;
        self.overflow = overflow;
        self.items = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap as Map;

    #[test]
    fn optimal_first_level_matches_the_budget_identity() {
        assert_eq!(optimal_first_level(1024, 3, 100).unwrap(), 4 * 1024 - 300);
        assert!(optimal_first_level(75, 3, 100).is_err());
    }

    #[test]
    fn single_position_counts_walk_through_overflow_and_back() {
        // k = 1 over a single-bit first level pins everything to position 0
        let mut f = AccurateCountingFilter::new(1, 1, 2, 3).unwrap();
        for expect in 1..=5u64 {
            f.insert(b"x").unwrap();
            assert_eq!(f.position_count(0), expect);
            f.check_structure();
        }
        // two chain levels plus three overflow
        assert_eq!(f.overflow.get(&0), Some(&3));
        for expect in (0..=4u64).rev() {
            assert_eq!(f.remove(b"x").unwrap(), RemovalOutcome::Removed);
            assert_eq!(f.position_count(0), expect);
            f.check_structure();
        }
        assert!(f.overflow.is_empty());
        assert_eq!(f.remove(b"x").unwrap(), RemovalOutcome::NotFound);
    }

    #[test]
    fn membership_is_decided_by_the_first_level() {
        let mut f = AccurateCountingFilter::new(4096, 3, 4, 7).unwrap();
        for i in 0..100 {
            f.insert(format!("item-{i}").as_bytes()).unwrap();
        }
        for i in 0..100 {
            let out = f.query(format!("item-{i}").as_bytes());
            assert!(out.is_present());
            assert!(out.frequency.unwrap() >= 1);
        }
        f.check_structure();
    }

    #[test]
    fn snapshot_roundtrip_with_overflow_and_damage_rejection() {
        let mut f = AccurateCountingFilter::new(64, 2, 2, 5).unwrap();
        for i in 0..30 {
            for _ in 0..(1 + i % 4) {
                f.insert(format!("item-{i}").as_bytes()).unwrap();
            }
        }
        let words = f.state_words().unwrap();
        let mut g = AccurateCountingFilter::new(64, 2, 2, 5).unwrap();
        g.load_state(&words).unwrap();
        assert_eq!(g.state_words().unwrap(), words);
        for i in 0..30 {
            let item = format!("item-{i}");
            assert_eq!(
                g.count_estimate(item.as_bytes()).unwrap(),
                f.count_estimate(item.as_bytes()).unwrap()
            );
        }
        // structural damage: level-2 length that disagrees with level 1
        let mut h = AccurateCountingFilter::new(64, 2, 2, 5).unwrap();
        let mut bad = words.clone();
        // words[3] is the first level's length header
        bad[3] = 63;
        assert!(h.load_state(&bad).is_err());
        assert!(h.load_state(&words[..words.len() - 1]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn every_position_count_matches_an_exact_replay(
            ops in proptest::collection::vec((any::<bool>(), 0u8..24), 1..120),
            seed in any::<u64>(),
        ) {
            let level1 = 256u64;
            let k = 3usize;
            let mut f = AccurateCountingFilter::new(level1, k, 3, seed).unwrap();
            let family = HashFamily::seeded(seed);
            let mut exact: Map<u64, u64> = Map::new();
            let mut live: Vec<u8> = Vec::new();

            for (is_insert, id) in ops {
                let item = format!("item-{id}");
                if is_insert {
                    f.insert(item.as_bytes()).unwrap();
                    live.push(id);
                    for p in family.indices(item.as_bytes(), k, level1) {
                        *exact.entry(p).or_insert(0) += 1;
                    }
                } else if let Some(i) = live.iter().position(|&x| x == id) {
                    prop_assert_eq!(f.remove(item.as_bytes()).unwrap(), RemovalOutcome::Removed);
                    live.remove(i);
                    for p in family.indices(item.as_bytes(), k, level1) {
                        let c = exact.get_mut(&p).unwrap();
                        *c -= 1;
                        if *c == 0 { exact.remove(&p); }
                    }
                }
            }

            f.check_structure();
            for pos in 0..level1 {
                prop_assert_eq!(
                    f.position_count(pos),
                    exact.get(&pos).copied().unwrap_or(0),
                    "position {} diverged from exact replay", pos
                );
            }
        }
    }
}
