//! Counting cells with variable increments: every insertion adds a hashed
//! value from a small increment set L instead of always adding one, so a
//! query can also check that the queried item's own increment is consistent
//! with the cell content, rejecting many collisions a plain counter accepts.
//!
//! Two cell layouts are supported:
//! - the count-and-sum layout keeps a small occupancy counter next to each
//!   sum, enabling an exact decomposition check and deletions;
//! - the sum-only layout stores just the sum, saving space but checking only
//!   whether the sum could contain the increment at all.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
    ViScheme,
};
use crate::bits::CounterVector;
use crate::hash::{derive_seed, HashFamily};
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct VariableIncrementFilter {
    hashes: HashFamily,
    increment_hashes: HashFamily,
    scheme: ViScheme,
    increments: Vec<u64>,
    /// Occupancy counters (count-and-sum layout only).
    counts: Option<CounterVector>,
    sums: CounterVector,
    k: usize,
    items: u64,
    /// reachable_exact[c][s]: can exactly c increments from L sum to s?
    reachable_exact: Vec<Vec<bool>>,
    /// reachable_any[s]: can any number (>= 0) of increments sum to s?
    reachable_any: Vec<bool>,
}

impl VariableIncrementFilter {
    pub fn new(
        m: u64,
        k: usize,
        scheme: ViScheme,
        increments: Vec<u64>,
        count_width: u32,
        sum_width: u32,
        seed: u64,
    ) -> Result<Self, FilterError> {
        Self::with_families(
            m,
            k,
            scheme,
            increments,
            count_width,
            sum_width,
            HashFamily::seeded(seed),
            HashFamily::seeded(derive_seed(seed, 0x10)),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_families(
        m: u64,
        k: usize,
        scheme: ViScheme,
        increments: Vec<u64>,
        count_width: u32,
        sum_width: u32,
        hashes: HashFamily,
        increment_hashes: HashFamily,
    ) -> Result<Self, FilterError> {
        let k = checked_k(k)?;
        if increments.len() < 2 {
            return Err(invalid("increments", "need at least two increment values"));
        }
        if increments[0] == 0 {
            return Err(invalid("increments", "increments must be positive"));
        }
        if increments.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("increments", "must be strictly increasing"));
        }
        if !(1..=16).contains(&sum_width) {
            return Err(invalid("sum_width", "sum width must be in 1..=16"));
        }
        let sum_max = (1u64 << sum_width) - 1;
        if *increments.last().unwrap() > sum_max {
            return Err(invalid("increments", "largest increment exceeds the sum cell"));
        }
        let (counts, count_max) = match scheme {
            ViScheme::Bh => {
                if !(1..=8).contains(&count_width) {
                    return Err(invalid("count_width", "count width must be in 1..=8"));
                }
                let len = checked_len("m", m, (count_width + sum_width) as u64)?;
                (
                    Some(CounterVector::new(len, count_width)),
                    (1u64 << count_width) - 1,
                )
            }
            ViScheme::Vi => {
                if count_width != 0 {
                    return Err(invalid(
                        "count_width",
                        "the sum-only layout has no occupancy counter; pass 0",
                    ));
                }
                checked_len("m", m, sum_width as u64)?;
                (None, 0)
            }
        };
        let len = m as usize;
        if (count_max + 1).saturating_mul(sum_max + 1) > 1 << 20 {
            return Err(invalid(
                "sum_width",
                "decomposition table for these widths would be too large",
            ));
        }
        let reachable_exact = exact_sum_table(&increments, count_max as usize, sum_max as usize);
        let reachable_any = any_sum_table(&increments, sum_max as usize);
        Ok(VariableIncrementFilter {
            hashes,
            increment_hashes,
            scheme,
            increments,
            counts,
            sums: CounterVector::new(len, sum_width),
            k,
            items: 0,
            reachable_exact,
            reachable_any,
        })
    }

    pub fn m(&self) -> u64 {
        self.sums.len() as u64
    }

    pub fn scheme(&self) -> ViScheme {
        self.scheme
    }

    /// The increment L-value the `i`-th probe assigns to `item`.
    fn increment_for(&self, item: &[u8], i: usize) -> u64 {
        let idx = self
            .increment_hashes
            .index_at(item, i, self.increments.len() as u64);
        self.increments[idx as usize]
    }

    /// Decide whether a cell with occupancy `count` and content `sum` could
    /// contain an element whose increment is `d`.
    ///
    /// Saturated cells (either field at its maximum) cannot be decomposed
    /// reliably and answer `true` conservatively.
    pub fn cell_admits(&self, count: u64, sum: u64, d: u64) -> bool {
        match self.scheme {
            ViScheme::Bh => {
                if count == 0 {
                    return false;
                }
                let counts = self.counts.as_ref().expect("count-and-sum layout");
                if count >= counts.max_value() || sum >= self.sums.max_value() {
                    return true;
                }
                if sum < d {
                    return false;
                }
                self.reachable_exact[(count - 1) as usize][(sum - d) as usize]
            }
            ViScheme::Vi => {
                if sum == 0 {
                    return false;
                }
                if sum >= self.sums.max_value() {
                    return true;
                }
                if sum < d {
                    return false;
                }
                self.reachable_any[(sum - d) as usize]
            }
        }
    }

    fn probe_admits(&self, item: &[u8], i: usize) -> bool {
        let pos = self.hashes.index_at(item, i, self.m()) as usize;
        let count = self.counts.as_ref().map_or(0, |c| c.get(pos));
        self.cell_admits(count, self.sums.get(pos), self.increment_for(item, i))
    }

    fn all_probes_admit(&self, item: &[u8]) -> bool {
        (0..self.k).all(|i| self.probe_admits(item, i))
    }

    /// Multiplicity upper bound of one probe cell.
    fn probe_bound(&self, item: &[u8], i: usize) -> u64 {
        let pos = self.hashes.index_at(item, i, self.m()) as usize;
        match &self.counts {
            Some(counts) => counts.get(pos),
            // without an occupancy counter the tightest safe bound is the
            // sum divided by the smallest increment
            None => self.sums.get(pos) / self.increments[0],
        }
    }
}

/// table[c][s]: exactly c values drawn from `increments` (with repetition)
/// can sum to s. Row 0 holds the empty sum.
fn exact_sum_table(increments: &[u64], count_max: usize, sum_max: usize) -> Vec<Vec<bool>> {
    let mut rows: Vec<Vec<bool>> = Vec::with_capacity(count_max + 1);
    let mut row = vec![false; sum_max + 1];
    row[0] = true; // zero values sum to zero
    rows.push(row);
    for c in 1..=count_max {
        let mut row = vec![false; sum_max + 1];
        for s in 0..=sum_max {
            if rows[c - 1][s] {
                for &v in increments {
                    let t = s + v as usize;
                    if t <= sum_max {
                        row[t] = true;
                    }
                }
            }
        }
        rows.push(row);
    }
    rows
}

/// table[s]: any multiset of values from `increments` (possibly empty) can
/// sum to s.
fn any_sum_table(increments: &[u64], sum_max: usize) -> Vec<bool> {
    let mut table = vec![false; sum_max + 1];
    table[0] = true;
    for s in 0..=sum_max {
        if table[s] {
            for &v in increments {
                let t = s + v as usize;
                if t <= sum_max {
                    table[t] = true;
                }
            }
        }
    }
    table
}

impl MembershipFilter for VariableIncrementFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        for i in 0..self.k {
            let pos = self.hashes.index_at(item, i, self.m()) as usize;
            let d = self.increment_for(item, i);
            if let Some(counts) = &mut self.counts {
                counts.inc(pos);
            }
            self.sums.add_saturating(pos, d);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if !self.all_probes_admit(item) {
            return QueryOutcome::absent().with_frequency(0);
        }
        let bound = (0..self.k)
            .map(|i| self.probe_bound(item, i))
            .min()
            .unwrap_or(0);
        QueryOutcome::present().with_frequency(bound.max(1))
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        if !self.all_probes_admit(item) {
            return Ok(RemovalOutcome::NotFound);
        }
        for i in 0..self.k {
            let pos = self.hashes.index_at(item, i, self.m()) as usize;
            let d = self.increment_for(item, i);
            if let Some(counts) = &mut self.counts {
                let _ = counts.dec(pos);
            }
            let _ = self.sums.sub_sticky(pos, d);
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        if !self.all_probes_admit(item) {
            return Ok(0);
        }
        Ok((0..self.k)
            .map(|i| self.probe_bound(item, i))
            .min()
            .unwrap_or(0)
            .max(1))
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::ViCbf {
                m: self.m(),
                k: self.k,
                scheme: self.scheme,
                increments: self.increments.clone(),
                count_width: self.counts.as_ref().map_or(0, |c| c.width()),
                sum_width: self.sums.width(),
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        let count_bits = self.counts.as_ref().map_or(0, |c| c.total_bits() as u64);
        count_bits + self.sums.total_bits() as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![self.items];
        if let Some(counts) = &self.counts {
            out.extend_from_slice(counts.words());
        }
        out.extend_from_slice(self.sums.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let mut offset = 1;
        let new_counts = match &self.counts {
            Some(counts) => {
                let n_words = counts.words().len();
                let image = r.take_slice("occupancy counters", n_words)?;
                check_bit_tail(image, counts.len() * counts.width() as usize, offset)?;
                offset += n_words;
                Some(CounterVector::from_words(
                    image.to_vec(),
                    counts.len(),
                    counts.width(),
                ))
            }
            None => None,
        };
        let n_words = self.sums.words().len();
        let image = r.take_slice("sum counters", n_words)?;
        check_bit_tail(image, self.sums.len() * self.sums.width() as usize, offset)?;
        r.finish()?;
        self.counts = new_counts;
        self.sums = CounterVector::from_words(image.to_vec(), self.sums.len(), self.sums.width());
        self.items = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn bh(m: u64, k: usize, seed: u64) -> VariableIncrementFilter {
        VariableIncrementFilter::new(m, k, ViScheme::Bh, vec![2, 3, 4, 5], 4, 8, seed).unwrap()
    }

    fn vi(m: u64, k: usize, seed: u64) -> VariableIncrementFilter {
        VariableIncrementFilter::new(m, k, ViScheme::Vi, vec![2, 3, 4, 5], 0, 8, seed).unwrap()
    }

    #[test]
    fn cell_decomposition_follows_the_worked_example() {
        let f = bh(64, 3, 1);
        // a cell holding two elements summing to 9: an element whose own
        // increment is 2 would need the remaining 7 to be a single increment,
        // which it is not, so the cell refutes it
        assert!(!f.cell_admits(2, 9, 2));
        // increments 4 and 5 leave 5 and 4 respectively: both valid
        assert!(f.cell_admits(2, 9, 4));
        assert!(f.cell_admits(2, 9, 5));
        // single-element cells demand an exact match
        assert!(f.cell_admits(1, 5, 5));
        assert!(!f.cell_admits(1, 5, 3));
        // empty cells admit nothing
        assert!(!f.cell_admits(0, 0, 2));
    }

    #[test]
    fn sum_only_cells_check_weaker_but_nonzero_structure() {
        let f = vi(64, 3, 1);
        assert!(!f.cell_admits(0, 0, 2)); // empty
        assert!(f.cell_admits(0, 5, 5)); // exactly this element
        assert!(f.cell_admits(0, 9, 2)); // 7 = 2+5 or 3+4: plausible
        assert!(!f.cell_admits(0, 3, 2)); // remainder 1 is not composable
        assert!(!f.cell_admits(0, 1, 2)); // sum below every increment
    }

    #[test]
    fn scripted_collision_is_rejected_where_plain_counting_accepts() {
        // x and y collide on every array position, but hash to different
        // increments; the sum check separates them.
        let positions: BTreeMap<Vec<u8>, Vec<u64>> =
            [(b"x".to_vec(), vec![5, 9, 13]), (b"y".to_vec(), vec![5, 9, 13])].into();
        let incs: BTreeMap<Vec<u8>, Vec<u64>> =
            [(b"x".to_vec(), vec![3, 3, 3]), (b"y".to_vec(), vec![0, 0, 0])].into();
        let f = VariableIncrementFilter::with_families(
            32,
            3,
            ViScheme::Bh,
            vec![2, 3, 4, 5],
            4,
            8,
            HashFamily::scripted(0, positions),
            HashFamily::scripted(0, incs),
        );
        let mut f = f.unwrap();
        f.insert(b"x").unwrap(); // every cell now holds (count 1, sum 5)
        assert!(f.query(b"x").is_present());
        // y addresses the same cells but carries increment 2: 5 != 2
        assert!(!f.query(b"y").is_present());
    }

    #[test]
    fn remove_undoes_insert_exactly() {
        for filter in [bh(128, 3, 9), vi(128, 3, 9)] {
            let mut f = filter;
            let empty = f.state_words().unwrap();
            f.insert(b"a").unwrap();
            f.insert(b"b").unwrap();
            assert_eq!(f.remove(b"b").unwrap(), RemovalOutcome::Removed);
            assert_eq!(f.remove(b"a").unwrap(), RemovalOutcome::Removed);
            assert_eq!(f.state_words().unwrap(), empty);
            assert_eq!(f.remove(b"a").unwrap(), RemovalOutcome::NotFound);
        }
    }

    #[test]
    fn parameters_are_validated() {
        let l = vec![2, 3, 4, 5];
        assert!(
            VariableIncrementFilter::new(64, 3, ViScheme::Bh, vec![5], 4, 8, 1).is_err(),
            "singleton increment set"
        );
        assert!(
            VariableIncrementFilter::new(64, 3, ViScheme::Bh, vec![3, 2], 4, 8, 1).is_err(),
            "unsorted increments"
        );
        assert!(
            VariableIncrementFilter::new(64, 3, ViScheme::Bh, vec![0, 2], 4, 8, 1).is_err(),
            "zero increment"
        );
        assert!(
            VariableIncrementFilter::new(64, 3, ViScheme::Vi, l.clone(), 4, 8, 1).is_err(),
            "sum-only layout must not declare a count width"
        );
        assert!(
            VariableIncrementFilter::new(64, 3, ViScheme::Bh, l.clone(), 0, 8, 1).is_err(),
            "count-and-sum layout needs a count width"
        );
        assert!(
            VariableIncrementFilter::new(64, 3, ViScheme::Bh, vec![2, 3, 300], 4, 8, 1).is_err(),
            "increment exceeding the sum cell"
        );
    }

    #[test]
    fn snapshot_roundtrip_both_layouts() {
        for mut f in [bh(256, 3, 5), vi(256, 3, 5)] {
            for i in 0..60 {
                f.insert(format!("item-{i}").as_bytes()).unwrap();
            }
            let words = f.state_words().unwrap();
            let mut g = match f.scheme() {
                ViScheme::Bh => bh(256, 3, 5),
                ViScheme::Vi => vi(256, 3, 5),
            };
            g.load_state(&words).unwrap();
            assert_eq!(g.state_words().unwrap(), words);
            for i in 0..60 {
                assert!(g.query(format!("item-{i}").as_bytes()).is_present());
            }
            assert!(g.load_state(&words[1..]).is_err());
        }
    }

    proptest! {
        #[test]
        fn no_false_negatives_and_counts_cover_truth(
            copies in proptest::collection::vec(1usize..5, 1..12),
            bh_layout in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let mut f = if bh_layout { bh(512, 3, seed) } else { vi(512, 3, seed) };
            for (i, &c) in copies.iter().enumerate() {
                for _ in 0..c {
                    f.insert(format!("it-{i}").as_bytes()).unwrap();
                }
            }
            for (i, &c) in copies.iter().enumerate() {
                let item = format!("it-{i}");
                prop_assert!(f.query(item.as_bytes()).is_present());
                let est = f.count_estimate(item.as_bytes()).unwrap();
                prop_assert!(est >= c as u64, "estimate {est} < truth {c}");
            }
        }
    }
}
