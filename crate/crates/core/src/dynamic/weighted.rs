//! Per-item probe budgets driven by query weight: elements expected to be
//! queried often get more hash functions (fewer false positives when they
//! are absent, more bits when present), rare ones get fewer. The budget is
//! `n * k_avg` probes in total, `k_avg` being the classic optimum for the
//! bit array and population size; each extra probe goes to whichever item
//! currently buys the largest weighted drop in false-positive mass. Items
//! never seen by the allocator fall back to `k_avg` probes, so a uniform
//! weight profile collapses to an ordinary filter.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::HashFamily;
use crate::support::{checked_k, checked_len, invalid};

/// Probe gain as a heap key: plain f64 ordered totally (never NaN here).
#[derive(Clone, Copy, Debug, PartialEq)]
struct Gain(f64);

impl Eq for Gain {}

impl PartialOrd for Gain {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gain {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The classic probe-count optimum for `m` bits and `n` items, clamped to
/// `1..=k_max`.
pub fn balanced_probe_count(m: u64, n: u64, k_max: usize) -> usize {
    let ideal = (std::f64::consts::LN_2 * m as f64 / n as f64).round() as i64;
    ideal.clamp(1, k_max as i64) as usize
}

#[derive(Clone, Debug)]
pub struct WeightedFilter {
    hashes: HashFamily,
    bits: BitVector,
    /// Probe count per allocator-known item.
    probe_counts: BTreeMap<Vec<u8>, usize>,
    k_avg: usize,
    k_max: usize,
    items: u64,
}

impl WeightedFilter {
    /// Plans probe counts for `entries` (item, query weight) over an
    /// `m`-bit array. Weights must be positive and finite; items must be
    /// distinct. Nothing is inserted yet.
    pub fn build<I>(m: u64, k_max: usize, seed: u64, entries: &[(I, f64)]) -> Result<Self, FilterError>
    where
        I: AsRef<[u8]>,
    {
        let len = checked_len("m", m, 1)?;
        let k_max = checked_k(k_max)?;
        if entries.is_empty() {
            return Err(invalid("entries", "the allocator needs at least one item"));
        }
        for (_, w) in entries {
            if !w.is_finite() || *w <= 0.0 {
                return Err(invalid("entries", "weights must be positive and finite"));
            }
        }
        let n = entries.len();
        let k_avg = balanced_probe_count(m, n as u64, k_max);

        // everyone starts at one probe; spend the rest greedily on the
        // largest weighted marginal gain (one more probe roughly halves an
        // absent item's false-positive chance at optimal fill)
        let mut counts = vec![1usize; n];
        let mut remaining = n * (k_avg - 1);
        let mut heap: BinaryHeap<(Gain, Reverse<usize>)> = entries
            .iter()
            .enumerate()
            .map(|(i, (_, w))| (Gain(w * 0.25), Reverse(i)))
            .collect();
        while remaining > 0 {
            let Some((_, Reverse(i))) = heap.pop() else {
                break; // every item is already at k_max
            };
            if counts[i] >= k_max {
                continue;
            }
            counts[i] += 1;
            remaining -= 1;
            if counts[i] < k_max {
                let next_gain = entries[i].1 * 0.5f64.powi(counts[i] as i32 + 1);
                heap.push((Gain(next_gain), Reverse(i)));
            }
        }

        let mut probe_counts = BTreeMap::new();
        for ((item, _), k_i) in entries.iter().zip(counts) {
            if probe_counts.insert(item.as_ref().to_vec(), k_i).is_some() {
                return Err(invalid("entries", "items must be distinct"));
            }
        }
        Ok(WeightedFilter {
            hashes: HashFamily::seeded(seed),
            bits: BitVector::new(len),
            probe_counts,
            k_avg,
            k_max,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn k_avg(&self) -> usize {
        self.k_avg
    }

    /// Probes assigned to `item`: its planned count, or `k_avg` for items
    /// the allocator never saw.
    pub fn probes_for(&self, item: &[u8]) -> usize {
        self.probe_counts.get(item).copied().unwrap_or(self.k_avg)
    }

    pub fn planned_total(&self) -> usize {
        self.probe_counts.values().sum()
    }

    #[cfg(test)]
    pub(crate) fn bit_words(&self) -> &[u64] {
        self.bits.words()
    }
}

impl MembershipFilter for WeightedFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let k_i = self.probes_for(item);
        let m = self.m();
        for i in 0..k_i {
            let pos = self.hashes.index_at(item, i, m) as usize;
            self.bits.set(pos);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let k_i = self.probes_for(item);
        let m = self.m();
        for i in 0..k_i {
            if !self.bits.get(self.hashes.index_at(item, i, m) as usize) {
                return QueryOutcome::absent();
            }
        }
        QueryOutcome::present()
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Weighted {
                m: self.m(),
                k_avg: self.k_avg,
                k_max: self.k_max,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.m()
    }
}
