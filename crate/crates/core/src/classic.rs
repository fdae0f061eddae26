//! The foundational variants: the plain bit-array filter, its counter-cell
//! extension supporting deletion, the frequency-estimating spectral form,
//! and the adaptive form that spends extra probe bits on repeated items.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::bits::{BitVector, CounterVector};
use crate::hash::HashFamily;
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

/// Classic k-hash bit-array membership filter.
///
/// Supports insertion and membership queries only; positives may be false,
/// negatives never are.
#[derive(Clone, Debug)]
pub struct StandardBloomFilter {
    hashes: HashFamily,
    bits: BitVector,
    k: usize,
    items: u64,
}

impl StandardBloomFilter {
    pub fn new(m: u64, k: usize, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(m, k, HashFamily::seeded(seed))
    }

    /// Construct with an explicit hash family (scripted families pin exact
    /// probe positions in tests).
    pub fn with_family(m: u64, k: usize, hashes: HashFamily) -> Result<Self, FilterError> {
        let len = checked_len("m", m, 1)?;
        let k = checked_k(k)?;
        Ok(StandardBloomFilter {
            hashes,
            bits: BitVector::new(len),
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

    /// Number of set bits (the occupancy that drives the false-positive rate).
    pub fn set_bits(&self) -> usize {
        self.bits.popcount()
    }

    pub(crate) fn bit_vector(&self) -> &BitVector {
        &self.bits
    }

    pub(crate) fn bit_vector_mut(&mut self) -> &mut BitVector {
        &mut self.bits
    }

    pub(crate) fn family(&self) -> &HashFamily {
        &self.hashes
    }

    pub(crate) fn probe_positions(&self, item: &[u8]) -> Vec<u64> {
        self.hashes.indices(item, self.k, self.m())
    }

    pub(crate) fn force_items(&mut self, items: u64) {
        self.items = items;
    }
}

impl MembershipFilter for StandardBloomFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        for i in self.probe_positions(item) {
            self.bits.set(i as usize);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let m = self.m();
        for i in 0..self.k {
            if !self.bits.get(self.hashes.index_at(item, i, m) as usize) {
                return QueryOutcome::absent();
            }
        }
        QueryOutcome::present()
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Standard {
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
        self.m()
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = Vec::with_capacity(1 + self.bits.words().len());
        out.push(self.items);
        out.extend_from_slice(self.bits.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_words = self.bits.words().len();
        let image = r.take_slice("bit array", n_words)?;
        check_bit_tail(image, self.bits.len(), 1)?;
        r.finish()?;
        self.bits = BitVector::from_words(image.to_vec(), self.bits.len());
        self.items = items;
        Ok(())
    }
}

/// Counter-cell filter: each of the k positions addresses a 4-bit sticky
/// counter, so previously inserted items can be removed again.
///
/// Counters saturate at 15 and, once saturated, never move again (neither up
/// nor down); this trades residual overcounting for the guarantee that
/// deletions cannot introduce false negatives.
#[derive(Clone, Debug)]
pub struct CountingBloomFilter {
    hashes: HashFamily,
    cells: CounterVector,
    k: usize,
    items: u64,
}

/// Counter width of the counting filter's cells.
pub const COUNTING_WIDTH: u32 = 4;

impl CountingBloomFilter {
    pub fn new(m: u64, k: usize, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(m, k, HashFamily::seeded(seed))
    }

    pub fn with_family(m: u64, k: usize, hashes: HashFamily) -> Result<Self, FilterError> {
        let len = checked_len("m", m, COUNTING_WIDTH as u64)?;
        let k = checked_k(k)?;
        Ok(CountingBloomFilter {
            hashes,
            cells: CounterVector::new(len, COUNTING_WIDTH),
            k,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.cells.len() as u64
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The k counter values addressed by `item`.
    pub fn cell_values(&self, item: &[u8]) -> Vec<u64> {
        self.hashes
            .indices(item, self.k, self.m())
            .into_iter()
            .map(|i| self.cells.get(i as usize))
            .collect()
    }

    pub(crate) fn counters(&self) -> &CounterVector {
        &self.cells
    }

    /// Folds another filter with identical geometry and hash family into
    /// this one by cell-wise saturating addition.
    pub(crate) fn absorb(&mut self, other: &CountingBloomFilter) {
        assert_eq!(self.k, other.k, "hash count mismatch");
        assert_eq!(
            self.hashes.seed(),
            other.hashes.seed(),
            "hash family mismatch"
        );
        self.cells.add_assign_saturating(&other.cells);
        self.items += other.items;
    }

    fn min_cell(&self, item: &[u8]) -> u64 {
        let m = self.m();
        (0..self.k)
            .map(|i| self.cells.get(self.hashes.index_at(item, i, m) as usize))
            .min()
            .unwrap_or(0)
    }
}

impl MembershipFilter for CountingBloomFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        for i in self.hashes.indices(item, self.k, self.m()) {
            self.cells.inc(i as usize);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let min = self.min_cell(item);
        if min == 0 {
            QueryOutcome::absent().with_frequency(0)
        } else {
            QueryOutcome::present().with_frequency(min)
        }
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        if self.min_cell(item) == 0 {
            return Ok(RemovalOutcome::NotFound);
        }
        for i in self.hashes.indices(item, self.k, self.m()) {
            // Sticky cells refuse to move; that is the saturation contract.
            let _ = self.cells.dec(i as usize);
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        Ok(self.min_cell(item))
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Counting {
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
        self.cells.total_bits() as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = Vec::with_capacity(1 + self.cells.words().len());
        out.push(self.items);
        out.extend_from_slice(self.cells.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_words = self.cells.words().len();
        let image = r.take_slice("counter array", n_words)?;
        check_bit_tail(image, self.cells.len() * COUNTING_WIDTH as usize, 1)?;
        r.finish()?;
        self.cells = CounterVector::from_words(image.to_vec(), self.cells.len(), COUNTING_WIDTH);
        self.items = items;
        Ok(())
    }
}

/// Frequency-estimating filter over wider counters.
///
/// In the default mode every probe position is incremented per insertion and
/// the multiplicity estimate is the minimum cell. With `minimum_increase`
/// enabled, an insertion only increments the cells currently holding that
/// minimum, which tightens estimates under skewed workloads at the price of
/// giving up deletions.
#[derive(Clone, Debug)]
pub struct SpectralBloomFilter {
    hashes: HashFamily,
    cells: CounterVector,
    k: usize,
    minimum_increase: bool,
    items: u64,
}

impl SpectralBloomFilter {
    pub fn new(
        m: u64,
        k: usize,
        width: u32,
        minimum_increase: bool,
        seed: u64,
    ) -> Result<Self, FilterError> {
        Self::with_family(m, k, width, minimum_increase, HashFamily::seeded(seed))
    }

    pub fn with_family(
        m: u64,
        k: usize,
        width: u32,
        minimum_increase: bool,
        hashes: HashFamily,
    ) -> Result<Self, FilterError> {
        if !(1..=32).contains(&width) {
            return Err(invalid("width", "counter width must be in 1..=32"));
        }
        let len = checked_len("m", m, width as u64)?;
        let k = checked_k(k)?;
        Ok(SpectralBloomFilter {
            hashes,
            cells: CounterVector::new(len, width),
            k,
            minimum_increase,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.cells.len() as u64
    }

    pub fn minimum_increase(&self) -> bool {
        self.minimum_increase
    }

    fn min_cell(&self, item: &[u8]) -> u64 {
        let m = self.m();
        (0..self.k)
            .map(|i| self.cells.get(self.hashes.index_at(item, i, m) as usize))
            .min()
            .unwrap_or(0)
    }
}

impl MembershipFilter for SpectralBloomFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let positions = self.hashes.indices(item, self.k, self.m());
        if self.minimum_increase {
            let min = positions
                .iter()
                .map(|&i| self.cells.get(i as usize))
                .min()
                .unwrap_or(0);
            for &i in &positions {
                if self.cells.get(i as usize) == min {
                    self.cells.inc(i as usize);
                }
            }
        } else {
            for &i in &positions {
                self.cells.inc(i as usize);
            }
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let min = self.min_cell(item);
        if min == 0 {
            QueryOutcome::absent().with_frequency(0)
        } else {
            QueryOutcome::present().with_frequency(min)
        }
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        if self.minimum_increase {
            // The increments that recorded an item cannot be identified
            // afterwards, so removal would corrupt other items' estimates.
            return Err(FilterError::CapabilityUnsupported(
                "deletion under minimum-increase",
            ));
        }
        if self.min_cell(item) == 0 {
            return Ok(RemovalOutcome::NotFound);
        }
        for i in self.hashes.indices(item, self.k, self.m()) {
            let _ = self.cells.dec(i as usize);
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        Ok(self.min_cell(item))
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Spectral {
                m: self.m(),
                k: self.k,
                width: self.cells.width(),
                minimum_increase: self.minimum_increase,
            },
            self.hashes.seed(),
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.cells.total_bits() as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = Vec::with_capacity(1 + self.cells.words().len());
        out.push(self.items);
        out.extend_from_slice(self.cells.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_words = self.cells.words().len();
        let image = r.take_slice("counter array", n_words)?;
        check_bit_tail(image, self.cells.len() * self.cells.width() as usize, 1)?;
        r.finish()?;
        self.cells =
            CounterVector::from_words(image.to_vec(), self.cells.len(), self.cells.width());
        self.items = items;
        Ok(())
    }
}

/// Bit-array filter that grows per-item precision on repeated insertions.
///
/// The first k probe positions work exactly like the classic filter. Each
/// insertion additionally sets the first clear bit among up to `n_max`
/// follow-on positions, so an item's repetition count can be read back as
/// the run of consecutive set follow-on bits.
#[derive(Clone, Debug)]
pub struct AdaptiveBloomFilter {
    hashes: HashFamily,
    bits: BitVector,
    k: usize,
    n_max: u64,
    items: u64,
}

impl AdaptiveBloomFilter {
    pub fn new(m: u64, k: usize, n_max: u64, seed: u64) -> Result<Self, FilterError> {
        Self::with_family(m, k, n_max, HashFamily::seeded(seed))
    }

    pub fn with_family(
        m: u64,
        k: usize,
        n_max: u64,
        hashes: HashFamily,
    ) -> Result<Self, FilterError> {
        let len = checked_len("m", m, 1)?;
        let k = checked_k(k)?;
        if n_max == 0 {
            return Err(invalid("n_max", "need at least one follow-on position"));
        }
        checked_k(k + n_max as usize)?; // keep the combined probe range sane
        Ok(AdaptiveBloomFilter {
            hashes,
            bits: BitVector::new(len),
            k,
            n_max,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.bits.len() as u64
    }

    fn base_present(&self, item: &[u8]) -> bool {
        let m = self.m();
        (0..self.k).all(|i| self.bits.get(self.hashes.index_at(item, i, m) as usize))
    }

    /// Run length of set follow-on bits: the repetition estimate.
    fn extra_run(&self, item: &[u8]) -> u64 {
        let m = self.m();
        let mut run = 0;
        for i in self.k..self.k + self.n_max as usize {
            if self.bits.get(self.hashes.index_at(item, i, m) as usize) {
                run += 1;
            } else {
                break;
            }
        }
        run
    }
}

impl MembershipFilter for AdaptiveBloomFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let m = self.m();
        for i in 0..self.k {
            self.bits.set(self.hashes.index_at(item, i, m) as usize);
        }
        for i in self.k..self.k + self.n_max as usize {
            let pos = self.hashes.index_at(item, i, m) as usize;
            if !self.bits.get(pos) {
                self.bits.set(pos);
                break;
            }
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if self.base_present(item) {
            QueryOutcome::present()
        } else {
            QueryOutcome::absent()
        }
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        if !self.base_present(item) {
            return Ok(0);
        }
        Ok(self.extra_run(item).max(1))
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Adaptive {
                m: self.m(),
                k: self.k,
                n_max: self.n_max,
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

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = Vec::with_capacity(1 + self.bits.words().len());
        out.push(self.items);
        out.extend_from_slice(self.bits.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_words = self.bits.words().len();
        let image = r.take_slice("bit array", n_words)?;
        check_bit_tail(image, self.bits.len(), 1)?;
        r.finish()?;
        self.bits = BitVector::from_words(image.to_vec(), self.bits.len());
        self.items = items;
        Ok(())
    }
}
