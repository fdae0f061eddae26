//! Membership for real-valued vectors: each probe quantizes every
//! component into `q` buckets over `[lo, hi]`, hashes the bucket string
//! with its own seed, and bumps one counter; a vector is present when all
//! `k` counters are nonzero. Vectors that agree after quantization are the
//! same element, so closeness finer than the bucket width is tolerated by
//! construction. Counters (rather than bits) make deletion and frequency
//! estimates possible.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::bits::CounterVector;
use crate::hash::{derive_seed, vector_hash_ranged};
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

/// Lanes `PROBE_LANE_BASE + i` seed the k independent vector hashes.
const PROBE_LANE_BASE: u64 = 0x4D00;

#[derive(Clone, Debug)]
pub struct HighDimensionalFilter {
    counters: CounterVector,
    k: usize,
    q: u32,
    lo: f64,
    hi: f64,
    seed: u64,
    probe_seeds: Vec<u64>,
    items: u64,
}

impl HighDimensionalFilter {
    /// `m` counters of `width` bits; components quantized into `q` buckets
    /// over `[lo, hi]`.
    pub fn new(
        m: u64,
        k: usize,
        width: u32,
        q: u32,
        lo: f64,
        hi: f64,
        seed: u64,
    ) -> Result<Self, FilterError> {
        let k = checked_k(k)?;
        if !(1..=32).contains(&width) {
            return Err(invalid("width", "counter width must be in 1..=32"));
        }
        let len = checked_len("m", m, u64::from(width))?;
        if q < 2 {
            return Err(invalid("q", "quantization needs at least two buckets"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("range", "component range must be finite and non-empty"));
        }
        Ok(HighDimensionalFilter {
            counters: CounterVector::new(len, width),
            k,
            q,
            lo,
            hi,
            seed,
            probe_seeds: (0..k)
                .map(|i| derive_seed(seed, PROBE_LANE_BASE + i as u64))
                .collect(),
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.counters.len() as u64
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn position(&self, v: &[f64], i: usize) -> Result<usize, FilterError> {
        let h = vector_hash_ranged(v, self.q, self.probe_seeds[i], self.lo, self.hi)?;
        Ok((h % self.m()) as usize)
    }

    pub fn insert_vector(&mut self, v: &[f64]) -> Result<(), FilterError> {
        for i in 0..self.k {
            let pos = self.position(v, i)?;
            self.counters.add_saturating(pos, 1);
        }
        self.items += 1;
        Ok(())
    }

    /// Present with the smallest counter as a frequency ceiling when all k
    /// counters are nonzero.
    pub fn query_vector(&self, v: &[f64]) -> Result<QueryOutcome, FilterError> {
        let mut low = u64::MAX;
        for i in 0..self.k {
            let c = self.counters.get(self.position(v, i)?);
            if c == 0 {
                return Ok(QueryOutcome::absent());
            }
            low = low.min(c);
        }
        Ok(QueryOutcome::present().with_frequency(low))
    }

    pub fn remove_vector(&mut self, v: &[f64]) -> Result<RemovalOutcome, FilterError> {
        if !self.query_vector(v)?.is_present() {
            return Ok(RemovalOutcome::NotFound);
        }
        for i in 0..self.k {
            let pos = self.position(v, i)?;
            self.counters.dec(pos);
        }
        self.items = self.items.saturating_sub(1);
        Ok(RemovalOutcome::Removed)
    }

    pub fn count_vector(&self, v: &[f64]) -> Result<u64, FilterError> {
        Ok(match self.query_vector(v)? {
            o if o.is_present() => o.frequency.unwrap_or(0),
            _ => 0,
        })
    }

    /// Byte-oriented adapter: each byte becomes a component, linearly
    /// mapped from 0..=255 onto `[lo, hi]`.
    fn bytes_to_vector(&self, item: &[u8]) -> Vec<f64> {
        item.iter()
            .map(|&b| self.lo + (b as f64 / 255.0) * (self.hi - self.lo))
            .collect()
    }
}

impl MembershipFilter for HighDimensionalFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        let v = self.bytes_to_vector(item);
        self.insert_vector(&v)
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        let v = self.bytes_to_vector(item);
        self.query_vector(&v).unwrap_or_else(|_| QueryOutcome::absent())
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        let v = self.bytes_to_vector(item);
        self.remove_vector(&v)
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        let v = self.bytes_to_vector(item);
        self.count_vector(&v)
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Hdbf {
                m: self.m(),
                k: self.k,
                width: self.counters.width(),
                q: self.q,
                lo: self.lo,
                hi: self.hi,
            },
            self.seed,
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.counters.len() as u64 * self.counters.width() as u64
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut words = vec![self.items];
        words.extend_from_slice(self.counters.words());
        Ok(words)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("items")?;
        let body = r.take_slice("counters", self.counters.words().len())?;
        check_bit_tail(body, self.counters.len() * self.counters.width() as usize, 1)?;
        r.finish()?;
        self.counters =
            CounterVector::from_words(body.to_vec(), self.counters.len(), self.counters.width());
        self.items = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn repeated_vector_reports_its_frequency() {
        let mut f = HighDimensionalFilter::new(4096, 4, 8, 256, 0.0, 1.0, 3).unwrap();
        let v = [0.1, 0.5, 0.9];
        for _ in 0..3 {
            f.insert_vector(&v).unwrap();
        }
        let outcome = f.query_vector(&v).unwrap();
        assert!(outcome.is_present());
        assert_eq!(outcome.frequency, Some(3));
        assert!(!f.query_vector(&[0.2, 0.4, 0.6]).unwrap().is_present());
    }

    #[test]
    fn vectors_agreeing_after_quantization_are_one_element() {
        let mut f = HighDimensionalFilter::new(1024, 3, 8, 10, 0.0, 1.0, 5).unwrap();
        f.insert_vector(&[0.11]).unwrap();
        assert!(
            f.query_vector(&[0.19]).unwrap().is_present(),
            "0.11 and 0.19 share bucket 1 of 10"
        );
        assert!(
            !f.query_vector(&[0.05]).unwrap().is_present(),
            "0.05 sits in bucket 0"
        );
    }

    #[test]
    fn removal_steps_the_count_down_to_absence() {
        let mut f = HighDimensionalFilter::new(2048, 4, 8, 64, 0.0, 1.0, 7).unwrap();
        let v = [0.3, 0.7];
        f.insert_vector(&v).unwrap();
        f.insert_vector(&v).unwrap();
        assert_eq!(f.remove_vector(&v).unwrap(), RemovalOutcome::Removed);
        assert_eq!(f.count_vector(&v).unwrap(), 1);
        assert_eq!(f.remove_vector(&v).unwrap(), RemovalOutcome::Removed);
        assert!(!f.query_vector(&v).unwrap().is_present());
        assert_eq!(f.remove_vector(&v).unwrap(), RemovalOutcome::NotFound);
    }

    #[test]
    fn byte_adapter_round_trips_through_the_component_range() {
        let mut f = HighDimensionalFilter::new(4096, 4, 8, 256, -1.0, 1.0, 9).unwrap();
        for i in 0..40u32 {
            f.insert(format!("vec-{i}").as_bytes()).unwrap();
        }
        for i in 0..40u32 {
            assert!(f.query(format!("vec-{i}").as_bytes()).is_present());
        }
        assert!(!f.query(b"stranger").is_present());
        assert_eq!(f.count_estimate(b"vec-0").unwrap(), 1);
        assert_eq!(f.remove(b"vec-0").unwrap(), RemovalOutcome::Removed);
        assert!(!f.query(b"vec-0").is_present());
        assert_eq!(f.tracked_items(), 39);
    }

    #[test]
    fn non_finite_components_are_rejected() {
        let mut f = HighDimensionalFilter::new(256, 2, 4, 16, 0.0, 1.0, 1).unwrap();
        assert!(f.insert_vector(&[f64::NAN]).is_err());
        assert!(f.query_vector(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn snapshot_round_trips_and_rejects_damage() {
        // 100 counters x 5 bits = 500 bits: the top word has tail room
        let mut f = HighDimensionalFilter::new(100, 3, 5, 32, 0.0, 1.0, 11).unwrap();
        for i in 0..10u32 {
            f.insert(format!("h-{i}").as_bytes()).unwrap();
        }
        let words = f.state_words().unwrap();
        let mut copy = HighDimensionalFilter::new(100, 3, 5, 32, 0.0, 1.0, 11).unwrap();
        copy.load_state(&words).unwrap();
        for i in 0..10u32 {
            assert!(copy.query(format!("h-{i}").as_bytes()).is_present());
        }
        assert_eq!(copy.tracked_items(), 10);

        let mut short = words.clone();
        short.pop();
        assert!(copy.load_state(&short).is_err());

        let mut tail = words.clone();
        let last = tail.len() - 1;
        tail[last] |= 1 << 63;
        assert!(copy.load_state(&tail).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HighDimensionalFilter::new(0, 3, 8, 16, 0.0, 1.0, 0).is_err());
        assert!(HighDimensionalFilter::new(64, 0, 8, 16, 0.0, 1.0, 0).is_err());
        assert!(HighDimensionalFilter::new(64, 3, 0, 16, 0.0, 1.0, 0).is_err());
        assert!(HighDimensionalFilter::new(64, 3, 33, 16, 0.0, 1.0, 0).is_err());
        assert!(HighDimensionalFilter::new(64, 3, 8, 1, 0.0, 1.0, 0).is_err());
        assert!(HighDimensionalFilter::new(64, 3, 8, 16, 1.0, 1.0, 0).is_err());
        assert!(HighDimensionalFilter::new(64, 3, 8, 16, f64::NAN, 1.0, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn inserted_vectors_are_never_missed(
            vectors in proptest::collection::vec(
                proptest::collection::vec(0.0f64..1.0, 1..6),
                1..30,
            ),
            seed in any::<u64>(),
        ) {
            let mut f = HighDimensionalFilter::new(4096, 4, 8, 64, 0.0, 1.0, seed).unwrap();
            for v in &vectors {
                f.insert_vector(v).unwrap();
            }
            for v in &vectors {
                prop_assert!(f.query_vector(v).unwrap().is_present());
            }
        }
    }
}
