//! One shared bit array serving several item classes, each class probing
//! with its own hash family and its own number of hash functions. Classes
//! that can tolerate more false positives get fewer probes, freeing bit
//! density for the classes that cannot — the per-class rates then follow
//! from the blended fill produced by all classes together.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::{derive_seed, HashFamily};
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

#[derive(Clone, Debug)]
pub struct MultiClassFilter {
    /// Used only to route an unclassified item to a class.
    selector: HashFamily,
    /// One independent family per class, all indexing the shared array.
    families: Vec<HashFamily>,
    class_ks: Vec<usize>,
    class_counts: Vec<u64>,
    bits: BitVector,
    seed: u64,
    items: u64,
}

impl MultiClassFilter {
    pub fn new(m: u64, class_ks: &[usize], seed: u64) -> Result<Self, FilterError> {
        let len = checked_len("m", m, 1)?;
        if class_ks.is_empty() {
            return Err(invalid("class_ks", "need at least one class"));
        }
        if class_ks.len() > 256 {
            return Err(invalid("class_ks", "more than 256 classes is not supported"));
        }
        for (c, &k) in class_ks.iter().enumerate() {
            checked_k(k).map_err(|_| {
                invalid("class_ks", "every class needs between 1 and 1024 hashes")
            })?;
            debug_assert!(c < 256);
        }
        let families = (0..class_ks.len())
            .map(|c| HashFamily::seeded(derive_seed(seed, c as u64)))
            .collect();
        Ok(MultiClassFilter {
            selector: HashFamily::seeded(seed),
            families,
            class_ks: class_ks.to_vec(),
            class_counts: vec![0; class_ks.len()],
            bits: BitVector::new(len),
            seed,
            items: 0,
        })
    }

    pub fn m(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn classes(&self) -> usize {
        self.class_ks.len()
    }

    pub fn class_ks(&self) -> &[usize] {
        &self.class_ks
    }

    /// Items inserted so far into each class.
    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    /// The class an unclassified item is routed to.
    pub fn class_of(&self, item: &[u8]) -> usize {
        (self.selector.base(item) % self.classes() as u64) as usize
    }

    fn check_class(&self, class: usize) -> Result<(), FilterError> {
        if class >= self.classes() {
            return Err(invalid("class", "class index out of range"));
        }
        Ok(())
    }

    pub fn insert_class(&mut self, item: &[u8], class: usize) -> Result<(), FilterError> {
        self.check_class(class)?;
        let m = self.m();
        for i in 0..self.class_ks[class] {
            let pos = self.families[class].index_at(item, i, m) as usize;
            self.bits.set(pos);
        }
        self.class_counts[class] += 1;
        self.items += 1;
        Ok(())
    }

    pub fn query_class(&self, item: &[u8], class: usize) -> Result<QueryOutcome, FilterError> {
        self.check_class(class)?;
        let m = self.m();
        for i in 0..self.class_ks[class] {
            if !self.bits.get(self.families[class].index_at(item, i, m) as usize) {
                return Ok(QueryOutcome::absent());
            }
        }
        Ok(QueryOutcome::present())
    }
}

impl MembershipFilter for MultiClassFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        self.insert_class(item, self.class_of(item))
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        self.query_class(item, self.class_of(item))
            .expect("derived class is always in range")
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::MultiClass {
                m: self.m(),
                class_ks: self.class_ks.clone(),
            },
            self.seed,
        )
    }

    fn tracked_items(&self) -> u64 {
        self.items
    }

    fn allocated_bits(&self) -> u64 {
        self.m()
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![self.items];
        out.extend_from_slice(&self.class_counts);
        out.extend_from_slice(self.bits.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let counts = r.take_slice("class counts", self.classes())?.to_vec();
        if counts.iter().copied().sum::<u64>() != items {
            return Err(r.bad("class counts must sum to the item count"));
        }
        let n_words = self.bits.len().div_ceil(64);
        let offset = 1 + self.classes();
        let image = r.take_slice("bit array", n_words)?;
        check_bit_tail(image, self.bits.len(), offset)?;
        r.finish()?;
        self.bits = BitVector::from_words(image.to_vec(), self.bits.len());
        self.class_counts = counts;
        self.items = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn classes_probe_with_independent_families() {
        let f = MultiClassFilter::new(1024, &[3, 5], 7).unwrap();
        let a: Vec<u64> = f.families[0].indices(b"item", 3, 1024);
        let b: Vec<u64> = f.families[1].indices(b"item", 3, 1024);
        assert_ne!(a, b, "two classes should not share probe positions");
    }

    #[test]
    fn per_class_membership_and_counts() {
        let mut f = MultiClassFilter::new(4096, &[4, 2, 6], 3).unwrap();
        for i in 0..30 {
            f.insert_class(format!("alpha-{i}").as_bytes(), 0).unwrap();
        }
        for i in 0..10 {
            f.insert_class(format!("beta-{i}").as_bytes(), 1).unwrap();
        }
        assert_eq!(f.class_counts(), &[30, 10, 0]);
        assert_eq!(f.tracked_items(), 40);
        for i in 0..30 {
            assert!(f
                .query_class(format!("alpha-{i}").as_bytes(), 0)
                .unwrap()
                .is_present());
        }
        // an item inserted under class 0 is unknown to class 2's family
        let cross = (0..30)
            .filter(|i| {
                f.query_class(format!("alpha-{i}").as_bytes(), 2)
                    .unwrap()
                    .is_present()
            })
            .count();
        assert!(cross < 5, "cross-class hits should be rare, saw {cross}");
        assert!(f.query_class(b"x", 9).is_err());
    }

    #[test]
    fn trait_insert_routes_by_the_selector_hash() {
        let mut f = MultiClassFilter::new(2048, &[3, 3, 3, 3], 11).unwrap();
        let mut seen = vec![0u64; 4];
        for i in 0..200 {
            let item = format!("item-{i}");
            let c = f.class_of(item.as_bytes());
            f.insert(item.as_bytes()).unwrap();
            seen[c] += 1;
        }
        assert_eq!(f.class_counts(), seen.as_slice());
        // every class should receive a share of 200 uniform items
        assert!(seen.iter().all(|&n| n > 20), "skewed routing: {seen:?}");
        for i in 0..200 {
            assert!(f.query(format!("item-{i}").as_bytes()).is_present());
        }
    }

    #[test]
    fn rejects_degenerate_class_lists() {
        assert!(MultiClassFilter::new(64, &[], 0).is_err());
        assert!(MultiClassFilter::new(64, &[0], 0).is_err());
        assert!(MultiClassFilter::new(0, &[3], 0).is_err());
    }

    #[test]
    fn snapshot_roundtrip_and_damage_rejection() {
        let mut f = MultiClassFilter::new(512, &[2, 4], 5).unwrap();
        for i in 0..40 {
            f.insert(format!("item-{i}").as_bytes()).unwrap();
        }
        let words = f.state_words().unwrap();
        let mut g = MultiClassFilter::new(512, &[2, 4], 5).unwrap();
        g.load_state(&words).unwrap();
        assert_eq!(g.state_words().unwrap(), words);
        assert_eq!(g.class_counts(), f.class_counts());
        // class counts that disagree with the item total
        let mut bad = words.clone();
        bad[1] += 1;
        assert!(g.load_state(&bad).is_err());
        assert!(g.load_state(&words[..words.len() - 1]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn no_false_negatives_within_a_class(
            ids in proptest::collection::vec((0u16..400, 0usize..3), 1..60),
            seed in any::<u64>(),
        ) {
            let mut f = MultiClassFilter::new(2048, &[3, 1, 5], seed).unwrap();
            for &(id, class) in &ids {
                f.insert_class(format!("item-{id}").as_bytes(), class).unwrap();
            }
            for &(id, class) in &ids {
                let item = format!("item-{id}");
                prop_assert!(f.query_class(item.as_bytes(), class).unwrap().is_present());
            }
        }
    }
}
