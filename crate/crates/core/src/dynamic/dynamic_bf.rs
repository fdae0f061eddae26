//! Growable membership under an unknown final cardinality: a chain of
//! identically-parameterized counting filters, each admitting at most
//! `capacity` items. Inserts land in the newest link, a fresh link being
//! opened whenever the newest one is full; queries consult every link.
//! Removal must find exactly one link holding the item — zero links is a
//! miss, and two or more make the owner ambiguous, so the removal aborts
//! rather than corrupt a bystander. Because all links share one hash
//! family, underfilled links can later be folded together cell-wise.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, RemovalOutcome, VariantParams,
};
use crate::classic::CountingBloomFilter;
use crate::support::{invalid, WordReader};

#[derive(Clone, Debug)]
pub struct DynamicFilter {
    links: Vec<CountingBloomFilter>,
    m: u64,
    k: usize,
    capacity: u64,
    seed: u64,
}

impl DynamicFilter {
    pub fn new(m: u64, k: usize, capacity: u64, seed: u64) -> Result<Self, FilterError> {
        if capacity == 0 {
            return Err(invalid("capacity", "each link must admit at least one item"));
        }
        let first = CountingBloomFilter::new(m, k, seed)?;
        Ok(DynamicFilter {
            links: vec![first],
            m,
            k,
            capacity,
            seed,
        })
    }

    pub fn links(&self) -> usize {
        self.links.len()
    }

    pub fn link_items(&self) -> Vec<u64> {
        self.links.iter().map(|l| l.tracked_items()).collect()
    }

    /// Folds together the two least-loaded links while their combined load
    /// fits one link's capacity; returns how many merges happened.
    pub fn consolidate(&mut self) -> usize {
        let mut merges = 0;
        loop {
            if self.links.len() < 2 {
                return merges;
            }
            // the two smallest loads, by index
            let mut order: Vec<usize> = (0..self.links.len()).collect();
            order.sort_by_key(|&i| (self.links[i].tracked_items(), i));
            let (a, b) = (order[0].min(order[1]), order[0].max(order[1]));
            if self.links[a].tracked_items() + self.links[b].tracked_items() > self.capacity {
                return merges;
            }
            let absorbed = self.links.remove(b);
            self.links[a].absorb(&absorbed);
            merges += 1;
        }
    }

    fn active_is_full(&self) -> bool {
        self.links
            .last()
            .map_or(true, |l| l.tracked_items() >= self.capacity)
    }
}

impl MembershipFilter for DynamicFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        if self.active_is_full() {
            self.links
                .push(CountingBloomFilter::new(self.m, self.k, self.seed)?);
        }
        self.links
            .last_mut()
            .expect("at least one link always exists")
            .insert(item)
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if self.links.iter().any(|l| l.query(item).is_present()) {
            QueryOutcome::present()
        } else {
            QueryOutcome::absent()
        }
    }

    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        let holders: Vec<usize> = self
            .links
            .iter()
            .enumerate()
            .filter(|(_, l)| l.query(item).is_present())
            .map(|(i, _)| i)
            .collect();
        match holders.len() {
            0 => Ok(RemovalOutcome::NotFound),
            1 => self.links[holders[0]].remove(item),
            _ => Ok(RemovalOutcome::Aborted),
        }
    }

    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        let mut total = 0u64;
        for link in &self.links {
            total += link.count_estimate(item)?;
        }
        Ok(total)
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Dynamic {
                m: self.m,
                k: self.k,
                capacity: self.capacity,
            },
            self.seed,
        )
    }

    fn tracked_items(&self) -> u64 {
        self.links.iter().map(|l| l.tracked_items()).sum()
    }

    fn allocated_bits(&self) -> u64 {
        self.links.iter().map(|l| l.allocated_bits()).sum()
    }

    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        let mut out = vec![self.links.len() as u64];
        for link in &self.links {
            let words = link.state_words()?;
            out.push(words.len() as u64);
            out.extend(words);
        }
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let n_links = r.take("link count")?;
        if n_links == 0 {
            return Err(r.bad("at least one link is required"));
        }
        if n_links > 1 << 20 {
            return Err(r.bad("implausible link count"));
        }
        let mut links = Vec::with_capacity(n_links as usize);
        for _ in 0..n_links {
            let len = r.take("link snapshot length")? as usize;
            let image = r.take_slice("link snapshot", len)?.to_vec();
            let mut link = CountingBloomFilter::new(self.m, self.k, self.seed)?;
            link.load_state(&image)?;
            links.push(link);
        }
        r.finish()?;
        self.links = links;
        Ok(())
    }
}
