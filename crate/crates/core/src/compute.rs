//! Hash-computation economizers: one filter derives all its probe positions
//! from a single 64-bit hash by reducing it modulo pairwise-coprime
//! partition sizes, the other confines each item to one cache-line-sized
//! block and touches exactly one bit per machine word inside it.

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::bits::BitVector;
use crate::hash::HashFamily;
use crate::support::{check_bit_tail, checked_k, checked_len, invalid, WordReader};

/// Picks `k` distinct primes with the largest possible total not exceeding
/// `total_bits`. Starting from the best window of `k` consecutive primes,
/// each member is then bumped upward while the budget allows. Distinct
/// primes are pairwise coprime, which keeps the per-partition residues of
/// one hash value independent in the Chinese-remainder sense.
pub fn partition_plan(total_bits: u64, k: usize) -> Result<Vec<u64>, FilterError> {
    let k = checked_k(k)?;
    let total = usize::try_from(total_bits)
        .map_err(|_| invalid("total_bits", "does not fit this platform's address space"))?;
    checked_len("total_bits", total_bits, 1)?;
    let primes = primes_up_to(total);
    if primes.len() < k {
        return Err(invalid(
            "total_bits",
            "too small to hold the requested number of prime partitions",
        ));
    }
    let mut best: Option<(u64, usize)> = None; // (sum, window start)
    let mut window_sum: u64 = primes[..k].iter().sum();
    let mut start = 0usize;
    loop {
        if window_sum <= total_bits && best.map_or(true, |(s, _)| window_sum > s) {
            best = Some((window_sum, start));
        }
        if start + k >= primes.len() {
            break;
        }
        window_sum = window_sum - primes[start] + primes[start + k];
        start += 1;
    }
    let Some((mut sum, start)) = best else {
        return Err(invalid(
            "total_bits",
            "even the smallest prime window exceeds the bit budget",
        ));
    };
    let mut parts: Vec<u64> = primes[start..start + k].to_vec();
    // bump members upward, largest first, while the budget allows
    loop {
        let mut improved = false;
        for i in (0..k).rev() {
            let mut candidate = parts[i];
            loop {
                candidate = match next_prime_above(candidate, &primes) {
                    Some(p) => p,
                    None => break,
                };
                if parts.contains(&candidate) {
                    continue;
                }
                break;
            }
            if candidate > parts[i]
                && !parts.contains(&candidate)
                && sum - parts[i] + candidate <= total_bits
            {
                sum = sum - parts[i] + candidate;
                parts[i] = candidate;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    parts.sort_unstable();
    Ok(parts)
}

fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2usize;
    while p * p <= n {
        if sieve[p] {
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

fn next_prime_above(p: u64, primes: &[u64]) -> Option<u64> {
    let at = primes.partition_point(|&q| q <= p);
    primes.get(at).copied()
}

/// Bloom filter computing a single base hash per item: the bit array is
/// split into partitions of pairwise-coprime prime sizes, and the hash's
/// residue modulo each partition size picks one bit per partition.
#[derive(Clone, Debug)]
pub struct OneHashFilter {
    hashes: HashFamily,
    bits: BitVector,
    /// Prime length of each partition, ascending.
    partitions: Vec<u64>,
    /// First bit of each partition.
    offsets: Vec<u64>,
    total_bits: u64,
    items: u64,
}

impl OneHashFilter {
    pub fn new(total_bits: u64, k: usize, seed: u64) -> Result<Self, FilterError> {
        let partitions = partition_plan(total_bits, k)?;
        let used: u64 = partitions.iter().sum();
        let len = checked_len("total_bits", used, 1)?;
        let offsets = partitions
            .iter()
            .scan(0u64, |acc, &p| {
                let at = *acc;
                *acc += p;
                Some(at)
            })
            .collect();
        Ok(OneHashFilter {
            hashes: HashFamily::seeded(seed),
            bits: BitVector::new(len),
            partitions,
            offsets,
            total_bits,
            items: 0,
        })
    }

    pub fn partitions(&self) -> &[u64] {
        &self.partitions
    }

    pub fn k(&self) -> usize {
        self.partitions.len()
    }

    /// One absolute bit position per partition, all derived from the same
    /// base hash.
    fn positions(&self, item: &[u8]) -> Vec<u64> {
        let h = self.hashes.base(item);
        self.partitions
            .iter()
            .zip(&self.offsets)
            .map(|(&p, &off)| off + h % p)
            .collect()
    }
}

impl MembershipFilter for OneHashFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        for pos in self.positions(item) {
            self.bits.set(pos as usize);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if self.positions(item).iter().all(|&p| self.bits.get(p as usize)) {
            QueryOutcome::present()
        } else {
            QueryOutcome::absent()
        }
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Ohbf {
                total_bits: self.total_bits,
                k: self.k(),
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
        let mut out = vec![self.items];
        out.extend_from_slice(self.bits.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_words = self.bits.len().div_ceil(64);
        let image = r.take_slice("bit array", n_words)?;
        check_bit_tail(image, self.bits.len(), 1)?;
        r.finish()?;
        self.bits = BitVector::from_words(image.to_vec(), self.bits.len());
        self.items = items;
        Ok(())
    }
}

/// Bloom filter shaped for wide-word memory: items land in one block of
/// `words_per_block * word_bits` bits, then set exactly one bit in each of
/// the block's words, so a query reads a fixed, contiguous handful of words.
#[derive(Clone, Debug)]
pub struct WordAlignedFilter {
    hashes: HashFamily,
    bits: BitVector,
    blocks: u64,
    words_per_block: usize,
    word_bits: u64,
    items: u64,
}

impl WordAlignedFilter {
    pub fn new(
        blocks: u64,
        words_per_block: usize,
        word_bits: u64,
        seed: u64,
    ) -> Result<Self, FilterError> {
        if blocks == 0 {
            return Err(invalid("blocks", "must be positive"));
        }
        let words_per_block = checked_k(words_per_block)?;
        if word_bits == 0 || word_bits > 4096 {
            return Err(invalid("word_bits", "must lie in 1..=4096"));
        }
        let total = blocks
            .checked_mul(words_per_block as u64)
            .and_then(|v| v.checked_mul(word_bits))
            .ok_or_else(|| invalid("blocks", "allocation size overflows"))?;
        let len = checked_len("blocks", total, 1)?;
        Ok(WordAlignedFilter {
            hashes: HashFamily::seeded(seed),
            bits: BitVector::new(len),
            blocks,
            words_per_block,
            word_bits,
            items: 0,
        })
    }

    /// Absolute bit positions: one per word of the item's block.
    pub fn positions(&self, item: &[u8]) -> Vec<u64> {
        let block = self.hashes.index_at(item, 0, self.blocks);
        let block_base = block * self.words_per_block as u64 * self.word_bits;
        (0..self.words_per_block)
            .map(|w| {
                let bit = self.hashes.index_at(item, w + 1, self.word_bits);
                block_base + w as u64 * self.word_bits + bit
            })
            .collect()
    }
}

impl MembershipFilter for WordAlignedFilter {
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError> {
        for pos in self.positions(item) {
            self.bits.set(pos as usize);
        }
        self.items += 1;
        Ok(())
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if self.positions(item).iter().all(|&p| self.bits.get(p as usize)) {
            QueryOutcome::present()
        } else {
            QueryOutcome::absent()
        }
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Ufbf {
                blocks: self.blocks,
                words_per_block: self.words_per_block,
                word_bits: self.word_bits as u32,
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
        let mut out = vec![self.items];
        out.extend_from_slice(self.bits.words());
        Ok(out)
    }

    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let mut r = WordReader::new(words);
        let items = r.take("item count")?;
        let n_words = self.bits.len().div_ceil(64);
        let image = r.take_slice("bit array", n_words)?;
        check_bit_tail(image, self.bits.len(), 1)?;
        r.finish()?;
        self.bits = BitVector::from_words(image.to_vec(), self.bits.len());
        self.items = items;
        Ok(())
    }
}
