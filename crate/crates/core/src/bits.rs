//! Packed bit arrays and fixed-width saturating counter arrays.

/// Fixed-length bit array packed into little-endian `u64` words.
///
/// Bit `i` lives at bit `i % 64` of word `i / 64`. `insert_bit`/`remove_bit`
/// shift the tail and change the logical length; filters with a fixed
/// geometry simply never call them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn new(len: usize) -> Self {
        BitVector {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of set bits at positions strictly below `i`.
    pub fn rank(&self, i: usize) -> usize {
        assert!(i <= self.len, "rank index {i} out of range {}", self.len);
        let full = i / 64;
        let mut ones: usize = self.words[..full].iter().map(|w| w.count_ones() as usize).sum();
        let rem = i % 64;
        if rem > 0 {
            ones += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        ones
    }

    /// Popcount of the bitwise AND with another array of the same length.
    pub fn and_popcount(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    /// Insert `value` at position `i <= len`, shifting later bits up.
    pub fn insert_bit(&mut self, i: usize, value: bool) {
        assert!(i <= self.len, "insert index {i} out of range {}", self.len);
        self.len += 1;
        if self.words.len() * 64 < self.len {
            self.words.push(0);
        }
        let w = i / 64;
        let b = i % 64;
        let low_mask = (1u64 << b) - 1; // b == 0 gives 0: whole word shifts
        let mut carry = self.words[w] >> 63;
        let low = self.words[w] & low_mask;
        let high = (self.words[w] & !low_mask) << 1;
        self.words[w] = low | high | ((value as u64) << b);
        for word in self.words.iter_mut().skip(w + 1) {
            let next = *word >> 63;
            *word = (*word << 1) | carry;
            carry = next;
        }
    }

    /// Remove the bit at position `i`, shifting later bits down.
    pub fn remove_bit(&mut self, i: usize) -> bool {
        assert!(i < self.len, "remove index {i} out of range {}", self.len);
        let out = self.get(i);
        let w = i / 64;
        let b = i % 64;
        let low_mask = (1u64 << b) - 1;
        let low = self.words[w] & low_mask;
        let high = (self.words[w] >> 1) & !low_mask;
        self.words[w] = low | high;
        // ascending order: each word donates its low bit to the word below
        // it, which has already been shifted and has bit 63 vacant
        for word in w + 1..self.words.len() {
            let carry = self.words[word] & 1;
            self.words[word] >>= 1;
            self.words[word - 1] |= carry << 63;
        }
        self.len -= 1;
        if self.words.len() > self.len.div_ceil(64) {
            self.words.pop();
        }
        out
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        assert_eq!(words.len(), len.div_ceil(64), "word count does not match length");
        let mut bv = BitVector { words, len };
        bv.mask_tail();
        bv
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// Outcome of a sticky saturating decrement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecOutcome {
    /// Counter was decremented by one.
    Decremented,
    /// Counter was already zero; nothing changed.
    WasZero,
    /// Counter sits at its saturation value and stays there permanently.
    Sticky,
}

/// Fixed-width saturating counters packed into `u64` words.
///
/// Width may be any value in `1..=32`; entries may straddle word boundaries.
/// Saturation is sticky: once a counter reaches its maximum it ignores both
/// further increments and all decrements, which preserves the no-false-negative
/// guarantee of counting filters at the cost of a permanently pinned cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterVector {
    words: Vec<u64>,
    len: usize,
    width: u32,
}

impl CounterVector {
    pub fn new(len: usize, width: u32) -> Self {
        assert!((1..=32).contains(&width), "counter width must be in 1..=32");
        CounterVector {
            words: vec![0; (len * width as usize).div_ceil(64)],
            len,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn max_value(&self) -> u64 {
        if self.width == 64 { u64::MAX } else { (1u64 << self.width) - 1 }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.len, "counter index {i} out of range {}", self.len);
        let bit = i * self.width as usize;
        let w = bit / 64;
        let off = (bit % 64) as u32;
        let mut v = self.words[w] >> off;
        let got = 64 - off;
        if got < self.width {
            v |= self.words[w + 1] << got;
        }
        v & self.max_value()
    }

    #[inline]
    fn put(&mut self, i: usize, value: u64) {
        debug_assert!(value <= self.max_value());
        let bit = i * self.width as usize;
        let w = bit / 64;
        let off = (bit % 64) as u32;
        let mask = self.max_value();
        self.words[w] &= !(mask << off);
        self.words[w] |= value << off;
        let got = 64 - off;
        if got < self.width {
            self.words[w + 1] &= !(mask >> got);
            self.words[w + 1] |= value >> got;
        }
    }

    /// Increment with sticky saturation. Returns `false` if the counter was
    /// already saturated (and therefore did not move).
    pub fn inc(&mut self, i: usize) -> bool {
        let v = self.get(i);
        if v == self.max_value() {
            return false;
        }
        self.put(i, v + 1);
        true
    }

    /// XOR `value` into cell `i` (masked to the cell width).
    pub fn xor_assign(&mut self, i: usize, value: u64) {
        let v = (self.get(i) ^ value) & self.max_value();
        self.put(i, v);
    }

    /// Add `delta` with sticky saturation at the maximum value.
    pub fn add_saturating(&mut self, i: usize, delta: u64) {
        let v = self.get(i).saturating_add(delta).min(self.max_value());
        self.put(i, v);
    }

    /// Subtract up to `delta` with the same sticky rules as [`Self::dec`]:
    /// saturated cells never move, empty cells report [`DecOutcome::WasZero`],
    /// and everything else floors at zero.
    pub fn sub_sticky(&mut self, i: usize, delta: u64) -> DecOutcome {
        let v = self.get(i);
        if v == self.max_value() {
            DecOutcome::Sticky
        } else if v == 0 {
            DecOutcome::WasZero
        } else {
            self.put(i, v.saturating_sub(delta));
            DecOutcome::Decremented
        }
    }

    /// Sticky saturating decrement; see [`DecOutcome`].
    pub fn dec(&mut self, i: usize) -> DecOutcome {
        let v = self.get(i);
        if v == 0 {
            DecOutcome::WasZero
        } else if v == self.max_value() {
            DecOutcome::Sticky
        } else {
            self.put(i, v - 1);
            DecOutcome::Decremented
        }
    }

    /// Cell-wise sticky saturating sum of another vector into this one.
    pub fn add_assign_saturating(&mut self, other: &CounterVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        assert_eq!(self.width, other.width, "width mismatch");
        let max = self.max_value();
        for i in 0..self.len {
            let sum = self.get(i).saturating_add(other.get(i)).min(max);
            self.put(i, sum);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn total_bits(&self) -> usize {
        self.len * self.width as usize
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn from_words(words: Vec<u64>, len: usize, width: u32) -> Self {
        assert!((1..=32).contains(&width), "counter width must be in 1..=32");
        assert_eq!(
            words.len(),
            (len * width as usize).div_ceil(64),
            "word count does not match geometry"
        );
        CounterVector { words, len, width }
    }
}
