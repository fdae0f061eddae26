//! Internal helpers shared by the filter implementations: geometry
//! validation and the word-stream codec behind state snapshots.

use crate::api::FilterError;

/// Hard ceiling on any single allocation, in bits (32 GiB), so malformed
/// configurations fail with an error instead of an abort.
pub(crate) const MAX_ALLOC_BITS: u64 = 1 << 38;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> FilterError {
    FilterError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Validate a cell count and convert it to a usize length.
pub(crate) fn checked_len(name: &'static str, cells: u64, bits_per_cell: u64) -> Result<usize, FilterError> {
    if cells == 0 {
        return Err(invalid(name, "must be positive"));
    }
    let total = cells
        .checked_mul(bits_per_cell)
        .ok_or_else(|| invalid(name, "allocation size overflows"))?;
    if total > MAX_ALLOC_BITS {
        return Err(invalid(
            name,
            format!("allocation of {total} bits exceeds the {MAX_ALLOC_BITS}-bit ceiling"),
        ));
    }
    usize::try_from(cells).map_err(|_| invalid(name, "does not fit this platform's address space"))
}

pub(crate) fn checked_k(k: usize) -> Result<usize, FilterError> {
    if k == 0 {
        return Err(invalid("k", "at least one hash function is required"));
    }
    if k > 1024 {
        return Err(invalid("k", "more than 1024 hash functions is not supported"));
    }
    Ok(k)
}

/// Sequential reader over a state-word stream with positioned errors.
pub(crate) struct WordReader<'a> {
    words: &'a [u64],
    pos: usize,
}

impl<'a> WordReader<'a> {
    pub(crate) fn new(words: &'a [u64]) -> Self {
        WordReader { words, pos: 0 }
    }

    pub(crate) fn bad(&self, reason: impl Into<String>) -> FilterError {
        FilterError::Format {
            offset: self.pos * 8,
            reason: reason.into(),
        }
    }

    pub(crate) fn take(&mut self, what: &str) -> Result<u64, FilterError> {
        let w = self
            .words
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.bad(format!("stream ended before {what}")))?;
        self.pos += 1;
        Ok(w)
    }

    /// A `take` that also bounds the value (inclusive).
    pub(crate) fn take_at_most(&mut self, what: &str, max: u64) -> Result<u64, FilterError> {
        let w = self.take(what)?;
        if w > max {
            self.pos -= 1;
            let e = self.bad(format!("{what} is {w}, above the maximum {max}"));
            self.pos += 1;
            return Err(e);
        }
        Ok(w)
    }

    pub(crate) fn take_slice(&mut self, what: &str, n: usize) -> Result<&'a [u64], FilterError> {
        if self.words.len() - self.pos < n {
            return Err(self.bad(format!(
                "stream ended before {what}: need {n} words, have {}",
                self.words.len() - self.pos
            )));
        }
        let s = &self.words[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Fail on trailing words the layout does not account for.
    pub(crate) fn finish(self) -> Result<(), FilterError> {
        if self.pos != self.words.len() {
            return Err(FilterError::Format {
                offset: self.pos * 8,
                reason: format!("{} unexpected trailing words", self.words.len() - self.pos),
            });
        }
        Ok(())
    }
}

/// Check that no bit above `len` is set in a packed bit-vector image.
pub(crate) fn check_bit_tail(words: &[u64], len: usize, offset_words: usize) -> Result<(), FilterError> {
    let used = len % 64;
    if used != 0 {
        if let Some(last) = words.last() {
            if last >> used != 0 {
                return Err(FilterError::Format {
                    offset: (offset_words + words.len() - 1) * 8,
                    reason: "set bits beyond the declared length".into(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reader_walks_and_rejects_overruns() {
        let words = [7u64, 9, 11];
        let mut r = WordReader::new(&words);
        assert_eq!(r.take("a").unwrap(), 7);
        assert_eq!(r.take_slice("b", 2).unwrap(), &[9, 11]);
        assert!(r.take("c").is_err());
    }

    #[test]
    fn reader_rejects_trailing_words() {
        let words = [1u64, 2];
        let mut r = WordReader::new(&words);
        r.take("a").unwrap();
        let err = r.finish().unwrap_err();
        match err {
            FilterError::Format { offset, .. } => assert_eq!(offset, 8),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn bounded_take_enforces_the_bound() {
        let words = [5u64];
        let mut r = WordReader::new(&words);
        assert!(r.take_at_most("x", 4).is_err());
    }

    #[test]
    fn geometry_checks_reject_zero_and_huge() {
        assert!(checked_len("m", 0, 1).is_err());
        assert!(checked_len("m", u64::MAX, 4).is_err());
        assert!(checked_len("m", 1 << 39, 1).is_err());
        assert_eq!(checked_len("m", 4096, 1).unwrap(), 4096);
        assert!(checked_k(0).is_err());
        assert!(checked_k(4096).is_err());
        assert_eq!(checked_k(8).unwrap(), 8);
    }

    #[test]
    fn tail_check_spots_stray_bits() {
        assert!(check_bit_tail(&[u64::MAX], 60, 1).is_err());
        assert!(check_bit_tail(&[(1 << 60) - 1], 60, 1).is_ok());
        assert!(check_bit_tail(&[u64::MAX], 64, 1).is_ok());
    }
}
