//! One filter row per document, all rows sharing a single hash family over
//! the same bit width. A document is chunked (word shingles or lines), each
//! chunk inserted into that document's row, and two documents are compared
//! by the ratio of shared set bits to combined set bits — an alignment-free
//! similarity signal that never rereads the documents themselves.

use crate::api::{ChunkerParams, FilterDescriptor, FilterError, VariantParams};
use crate::bits::BitVector;
use crate::hash::HashFamily;
use crate::support::{checked_k, checked_len, invalid};

/// Splits `text` into the chunks a row is built from.
///
/// Word shingles of `size` words advance by `stride`; a non-empty text
/// shorter than one shingle becomes a single whole-text chunk so short
/// documents still produce a row. Line chunking keeps each non-blank
/// trimmed line.
pub fn chunks_of(chunker: &ChunkerParams, text: &str) -> Vec<String> {
    match *chunker {
        ChunkerParams::WordShingles { size, stride } => {
            let words: Vec<&str> = text.split_whitespace().collect();
            if words.is_empty() {
                return Vec::new();
            }
            if words.len() < size {
                return vec![words.join(" ")];
            }
            let mut out = Vec::new();
            let mut i = 0;
            while i + size <= words.len() {
                out.push(words[i..i + size].join(" "));
                i += stride;
            }
            out
        }
        ChunkerParams::Lines => text
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty())
            .map(str::to_owned)
            .collect(),
    }
}

#[derive(Clone, Debug)]
pub struct MatrixFilter {
    hashes: HashFamily,
    m: usize,
    k: usize,
    chunker: ChunkerParams,
    /// Similarity cut-off in thousandths: pairs scoring at least this many
    /// permille count as similar.
    threshold_permille: u64,
    rows: Vec<(String, BitVector)>,
}

impl MatrixFilter {
    pub fn new(
        m: u64,
        k: usize,
        chunker: ChunkerParams,
        threshold_permille: u64,
        seed: u64,
    ) -> Result<Self, FilterError> {
        let m = checked_len("m", m, 1)?;
        let k = checked_k(k)?;
        if let ChunkerParams::WordShingles { size, stride } = chunker {
            if size == 0 {
                return Err(invalid("chunker", "shingle size must be positive"));
            }
            if stride == 0 {
                return Err(invalid("chunker", "shingle stride must be positive"));
            }
        }
        if threshold_permille > 1000 {
            return Err(invalid("threshold", "a permille threshold is at most 1000"));
        }
        Ok(MatrixFilter {
            hashes: HashFamily::seeded(seed),
            m,
            k,
            chunker,
            threshold_permille,
            rows: Vec::new(),
        })
    }

    pub fn documents(&self) -> usize {
        self.rows.len()
    }

    pub fn label(&self, row: usize) -> Option<&str> {
        self.rows.get(row).map(|(label, _)| label.as_str())
    }

    fn build_row(&self, text: &str) -> BitVector {
        let mut bits = BitVector::new(self.m);
        for chunk in chunks_of(&self.chunker, text) {
            for pos in self.hashes.indices(chunk.as_bytes(), self.k, self.m as u64) {
                bits.set(pos as usize);
            }
        }
        bits
    }

    /// Chunks and stores `text` as a new row; returns its index.
    pub fn add_document(&mut self, label: &str, text: &str) -> usize {
        let row = self.build_row(text);
        self.rows.push((label.to_owned(), row));
        self.rows.len() - 1
    }

    fn row_similarity(a: &BitVector, b: &BitVector) -> f64 {
        let shared = a.and_popcount(b);
        let combined = a.popcount() + b.popcount() - shared;
        if combined == 0 {
            return 0.0;
        }
        shared as f64 / combined as f64
    }

    /// Shared-to-combined set-bit ratio between two stored rows, in [0, 1].
    pub fn similarity(&self, i: usize, j: usize) -> Result<f64, FilterError> {
        let get = |at: usize| {
            self.rows
                .get(at)
                .map(|(_, row)| row)
                .ok_or_else(|| invalid("row", "document index out of range"))
        };
        Ok(Self::row_similarity(get(i)?, get(j)?))
    }

    /// All document pairs whose similarity reaches the stored threshold.
    pub fn similar_pairs(&self) -> Vec<(usize, usize, f64)> {
        let cut = self.threshold_permille as f64 / 1000.0;
        let mut out = Vec::new();
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                let s = Self::row_similarity(&self.rows[i].1, &self.rows[j].1);
                if s >= cut {
                    out.push((i, j, s));
                }
            }
        }
        out
    }

    /// Similarity of loose text against every stored row, by row index.
    pub fn scores_against(&self, text: &str) -> Vec<f64> {
        let probe = self.build_row(text);
        self.rows
            .iter()
            .map(|(_, row)| Self::row_similarity(&probe, row))
            .collect()
    }

    pub fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Matrix {
                m: self.m as u64,
                k: self.k,
                chunker: self.chunker.clone(),
                threshold: self.threshold_permille,
            },
            self.hashes.seed(),
        )
    }

    pub fn allocated_bits(&self) -> u64 {
        (self.m as u64) * self.rows.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHINGLES: ChunkerParams = ChunkerParams::WordShingles { size: 5, stride: 1 };

    #[test]
    fn shingle_chunking_slides_one_word_at_a_time() {
        let text = "one two three four five six seven";
        let chunks = chunks_of(&SHINGLES, text);
        assert_eq!(
            chunks,
            vec![
                "one two three four five",
                "two three four five six",
                "three four five six seven",
            ]
        );
        // shorter than a shingle: the whole text is one chunk
        assert_eq!(chunks_of(&SHINGLES, "just three words"), vec!["just three words"]);
        assert!(chunks_of(&SHINGLES, "   ").is_empty());
        // only full windows are emitted; the trailing word is dropped
        let wide = ChunkerParams::WordShingles { size: 2, stride: 3 };
        assert_eq!(chunks_of(&wide, "a b c d e f g"), vec!["a b", "d e"]);
    }

    #[test]
    fn line_chunking_keeps_nonblank_trimmed_lines() {
        let text = "alpha line\n\n  beta line  \n\t\ngamma";
        assert_eq!(
            chunks_of(&ChunkerParams::Lines, text),
            vec!["alpha line", "beta line", "gamma"]
        );
    }

    #[test]
    fn identical_documents_score_one_and_unrelated_near_zero() {
        let mut f = MatrixFilter::new(8192, 4, SHINGLES, 500, 7).unwrap();
        let essay = "the quick brown fox jumps over the lazy dog again and again \
                     until the dog finally moves out of the way entirely";
        let other = "completely different subject matter covering filters tables \
                     hashing and the measurement of false positive behavior";
        let a = f.add_document("essay", essay);
        let b = f.add_document("copy", essay);
        let c = f.add_document("other", other);
        assert_eq!(f.similarity(a, b).unwrap(), 1.0);
        assert!(f.similarity(a, c).unwrap() < 0.05);
        assert_eq!(f.label(c), Some("other"));
        assert!(f.similarity(0, 9).is_err());
    }

    #[test]
    fn shared_passages_push_a_pair_over_the_threshold() {
        let mut f = MatrixFilter::new(8192, 4, SHINGLES, 300, 3).unwrap();
        let shared = "we measure the rate at which stored items are reported against \
                      the rate at which absent items are falsely reported";
        let doc_a = format!("introduction paragraph first {shared}");
        let doc_b = format!("{shared} followed by a closing remark");
        let doc_c = "an entirely unrelated shopping list with apples pears and plums";
        f.add_document("a", &doc_a);
        f.add_document("b", &doc_b);
        f.add_document("c", doc_c);
        let pairs = f.similar_pairs();
        assert_eq!(pairs.len(), 1, "exactly one similar pair expected: {pairs:?}");
        assert_eq!((pairs[0].0, pairs[0].1), (0, 1));
        assert!(pairs[0].2 > 0.3);
    }

    #[test]
    fn loose_text_scores_highest_against_its_source() {
        let mut f = MatrixFilter::new(8192, 4, ChunkerParams::Lines, 500, 11).unwrap();
        f.add_document("logs", "error at line one\nwarning issued\nrestart requested");
        f.add_document("poem", "roses are red\nviolets are blue");
        let scores = f.scores_against("warning issued\nrestart requested");
        assert!(scores[0] > scores[1]);
        assert!(scores[0] > 0.5);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let bad = ChunkerParams::WordShingles { size: 0, stride: 1 };
        assert!(MatrixFilter::new(64, 2, bad, 500, 0).is_err());
        let bad = ChunkerParams::WordShingles { size: 5, stride: 0 };
        assert!(MatrixFilter::new(64, 2, bad, 500, 0).is_err());
        assert!(MatrixFilter::new(64, 2, SHINGLES, 1001, 0).is_err());
        assert!(MatrixFilter::new(0, 2, SHINGLES, 500, 0).is_err());
    }
}
