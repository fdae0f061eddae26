//! The capability-typed membership interface every filter variant implements.
//!
//! A [`Capabilities`] record states what a variant can do (counting, deletion)
//! and what it can get wrong (false negatives), so callers select structures
//! by contract. Query results are [`QueryOutcome`] values that keep the
//! membership verdict, the false-positive caveat, optional frequency, and any
//! auxiliary payload in one place.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FilterError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("operation requires the {0} capability")]
    CapabilityUnsupported(&'static str),
    #[error("insertion failed: {0}")]
    InsertionFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed data at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },
}

impl From<crate::hash::HashError> for FilterError {
    fn from(e: crate::hash::HashError) -> Self {
        match e {
            crate::hash::HashError::InvalidParameter { name, reason } => {
                FilterError::InvalidParameter { name, reason }
            }
            crate::hash::HashError::InvalidInput(msg) => FilterError::InvalidInput(msg),
        }
    }
}

/// What kind of answer a variant's query produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResultKind {
    Boolean,
    Frequency,
    BooleanAndFrequency,
}

impl ResultKind {
    pub fn involves_frequency(self) -> bool {
        !matches!(self, ResultKind::Boolean)
    }
}

/// Declared abilities and failure modes of a filter variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub counting: bool,
    pub deletion: bool,
    pub false_negatives_possible: bool,
    pub result: ResultKind,
}

impl Capabilities {
    const fn new(counting: bool, deletion: bool, fn_possible: bool, result: ResultKind) -> Self {
        Capabilities {
            counting,
            deletion,
            false_negatives_possible: fn_possible,
            result,
        }
    }

    /// A frequency-flavored result requires the counting capability.
    pub fn is_consistent(&self) -> bool {
        !self.result.involves_frequency() || self.counting
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Absent,
    Present,
}

/// Result of a membership query.
///
/// Invariant: an `Absent` verdict never carries the false-positive caveat and
/// never reports a positive frequency. The constructors enforce this.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryOutcome {
    pub verdict: Verdict,
    /// `true` when a `Present` verdict could be a false positive.
    pub maybe_false_positive: bool,
    /// Estimated multiplicity, for counting variants.
    pub frequency: Option<u64>,
    /// Variant-specific payload (for example candidate auxiliary values).
    pub auxiliary: Option<Vec<u64>>,
    /// `true` when the verdict was settled by an exact oracle lookup.
    pub needs_oracle: bool,
}

impl QueryOutcome {
    pub fn absent() -> Self {
        QueryOutcome {
            verdict: Verdict::Absent,
            maybe_false_positive: false,
            frequency: None,
            auxiliary: None,
            needs_oracle: false,
        }
    }

    /// A positive answer that may be a false positive (the default for
    /// probabilistic filters).
    pub fn present() -> Self {
        QueryOutcome {
            verdict: Verdict::Present,
            maybe_false_positive: true,
            frequency: None,
            auxiliary: None,
            needs_oracle: false,
        }
    }

    /// A positive answer known to be correct (oracle-backed variants only).
    pub fn present_confirmed() -> Self {
        QueryOutcome {
            verdict: Verdict::Present,
            maybe_false_positive: false,
            frequency: None,
            auxiliary: None,
            needs_oracle: false,
        }
    }

    pub fn with_frequency(mut self, f: u64) -> Self {
        debug_assert!(
            self.verdict == Verdict::Present || f == 0,
            "absent outcomes cannot report a positive frequency"
        );
        self.frequency = Some(f);
        self
    }

    pub fn with_auxiliary(mut self, aux: Vec<u64>) -> Self {
        self.auxiliary = Some(aux);
        self
    }

    pub fn via_oracle(mut self) -> Self {
        self.needs_oracle = true;
        self
    }

    pub fn is_present(&self) -> bool {
        self.verdict == Verdict::Present
    }

    /// The structural invariant every variant's outcomes must satisfy.
    pub fn is_well_formed(&self) -> bool {
        match self.verdict {
            Verdict::Present => true,
            Verdict::Absent => {
                !self.maybe_false_positive && self.frequency.unwrap_or(0) == 0
            }
        }
    }
}

/// Result of a removal attempt on a deletion-capable variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemovalOutcome {
    Removed,
    /// The item is not present (nothing was changed).
    NotFound,
    /// The removal would be ambiguous and was aborted (state unchanged).
    Aborted,
    /// All of the item's positions sit in collision-tainted regions; the item
    /// stays queryable.
    NotDeletable,
}

/// Every implemented variant, in canonical listing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Standard,
    Counting,
    Spectral,
    Adaptive,
    YesNo,
    ViCbf,
    FpCbf,
    Retouched,
    Acbf,
    Generalized,
    MultiClass,
    Complement,
    DlCbf,
    Bfah,
    Matrix,
    Compacted,
    Ohbf,
    Ufbf,
    Dynamic,
    Weighted,
    Iblt,
    Shifting,
    Deletable,
    DistanceSensitive,
    Cuckoo,
    Persistent,
    Hdbf,
}

pub const ALL_VARIANTS: [Variant; 27] = [
    Variant::Standard,
    Variant::Counting,
    Variant::Spectral,
    Variant::Adaptive,
    Variant::YesNo,
    Variant::ViCbf,
    Variant::FpCbf,
    Variant::Retouched,
    Variant::Acbf,
    Variant::Generalized,
    Variant::MultiClass,
    Variant::Complement,
    Variant::DlCbf,
    Variant::Bfah,
    Variant::Matrix,
    Variant::Compacted,
    Variant::Ohbf,
    Variant::Ufbf,
    Variant::Dynamic,
    Variant::Weighted,
    Variant::Iblt,
    Variant::Shifting,
    Variant::Deletable,
    Variant::DistanceSensitive,
    Variant::Cuckoo,
    Variant::Persistent,
    Variant::Hdbf,
];

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Counting => "counting",
            Variant::Spectral => "spectral",
            Variant::Adaptive => "adaptive",
            Variant::YesNo => "yes-no",
            Variant::ViCbf => "vi-cbf",
            Variant::FpCbf => "fp-cbf",
            Variant::Retouched => "retouched",
            Variant::Acbf => "acbf",
            Variant::Generalized => "generalized",
            Variant::MultiClass => "multi-class",
            Variant::Complement => "complement",
            Variant::DlCbf => "dl-cbf",
            Variant::Bfah => "bfah",
            Variant::Matrix => "matrix",
            Variant::Compacted => "compacted",
            Variant::Ohbf => "ohbf",
            Variant::Ufbf => "ufbf",
            Variant::Dynamic => "dynamic",
            Variant::Weighted => "weighted",
            Variant::Iblt => "iblt",
            Variant::Shifting => "shifting",
            Variant::Deletable => "deletable",
            Variant::DistanceSensitive => "distance-sensitive",
            Variant::Cuckoo => "cuckoo",
            Variant::Persistent => "persistent",
            Variant::Hdbf => "hdbf",
        }
    }

    /// One-line role description for the capability listing.
    pub fn main_trait(self) -> &'static str {
        match self {
            Variant::Standard => "set membership",
            Variant::Counting => "membership and frequency with deletion",
            Variant::Spectral => "frequency estimation",
            Variant::Adaptive => "membership with per-item repetition counts",
            Variant::YesNo => "membership with false-positive suppression",
            Variant::ViCbf => "membership and frequency with variable increments",
            Variant::FpCbf => "membership with fingerprint-checked counters",
            Variant::Retouched => "membership trading false positives for false negatives",
            Variant::Acbf => "membership with exact counter reconstruction",
            Variant::Generalized => "membership with set and reset hash groups",
            Variant::MultiClass => "membership across element classes",
            Variant::Complement => "membership with exact conflict resolution",
            Variant::DlCbf => "membership and frequency in d-left buckets",
            Variant::Bfah => "membership with payload addressing",
            Variant::Matrix => "document similarity",
            Variant::Compacted => "compressed membership snapshot",
            Variant::Ohbf => "membership from one base hash",
            Variant::Ufbf => "cache-line-aligned membership",
            Variant::Dynamic => "membership over growing sets",
            Variant::Weighted => "membership with per-item hash budgets",
            Variant::Iblt => "key-value listing and membership",
            Variant::Shifting => "membership with auxiliary offsets",
            Variant::Deletable => "membership with region-tracked deletion",
            Variant::DistanceSensitive => "near-neighbor membership",
            Variant::Cuckoo => "membership with deletion via fingerprints",
            Variant::Persistent => "membership over time windows",
            Variant::Hdbf => "membership and frequency for real-valued vectors",
        }
    }
}

/// Declared capabilities per variant.
pub fn capabilities_of(variant: Variant) -> Capabilities {
    use ResultKind::*;
    match variant {
        Variant::Standard => Capabilities::new(false, false, false, Boolean),
        Variant::Counting => Capabilities::new(true, true, false, BooleanAndFrequency),
        Variant::Spectral => Capabilities::new(true, true, false, Frequency),
        Variant::Adaptive => Capabilities::new(true, false, false, Boolean),
        Variant::YesNo => Capabilities::new(false, false, true, Boolean),
        Variant::ViCbf => Capabilities::new(true, true, false, BooleanAndFrequency),
        Variant::FpCbf => Capabilities::new(true, true, false, Boolean),
        Variant::Retouched => Capabilities::new(false, false, true, Boolean),
        Variant::Acbf => Capabilities::new(true, true, false, BooleanAndFrequency),
        Variant::Generalized => Capabilities::new(false, false, true, Boolean),
        Variant::MultiClass => Capabilities::new(false, false, false, Boolean),
        Variant::Complement => Capabilities::new(false, false, false, Boolean),
        Variant::DlCbf => Capabilities::new(true, true, false, BooleanAndFrequency),
        Variant::Bfah => Capabilities::new(false, false, false, Boolean),
        Variant::Matrix => Capabilities::new(false, false, false, Boolean),
        Variant::Compacted => Capabilities::new(false, false, true, Boolean),
        Variant::Ohbf => Capabilities::new(false, false, false, Boolean),
        Variant::Ufbf => Capabilities::new(false, false, false, Boolean),
        Variant::Dynamic => Capabilities::new(true, true, false, Boolean),
        Variant::Weighted => Capabilities::new(false, false, false, Boolean),
        Variant::Iblt => Capabilities::new(true, true, false, BooleanAndFrequency),
        Variant::Shifting => Capabilities::new(false, false, false, Boolean),
        Variant::Deletable => Capabilities::new(false, true, false, Boolean),
        Variant::DistanceSensitive => Capabilities::new(false, false, true, Boolean),
        Variant::Cuckoo => Capabilities::new(false, true, false, Boolean),
        Variant::Persistent => Capabilities::new(false, false, false, Boolean),
        Variant::Hdbf => Capabilities::new(true, true, false, BooleanAndFrequency),
    }
}

/// One row of the capability listing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapabilityRow {
    pub variant: Variant,
    pub main_trait: &'static str,
    pub capabilities: Capabilities,
}

/// The full capability matrix, one row per implemented variant.
pub fn capability_matrix() -> Vec<CapabilityRow> {
    ALL_VARIANTS
        .iter()
        .map(|&variant| CapabilityRow {
            variant,
            main_trait: variant.main_trait(),
            capabilities: capabilities_of(variant),
        })
        .collect()
}

/// Well-known variants that are deliberately not implemented; listed as a
/// footnote alongside the capability matrix.
pub const UNIMPLEMENTED_VARIANTS: [&str; 3] = ["compressed", "conscious", "bloomier"];

pub mod params;
pub use params::{ChunkerParams, FilterDescriptor, VariantParams, ViScheme};

/// The single interface all membership-style variants implement.
///
/// Two structures intentionally live outside it: the document-similarity
/// matrix (its queries compare documents, not items) and the compacted
/// snapshot (queries go through reconstruction). Both still appear in the
/// capability matrix.
pub trait MembershipFilter {
    /// Record `item`. Fails only for variants with bounded placement (for
    /// example cuckoo relocation budgets) or fixed construction-time content.
    fn insert(&mut self, item: &[u8]) -> Result<(), FilterError>;

    /// Membership verdict for `item`; never fails.
    fn query(&self, item: &[u8]) -> QueryOutcome;

    /// Remove `item` where the variant supports deletion.
    fn remove(&mut self, item: &[u8]) -> Result<RemovalOutcome, FilterError> {
        let _ = item;
        Err(FilterError::CapabilityUnsupported("deletion"))
    }

    /// Estimated multiplicity of `item` where the variant supports counting.
    fn count_estimate(&self, item: &[u8]) -> Result<u64, FilterError> {
        let _ = item;
        Err(FilterError::CapabilityUnsupported("counting"))
    }

    fn capabilities(&self) -> Capabilities {
        capabilities_of(self.descriptor().variant())
    }

    /// Variant tag, structural parameters, and seed; enough to rebuild an
    /// empty twin of this filter.
    fn descriptor(&self) -> FilterDescriptor;

    /// Number of tracked insertions.
    fn tracked_items(&self) -> u64;

    /// Logical payload size in bits (used for bits-per-element accounting).
    fn allocated_bits(&self) -> u64;

    /// Complete mutable state as a self-describing word stream, for variants
    /// whose contents round-trip losslessly. Pair with [`Self::load_state`].
    /// Variants holding exact item sets, documents, or externally supplied
    /// payload maps do not offer snapshots.
    fn state_words(&self) -> Result<Vec<u64>, FilterError> {
        Err(FilterError::CapabilityUnsupported("serialization"))
    }

    /// Replace this filter's mutable state with a stream previously produced
    /// by [`Self::state_words`] on a filter of identical shape and seed.
    fn load_state(&mut self, words: &[u64]) -> Result<(), FilterError> {
        let _ = words;
        Err(FilterError::CapabilityUnsupported("serialization"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_capability_row_is_consistent() {
        let rows = capability_matrix();
        assert_eq!(rows.len(), ALL_VARIANTS.len());
        for row in rows {
            assert!(
                row.capabilities.is_consistent(),
                "{}: frequency result requires counting",
                row.variant.name()
            );
            assert!(!row.main_trait.is_empty());
        }
    }

    #[test]
    fn absent_outcomes_carry_no_positive_claims() {
        let absent = QueryOutcome::absent();
        assert!(absent.is_well_formed());
        assert!(!absent.maybe_false_positive);
        assert_eq!(absent.frequency, None);

        let present = QueryOutcome::present().with_frequency(3);
        assert!(present.is_well_formed());
        assert!(present.maybe_false_positive);

        let confirmed = QueryOutcome::present_confirmed().via_oracle();
        assert!(confirmed.is_well_formed());
        assert!(!confirmed.maybe_false_positive);
        assert!(confirmed.needs_oracle);
    }

    #[test]
    fn variant_names_are_unique() {
        let mut names: Vec<&str> = ALL_VARIANTS.iter().map(|v| v.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), ALL_VARIANTS.len());
    }
}
