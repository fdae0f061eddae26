//! Structural parameters per variant, used by descriptors, benchmark configs,
//! and the serialization layer.

use serde::{Deserialize, Serialize};

use super::Variant;

/// How a similarity matrix splits documents into chunks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChunkerParams {
    WordShingles { size: usize, stride: usize },
    Lines,
}

/// Which check a variable-increment counting filter applies to its cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViScheme {
    /// Cells carry (count, sum); sums must decompose over the increment set.
    Bh,
    /// Cells carry only the sum.
    Vi,
}

/// Structural parameters of each variant. Everything needed to rebuild an
/// empty filter except the seed, which lives on [`FilterDescriptor`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum VariantParams {
    Standard {
        m: u64,
        k: usize,
    },
    Counting {
        m: u64,
        k: usize,
    },
    Spectral {
        m: u64,
        k: usize,
        width: u32,
        minimum_increase: bool,
    },
    Adaptive {
        m: u64,
        k: usize,
        n_max: u64,
    },
    YesNo {
        p: u64,
        q: u64,
        r: usize,
        k: usize,
        k_prime: usize,
    },
    ViCbf {
        m: u64,
        k: usize,
        scheme: ViScheme,
        increments: Vec<u64>,
        count_width: u32,
        sum_width: u32,
    },
    FpCbf {
        m: u64,
        k: usize,
        counter_width: u32,
        fingerprint_bits: u32,
    },
    Retouched {
        m: u64,
        k: usize,
    },
    Acbf {
        level1: u64,
        k: usize,
        levels: usize,
    },
    Generalized {
        m: u64,
        k_reset: usize,
        k_set: usize,
    },
    MultiClass {
        m: u64,
        class_ks: Vec<usize>,
    },
    Complement {
        m: u64,
        k: usize,
        m_c: u64,
        k_c: usize,
    },
    DlCbf {
        subtables: usize,
        bucket_bits: u32,
        remainder_bits: u32,
        cells_per_bucket: usize,
    },
    Bfah {
        m: u64,
        k: usize,
    },
    Matrix {
        m: u64,
        k: usize,
        chunker: ChunkerParams,
        threshold: u64,
    },
    Compacted {
        nb: u16,
        w: u8,
        bp: u32,
    },
    Ohbf {
        total_bits: u64,
        k: usize,
    },
    Ufbf {
        blocks: u64,
        words_per_block: usize,
        word_bits: u32,
    },
    Dynamic {
        m: u64,
        k: usize,
        capacity: u64,
    },
    Weighted {
        m: u64,
        k_avg: usize,
        k_max: usize,
    },
    Iblt {
        cells: usize,
        k: usize,
        rho: u64,
    },
    Shifting {
        m: u64,
        k: usize,
        w_bar: u64,
    },
    Deletable {
        m_prime: u64,
        k: usize,
        regions: usize,
    },
    DistanceSensitive {
        dim: usize,
        eps: u32,
        delta: u32,
        k: usize,
        expected_members: u64,
    },
    Cuckoo {
        buckets: u64,
        slots_per_bucket: usize,
        fingerprint_bits: u32,
        max_kicks: usize,
    },
    Persistent {
        m: u64,
        k: usize,
        granularity: u64,
    },
    Hdbf {
        m: u64,
        k: usize,
        width: u32,
        q: u32,
        lo: f64,
        hi: f64,
    },
}

impl VariantParams {
    pub fn variant(&self) -> Variant {
        match self {
            VariantParams::Standard { .. } => Variant::Standard,
            VariantParams::Counting { .. } => Variant::Counting,
            VariantParams::Spectral { .. } => Variant::Spectral,
            VariantParams::Adaptive { .. } => Variant::Adaptive,
            VariantParams::YesNo { .. } => Variant::YesNo,
            VariantParams::ViCbf { .. } => Variant::ViCbf,
            VariantParams::FpCbf { .. } => Variant::FpCbf,
            VariantParams::Retouched { .. } => Variant::Retouched,
            VariantParams::Acbf { .. } => Variant::Acbf,
            VariantParams::Generalized { .. } => Variant::Generalized,
            VariantParams::MultiClass { .. } => Variant::MultiClass,
            VariantParams::Complement { .. } => Variant::Complement,
            VariantParams::DlCbf { .. } => Variant::DlCbf,
            VariantParams::Bfah { .. } => Variant::Bfah,
            VariantParams::Matrix { .. } => Variant::Matrix,
            VariantParams::Compacted { .. } => Variant::Compacted,
            VariantParams::Ohbf { .. } => Variant::Ohbf,
            VariantParams::Ufbf { .. } => Variant::Ufbf,
            VariantParams::Dynamic { .. } => Variant::Dynamic,
            VariantParams::Weighted { .. } => Variant::Weighted,
            VariantParams::Iblt { .. } => Variant::Iblt,
            VariantParams::Shifting { .. } => Variant::Shifting,
            VariantParams::Deletable { .. } => Variant::Deletable,
            VariantParams::DistanceSensitive { .. } => Variant::DistanceSensitive,
            VariantParams::Cuckoo { .. } => Variant::Cuckoo,
            VariantParams::Persistent { .. } => Variant::Persistent,
            VariantParams::Hdbf { .. } => Variant::Hdbf,
        }
    }
}

/// Variant tag, structural parameters, and seed of a live filter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterDescriptor {
    #[serde(flatten)]
    pub params: VariantParams,
    pub seed: u64,
}

impl FilterDescriptor {
    pub fn new(params: VariantParams, seed: u64) -> Self {
        FilterDescriptor { params, seed }
    }

    pub fn variant(&self) -> Variant {
        self.params.variant()
    }
}
