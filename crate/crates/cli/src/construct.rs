//! Builds a boxed filter from a descriptor. Four variants cannot be built
//! from geometry alone and are rejected with an explanation: complement
//! filters fix their membership at construction, weighted filters need the
//! per-item weight profile, and the matrix / compacted representations do not
//! speak the byte-item interface at all.

use bfsk::api::params::{FilterDescriptor, VariantParams};
use bfsk::api::{FilterError, MembershipFilter};
use bfsk::classic::{
    AdaptiveBloomFilter, CountingBloomFilter, SpectralBloomFilter, StandardBloomFilter,
};
use bfsk::compute::{OneHashFilter, WordAlignedFilter};
use bfsk::dynamic::{DynamicFilter, InvertibleFilter, ShiftingFilter};
use bfsk::fpp::{
    AccurateCountingFilter, FingerprintCountingFilter, GeneralizedFilter, MultiClassFilter,
    RetouchedFilter, VariableIncrementFilter, YesNoFilter,
};
use bfsk::space::{AttachedValueFilter, DLeftCountingFilter};
use bfsk::special::{
    CuckooFilter, DeletableFilter, DistanceSensitiveFilter, HighDimensionalFilter,
    PersistentFilter,
};

fn unbuildable(reason: &str) -> FilterError {
    FilterError::InvalidParameter {
        name: "variant",
        reason: reason.to_string(),
    }
}

/// Construct an empty filter matching `descriptor`.
pub fn construct(descriptor: &FilterDescriptor) -> Result<Box<dyn MembershipFilter>, FilterError> {
    let seed = descriptor.seed;
    Ok(match descriptor.params.clone() {
        VariantParams::Standard { m, k } => Box::new(StandardBloomFilter::new(m, k, seed)?),
        VariantParams::Counting { m, k } => Box::new(CountingBloomFilter::new(m, k, seed)?),
        VariantParams::Spectral {
            m,
            k,
            width,
            minimum_increase,
        } => Box::new(SpectralBloomFilter::new(m, k, width, minimum_increase, seed)?),
        VariantParams::Adaptive { m, k, n_max } => {
            Box::new(AdaptiveBloomFilter::new(m, k, n_max, seed)?)
        }
        VariantParams::YesNo { p, q, r, k, k_prime } => {
            Box::new(YesNoFilter::new(p, q, r, k, k_prime, seed)?)
        }
        VariantParams::ViCbf {
            m,
            k,
            scheme,
            increments,
            count_width,
            sum_width,
        } => Box::new(VariableIncrementFilter::new(
            m,
            k,
            scheme,
            increments,
            count_width,
            sum_width,
            seed,
        )?),
        VariantParams::FpCbf {
            m,
            k,
            counter_width,
            fingerprint_bits,
        } => Box::new(FingerprintCountingFilter::new(
            m,
            k,
            counter_width,
            fingerprint_bits,
            seed,
        )?),
        VariantParams::Retouched { m, k } => Box::new(RetouchedFilter::new(m, k, seed)?),
        VariantParams::Acbf { level1, k, levels } => {
            Box::new(AccurateCountingFilter::new(level1, k, levels, seed)?)
        }
        VariantParams::Generalized { m, k_reset, k_set } => {
            Box::new(GeneralizedFilter::new(m, k_reset, k_set, seed)?)
        }
        VariantParams::MultiClass { m, class_ks } => {
            Box::new(MultiClassFilter::new(m, &class_ks, seed)?)
        }
        VariantParams::Complement { .. } => {
            return Err(unbuildable(
                "complement filters fix their membership at construction; \
                 build one programmatically from explicit member lists",
            ))
        }
        VariantParams::DlCbf {
            subtables,
            bucket_bits,
            remainder_bits,
            cells_per_bucket,
        } => Box::new(DLeftCountingFilter::new(
            subtables,
            bucket_bits,
            remainder_bits,
            cells_per_bucket,
            seed,
        )?),
        VariantParams::Bfah { m, k } => Box::new(AttachedValueFilter::new(m, k, seed)?),
        VariantParams::Matrix { .. } => {
            return Err(unbuildable(
                "matrix filters store documents, not byte items; \
                 use the library interface",
            ))
        }
        VariantParams::Compacted { .. } => {
            return Err(unbuildable(
                "compacted arrays are produced by compressing an existing \
                 bit array, not built empty",
            ))
        }
        VariantParams::Ohbf { total_bits, k } => Box::new(OneHashFilter::new(total_bits, k, seed)?),
        VariantParams::Ufbf {
            blocks,
            words_per_block,
            word_bits,
        } => Box::new(WordAlignedFilter::new(
            blocks,
            words_per_block,
            u64::from(word_bits),
            seed,
        )?),
        VariantParams::Dynamic { m, k, capacity } => {
            Box::new(DynamicFilter::new(m, k, capacity, seed)?)
        }
        VariantParams::Weighted { .. } => {
            return Err(unbuildable(
                "weighted filters need the per-item weight profile, which a \
                 geometry-only config cannot carry",
            ))
        }
        VariantParams::Iblt { cells, k, rho } => {
            Box::new(InvertibleFilter::new(cells, k, rho, seed)?)
        }
        VariantParams::Shifting { m, k, w_bar } => {
            Box::new(ShiftingFilter::new(m, k, w_bar, seed)?)
        }
        VariantParams::Deletable { m_prime, k, regions } => {
            Box::new(DeletableFilter::new(m_prime, k, regions, seed)?)
        }
        VariantParams::DistanceSensitive {
            dim,
            eps,
            delta,
            k,
            expected_members,
        } => Box::new(DistanceSensitiveFilter::new(
            dim,
            eps,
            delta,
            k,
            expected_members,
            seed,
        )?),
        VariantParams::Cuckoo {
            buckets,
            slots_per_bucket,
            fingerprint_bits,
            max_kicks,
        } => Box::new(CuckooFilter::new(
            buckets,
            slots_per_bucket,
            fingerprint_bits,
            max_kicks,
            seed,
        )?),
        VariantParams::Persistent { m, k, granularity } => {
            Box::new(PersistentFilter::new(m, k, granularity, seed)?)
        }
        VariantParams::Hdbf {
            m,
            k,
            width,
            q,
            lo,
            hi,
        } => Box::new(HighDimensionalFilter::new(m, k, width, q, lo, hi, seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bfsk::api::{Variant, ALL_VARIANTS};

    fn desc(params: VariantParams) -> FilterDescriptor {
        FilterDescriptor::new(params, 9)
    }

    #[test]
    fn built_filters_echo_their_descriptor() {
        let cases = vec![
            VariantParams::Standard { m: 512, k: 3 },
            VariantParams::Cuckoo {
                buckets: 64,
                slots_per_bucket: 4,
                fingerprint_bits: 12,
                max_kicks: 100,
            },
            VariantParams::Iblt {
                cells: 120,
                k: 4,
                rho: 20,
            },
        ];
        for params in cases {
            let filter = construct(&desc(params.clone())).unwrap();
            assert_eq!(filter.descriptor().params, params);
            assert_eq!(filter.descriptor().seed, 9);
        }
    }

    #[test]
    fn rejects_the_four_unbuildable_variants() {
        let rejected = [
            VariantParams::Complement {
                m: 64,
                k: 2,
                m_c: 64,
                k_c: 2,
            },
            VariantParams::Weighted {
                m: 64,
                k_avg: 3,
                k_max: 6,
            },
            VariantParams::Matrix {
                m: 64,
                k: 2,
                chunker: bfsk::api::params::ChunkerParams::Lines,
                threshold: 500,
            },
            VariantParams::Compacted { nb: 8, w: 8, bp: 16 },
        ];
        for params in rejected {
            let variant = params.variant();
            match construct(&desc(params)) {
                Err(FilterError::InvalidParameter { .. }) => {}
                Err(other) => panic!("{variant:?}: wrong error kind: {other}"),
                Ok(_) => panic!("{variant:?}: expected construction to be rejected"),
            }
        }
    }

    #[test]
    fn bad_geometry_surfaces_the_library_error() {
        match construct(&desc(VariantParams::Standard { m: 0, k: 3 })) {
            Err(FilterError::InvalidParameter { .. }) => {}
            other => panic!("expected an invalid-parameter error, got {:?}", other.err()),
        }
    }

    /// Every variant is either buildable here or deliberately listed as not;
    /// a new enum case cannot be forgotten silently because the match above
    /// is exhaustive, and this test keeps the counts in sync.
    #[test]
    fn coverage_accounting() {
        assert_eq!(ALL_VARIANTS.len(), 27);
        let unbuildable = [
            Variant::Complement,
            Variant::Weighted,
            Variant::Matrix,
            Variant::Compacted,
        ];
        assert_eq!(unbuildable.len(), 4);
    }
}
