//! Paired bit arrays over a fixed, fully known universe: one filter holds
//! the stored set, the other holds everything else, and an exact member
//! list (kept off to the side, e.g. in slower storage) settles the rare
//! queries both filters answer positively. Within the universe this makes
//! every answer definitive; the cost models are the two array sizes plus
//! the rate at which the exact list must be consulted.
//!
//! Queries are assumed to come from the universe the pair was built over.

use std::collections::BTreeSet;

use crate::api::{
    FilterDescriptor, FilterError, MembershipFilter, QueryOutcome, VariantParams,
};
use crate::classic::StandardBloomFilter;
use crate::hash::derive_seed;
use crate::support::invalid;

#[derive(Clone, Debug)]
pub struct ComplementFilter {
    member_side: StandardBloomFilter,
    complement_side: StandardBloomFilter,
    /// Exact stored set, consulted only when both sides answer positive.
    oracle: BTreeSet<Vec<u8>>,
    universe: u64,
    seed: u64,
}

impl ComplementFilter {
    /// Builds the pair over a universe given as the disjoint union of
    /// `members` (the stored set) and `non_members` (everything else).
    pub fn build<M, N>(
        m: u64,
        k: usize,
        m_c: u64,
        k_c: usize,
        seed: u64,
        members: M,
        non_members: N,
    ) -> Result<Self, FilterError>
    where
        M: IntoIterator,
        M::Item: AsRef<[u8]>,
        N: IntoIterator,
        N::Item: AsRef<[u8]>,
    {
        let mut member_side = StandardBloomFilter::new(m, k, seed)?;
        let mut complement_side = StandardBloomFilter::new(m_c, k_c, derive_seed(seed, 1))?;
        let mut oracle = BTreeSet::new();
        for item in members {
            let item = item.as_ref();
            member_side.insert(item)?;
            oracle.insert(item.to_vec());
        }
        let mut others = 0u64;
        for item in non_members {
            let item = item.as_ref();
            if oracle.contains(item) {
                return Err(invalid(
                    "non_members",
                    "the two halves of the universe must be disjoint",
                ));
            }
            complement_side.insert(item)?;
            others += 1;
        }
        let universe = oracle.len() as u64 + others;
        Ok(ComplementFilter {
            member_side,
            complement_side,
            oracle,
            universe,
            seed,
        })
    }

    pub fn universe_size(&self) -> u64 {
        self.universe
    }

    pub fn member_side(&self) -> &StandardBloomFilter {
        &self.member_side
    }

    pub fn complement_side(&self) -> &StandardBloomFilter {
        &self.complement_side
    }
}

impl MembershipFilter for ComplementFilter {
    fn insert(&mut self, _item: &[u8]) -> Result<(), FilterError> {
        // admitting an item would also require deleting it from the
        // complement side, which a plain bit array cannot do
        Err(FilterError::CapabilityUnsupported(
            "insertion after construction",
        ))
    }

    fn query(&self, item: &[u8]) -> QueryOutcome {
        if !self.member_side.query(item).is_present() {
            return QueryOutcome::absent();
        }
        if !self.complement_side.query(item).is_present() {
            // positively not in the complement, so (within the universe)
            // positively in the stored set
            return QueryOutcome::present_confirmed();
        }
        // both sides positive: the exact list decides
        if self.oracle.contains(item) {
            QueryOutcome::present_confirmed().via_oracle()
        } else {
            QueryOutcome::absent().via_oracle()
        }
    }

    fn descriptor(&self) -> FilterDescriptor {
        FilterDescriptor::new(
            VariantParams::Complement {
                m: self.member_side.m(),
                k: self.member_side.k(),
                m_c: self.complement_side.m(),
                k_c: self.complement_side.k(),
            },
            self.seed,
        )
    }

    fn tracked_items(&self) -> u64 {
        self.oracle.len() as u64
    }

    fn allocated_bits(&self) -> u64 {
        // the exact list lives off to the side and is not counted here
        self.member_side.m() + self.complement_side.m()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split_universe(n: usize) -> (Vec<String>, Vec<String>) {
        let members = (0..n / 2).map(|i| format!("member-{i}")).collect();
        let others = (0..n - n / 2).map(|i| format!("other-{i}")).collect();
        (members, others)
    }

    #[test]
    fn every_universe_query_is_answered_exactly() {
        let (members, others) = split_universe(400);
        // deliberately tiny arrays so both sides collide often
        let f = ComplementFilter::build(256, 2, 256, 2, 9, &members, &others).unwrap();
        assert_eq!(f.universe_size(), 400);
        assert_eq!(f.tracked_items(), 200);

        let mut consulted = 0u64;
        for item in &members {
            let out = f.query(item.as_bytes());
            assert!(out.is_present(), "member reported absent");
            assert!(!out.maybe_false_positive, "members are always definitive");
            assert!(out.is_well_formed());
            consulted += u64::from(out.needs_oracle);
        }
        for item in &others {
            let out = f.query(item.as_bytes());
            assert!(!out.is_present(), "non-member reported present");
            assert!(out.is_well_formed());
            consulted += u64::from(out.needs_oracle);
        }
        assert!(
            consulted > 0,
            "arrays this small must produce joint positives"
        );
    }

    #[test]
    fn negative_member_side_short_circuits_without_the_oracle() {
        let (members, others) = split_universe(40);
        let f = ComplementFilter::build(4096, 4, 4096, 4, 3, &members, &others).unwrap();
        // with arrays this large, some non-member misses the member side
        let miss = others
            .iter()
            .find(|item| {
                let out = f.query(item.as_bytes());
                !out.is_present() && !out.needs_oracle
            })
            .expect("some non-member should short-circuit");
        let out = f.query(miss.as_bytes());
        assert!(!out.maybe_false_positive);
    }

    #[test]
    fn joint_membership_in_both_halves_is_rejected() {
        let err = ComplementFilter::build(64, 2, 64, 2, 0, [b"x"], [b"x"]).unwrap_err();
        assert!(matches!(err, FilterError::InvalidParameter { .. }));
    }

    #[test]
    fn the_partition_is_sealed_after_construction() {
        let (members, others) = split_universe(10);
        let mut f = ComplementFilter::build(64, 2, 64, 2, 0, &members, &others).unwrap();
        assert!(matches!(
            f.insert(b"new"),
            Err(FilterError::CapabilityUnsupported(_))
        ));
        assert!(f.state_words().is_err(), "no word snapshot for this pair");
    }
}
