//! Equal-budget comparisons: size several variants to the same bits per
//! element and report geometry plus predicted rate for each.

use super::formula::{Formula, StandardForm};
use super::{invalid, AnalysisError};
use crate::api::{FilterDescriptor, VariantParams, ViScheme};

/// Variant families that can be sized from a bit budget alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetVariant {
    /// One bit per cell.
    Standard,
    /// Four-bit counters.
    Counting,
    /// Count-and-sum cells (4-bit count, 8-bit sum) over increments {2,3,4,5}.
    ViCbfBh,
}

impl BudgetVariant {
    /// Storage width of one cell in bits.
    pub fn bits_per_cell(self) -> u32 {
        match self {
            BudgetVariant::Standard => 1,
            BudgetVariant::Counting => 4,
            BudgetVariant::ViCbfBh => 12,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BudgetVariant::Standard => "standard",
            BudgetVariant::Counting => "counting",
            BudgetVariant::ViCbfBh => "vi-cbf",
        }
    }
}

/// One sized configuration in a budget sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetCell {
    pub variant: BudgetVariant,
    /// Human-readable family name.
    pub name: &'static str,
    /// Ready-to-construct shape for measurement runs.
    pub descriptor: FilterDescriptor,
    /// Number of cells allocated.
    pub cells: u64,
    /// Hash count in use.
    pub k: usize,
    /// Budget actually consumed (cells * width / n).
    pub bits_per_element: f64,
    /// Closed-form rate at load n.
    pub predicted_fpp: f64,
}

/// Size each requested variant to `bits_per_element * n` total bits and
/// predict its rate at load `n`.
///
/// With `k_override` unset every family takes its own occupancy-optimal hash
/// count `round(ln 2 * budget_bits / cell_width)`; setting it pins one hash
/// count across all families for like-for-like probing comparisons.
pub fn compare_budget(
    variants: &[BudgetVariant],
    bits_per_element: u64,
    n: u64,
    k_override: Option<usize>,
    seed: u64,
) -> Result<Vec<BudgetCell>, AnalysisError> {
    if bits_per_element == 0 {
        return Err(invalid("bits_per_element", "budget must be positive"));
    }
    if n == 0 {
        return Err(invalid("n", "sizing needs a positive load"));
    }
    let total_bits = bits_per_element * n;
    variants
        .iter()
        .map(|&variant| {
            let width = variant.bits_per_cell();
            let cells = total_bits / width as u64;
            if cells < 2 {
                return Err(invalid(
                    "bits_per_element",
                    format!("budget too small for {} cells", variant.name()),
                ));
            }
            let k = k_override.unwrap_or_else(|| {
                let per_item = bits_per_element as f64 / width as f64;
                (std::f64::consts::LN_2 * per_item).round().max(1.0) as usize
            });
            let (params, formula) = match variant {
                BudgetVariant::Standard => (
                    VariantParams::Standard { m: cells, k },
                    Formula::Standard {
                        m: cells,
                        k: k as u64,
                        n,
                        form: StandardForm::Exact,
                    },
                ),
                BudgetVariant::Counting => (
                    VariantParams::Counting { m: cells, k },
                    Formula::Standard {
                        m: cells,
                        k: k as u64,
                        n,
                        form: StandardForm::Exact,
                    },
                ),
                BudgetVariant::ViCbfBh => (
                    VariantParams::ViCbf {
                        m: cells,
                        k,
                        scheme: ViScheme::Bh,
                        increments: vec![2, 3, 4, 5],
                        count_width: 4,
                        sum_width: 8,
                    },
                    Formula::BhScheme {
                        m: cells,
                        k: k as u64,
                        n,
                        l: 4,
                        cap: None,
                    },
                ),
            };
            Ok(BudgetCell {
                variant,
                name: variant.name(),
                descriptor: FilterDescriptor::new(params, seed),
                cells,
                k,
                bits_per_element: (cells * width as u64) as f64 / n as f64,
                predicted_fpp: formula.evaluate()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [BudgetVariant; 3] = [
        BudgetVariant::Standard,
        BudgetVariant::Counting,
        BudgetVariant::ViCbfBh,
    ];

    #[test]
    fn sixteen_bit_budget_yields_the_expected_geometries() {
        let cells = compare_budget(&ALL, 16, 1_000, None, 7).unwrap();
        assert_eq!(cells[0].cells, 16_000);
        assert_eq!(cells[0].k, 11); // round(ln2 * 16)
        assert_eq!(cells[1].cells, 4_000);
        assert_eq!(cells[1].k, 3); // round(ln2 * 4)
        assert_eq!(cells[2].cells, 1_333);
        assert_eq!(cells[2].k, 1); // round(ln2 * 16/12)
        for c in &cells {
            assert!(c.bits_per_element <= 16.0);
            assert!(c.bits_per_element > 15.9, "{} wasted budget", c.name);
        }
    }

    #[test]
    fn increment_checks_beat_plain_counters_at_matched_hash_count() {
        // the separation that motivates spending 12 bits per cell: at 16
        // bits/element and k = 3 the count-and-sum cells predict a visibly
        // lower rate than 4-bit counters
        let cells = compare_budget(
            &[BudgetVariant::Counting, BudgetVariant::ViCbfBh],
            16,
            1_000,
            Some(3),
            7,
        )
        .unwrap();
        let counting = cells[0].predicted_fpp;
        let vi = cells[1].predicted_fpp;
        assert!((counting - 0.147).abs() < 0.01, "counting {counting}");
        assert!(vi < 0.10, "vi {vi}");
        assert!(vi < counting / 1.4, "no real separation: {vi} vs {counting}");
    }

    #[test]
    fn zero_budget_and_zero_load_are_rejected() {
        assert!(compare_budget(&ALL, 0, 10, None, 1).is_err());
        assert!(compare_budget(&ALL, 16, 0, None, 1).is_err());
    }

    #[test]
    fn descriptors_round_trip_the_sized_geometry() {
        let cells = compare_budget(&[BudgetVariant::Standard], 8, 500, None, 3).unwrap();
        match &cells[0].descriptor.params {
            VariantParams::Standard { m, k } => {
                assert_eq!(*m, 4_000);
                assert_eq!(*k, cells[0].k);
            }
            other => panic!("wrong shape: {other:?}"),
        }
        assert_eq!(cells[0].descriptor.seed, 3);
    }
}
