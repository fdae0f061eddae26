//! Closed-form false-positive rates (and related analytic quantities) for
//! every variant that has one.
//!
//! Each [`Formula`] value is a fully parameterized expression; [`Formula::evaluate`]
//! validates the parameters and returns the predicted rate. Probability-valued
//! formulas always land in `[0, 1]`; the cuckoo space-cost entry returns bits
//! per item instead and is the one non-probability member of the registry.

use super::{invalid, AnalysisError};

/// Which algebraic form of the classic bit-array rate to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardForm {
    /// (1 - (1 - 1/m)^(kn))^k
    Exact,
    /// (1 - e^(-kn/m))^k
    Exponential,
}

/// The deletability expression is printed in complemented form in places; both
/// readings are exposed side by side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeletableForm {
    /// (1 - (1 - p_c)^(m'/r))^k — the probability that every one of the
    /// item's regions is collision-tainted.
    AsPublished,
    /// 1 minus the above: the probability that at least one position can be
    /// cleared, i.e. the item is deletable.
    Complemented,
}

/// The analytic rate registry: one entry per variant family.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    /// Classic k-hash bit array of m bits holding n items.
    Standard {
        m: u64,
        k: u64,
        n: u64,
        form: StandardForm,
    },
    /// Product of the yes-filter rate (p bits, k hashes) and the per-no-filter
    /// rate (q bits, k' hashes), both at load n.
    YesNo {
        p: u64,
        q: u64,
        k: u64,
        k_prime: u64,
        n: u64,
    },
    /// Count-and-sum cells over an increment set of size l. `cap` truncates
    /// the collision sum; the default extends it until the binomial tail
    /// drops below 1e-9.
    BhScheme {
        m: u64,
        k: u64,
        n: u64,
        l: u64,
        cap: Option<u64>,
    },
    /// Sum-only cells over an increment set of size l (three-term expansion).
    ViIncrement { m: u64, k: u64, n: u64, l: u64 },
    /// Counter cells carrying an XOR fingerprint field of the given width.
    FingerprintCounting {
        cells: u64,
        k: u64,
        n: u64,
        fingerprint_bits: u32,
    },
    /// False-positive rate surviving after `cleared` single-bit clearings of a
    /// filter whose set-bit fraction is `set_fraction`.
    RetouchedClearing {
        base_fpp: f64,
        set_fraction: f64,
        m: u64,
        k: u64,
        cleared: u64,
    },
    /// Rate of the counter encoding at its size-optimal first level 4m - kn.
    AcbfOptimalLevel { m: u64, k: u64, n: u64 },
    /// Reset/set hash groups over a bit array whose zero fraction is known.
    Generalized {
        m: u64,
        k_reset: u64,
        k_set: u64,
        zero_fraction: f64,
    },
    /// Per-class rate: the queried class uses k_class hashes and the filter
    /// carries a mixed load of sum(p_i * k_i) expected set attempts.
    MultiClass {
        m: u64,
        k_class: u64,
        weighted_hash_load: f64,
    },
    /// Joint-positive rate of paired member/complement filters over a finite
    /// universe of n + n_c items.
    Complement {
        m: u64,
        k: u64,
        n: u64,
        m_c: u64,
        k_c: u64,
        n_c: u64,
    },
    /// Existence half plus offset half, with offset collisions over w_bar - 1
    /// possible shifts.
    Shifting { m: u64, k: u64, n: u64, w_bar: u64 },
    /// Union of ceil(n/capacity) sub-filters: full ones at load `capacity`
    /// plus the active remainder.
    DynamicGrowth {
        m: u64,
        k: u64,
        capacity: u64,
        n: u64,
    },
    /// Profile-weighted rate: sum of w_e * (1 - p0)^(k_e) with weights
    /// normalized internally; p0 is the probability a bit is still zero.
    WeightedAllocation {
        weights: Vec<f64>,
        ks: Vec<u64>,
        zero_probability: f64,
    },
    /// Probability around region-based deletability; see [`DeletableForm`].
    DeletableDeletability {
        m_prime: u64,
        k: u64,
        n: u64,
        regions: u64,
        form: DeletableForm,
    },
    /// Fingerprint bits divided by the achieved load factor: storage cost in
    /// bits per item (not a probability).
    CuckooSpaceCost {
        fingerprint_bits: u32,
        load_factor: f64,
    },
    /// Union of independent per-slot rates across `slots` covered time slots.
    PersistentRange { slot_fpp: f64, slots: u64 },
    /// Vector-quantized counting filter rate.
    HighDimensional { m: u64, k: u64, n: u64 },
}

/// ln(1 - 1/m), guarded for m >= 1.
fn ln_keep(m: u64) -> f64 {
    (-1.0 / m as f64).ln_1p()
}

/// (1 - 1/m)^e for a possibly huge exponent, via logs.
fn keep_pow(m: u64, e: f64) -> f64 {
    (e * ln_keep(m)).exp()
}

fn standard_rate(m: u64, k: u64, n: u64, form: StandardForm) -> f64 {
    let kn = (k * n) as f64;
    let zero = match form {
        StandardForm::Exact => keep_pow(m, kn),
        StandardForm::Exponential => (-kn / m as f64).exp(),
    };
    (1.0 - zero).powi(k as i32)
}

/// Binomial pmf terms P(X = j) for X ~ Bin(trials, 1/m), computed iteratively.
struct BinomialHits {
    trials: u64,
    m: f64,
    j: u64,
    term: f64,
}

impl BinomialHits {
    fn new(trials: u64, m: u64) -> Self {
        BinomialHits {
            trials,
            m: m as f64,
            j: 0,
            term: keep_pow(m, trials as f64),
        }
    }
}

impl Iterator for BinomialHits {
    type Item = (u64, f64);
    fn next(&mut self) -> Option<(u64, f64)> {
        if self.j > self.trials {
            return None;
        }
        let out = (self.j, self.term);
        self.term *= (self.trials - self.j) as f64 / ((self.j + 1) as f64 * (self.m - 1.0));
        self.j += 1;
        Some(out)
    }
}

impl Formula {
    /// Evaluate the expression. Probability-valued formulas return a rate in
    /// `[0, 1]`; [`Formula::CuckooSpaceCost`] returns bits per item.
    pub fn evaluate(&self) -> Result<f64, AnalysisError> {
        match self {
            Formula::Standard { m, k, n, form } => {
                require_geometry(*m, *k)?;
                Ok(standard_rate(*m, *k, *n, *form))
            }
            Formula::YesNo { p, q, k, k_prime, n } => {
                require_geometry(*p, *k)?;
                require_geometry(*q, *k_prime)?;
                let yes = standard_rate(*p, *k, *n, StandardForm::Exponential);
                let no = standard_rate(*q, *k_prime, *n, StandardForm::Exponential);
                Ok(yes * no)
            }
            Formula::BhScheme { m, k, n, l, cap } => {
                require_geometry(*m, *k)?;
                if *m < 2 {
                    return Err(invalid("m", "count-and-sum cells need m >= 2"));
                }
                if *l < 2 {
                    return Err(invalid("l", "increment set needs at least two values"));
                }
                let trials = k * n;
                let pass_one = (*l as f64 - 1.0) / *l as f64;
                let mut passed = 0.0;
                let mut mass = 0.0;
                for (j, p_j) in BinomialHits::new(trials, *m) {
                    if let Some(h) = cap {
                        if j > *h {
                            break;
                        }
                    } else if mass >= 1.0 - 1e-9 {
                        break;
                    }
                    passed += p_j * pass_one.powf(j as f64);
                    mass += p_j;
                }
                Ok(((1.0 - passed).max(0.0)).powi(*k as i32))
            }
            Formula::ViIncrement { m, k, n, l } => {
                require_geometry(*m, *k)?;
                if *m < 2 {
                    return Err(invalid("m", "sum cells need m >= 2"));
                }
                if *l < 2 {
                    return Err(invalid("l", "increment set needs at least two values"));
                }
                let lf = *l as f64;
                let mut hits = BinomialHits::new(k * n, *m);
                let t0 = hits.next().map(|(_, t)| t).unwrap_or(0.0);
                let t1 = hits.next().map(|(_, t)| t).unwrap_or(0.0);
                let t2 = hits.next().map(|(_, t)| t).unwrap_or(0.0);
                let inner = 1.0
                    - t0
                    - (lf - 1.0) / lf * t1
                    - (lf - 1.0) * (lf + 1.0) / (6.0 * lf * lf) * t2;
                Ok(inner.clamp(0.0, 1.0).powi(*k as i32))
            }
            Formula::FingerprintCounting {
                cells,
                k,
                n,
                fingerprint_bits,
            } => {
                require_geometry(*cells, *k)?;
                if *cells < 2 {
                    return Err(invalid("cells", "need at least two cells"));
                }
                if !(1..=32).contains(fingerprint_bits) {
                    return Err(invalid("fingerprint_bits", "width must be in 1..=32"));
                }
                let space = (1u64 << fingerprint_bits) as f64;
                let mut hits = BinomialHits::new(k * n, *cells);
                let t0 = hits.next().map(|(_, t)| t).unwrap_or(0.0);
                let t1 = hits.next().map(|(_, t)| t).unwrap_or(0.0);
                let pass = 1.0 - t0 - (space - 1.0) / space * t1;
                Ok(pass.clamp(0.0, 1.0).powi(*k as i32))
            }
            Formula::RetouchedClearing {
                base_fpp,
                set_fraction,
                m,
                k,
                cleared,
            } => {
                require_geometry(*m, *k)?;
                require_probability("base_fpp", *base_fpp)?;
                if !(*set_fraction > 0.0 && *set_fraction <= 1.0) {
                    return Err(invalid("set_fraction", "must be in (0, 1]"));
                }
                let set_bits = set_fraction * *m as f64;
                if set_bits < 1.0 {
                    return Err(invalid("set_fraction", "filter has no set bits to clear"));
                }
                let survival = (1.0 - 1.0 / set_bits).powi(*k as i32);
                Ok(base_fpp * survival.powf(*cleared as f64))
            }
            Formula::AcbfOptimalLevel { m, k, n } => {
                require_geometry(*m, *k)?;
                let kn = k * n;
                if 4 * m <= kn {
                    return Err(invalid("m", "optimal first level 4m - kn must be positive"));
                }
                let level1 = 4 * m - kn;
                Ok((1.0 - keep_pow(level1, kn as f64)).powi(*k as i32))
            }
            Formula::Generalized {
                m,
                k_reset,
                k_set,
                zero_fraction,
            } => {
                require_geometry(*m, *k_set)?;
                require_geometry(*m, *k_reset)?;
                require_probability("zero_fraction", *zero_fraction)?;
                let q1 = generalized_reset_rate(*m, *k_reset);
                let q2 = generalized_set_rate(*m, *k_reset, *k_set);
                let l1 = *m as f64 * q1;
                let l2 = *m as f64 * q2;
                Ok(zero_fraction.powf(l1) * (1.0 - zero_fraction).powf(l2))
            }
            Formula::MultiClass {
                m,
                k_class,
                weighted_hash_load,
            } => {
                require_geometry(*m, *k_class)?;
                if !(*weighted_hash_load >= 0.0 && weighted_hash_load.is_finite()) {
                    return Err(invalid("weighted_hash_load", "must be finite and >= 0"));
                }
                Ok((1.0 - keep_pow(*m, *weighted_hash_load)).powi(*k_class as i32))
            }
            Formula::Complement {
                m,
                k,
                n,
                m_c,
                k_c,
                n_c,
            } => {
                require_geometry(*m, *k)?;
                require_geometry(*m_c, *k_c)?;
                let total = n + n_c;
                if total == 0 {
                    return Err(invalid("n", "universe must be non-empty"));
                }
                let f = standard_rate(*m, *k, *n, StandardForm::Exact);
                let f_c = standard_rate(*m_c, *k_c, *n_c, StandardForm::Exact);
                let p_s = *n as f64 / total as f64;
                let p_sc = *n_c as f64 / total as f64;
                Ok(p_sc * f + p_s * f_c)
            }
            Formula::Shifting { m, k, n, w_bar } => {
                require_geometry(*m, *k)?;
                if k % 2 != 0 {
                    return Err(invalid("k", "shift addressing needs an even hash count"));
                }
                if *w_bar < 2 {
                    return Err(invalid("w_bar", "offset range requires w_bar >= 2"));
                }
                let p = (-((n * k) as f64) / *m as f64).exp();
                let half = (k / 2) as i32;
                let existence = (1.0 - p).powi(half);
                let shifted = (1.0 - p + p * p / (*w_bar as f64 - 1.0)).powi(half);
                Ok(existence * shifted)
            }
            Formula::DynamicGrowth { m, k, capacity, n } => {
                require_geometry(*m, *k)?;
                if *capacity == 0 {
                    return Err(invalid("capacity", "sub-filter capacity must be positive"));
                }
                let full = n / capacity;
                let last = n - full * capacity;
                let f_full = standard_rate(*m, *k, *capacity, StandardForm::Exponential);
                let f_last = standard_rate(*m, *k, last, StandardForm::Exponential);
                Ok(1.0 - (1.0 - f_full).powf(full as f64) * (1.0 - f_last))
            }
            Formula::WeightedAllocation {
                weights,
                ks,
                zero_probability,
            } => {
                if weights.len() != ks.len() || weights.is_empty() {
                    return Err(invalid("weights", "need one weight per hash count"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(invalid("weights", "must be finite and >= 0"));
                }
                require_probability("zero_probability", *zero_probability)?;
                let total: f64 = weights.iter().sum();
                if total <= 0.0 {
                    return Err(invalid("weights", "must not all be zero"));
                }
                Ok(weights
                    .iter()
                    .zip(ks)
                    .map(|(w, k)| w / total * (1.0 - zero_probability).powf(*k as f64))
                    .sum())
            }
            Formula::DeletableDeletability {
                m_prime,
                k,
                n,
                regions,
                form,
            } => {
                require_geometry(*m_prime, *k)?;
                if *regions == 0 || m_prime % regions != 0 {
                    return Err(invalid("regions", "must divide the data-bit count"));
                }
                if *m_prime < 2 {
                    return Err(invalid("m_prime", "need at least two data bits"));
                }
                let mut hits = BinomialHits::new(k * n, *m_prime);
                let p0 = hits.next().map(|(_, t)| t).unwrap_or(0.0);
                let p1 = hits.next().map(|(_, t)| t).unwrap_or(0.0);
                let p_c = (1.0 - p0 - p1).max(0.0);
                let region_free = (1.0 - p_c).powf((m_prime / regions) as f64);
                let all_tainted = (1.0 - region_free).powi(*k as i32);
                Ok(match form {
                    DeletableForm::AsPublished => all_tainted,
                    DeletableForm::Complemented => 1.0 - all_tainted,
                })
            }
            Formula::CuckooSpaceCost {
                fingerprint_bits,
                load_factor,
            } => {
                if !(1..=32).contains(fingerprint_bits) {
                    return Err(invalid("fingerprint_bits", "width must be in 1..=32"));
                }
                if !(*load_factor > 0.0 && *load_factor <= 1.0) {
                    return Err(invalid("load_factor", "must be in (0, 1]"));
                }
                Ok(*fingerprint_bits as f64 / load_factor)
            }
            Formula::PersistentRange { slot_fpp, slots } => {
                require_probability("slot_fpp", *slot_fpp)?;
                Ok(1.0 - (1.0 - slot_fpp).powf(*slots as f64))
            }
            Formula::HighDimensional { m, k, n } => {
                require_geometry(*m, *k)?;
                Ok(standard_rate(*m, *k, *n, StandardForm::Exponential))
            }
        }
    }
}

fn require_geometry(m: u64, k: u64) -> Result<(), AnalysisError> {
    if m == 0 {
        return Err(invalid("m", "array size must be positive"));
    }
    if k == 0 {
        return Err(invalid("k", "at least one hash function is required"));
    }
    Ok(())
}

fn require_probability(name: &'static str, v: f64) -> Result<(), AnalysisError> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(invalid(name, "must be a probability in [0, 1]"));
    }
    Ok(())
}

/// Probability that a given bit is reset by one insertion with k_reset
/// clearing hashes: 1 - (1 - 1/m)^k_reset.
pub fn generalized_reset_rate(m: u64, k_reset: u64) -> f64 {
    1.0 - keep_pow(m, k_reset as f64)
}

/// Probability that a given bit is set by one insertion: hit by a setting
/// hash and missed by every clearing hash.
pub fn generalized_set_rate(m: u64, k_reset: u64, k_set: u64) -> f64 {
    (1.0 - keep_pow(m, k_set as f64)) * keep_pow(m, k_reset as f64)
}

/// The expected set-attempt load sum(n_i * p_i * k_i) over classes given as
/// (class size, presence probability, hash count).
pub fn multi_class_load(classes: &[(u64, f64, u64)]) -> f64 {
    classes
        .iter()
        .map(|(n, p, k)| *n as f64 * p * *k as f64)
        .sum()
}

/// Per-bit survival factor of clearing one uniformly chosen set bit.
pub fn retouched_survival(set_fraction: f64, m: u64, k: u64) -> f64 {
    (1.0 - 1.0 / (set_fraction * m as f64)).powi(k as i32)
}
