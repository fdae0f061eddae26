//! Workload execution shared by the subcommands: build a filter from config,
//! push the insertion stream through it, optionally remove a prefix, and
//! measure either the false-positive rate or query throughput.

use std::collections::HashSet;
use std::time::Instant;

use bfsk::analysis::{
    clopper_pearson, empirical_fpp, generate_stream, predicted_fpp_for, StreamKind,
};
use bfsk::api::MembershipFilter;

use crate::config::RunConfig;
use crate::construct::construct;
use crate::error::CliError;
use crate::report::{hash_count, ReportRow};

pub struct BuiltFilter {
    pub filter: Box<dyn MembershipFilter>,
    /// Every item that was inserted, in stream order (including any that were
    /// removed again); probe generation must avoid all of them.
    pub stream: Vec<Vec<u8>>,
    /// Items still in the filter after the removal phase.
    pub live: u64,
    pub workload_seed: u64,
}

/// Construct the filter and run the insert / remove phases of the workload.
pub fn build_with_workload(
    config: &RunConfig,
    seed_override: Option<u64>,
) -> Result<BuiltFilter, CliError> {
    config.validate()?;
    let workload_seed = seed_override.unwrap_or(config.workload.seed);
    let mut filter = construct(&config.filter)?;
    let stream = generate_stream(
        StreamKind::UniformUnique,
        config.workload.insertions,
        workload_seed,
    )?;
    for item in &stream {
        filter.insert(item)?;
    }
    for item in &stream[..config.workload.removals] {
        filter.remove(item)?;
    }
    let live = (config.workload.insertions - config.workload.removals) as u64;
    Ok(BuiltFilter {
        filter,
        stream,
        live,
        workload_seed,
    })
}

fn base_row(config: &RunConfig, built: &BuiltFilter) -> ReportRow {
    let bits = built.filter.allocated_bits();
    ReportRow {
        variant: config.filter.variant().name().to_string(),
        m: bits,
        k: hash_count(&config.filter.params),
        n: built.live,
        bits_per_element: bits as f64 / built.live.max(1) as f64,
        predicted_fpp: None,
        measured_fpp: None,
        ci_lo: None,
        ci_hi: None,
        throughput: None,
    }
}

/// Measure the false-positive rate against non-member probes and attach the
/// closed-form prediction when the registry has one. Fully deterministic for
/// a given (config, seed).
pub fn bench_fpp(config: &RunConfig, seed_override: Option<u64>) -> Result<ReportRow, CliError> {
    let built = build_with_workload(config, seed_override)?;
    let members: HashSet<Vec<u8>> = built.stream.iter().cloned().collect();
    let probes = config.workload.probes;
    let positives = empirical_fpp(
        built.filter.as_ref(),
        &members,
        probes,
        built.workload_seed,
    );
    let (ci_lo, ci_hi) = clopper_pearson(positives, probes, 0.95)?;
    let mut row = base_row(config, &built);
    row.predicted_fpp = predicted_fpp_for(&config.filter, built.live)?;
    row.measured_fpp = Some(positives as f64 / probes as f64);
    row.ci_lo = Some(ci_lo);
    row.ci_hi = Some(ci_hi);
    Ok(row)
}

/// Measure query throughput over fresh probe labels. The throughput cell is
/// wall-clock and varies between machines; everything else in the row is
/// deterministic.
pub fn bench_throughput(
    config: &RunConfig,
    seed_override: Option<u64>,
) -> Result<ReportRow, CliError> {
    let built = build_with_workload(config, seed_override)?;
    let probes = config.workload.probes;
    let labels: Vec<Vec<u8>> = (0..probes)
        .map(|i| format!("probe-{}-{i}", built.workload_seed).into_bytes())
        .collect();
    let started = Instant::now();
    let mut positives = 0u64;
    for label in &labels {
        if built.filter.query(label).is_present() {
            positives += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    std::hint::black_box(positives);
    let mut row = base_row(config, &built);
    row.predicted_fpp = predicted_fpp_for(&config.filter, built.live)?;
    row.throughput = Some(probes as f64 / elapsed.max(f64::EPSILON));
    Ok(row)
}
