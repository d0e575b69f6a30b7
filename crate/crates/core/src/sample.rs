//! The three oversampling sorts.
//!
//! GSD picks a regular, deterministic sample from each locally sorted block;
//! GER draws the sample uniformly at random but otherwise follows the same
//! skeleton (local sort, sample sort, splitter broadcast, split, route,
//! p-way merge). GVR also samples randomly but splits the *unsorted* input,
//! packs keys by destination to keep communication coarse, and sorts locally
//! only after routing. All three sort the sample with the bitonic network
//! on the same worker team.

use std::sync::Arc;

use crate::algo::{SortConfig, SortReport, Sorter};
use crate::bsp::{run_team, ExchangePlan, Worker};
use crate::kernels::{kway_merge, pack_by_destination, split_by_splitters, sr4};
use crate::network::{btn_schedule, network_pass};
use crate::rng::SplitMix64;
use crate::types::{Key, KeyBlock, SplitterSet};
use crate::{BspError, SortError};

/// Default regularity `ω_n = max(1, ⌈lg lg n⌉)`.
pub fn default_omega(n: usize) -> f64 {
    if n < 4 {
        return 1.0;
    }
    let llg = (n as f64).log2().log2().ceil();
    llg.max(1.0)
}

/// Resolved sampling parameters for one run.
#[derive(Debug, Clone)]
pub struct SamplingParams {
    pub omega: f64,
    /// `r = ⌈ω_n⌉`, the regular oversampling knob.
    pub regularity: u64,
    /// Oversampling factor `s`: splitters sit `s` apart in the sorted sample.
    pub oversample: u64,
    pub epsilon: f64,
    pub rho: f64,
    pub seed: u64,
}

/// `k` distinct positions drawn uniformly from `[0, n_total)`, sorted
/// ascending. Deterministic for a given seed (Floyd's algorithm over the
/// SplitMix64 stream).
pub fn sample_positions(n_total: u64, k: u64, seed: u64) -> Result<Vec<u64>, SortError> {
    if k > n_total {
        return Err(SortError::Config(format!(
            "cannot draw {k} distinct positions from {n_total}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut chosen = std::collections::BTreeSet::new();
    for j in (n_total - k)..n_total {
        let t = rng.next_below(j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    Ok(chosen.into_iter().collect())
}

/// Picks the `(i·stride)`-th smallest sample keys (1-indexed, `i = 1..p-1`)
/// as splitters, routes them to worker 0 and broadcasts the assembled set.
/// Indices past the end of the sample clamp to its maximum.
fn select_splitters(
    w: &mut Worker<'_>,
    my_sorted_sample: &[Key],
    stride: u64,
) -> Result<SplitterSet, BspError> {
    let p = w.team_size();
    let sizes = w.gather_counters(vec![my_sorted_sample.len() as u64])?;
    let lens: Vec<u64> = sizes.iter().map(|row| row[0]).collect();
    let total: u64 = lens.iter().sum();
    let my_start: u64 = lens[..w.id()].iter().sum();
    let my_end = my_start + lens[w.id()];

    let mut mine = Vec::new();
    for i in 1..p as u64 {
        let pos = (i * stride).min(total) - 1;
        if pos >= my_start && pos < my_end {
            mine.push(my_sorted_sample[(pos - my_start) as usize]);
        }
    }
    let mut outgoing: Vec<Vec<Key>> = (0..p).map(|_| Vec::new()).collect();
    outgoing[0] = mine;
    let received = w.all_to_all(outgoing)?;
    // Sample blocks are globally ordered by worker id, so concatenating the
    // contributions in sender order keeps the splitters sorted.
    let collected = (w.id() == 0).then(|| received.into_iter().flatten().collect::<Vec<Key>>());
    let splitters = w.broadcast(0, collected)?;
    SplitterSet::new(splitters).map_err(|e| BspError::Protocol(e.to_string()))
}

/// Split a sorted block around the splitters, exchange the buckets, and
/// p-way merge what arrives. Returns the merged block and its size.
fn route_and_merge(
    w: &mut Worker<'_>,
    local: &[Key],
    splitters: &SplitterSet,
) -> Result<(Vec<Key>, usize), BspError> {
    let p = w.team_size();
    let bounds = split_by_splitters(local, splitters);
    let outgoing: Vec<Vec<Key>> = (0..p)
        .map(|j| local[bounds[j]..bounds[j + 1]].to_vec())
        .collect();
    let received = w.all_to_all(outgoing)?;
    let got: usize = received.iter().map(|b| b.len()).sum();
    Ok((kway_merge(&received), got))
}

struct WorkerOut {
    block: Vec<Key>,
    received: usize,
    splitters: Vec<Key>,
}

fn finish(
    name: &str,
    out: Vec<WorkerOut>,
    stages: usize,
    sampling: SamplingParams,
    warnings: Vec<String>,
) -> SortReport {
    debug_assert!(
        out.windows(2).all(|w| w[0].splitters == w[1].splitters),
        "{name}: broadcast splitter copies diverged"
    );
    let splitters = out.first().map(|o| o.splitters.clone());
    let max_received = out.iter().map(|o| o.received).max().unwrap_or(0);
    SortReport {
        blocks: out.into_iter().map(|o| KeyBlock::sorted(o.block)).collect(),
        stages,
        splitters,
        max_received,
        sampling: Some(sampling),
        warnings,
    }
}

/// Degenerate team sizes shared by all three sorts: `p = 1` falls back to
/// the serial sort, and the sample sort needs a power-of-two team.
fn common_preflight(name: &str, blocks: &[Vec<Key>]) -> Result<Option<SortReport>, SortError> {
    let p = blocks.len();
    if p == 1 {
        return Ok(Some(SortReport::serial(sr4(&blocks[0]))));
    }
    if !p.is_power_of_two() {
        return Err(SortError::Config(format!(
            "{name} sorts its sample with btn and needs a power-of-two worker count, got p={p}"
        )));
    }
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    if n == 0 {
        return Ok(Some(SortReport {
            blocks: blocks
                .iter()
                .map(|_| KeyBlock::sorted(Vec::new()))
                .collect(),
            stages: 0,
            splitters: None,
            max_received: 0,
            sampling: None,
            warnings: Vec::new(),
        }));
    }
    Ok(None)
}

fn resolve_omega(n: usize, cfg: &SortConfig) -> Result<f64, SortError> {
    let omega = cfg.omega.unwrap_or_else(|| default_omega(n));
    if omega.is_nan() || omega <= 0.0 {
        return Err(SortError::Config(format!(
            "omega must be positive, got {omega}"
        )));
    }
    Ok(omega)
}

/// Random oversampling factor: the explicit override must fit the input
/// (`sp - 1 <= n`); the derived default `⌈2ω²lg n⌉` is clamped to fit.
fn resolve_random_oversample(
    n: usize,
    p: usize,
    omega: f64,
    cfg: &SortConfig,
    warnings: &mut Vec<String>,
) -> Result<u64, SortError> {
    if let Some(s) = cfg.oversample {
        if s < 1 {
            return Err(SortError::Config(
                "oversampling factor must be at least 1".into(),
            ));
        }
        let sample = (p as u64)
            .checked_mul(s)
            .ok_or_else(|| SortError::Config(format!("oversampling factor {s} overflows")))?;
        if sample - 1 > n as u64 {
            return Err(SortError::Config(format!(
                "oversampling factor {s} needs sp-1 = {} sample keys but only {n} exist",
                sample - 1
            )));
        }
        return Ok(s);
    }
    let derived = (2.0 * omega * omega * (n as f64).log2()).ceil().max(1.0) as u64;
    let cap = ((n as u64 + 1) / p as u64).max(1);
    if derived > cap {
        warnings.push(format!(
            "oversampling factor clamped from {derived} to {cap} so the sample fits n={n}"
        ));
        return Ok(cap);
    }
    Ok(derived)
}

/// Deterministic regular oversampling sort.
pub struct Gsd;

/// Random oversampling sort on the regular-sampling skeleton.
pub struct Ger;

/// Random oversampling sort that splits unsorted input and sorts last.
pub struct Gvr;

impl Sorter for Gsd {
    fn name(&self) -> &'static str {
        "gsd"
    }

    fn requires_power_of_two(&self) -> bool {
        true
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, cfg: &SortConfig) -> Result<SortReport, SortError> {
        if let Some(report) = common_preflight("gsd", &blocks)? {
            return Ok(report);
        }
        let p = blocks.len();
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        let omega = resolve_omega(n, cfg)?;
        let regularity = omega.ceil().max(1.0) as u64;
        let mut warnings = Vec::new();
        let regime = (p * p) as f64 * omega * omega * (n as f64).log2().powi(2);
        if regime >= n as f64 {
            warnings.push(format!(
                "p²ω²lg²n = {regime:.0} is not small against n = {n}; the balance bound degrades"
            ));
        }
        let schedule = btn_schedule(p)?;
        let stride = regularity * p as u64;
        let sampling = SamplingParams {
            omega,
            regularity,
            oversample: stride,
            epsilon: cfg.epsilon,
            rho: cfg.rho,
            seed: cfg.seed,
        };
        let out = run_team(p, blocks, |w, block| {
            let local = sr4(&block);
            let sample = regular_sample(&local, stride);
            let sorted_sample = network_pass(w, &schedule, sample)?;
            let splitters = select_splitters(w, &sorted_sample, stride)?;
            let (merged, received) = route_and_merge(w, &local, &splitters)?;
            Ok(WorkerOut {
                block: merged,
                received,
                splitters: splitters.as_slice().to_vec(),
            })
        })?;
        Ok(finish("gsd", out, schedule.len(), sampling, warnings))
    }
}

/// The `rp - 1` evenly spaced keys that split a sorted block into `rp`
/// segments, plus the block maximum: key `i` of the sample sits at local
/// index `⌈len·i/(rp)⌉ - 1`.
fn regular_sample(local: &[Key], stride: u64) -> Vec<Key> {
    if local.is_empty() {
        return Vec::new();
    }
    let len = local.len() as u64;
    let mut sample: Vec<Key> = (1..stride)
        .map(|i| local[((len * i).div_ceil(stride) - 1) as usize])
        .collect();
    sample.push(*local.last().expect("nonempty"));
    sample
}

impl Sorter for Ger {
    fn name(&self) -> &'static str {
        "ger"
    }

    fn requires_power_of_two(&self) -> bool {
        true
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, cfg: &SortConfig) -> Result<SortReport, SortError> {
        if let Some(report) = common_preflight("ger", &blocks)? {
            return Ok(report);
        }
        let p = blocks.len();
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        let omega = resolve_omega(n, cfg)?;
        let mut warnings = Vec::new();
        let stride = resolve_random_oversample(n, p, omega, cfg, &mut warnings)?;
        let sample_size = (stride * p as u64 - 1).min(n as u64);
        let sample_seed = SplitMix64::new(cfg.seed).next_u64();
        let positions = Arc::new(sample_positions(n as u64, sample_size, sample_seed)?);
        let schedule = btn_schedule(p)?;
        let sampling = SamplingParams {
            omega,
            regularity: omega.ceil().max(1.0) as u64,
            oversample: stride,
            epsilon: cfg.epsilon,
            rho: cfg.rho,
            seed: cfg.seed,
        };

        let inputs = with_offsets(blocks);
        let out = run_team(p, inputs, |w, (block, offset)| {
            let local = sr4(&block);
            let sample = extract_positions(&local, offset, &positions);
            let sorted_sample = network_pass(w, &schedule, sample)?;
            let splitters = select_splitters(w, &sorted_sample, stride)?;
            let (merged, received) = route_and_merge(w, &local, &splitters)?;
            Ok(WorkerOut {
                block: merged,
                received,
                splitters: splitters.as_slice().to_vec(),
            })
        })?;
        Ok(finish("ger", out, schedule.len(), sampling, warnings))
    }
}

impl Sorter for Gvr {
    fn name(&self) -> &'static str {
        "gvr"
    }

    fn requires_power_of_two(&self) -> bool {
        true
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, cfg: &SortConfig) -> Result<SortReport, SortError> {
        if let Some(report) = common_preflight("gvr", &blocks)? {
            return Ok(report);
        }
        let p = blocks.len();
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        let omega = resolve_omega(n, cfg)?;
        let mut warnings = Vec::new();
        let stride = resolve_random_oversample(n, p, omega, cfg, &mut warnings)?;
        let sample_size = (stride * p as u64 - 1).min(n as u64);
        let sample_seed = SplitMix64::new(cfg.seed).next_u64();
        let positions = Arc::new(sample_positions(n as u64, sample_size, sample_seed)?);
        let schedule = btn_schedule(p)?;
        let sampling = SamplingParams {
            omega,
            regularity: omega.ceil().max(1.0) as u64,
            oversample: stride,
            epsilon: cfg.epsilon,
            rho: cfg.rho,
            seed: cfg.seed,
        };

        let inputs = with_offsets(blocks);
        let out = run_team(p, inputs, |w, (block, offset)| {
            // Splitting precedes any local sort: only the sample share is
            // sorted before the network pass.
            let sample = sr4(&extract_positions(&block, offset, &positions));
            let sorted_sample = network_pass(w, &schedule, sample)?;
            let splitters = select_splitters(w, &sorted_sample, stride)?;
            let (packed, counts) = pack_by_destination(&block, &splitters);
            // Publish the count rows so everyone can check the exchange
            // against the full routing plan.
            let row: Vec<u64> = counts.iter().map(|&c| c as u64).collect();
            let rows = w.gather_counters(row)?;
            let plan = ExchangePlan::from_rows(rows.iter().map(|r| (**r).clone()).collect())?;
            let mut outgoing = Vec::with_capacity(w.team_size());
            let mut off = 0usize;
            for &c in &counts {
                outgoing.push(packed[off..off + c].to_vec());
                off += c;
            }
            let received = w.all_to_all(outgoing)?;
            let received_total: usize = received.iter().map(|b| b.len()).sum();
            if received_total as u64 != plan.column_sum(w.id()) {
                return Err(crate::BspError::Protocol(format!(
                    "worker {} received {received_total} keys, plan says {}",
                    w.id(),
                    plan.column_sum(w.id())
                )));
            }
            let concatenated: Vec<Key> = received.into_iter().flatten().collect();
            let merged = sr4(&concatenated);
            let splitters = splitters.as_slice().to_vec();
            Ok(WorkerOut {
                block: merged,
                received: received_total,
                splitters,
            })
        })?;
        Ok(finish("gvr", out, schedule.len(), sampling, warnings))
    }
}

fn with_offsets(blocks: Vec<Vec<Key>>) -> Vec<(Vec<Key>, usize)> {
    let mut offset = 0usize;
    blocks
        .into_iter()
        .map(|b| {
            let here = offset;
            offset += b.len();
            (b, here)
        })
        .collect()
}

/// Keys of `block` at the global `positions` that fall inside
/// `[offset, offset + len)`.
fn extract_positions(block: &[Key], offset: usize, positions: &[u64]) -> Vec<Key> {
    let lo = positions.partition_point(|&q| q < offset as u64);
    let hi = positions.partition_point(|&q| q < (offset + block.len()) as u64);
    positions[lo..hi]
        .iter()
        .map(|&q| block[(q - offset as u64) as usize])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::distribute;
    use crate::model::gsd_balance_bound;

    fn seeded(n: usize, seed: u64) -> Vec<Key> {
        let mut rng = SplitMix64::new(seed);
        (0..n).map(|_| rng.next_key()).collect()
    }

    #[test]
    fn default_omega_values() {
        assert_eq!(default_omega(0), 1.0);
        assert_eq!(default_omega(4), 1.0);
        assert_eq!(default_omega(16), 2.0); // lg lg 16 = 2
        assert_eq!(default_omega(1 << 17), 5.0); // lg 17 ≈ 4.09 rounds up
        assert_eq!(default_omega(1 << 20), 5.0);
    }

    #[test]
    fn positions_frozen_vector() {
        // Reference vector generated once from the SplitMix64 stream.
        assert_eq!(
            sample_positions(100, 10, 1).unwrap(),
            vec![0, 7, 10, 32, 50, 58, 59, 71, 81, 94]
        );
    }

    #[test]
    fn positions_edges() {
        assert_eq!(sample_positions(10, 0, 3).unwrap(), Vec::<u64>::new());
        assert_eq!(
            sample_positions(10, 10, 9).unwrap(),
            (0..10).collect::<Vec<u64>>()
        );
        assert!(sample_positions(5, 6, 1).is_err());
    }

    #[test]
    fn positions_are_distinct_and_in_range() {
        let pos = sample_positions(1000, 400, 77).unwrap();
        assert_eq!(pos.len(), 400);
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(pos.iter().all(|&q| q < 1000));
    }

    #[test]
    fn gsd_hand_trace_n16() {
        let blocks = vec![
            vec![1, 3, 5, 7, 9, 11, 13, 15],
            vec![2, 4, 6, 8, 10, 12, 14, 16],
        ];
        let cfg = SortConfig {
            omega: Some(1.0),
            ..SortConfig::default()
        };
        let report = Gsd.sort(blocks, &cfg).unwrap();
        assert_eq!(report.splitters.as_deref(), Some(&[8][..]));
        assert_eq!(report.blocks[0].keys, (1..=8).collect::<Vec<Key>>());
        assert_eq!(report.blocks[1].keys, (9..=16).collect::<Vec<Key>>());
        assert_eq!(report.max_received, 8);
    }

    #[test]
    fn gsd_constant_input_sorts() {
        let blocks = vec![vec![7; 64]; 4];
        let report = Gsd.sort(blocks, &SortConfig::default()).unwrap();
        assert_eq!(report.concatenated(), vec![7; 256]);
    }

    #[test]
    fn gsd_matches_oracle_with_balance() {
        let n = 1 << 16;
        let keys = seeded(n, 2024);
        let mut expect = keys.clone();
        expect.sort_unstable();
        let p = 8;
        let report = Gsd
            .sort(distribute(&keys, p), &SortConfig::default())
            .unwrap();
        assert_eq!(report.concatenated(), expect);
        let bound = gsd_balance_bound(n, p, default_omega(n));
        assert!(
            report.max_received <= bound,
            "max bucket {} above bound {bound}",
            report.max_received
        );
    }

    #[test]
    fn gsd_single_worker_and_empty() {
        let report = Gsd
            .sort(vec![vec![3, 1, 2]], &SortConfig::default())
            .unwrap();
        assert_eq!(report.concatenated(), vec![1, 2, 3]);
        let report = Gsd
            .sort(vec![Vec::new(); 4], &SortConfig::default())
            .unwrap();
        assert_eq!(report.total_keys(), 0);
    }

    #[test]
    fn sample_sorts_reject_non_power_of_two_teams() {
        for sorter in [&Gsd as &dyn Sorter, &Ger, &Gvr] {
            let err = sorter
                .sort(vec![vec![1], vec![2], vec![3]], &SortConfig::default())
                .unwrap_err();
            assert!(matches!(err, SortError::Config(_)), "{}", sorter.name());
        }
    }

    #[test]
    fn gsd_deterministic_splitters() {
        let keys = seeded(4096, 31);
        let run = || {
            Gsd.sort(distribute(&keys, 4), &SortConfig::default())
                .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.splitters, b.splitters);
        assert_eq!(a.concatenated(), b.concatenated());
    }

    #[test]
    fn ger_exact_quantiles_when_sample_is_everything() {
        // n = sp - 1 with s = 64, p = 4: the sample covers every key, so the
        // splitters are exact quantiles and buckets sit within one key of
        // (n - p + 1) / p.
        let n = 255;
        let mut keys: Vec<Key> = (0..n as Key).collect();
        // Deterministic shuffle.
        let mut rng = SplitMix64::new(5);
        for i in (1..keys.len()).rev() {
            let j = rng.next_below(i as u64 + 1) as usize;
            keys.swap(i, j);
        }
        let cfg = SortConfig {
            oversample: Some(64),
            ..SortConfig::default()
        };
        let report = Ger.sort(distribute(&keys, 4), &cfg).unwrap();
        let mut expect = keys;
        expect.sort_unstable();
        assert_eq!(report.concatenated(), expect);
        let quota = (n - 4 + 1) / 4; // 63
        for b in &report.blocks {
            assert!(
                b.len() + 1 >= quota && b.len() <= quota + 1,
                "bucket {} outside {}±1",
                b.len(),
                quota
            );
        }
    }

    #[test]
    fn ger_rejects_infeasible_explicit_oversample() {
        let err = Ger
            .sort(
                distribute(&seeded(100, 1), 4),
                &SortConfig {
                    oversample: Some(1000),
                    ..SortConfig::default()
                },
            )
            .unwrap_err();
        assert!(matches!(err, SortError::Config(_)));
    }

    #[test]
    fn ger_clamps_default_oversample_on_small_inputs() {
        let keys = seeded(100, 12);
        let mut expect = keys.clone();
        expect.sort_unstable();
        let report = Ger
            .sort(distribute(&keys, 8), &SortConfig::default())
            .unwrap();
        assert_eq!(report.concatenated(), expect);
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn ger_matches_oracle() {
        let keys = seeded(1 << 15, 99);
        let mut expect = keys.clone();
        expect.sort_unstable();
        let report = Ger
            .sort(distribute(&keys, 8), &SortConfig::default())
            .unwrap();
        assert_eq!(report.concatenated(), expect);
        assert_eq!(report.splitters.as_ref().map(|s| s.len()), Some(7));
    }

    #[test]
    fn gvr_idempotent_on_sorted_input_with_exact_quantiles() {
        let n = 255;
        let keys: Vec<Key> = (0..n as Key).collect();
        let blocks = distribute(&keys, 4);
        let cfg = SortConfig {
            oversample: Some(64),
            ..SortConfig::default()
        };
        let report = Gvr.sort(blocks.clone(), &cfg).unwrap();
        let got: Vec<Vec<Key>> = report.blocks.iter().map(|b| b.keys.clone()).collect();
        assert_eq!(got, blocks);
    }

    #[test]
    fn gvr_matches_oracle() {
        let keys = seeded(1 << 15, 123);
        let mut expect = keys.clone();
        expect.sort_unstable();
        let report = Gvr
            .sort(distribute(&keys, 8), &SortConfig::default())
            .unwrap();
        assert_eq!(report.concatenated(), expect);
    }

    #[test]
    fn random_sorts_handle_duplicates() {
        let blocks = vec![vec![5; 100], vec![5; 100], vec![5; 100], vec![5; 100]];
        for sorter in [&Ger as &dyn Sorter, &Gvr] {
            let report = sorter.sort(blocks.clone(), &SortConfig::default()).unwrap();
            assert_eq!(report.concatenated(), vec![5; 400], "{}", sorter.name());
        }
    }

    #[test]
    fn random_sorts_degenerate_to_serial_at_p1() {
        for sorter in [&Ger as &dyn Sorter, &Gvr] {
            let report = sorter
                .sort(vec![vec![3, 1, 2]], &SortConfig::default())
                .unwrap();
            assert_eq!(report.concatenated(), vec![1, 2, 3], "{}", sorter.name());
            assert_eq!(report.stages, 0);
        }
    }

    #[test]
    fn reports_carry_resolved_sampling_params() {
        let keys = seeded(4096, 8);
        let report = Gsd
            .sort(distribute(&keys, 4), &SortConfig::default())
            .unwrap();
        let params = report.sampling.expect("gsd resolves params");
        assert_eq!(params.regularity, default_omega(4096).ceil() as u64);
        assert_eq!(params.oversample, params.regularity * 4);

        let report = Ger
            .sort(distribute(&keys, 4), &SortConfig::default())
            .unwrap();
        let params = report.sampling.expect("ger resolves params");
        assert!(params.oversample >= 1);
        assert_eq!(params.seed, 1);
    }

    #[test]
    fn tiny_inputs_across_team_sizes() {
        for sorter in [&Gsd as &dyn Sorter, &Ger, &Gvr] {
            for p in [2usize, 4, 8] {
                let report = sorter
                    .sort(distribute(&[42], p), &SortConfig::default())
                    .unwrap();
                assert_eq!(report.concatenated(), vec![42], "{} p={p}", sorter.name());
            }
        }
    }
}
