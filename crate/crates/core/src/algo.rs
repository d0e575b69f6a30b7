//! The sorting-strategy surface: every algorithm variant implements
//! [`Sorter`] and is registered by name in a [`SorterRegistry`], so callers
//! pick the variant at runtime from configuration.

use std::collections::BTreeMap;

use crate::kernels;
use crate::network::{Btn, Oet};
use crate::radix::ParallelRadix;
use crate::sample::{Ger, Gsd, Gvr};
use crate::types::{Key, KeyBlock};
use crate::SortError;

/// Tuning symbols shared by the algorithms. Worker count and key count are
/// implied by the input block layout.
#[derive(Debug, Clone)]
pub struct SortConfig {
    /// PRNG seed for every random choice the run makes.
    pub seed: u64,
    /// Oversampling regularity ω_n; `None` selects `max(1, ⌈lg lg n⌉)`.
    pub omega: Option<f64>,
    /// Bucket-size slack parameter for the statistical balance bound.
    pub epsilon: f64,
    /// Failure-probability exponent for the statistical balance bound.
    pub rho: f64,
    /// Explicit random oversampling factor `s`; `None` derives `⌈2ω²lg n⌉`
    /// (clamped so the sample fits the input).
    pub oversample: Option<u64>,
}

impl Default for SortConfig {
    fn default() -> Self {
        SortConfig {
            seed: 1,
            omega: None,
            epsilon: 0.5,
            rho: 1.0,
            oversample: None,
        }
    }
}

impl SortConfig {
    pub fn seeded(seed: u64) -> Self {
        SortConfig {
            seed,
            ..SortConfig::default()
        }
    }
}

/// Outcome of one sort: the output distribution plus the counters the
/// benchmark harness and the balance checks read.
#[derive(Debug, Clone)]
pub struct SortReport {
    /// Output blocks; concatenating them in worker order yields the sorted
    /// sequence.
    pub blocks: Vec<KeyBlock>,
    /// Inter-worker exchange stages executed: merge-split stages for the
    /// network sorts, count-sort rounds for parallel radix, the sample-sort
    /// stage count for the oversampling sorts, 0 for the serial baseline.
    pub stages: usize,
    /// The broadcast splitter set, when the algorithm used one.
    pub splitters: Option<Vec<Key>>,
    /// Largest number of keys any worker held after routing.
    pub max_received: usize,
    /// The sampling parameters the run resolved, for the record books.
    pub sampling: Option<crate::sample::SamplingParams>,
    /// Non-fatal parameter diagnostics (regime or clamping notes).
    pub warnings: Vec<String>,
}

impl SortReport {
    pub fn serial(sorted: Vec<Key>) -> Self {
        let max = sorted.len();
        SortReport {
            blocks: vec![KeyBlock::sorted(sorted)],
            stages: 0,
            splitters: None,
            max_received: max,
            sampling: None,
            warnings: Vec::new(),
        }
    }

    pub fn concatenated(&self) -> Vec<Key> {
        self.blocks
            .iter()
            .flat_map(|b| b.keys.iter().copied())
            .collect()
    }

    pub fn total_keys(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }
}

/// A sorting algorithm variant. Implementations consume the input as `p`
/// worker-owned blocks and must return a distribution whose concatenation in
/// worker order is sorted and key-multiset-equal to the input.
pub trait Sorter: Send + Sync {
    /// Registry key, also the CLI `--algo` value.
    fn name(&self) -> &'static str;

    /// Whether the variant only runs on power-of-two worker counts.
    fn requires_power_of_two(&self) -> bool {
        false
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, cfg: &SortConfig) -> Result<SortReport, SortError>;
}

/// Name-indexed collection of sorter implementations.
pub struct SorterRegistry {
    entries: BTreeMap<&'static str, Box<dyn Sorter>>,
}

impl SorterRegistry {
    pub fn empty() -> Self {
        SorterRegistry {
            entries: BTreeMap::new(),
        }
    }

    /// All eight algorithm variants under their conventional names.
    pub fn standard() -> Self {
        let mut reg = SorterRegistry::empty();
        reg.register(Box::new(SerialRadix));
        reg.register(Box::new(ParallelRadix::radix_256()));
        reg.register(Box::new(ParallelRadix::radix_65536()));
        reg.register(Box::new(Btn));
        reg.register(Box::new(Oet));
        reg.register(Box::new(Gsd));
        reg.register(Box::new(Ger));
        reg.register(Box::new(Gvr));
        reg
    }

    pub fn register(&mut self, sorter: Box<dyn Sorter>) {
        self.entries.insert(sorter.name(), sorter);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Sorter> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// Splits a key sequence into `p` contiguous blocks of `⌈n/p⌉` keys; when
/// `p ∤ n` the tail workers come up short.
pub fn distribute(keys: &[Key], p: usize) -> Vec<Vec<Key>> {
    assert!(p >= 1, "worker count must be at least 1");
    let width = keys.len().div_ceil(p).max(1);
    (0..p)
        .map(|k| {
            let lo = (k * width).min(keys.len());
            let hi = ((k + 1) * width).min(keys.len());
            keys[lo..hi].to_vec()
        })
        .collect()
}

/// The serial radix-256 baseline as a registry entry. It runs on exactly one
/// worker; benchmark speedups for the parallel variants are relative to it.
pub struct SerialRadix;

impl Sorter for SerialRadix {
    fn name(&self) -> &'static str {
        "sr4"
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, _cfg: &SortConfig) -> Result<SortReport, SortError> {
        if blocks.len() != 1 {
            return Err(SortError::Config(format!(
                "sr4 is serial and runs with p=1, got p={}",
                blocks.len()
            )));
        }
        Ok(SortReport::serial(kernels::sr4(&blocks[0])))
    }
}
