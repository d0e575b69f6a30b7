//! Multicore integer sorting over an in-process bulk-synchronous runtime.
//!
//! The crate bundles three things:
//!
//! * [`bsp`] — a worker-per-thread superstep runtime. Workers exchange key
//!   blocks and counter arrays only at superstep boundaries, through the
//!   collectives [`bsp::Worker::all_to_all`], [`bsp::Worker::gather_counters`]
//!   and [`bsp::Worker::broadcast`].
//! * the sorting algorithms themselves: serial radix-256 sort ([`kernels::sr4`]),
//!   parallel radix sorts PR4/PR2 ([`radix`]), block-level bitonic and odd-even
//!   transposition networks ([`network`]), and three oversampling sample sorts
//!   GSD/GER/GVR ([`sample`]). Every variant implements the [`algo::Sorter`]
//!   trait and is selected by name through [`algo::SorterRegistry`].
//! * [`model`] — the MBSP cost model that predicts the run time of each
//!   algorithm in units of the fast-memory word cost `G` and derives the
//!   expected speedup over the serial baseline.

pub mod algo;
pub mod bsp;
pub mod kernels;
pub mod model;
pub mod network;
pub mod radix;
pub mod rng;
pub mod sample;
pub mod types;

pub use algo::{distribute, SortConfig, SortReport, Sorter, SorterRegistry};
pub use types::{Key, KeyBlock, SplitterSet};

/// Errors raised by the superstep runtime.
#[derive(Debug, Clone, thiserror::Error)]
pub enum BspError {
    #[error("worker {worker} panicked: {message}")]
    WorkerPanic { worker: usize, message: String },
    #[error("superstep mismatch at worker {worker}: expected {expected}, found {found}")]
    SuperstepMismatch {
        worker: usize,
        expected: u64,
        found: u64,
    },
    #[error("collective timed out at worker {worker} in superstep {superstep}; a team member is not participating")]
    Timeout { worker: usize, superstep: u64 },
    #[error("collective protocol violation: {0}")]
    Protocol(String),
    #[error("team aborted by worker {worker}")]
    Aborted { worker: usize },
}

/// Errors raised by the sorting algorithms.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SortError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] BspError),
}
