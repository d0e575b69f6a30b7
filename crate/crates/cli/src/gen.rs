//! Benchmark input generation. Every distribution is a pure function of
//! `(n, distribution, seed)` over the SplitMix64 stream, so run inputs are
//! reproducible byte for byte.

use bspsort::rng::SplitMix64;
use bspsort::types::{Key, KeyBlock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Distribution {
    /// Uniform draws over the full 32-bit range.
    #[value(name = "uniform32")]
    Uniform32,
    /// Only 16 distinct values, heavy ties everywhere.
    #[value(name = "duplicates-heavy")]
    DuplicatesHeavy,
    /// Uniform draws, pre-sorted ascending.
    #[value(name = "sorted")]
    Sorted,
    /// Uniform draws, pre-sorted descending.
    #[value(name = "reversed")]
    Reversed,
    /// Every key equal.
    #[value(name = "constant")]
    Constant,
}

impl Distribution {
    pub const ALL: [Distribution; 5] = [
        Distribution::Uniform32,
        Distribution::DuplicatesHeavy,
        Distribution::Sorted,
        Distribution::Reversed,
        Distribution::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform32 => "uniform32",
            Distribution::DuplicatesHeavy => "duplicates-heavy",
            Distribution::Sorted => "sorted",
            Distribution::Reversed => "reversed",
            Distribution::Constant => "constant",
        }
    }

    pub fn parse(name: &str) -> Option<Distribution> {
        Distribution::ALL.iter().copied().find(|d| d.name() == name)
    }
}

pub fn generate_input(n: usize, dist: Distribution, seed: u64) -> KeyBlock {
    let mut rng = SplitMix64::new(seed);
    match dist {
        Distribution::Uniform32 => KeyBlock::unsorted((0..n).map(|_| rng.next_key()).collect()),
        Distribution::DuplicatesHeavy => {
            let mut palette: Vec<Key> = Vec::with_capacity(16);
            while palette.len() < 16 {
                let v = rng.next_key();
                if !palette.contains(&v) {
                    palette.push(v);
                }
            }
            KeyBlock::unsorted(
                (0..n)
                    .map(|_| palette[rng.next_below(16) as usize])
                    .collect(),
            )
        }
        Distribution::Sorted => {
            let mut keys: Vec<Key> = (0..n).map(|_| rng.next_key()).collect();
            keys.sort_unstable();
            KeyBlock::sorted(keys)
        }
        Distribution::Reversed => {
            let mut keys: Vec<Key> = (0..n).map(|_| rng.next_key()).collect();
            keys.sort_unstable_by(|a, b| b.cmp(a));
            KeyBlock::unsorted(keys)
        }
        Distribution::Constant => {
            let v = rng.next_key();
            KeyBlock::sorted(vec![v; n])
        }
    }
}
