//! Block-level sorting networks.
//!
//! Both sorts treat each worker's locally sorted block as one network 'key':
//! a comparator between two workers merges their blocks and hands the lower
//! half back to one side and the upper half to the other. BTN runs the
//! p-processor bitonic network (`lg p (lg p + 1) / 2` merge-split stages),
//! OET runs `p` odd-even transposition rounds.
//!
//! A network of size-preserving merge-splits only sorts when every block has
//! the same length (a counterexample for blocks `[1,1,1,0]` falls straight
//! out of the bitonic schedule), so uneven inputs are padded to a common
//! length with sentinel values that sort above any real key and stripped
//! again afterwards.

use crate::algo::{SortConfig, SortReport, Sorter};
use crate::bsp::{run_team, Worker};
use crate::kernels::{merge_split_by, sr4};
use crate::types::{Key, KeyBlock};
use crate::{BspError, SortError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Lower-indexed worker keeps the smaller keys.
    Ascending,
    /// Lower-indexed worker keeps the larger keys.
    Descending,
}

/// One merge-split comparator between two workers (`low < high`).
#[derive(Debug, Clone, Copy)]
pub struct Comparator {
    pub low: usize,
    pub high: usize,
    pub dir: Direction,
}

/// One stage: disjoint comparators executed in the same superstep.
pub type Stage = Vec<Comparator>;

/// Bitonic network over `p` workers: stage `k = 1..lg p`, substage
/// `j = k..1`, worker `i` pairs with `i XOR 2^(j-1)`; the pair sorts
/// ascending iff bit `k` of `i` is 0. Requires power-of-two `p`.
pub fn btn_schedule(p: usize) -> Result<Vec<Stage>, SortError> {
    if !p.is_power_of_two() {
        return Err(SortError::Config(format!(
            "btn requires a power-of-two worker count, got p={p}"
        )));
    }
    let lg = p.trailing_zeros();
    let mut stages = Vec::new();
    for k in 1..=lg {
        for j in (1..=k).rev() {
            let mut stage = Vec::with_capacity(p / 2);
            for i in 0..p {
                let partner = i ^ (1 << (j - 1));
                if partner > i {
                    let dir = if i & (1 << k) == 0 {
                        Direction::Ascending
                    } else {
                        Direction::Descending
                    };
                    stage.push(Comparator {
                        low: i,
                        high: partner,
                        dir,
                    });
                }
            }
            stages.push(stage);
        }
    }
    Ok(stages)
}

/// Odd-even transposition rounds: round `t` pairs `(0,1),(2,3),..` when even
/// and `(1,2),(3,4),..` when odd, lower half always to the lower index.
/// `p` rounds for `p >= 2`; a single worker needs no exchanges.
pub fn oet_schedule(p: usize) -> Vec<Stage> {
    if p < 2 {
        return Vec::new();
    }
    (0..p)
        .map(|t| {
            let mut stage = Vec::new();
            let mut i = t % 2;
            while i + 1 < p {
                stage.push(Comparator {
                    low: i,
                    high: i + 1,
                    dir: Direction::Ascending,
                });
                i += 2;
            }
            stage
        })
        .collect()
}

fn keep_half<T: Ord + Copy>(c: &Comparator, me: usize, mine: Vec<T>, theirs: Vec<T>) -> Vec<T> {
    let i_am_low = me == c.low;
    let (low_block, high_block): (&[T], &[T]) = if i_am_low {
        (&mine, &theirs)
    } else {
        (&theirs, &mine)
    };
    match c.dir {
        Direction::Ascending => {
            let (lo, hi) = merge_split_by(low_block, high_block, low_block.len());
            if i_am_low {
                lo
            } else {
                hi
            }
        }
        Direction::Descending => {
            // The lower-indexed worker takes the top of the merge; sizes
            // still follow block ownership.
            let (lo, hi) = merge_split_by(low_block, high_block, high_block.len());
            if i_am_low {
                hi
            } else {
                lo
            }
        }
    }
}

/// Reference evaluation of a schedule over in-memory blocks. This is the
/// oracle the exhaustive zero-one tests run against and mirrors the
/// superstep execution comparator for comparator.
pub fn apply_schedule<T: Ord + Copy>(blocks: &mut [Vec<T>], schedule: &[Stage]) {
    for stage in schedule {
        for c in stage {
            let mine = std::mem::take(&mut blocks[c.low]);
            let theirs = std::mem::take(&mut blocks[c.high]);
            blocks[c.low] = keep_half(c, c.low, mine.clone(), theirs.clone());
            blocks[c.high] = keep_half(c, c.high, theirs, mine);
        }
    }
}

const PAD: u64 = u64::MAX;

/// Runs a comparator schedule from inside a worker. Each stage is one
/// superstep: paired workers swap blocks, unpaired workers post empty
/// messages to stay barrier-aligned.
fn run_schedule_worker<T: Ord + Copy + Send + 'static>(
    w: &mut Worker<'_>,
    schedule: &[Stage],
    mut mine: Vec<T>,
) -> Result<Vec<T>, BspError> {
    let p = w.team_size();
    for stage in schedule {
        let me = w.id();
        let my_cmp = stage.iter().find(|c| c.low == me || c.high == me);
        let mut outgoing: Vec<Vec<T>> = (0..p).map(|_| Vec::new()).collect();
        if let Some(c) = my_cmp {
            let partner = if c.low == me { c.high } else { c.low };
            outgoing[partner] = mine.clone();
        }
        let mut received = w.all_to_all(outgoing)?;
        if let Some(c) = my_cmp {
            let partner = if c.low == me { c.high } else { c.low };
            let theirs = std::mem::take(&mut received[partner]);
            mine = keep_half(c, me, mine, theirs);
        }
    }
    Ok(mine)
}

/// Sorts one locally sorted block through the network. Uneven block sizes
/// take the sentinel-padded path; equal sizes run on the keys directly.
pub(crate) fn network_pass(
    w: &mut Worker<'_>,
    schedule: &[Stage],
    block: Vec<Key>,
) -> Result<Vec<Key>, BspError> {
    let sizes = w.gather_counters(vec![block.len() as u64])?;
    let lens: Vec<u64> = sizes.iter().map(|row| row[0]).collect();
    if lens.windows(2).all(|w| w[0] == w[1]) {
        return run_schedule_worker(w, schedule, block);
    }
    let target = *lens.iter().max().expect("nonempty team") as usize;
    let mut wide: Vec<u64> = block.into_iter().map(u64::from).collect();
    wide.resize(target, PAD);
    let out = run_schedule_worker(w, schedule, wide)?;
    Ok(out
        .into_iter()
        .filter(|&v| v != PAD)
        .map(|v| v as Key)
        .collect())
}

/// Reference counterpart of [`network_pass`] over in-memory blocks (blocks
/// must be locally sorted).
pub fn apply_schedule_padded(blocks: &mut Vec<Vec<Key>>, schedule: &[Stage]) {
    let lens: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
    if lens.windows(2).all(|w| w[0] == w[1]) {
        apply_schedule(blocks, schedule);
        return;
    }
    let target = *lens.iter().max().unwrap_or(&0);
    let mut wide: Vec<Vec<u64>> = blocks
        .iter()
        .map(|b| {
            let mut v: Vec<u64> = b.iter().map(|&k| u64::from(k)).collect();
            v.resize(target, PAD);
            v
        })
        .collect();
    apply_schedule(&mut wide, schedule);
    *blocks = wide
        .into_iter()
        .map(|b| {
            b.into_iter()
                .filter(|&v| v != PAD)
                .map(|v| v as Key)
                .collect()
        })
        .collect();
}

fn network_sort(
    schedule: &[Stage],
    blocks: Vec<Vec<Key>>,
    stages: usize,
) -> Result<SortReport, SortError> {
    let p = blocks.len();
    let out = run_team(p, blocks, |w, block| {
        let local = sr4(&block);
        network_pass(w, schedule, local)
    })?;
    let max_received = out.iter().map(|b| b.len()).max().unwrap_or(0);
    Ok(SortReport {
        blocks: out.into_iter().map(KeyBlock::sorted).collect(),
        stages,
        splitters: None,
        max_received,
        sampling: None,
        warnings: Vec::new(),
    })
}

/// Bitonic sort over worker blocks.
pub struct Btn;

impl Sorter for Btn {
    fn name(&self) -> &'static str {
        "btn"
    }

    fn requires_power_of_two(&self) -> bool {
        true
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, _cfg: &SortConfig) -> Result<SortReport, SortError> {
        let schedule = btn_schedule(blocks.len())?;
        let stages = schedule.len();
        network_sort(&schedule, blocks, stages)
    }
}

/// Odd-even transposition sort over worker blocks.
pub struct Oet;

impl Sorter for Oet {
    fn name(&self) -> &'static str {
        "oet"
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, _cfg: &SortConfig) -> Result<SortReport, SortError> {
        let schedule = oet_schedule(blocks.len());
        let stages = schedule.len();
        network_sort(&schedule, blocks, stages)
    }
}
