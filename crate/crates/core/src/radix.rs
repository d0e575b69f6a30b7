//! Parallel LSD radix sort over the superstep runtime: PR4 (radix 2^8, four
//! rounds) and PR2 (radix 2^16, two rounds).
//!
//! Each round: (1) workers histogram the current digit of their block,
//! (2) the counter matrix is gathered everywhere, (3) each worker derives
//! the global rank of every key it holds — digits below the current one
//! first, then lower-ranked workers' equal digits, then the key's stable
//! index within its digit — and (4) ships each key to the worker owning
//! that rank's output slice. Worker `j` owns ranks `[j·⌈n/p⌉, (j+1)·⌈n/p⌉)`,
//! so concatenating blocks in worker order always reads out in rank order.

use std::sync::Arc;

use crate::algo::{SortConfig, SortReport, Sorter};
use crate::bsp::{run_team, Worker};
use crate::kernels::countsort_round;
use crate::types::{Key, KeyBlock};
use crate::{BspError, SortError};

/// Parallel radix sort for one of the two supported radixes.
pub struct ParallelRadix {
    radix: u32,
    rounds: u32,
    name: &'static str,
}

impl ParallelRadix {
    pub fn radix_256() -> Self {
        ParallelRadix {
            radix: 256,
            rounds: 4,
            name: "pr4",
        }
    }

    pub fn radix_65536() -> Self {
        ParallelRadix {
            radix: 65536,
            rounds: 2,
            name: "pr2",
        }
    }

    pub fn new(radix: u32) -> Result<Self, SortError> {
        match radix {
            256 => Ok(Self::radix_256()),
            65536 => Ok(Self::radix_65536()),
            _ => Err(SortError::Config(format!(
                "unsupported radix {radix}; expected 256 or 65536"
            ))),
        }
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }
}

/// One distribution round. `width` is the rank-slice width `⌈n/p⌉`.
pub(crate) fn radix_round(
    w: &mut Worker<'_>,
    block: Vec<Key>,
    digit_index: u32,
    radix: u32,
    n: usize,
    width: usize,
) -> Result<Vec<Key>, BspError> {
    let r = radix as usize;
    let bits = radix.trailing_zeros();
    let shift = digit_index * bits;
    let mask = (radix - 1) as u64;
    let me = w.id();
    let p = w.team_size();

    let mut hist = vec![0u64; r];
    for &k in &block {
        hist[((k as u64 >> shift) & mask) as usize] += 1;
    }
    let matrix: Vec<Arc<Vec<u64>>> = w.gather_counters(hist)?;

    // Exclusive prefix over digit totals, plus my predecessors' share of
    // each digit: rank(key) = base[d] + before_me[d] + stable index in d.
    let mut base = vec![0u64; r + 1];
    for d in 0..r {
        let total: u64 = matrix.iter().map(|row| row[d]).sum();
        base[d + 1] = base[d] + total;
    }
    debug_assert_eq!(base[r], n as u64, "counter matrix must cover every key");
    let mut before_me = vec![0u64; r];
    for row in matrix.iter().take(me) {
        for (b, &v) in before_me.iter_mut().zip(row.iter()) {
            *b += v;
        }
    }

    // Stable local pass groups my keys by digit, so each digit's keys form
    // one contiguous run of global ranks.
    let sorted_local = countsort_round(&block, digit_index, radix)
        .expect("radix parameters validated at construction");
    drop(block);

    let mut outgoing: Vec<Vec<Key>> = (0..p).map(|_| Vec::new()).collect();
    let mut local_off = 0usize;
    for d in 0..r {
        let cnt = matrix[me][d] as usize;
        if cnt == 0 {
            continue;
        }
        let mut rank = base[d] + before_me[d];
        let mut taken = 0usize;
        while taken < cnt {
            let owner = (rank / width as u64) as usize;
            let owner_end = (owner as u64 + 1) * width as u64;
            let take = ((owner_end - rank) as usize).min(cnt - taken);
            outgoing[owner]
                .extend_from_slice(&sorted_local[local_off + taken..local_off + taken + take]);
            rank += take as u64;
            taken += take;
        }
        local_off += cnt;
    }
    drop(sorted_local);

    let received = w.all_to_all(outgoing)?;

    // Place incoming runs at their rank-derived offsets within my slice.
    let my_lo = (me * width) as u64;
    let my_hi = (((me + 1) * width).min(n)) as u64;
    let mut out = vec![0 as Key; my_hi.saturating_sub(my_lo) as usize];
    let mut cursors = vec![0usize; p];
    let mut running = vec![0u64; p]; // per-sender start rank within digit d
    for d in 0..r {
        let mut start = base[d];
        for k in 0..p {
            running[k] = start;
            start += matrix[k][d];
        }
        for k in 0..p {
            let cnt = matrix[k][d];
            if cnt == 0 {
                continue;
            }
            let lo = running[k].max(my_lo);
            let hi = (running[k] + cnt).min(my_hi);
            if lo < hi {
                let len = (hi - lo) as usize;
                let dst = (lo - my_lo) as usize;
                out[dst..dst + len].copy_from_slice(&received[k][cursors[k]..cursors[k] + len]);
                cursors[k] += len;
            }
        }
    }
    Ok(out)
}

impl Sorter for ParallelRadix {
    fn name(&self) -> &'static str {
        self.name
    }

    fn sort(&self, blocks: Vec<Vec<Key>>, _cfg: &SortConfig) -> Result<SortReport, SortError> {
        let p = blocks.len();
        let n: usize = blocks.iter().map(|b| b.len()).sum();
        if n == 0 {
            return Ok(SortReport {
                blocks: blocks.into_iter().map(KeyBlock::sorted).collect(),
                stages: 0,
                splitters: None,
                max_received: 0,
                sampling: None,
                warnings: Vec::new(),
            });
        }
        let width = n.div_ceil(p);
        let radix = self.radix;
        let rounds = self.rounds;
        let out = run_team(p, blocks, |w, mut block| {
            for digit in 0..rounds {
                block = radix_round(w, block, digit, radix, n, width)?;
            }
            Ok(block)
        })?;
        let max_received = out.iter().map(|b| b.len()).max().unwrap_or(0);
        Ok(SortReport {
            blocks: out.into_iter().map(KeyBlock::sorted).collect(),
            stages: rounds as usize,
            splitters: None,
            max_received,
            sampling: None,
            warnings: Vec::new(),
        })
    }
}
