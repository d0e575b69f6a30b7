//! Sequential building blocks: counting-sort rounds, the serial radix-256
//! sort SR4, two-way merge with low/high split, p-way merging, and the
//! splitter-based partitioning used by the sample sorts.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::types::{Key, SplitterSet};
use crate::SortError;

/// Digit width lookup for the two supported radixes.
fn digit_bits(radix: u32) -> Result<u32, SortError> {
    match radix {
        256 => Ok(8),
        65536 => Ok(16),
        _ => Err(SortError::Config(format!(
            "unsupported radix {radix}; expected 256 or 65536"
        ))),
    }
}

/// One stable distribution pass over the digit `digit_index` (0 = least
/// significant) of radix `radix`. Keys with equal digits keep their input
/// order, so applying all `32 / lg(radix)` rounds in sequence sorts fully.
pub fn countsort_round(input: &[Key], digit_index: u32, radix: u32) -> Result<Vec<Key>, SortError> {
    let bits = digit_bits(radix)?;
    let rounds = 32 / bits;
    if digit_index >= rounds {
        return Err(SortError::Config(format!(
            "digit index {digit_index} out of range for radix {radix}"
        )));
    }
    let shift = digit_index * bits;
    let mask = radix as u64 - 1;
    let mut counts = vec![0usize; radix as usize];
    for &k in input {
        counts[((k as u64 >> shift) & mask) as usize] += 1;
    }
    let mut sum = 0usize;
    for c in counts.iter_mut() {
        let here = *c;
        *c = sum;
        sum += here;
    }
    let mut out = vec![0 as Key; input.len()];
    for &k in input {
        let d = ((k as u64 >> shift) & mask) as usize;
        out[counts[d]] = k;
        counts[d] += 1;
    }
    Ok(out)
}

/// Serial radix-256 LSD sort: four counting-sort rounds over byte digits.
pub fn sr4(input: &[Key]) -> Vec<Key> {
    let mut counts = [0usize; 256];
    let mut src = input.to_vec();
    let mut dst = vec![0 as Key; input.len()];
    for round in 0..4 {
        let shift = round * 8;
        counts.fill(0);
        for &k in &src {
            counts[((k >> shift) & 0xFF) as usize] += 1;
        }
        let mut sum = 0usize;
        for c in counts.iter_mut() {
            let here = *c;
            *c = sum;
            sum += here;
        }
        for &k in &src {
            let d = ((k >> shift) & 0xFF) as usize;
            dst[counts[d]] = k;
            counts[d] += 1;
        }
        std::mem::swap(&mut src, &mut dst);
    }
    src
}

/// Merges two sorted blocks and splits the result back so the lower part has
/// exactly `a.len()` keys and the upper part `b.len()`. `max(low) <= min(high)`
/// afterwards. Works over any ordered copyable element so the block-level
/// sorting networks can run on sentinel-padded values.
pub fn merge_split_by<T: Ord + Copy>(a: &[T], b: &[T], low_len: usize) -> (Vec<T>, Vec<T>) {
    debug_assert!(
        a.windows(2).all(|w| w[0] <= w[1]),
        "merge_split: left input unsorted"
    );
    debug_assert!(
        b.windows(2).all(|w| w[0] <= w[1]),
        "merge_split: right input unsorted"
    );
    debug_assert!(low_len <= a.len() + b.len());
    let total = a.len() + b.len();
    let mut merged = Vec::with_capacity(total);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            merged.push(a[i]);
            i += 1;
        } else {
            merged.push(b[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&a[i..]);
    merged.extend_from_slice(&b[j..]);
    let high = merged.split_off(low_len);
    (merged, high)
}

/// [`merge_split_by`] with the conventional split point `|a|`.
pub fn merge_split(a: &[Key], b: &[Key]) -> (Vec<Key>, Vec<Key>) {
    let low_len = a.len();
    merge_split_by(a, b, low_len)
}

/// Heap-based p-way merge of sorted blocks. Ties between equal heads are
/// broken by block index, which keeps the output deterministic.
pub fn kway_merge(blocks: &[Vec<Key>]) -> Vec<Key> {
    let total: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = Vec::with_capacity(total);
    let mut heap: BinaryHeap<Reverse<(Key, usize)>> = BinaryHeap::with_capacity(blocks.len());
    let mut cursors = vec![0usize; blocks.len()];
    for (idx, b) in blocks.iter().enumerate() {
        if let Some(&k) = b.first() {
            heap.push(Reverse((k, idx)));
        }
    }
    while let Some(Reverse((k, idx))) = heap.pop() {
        out.push(k);
        cursors[idx] += 1;
        if let Some(&next) = blocks[idx].get(cursors[idx]) {
            heap.push(Reverse((next, idx)));
        }
    }
    out
}

/// Splits a sorted block into the `p` contiguous bucket ranges induced by the
/// splitters: bucket `j` holds exactly the keys `x` with
/// `splitter[j-1] < x <= splitter[j]`. Returned as index boundaries
/// (`bounds[j]..bounds[j+1]` is bucket `j`); the concatenation of the buckets
/// is the input block.
pub fn split_by_splitters(block: &[Key], splitters: &SplitterSet) -> Vec<usize> {
    debug_assert!(
        block.windows(2).all(|w| w[0] <= w[1]),
        "split_by_splitters: block unsorted"
    );
    let mut bounds = Vec::with_capacity(splitters.buckets() + 1);
    bounds.push(0);
    for &s in splitters.as_slice() {
        bounds.push(block.partition_point(|&x| x <= s));
    }
    bounds.push(block.len());
    bounds
}

/// Groups an unsorted block by destination bucket (a counting sort on the
/// bucket index, so keys stay in input order within each bucket) and reports
/// the per-bucket counts — one row of an exchange plan. Uses the same
/// boundary rule as [`split_by_splitters`].
pub fn pack_by_destination(block: &[Key], splitters: &SplitterSet) -> (Vec<Key>, Vec<usize>) {
    let p = splitters.buckets();
    let dests: Vec<usize> = block.iter().map(|&k| splitters.bucket_of(k)).collect();
    let mut counts = vec![0usize; p];
    for &d in &dests {
        counts[d] += 1;
    }
    let mut offsets = vec![0usize; p];
    let mut sum = 0usize;
    for (o, &c) in offsets.iter_mut().zip(&counts) {
        *o = sum;
        sum += c;
    }
    let mut packed = vec![0 as Key; block.len()];
    for (&k, &d) in block.iter().zip(&dests) {
        packed[offsets[d]] = k;
        offsets[d] += 1;
    }
    (packed, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    fn seeded_keys(n: usize, seed: u64) -> Vec<Key> {
        let mut rng = SplitMix64::new(seed);
        (0..n).map(|_| rng.next_key()).collect()
    }

    #[test]
    fn countsort_orders_by_selected_digit() {
        let out = countsort_round(&[0x0201, 0x0102], 0, 256).unwrap();
        assert_eq!(out, vec![0x0201, 0x0102]); // low bytes 0x01 < 0x02
        let out = countsort_round(&[0x0201, 0x0102], 1, 256).unwrap();
        assert_eq!(out, vec![0x0102, 0x0201]);
    }

    #[test]
    fn countsort_is_stable() {
        // Equal low byte, distinct high bytes: input order must survive.
        let input = vec![0x0300, 0x0100, 0x0200];
        let out = countsort_round(&input, 0, 256).unwrap();
        assert_eq!(out, input);
        let constant = vec![7u32; 5];
        assert_eq!(countsort_round(&constant, 0, 256).unwrap(), constant);
    }

    #[test]
    fn countsort_rejects_bad_parameters() {
        assert!(matches!(
            countsort_round(&[1], 0, 512),
            Err(SortError::Config(_))
        ));
        assert!(countsort_round(&[1], 4, 256).is_err());
        assert!(countsort_round(&[1], 2, 65536).is_err());
    }

    #[test]
    fn all_rounds_equal_comparison_sort() {
        let keys = seeded_keys(1000, 11);
        let mut cur = keys.clone();
        for d in 0..4 {
            cur = countsort_round(&cur, d, 256).unwrap();
        }
        let mut expect = keys;
        expect.sort_unstable();
        assert_eq!(cur, expect);
    }

    #[test]
    fn sr4_examples() {
        assert_eq!(sr4(&[]), Vec::<Key>::new());
        assert_eq!(sr4(&[5, 5, 5]), vec![5, 5, 5]);
        let keys = seeded_keys(100_000, 42);
        let mut expect = keys.clone();
        expect.sort_unstable();
        assert_eq!(sr4(&keys), expect);
    }

    #[test]
    fn sr4_matches_two_round_radix() {
        let keys = seeded_keys(4096, 9);
        let one = countsort_round(&keys, 0, 65536).unwrap();
        let two = countsort_round(&one, 1, 65536).unwrap();
        assert_eq!(sr4(&keys), two);
    }

    #[test]
    fn merge_split_examples() {
        assert_eq!(merge_split(&[1, 2], &[3, 4]), (vec![1, 2], vec![3, 4]));
        assert_eq!(merge_split(&[3, 4], &[1, 2]), (vec![1, 2], vec![3, 4]));
        let mut rng = SplitMix64::new(3);
        let mut a: Vec<Key> = (0..512).map(|_| rng.next_key()).collect();
        let mut b: Vec<Key> = (0..512).map(|_| rng.next_key()).collect();
        a.sort_unstable();
        b.sort_unstable();
        let (low, high) = merge_split(&a, &b);
        let mut union: Vec<Key> = a.iter().chain(b.iter()).copied().collect();
        union.sort_unstable();
        assert_eq!(low, union[..a.len()]);
        assert_eq!(high, union[a.len()..]);
    }

    #[test]
    fn kway_examples() {
        assert_eq!(kway_merge(&[vec![7, 9]]), vec![7, 9]);
        assert_eq!(
            kway_merge(&[vec![1, 4], vec![2, 5], vec![3, 6]]),
            vec![1, 2, 3, 4, 5, 6]
        );
        assert_eq!(kway_merge(&[vec![], vec![1], vec![]]), vec![1]);
        let mut blocks = Vec::new();
        let mut rng = SplitMix64::new(8);
        for _ in 0..8 {
            let mut b: Vec<Key> = (0..1000).map(|_| rng.next_key()).collect();
            b.sort_unstable();
            blocks.push(b);
        }
        let mut expect: Vec<Key> = blocks.iter().flatten().copied().collect();
        expect.sort_unstable();
        assert_eq!(kway_merge(&blocks), expect);
    }

    #[test]
    fn split_examples() {
        let s = SplitterSet::new(vec![8]).unwrap();
        let block: Vec<Key> = (1..=8).collect();
        assert_eq!(split_by_splitters(&block, &s), vec![0, 8, 8]);

        let s = SplitterSet::new(vec![4]).unwrap();
        assert_eq!(split_by_splitters(&[1, 3, 5, 7], &s), vec![0, 2, 4]);
    }

    #[test]
    fn split_matches_scan_oracle() {
        let mut rng = SplitMix64::new(17);
        let mut block: Vec<Key> = (0..4096).map(|_| rng.next_key()).collect();
        block.sort_unstable();
        let mut spl: Vec<Key> = (0..15).map(|_| rng.next_key()).collect();
        spl.sort_unstable();
        let splitters = SplitterSet::new(spl).unwrap();
        let bounds = split_by_splitters(&block, &splitters);
        // Brute force: each key must land in the unique bucket satisfying the
        // boundary predicate.
        for (i, &k) in block.iter().enumerate() {
            let bucket = bounds
                .windows(2)
                .position(|w| w[0] <= i && i < w[1])
                .unwrap();
            let lo_ok = bucket == 0 || splitters.as_slice()[bucket - 1] < k;
            let hi_ok = bucket == 15 || k <= splitters.as_slice()[bucket];
            assert!(lo_ok && hi_ok, "key {k} in wrong bucket {bucket}");
        }
        assert_eq!(bounds[bounds.len() - 1], block.len());
    }

    #[test]
    fn pack_examples() {
        let s = SplitterSet::new(vec![4]).unwrap();
        let (packed, counts) = pack_by_destination(&[9, 1], &s);
        assert_eq!(packed, vec![1, 9]);
        assert_eq!(counts, vec![1, 1]);

        let s = SplitterSet::new(vec![100, 200]).unwrap();
        let block = vec![5, 3, 7];
        let (packed, counts) = pack_by_destination(&block, &s);
        assert_eq!(packed, block); // all below the first splitter
        assert_eq!(counts, vec![3, 0, 0]);
    }

    #[test]
    fn pack_counts_match_split_counts() {
        let mut rng = SplitMix64::new(23);
        let block: Vec<Key> = (0..2048).map(|_| rng.next_key()).collect();
        let mut spl: Vec<Key> = (0..7).map(|_| rng.next_key()).collect();
        spl.sort_unstable();
        let splitters = SplitterSet::new(spl).unwrap();
        let (_, counts) = pack_by_destination(&block, &splitters);
        let sorted = sr4(&block);
        let bounds = split_by_splitters(&sorted, &splitters);
        let split_counts: Vec<usize> = bounds.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(counts, split_counts);
    }

    #[test]
    fn pack_is_stable_within_bucket() {
        let s = SplitterSet::new(vec![10]).unwrap();
        let (packed, _) = pack_by_destination(&[9, 20, 3, 15, 9], &s);
        assert_eq!(packed, vec![9, 3, 9, 20, 15]);
    }

    proptest! {
        #[test]
        fn sr4_equals_oracle(keys in proptest::collection::vec(any::<u32>(), 0..600)) {
            let mut expect = keys.clone();
            expect.sort_unstable();
            prop_assert_eq!(sr4(&keys), expect);
        }

        #[test]
        fn merge_split_partitions(mut a in proptest::collection::vec(any::<u32>(), 0..200),
                                  mut b in proptest::collection::vec(any::<u32>(), 0..200)) {
            a.sort_unstable();
            b.sort_unstable();
            let (low, high) = merge_split(&a, &b);
            prop_assert_eq!(low.len(), a.len());
            prop_assert_eq!(high.len(), b.len());
            if let (Some(&l), Some(&h)) = (low.last(), high.first()) {
                prop_assert!(l <= h);
            }
            let mut union: Vec<u32> = a.iter().chain(b.iter()).copied().collect();
            union.sort_unstable();
            let mut got = low;
            got.extend(high);
            prop_assert_eq!(got, union);
        }

        #[test]
        fn split_concat_is_identity(mut block in proptest::collection::vec(any::<u32>(), 0..300),
                                    mut spl in proptest::collection::vec(any::<u32>(), 0..8)) {
            block.sort_unstable();
            spl.sort_unstable();
            let splitters = SplitterSet::new(spl).unwrap();
            let bounds = split_by_splitters(&block, &splitters);
            prop_assert_eq!(bounds.len(), splitters.buckets() + 1);
            let mut rebuilt = Vec::new();
            for w in bounds.windows(2) {
                prop_assert!(w[0] <= w[1]);
                rebuilt.extend_from_slice(&block[w[0]..w[1]]);
            }
            prop_assert_eq!(rebuilt, block);
        }
    }
}
