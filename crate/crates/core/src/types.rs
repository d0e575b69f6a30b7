//! Shared domain types.

use crate::SortError;

/// 32-bit unsigned sort key. The full range is permitted.
pub type Key = u32;

/// A worker-owned contiguous run of keys, tagged with whether it is known to
/// be sorted nondecreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBlock {
    pub keys: Vec<Key>,
    pub sorted: bool,
}

impl KeyBlock {
    pub fn unsorted(keys: Vec<Key>) -> Self {
        KeyBlock {
            keys,
            sorted: false,
        }
    }

    /// Wraps keys the caller asserts are already nondecreasing.
    pub fn sorted(keys: Vec<Key>) -> Self {
        debug_assert!(keys.windows(2).all(|w| w[0] <= w[1]));
        KeyBlock { keys, sorted: true }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn into_keys(self) -> Vec<Key> {
        self.keys
    }
}

/// The `p-1` sorted keys that partition the key space into `p` destination
/// buckets. Bucket `j` receives exactly the keys `x` with
/// `splitter[j-1] < x <= splitter[j]` (with implicit -inf/+inf sentinels at
/// the ends), so duplicated splitters leave the intermediate buckets empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitterSet(Vec<Key>);

impl SplitterSet {
    pub fn new(splitters: Vec<Key>) -> Result<Self, SortError> {
        if splitters.windows(2).any(|w| w[0] > w[1]) {
            return Err(SortError::Config("splitters must be nondecreasing".into()));
        }
        Ok(SplitterSet(splitters))
    }

    pub fn as_slice(&self) -> &[Key] {
        &self.0
    }

    /// Number of buckets the set induces.
    pub fn buckets(&self) -> usize {
        self.0.len() + 1
    }

    /// Destination bucket for `key`: the number of splitters strictly below it.
    pub fn bucket_of(&self, key: Key) -> usize {
        self.0.partition_point(|&s| s < key)
    }
}
