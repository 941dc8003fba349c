//! Binary indexed trees over slots.
//!
//! [`SlackTree`] mirrors the per-slot loads of a [`Schedule`](crate::model::Schedule) and
//! answers three kinds of interval questions in `O(log K)` node touches:
//!
//! * total free space over `[a, b]` (a classic prefix-sum Fenwick tree),
//! * the least loaded slot in `[a, b]`,
//! * the most loaded slot in `[a, b]`.
//!
//! The min/max queries use a pair of complementary trees: a "left" tree whose node `i`
//! aggregates `(i - lowbit(i), i]` and a "right" tree whose node `i` aggregates
//! `[i, i + lowbit(i))`. A query climbs the right tree from `a` and descends the left tree
//! from `b`; the two walks meet at one raw element. Point updates recompute every node on
//! both ancestor paths from its children, so arbitrary increases and decreases are handled
//! in `O(log² K)` without ever rebuilding a tree.
//!
//! All slot indices in this module are 0-based.

use std::cell::Cell;
use std::cmp::Reverse;

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

/// Prefix-sum Fenwick tree over `i64`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct SumTree {
    nodes: Vec<i64>,
}

impl SumTree {
    fn from_values(values: &[i64]) -> Self {
        let n = values.len();
        let mut nodes = vec![0; n + 1];
        nodes[1..].copy_from_slice(values);
        for i in 1..=n {
            let parent = i + lowbit(i);
            if parent <= n {
                nodes[parent] += nodes[i];
            }
        }
        Self { nodes }
    }

    fn add(&mut self, pos: usize, delta: i64) {
        let mut i = pos + 1;
        while i < self.nodes.len() {
            self.nodes[i] += delta;
            i += lowbit(i);
        }
    }

    /// Sum of the first `count` values.
    fn prefix(&self, count: usize, touches: &Cell<u64>) -> i64 {
        let mut i = count;
        let mut acc = 0;
        while i > 0 {
            acc += self.nodes[i];
            touches.set(touches.get() + 1);
            i -= lowbit(i);
        }
        acc
    }
}

/// Range-minimum tree over any totally ordered key. Index 0 of each array is padding.
#[derive(Debug, Clone)]
struct MinTree<T> {
    raw: Vec<T>,
    left: Vec<T>,
    right: Vec<T>,
}

impl<T: PartialEq> PartialEq for MinTree<T> {
    fn eq(&self, other: &Self) -> bool {
        self.raw[1..] == other.raw[1..]
            && self.left[1..] == other.left[1..]
            && self.right[1..] == other.right[1..]
    }
}

impl<T: Ord + Copy> MinTree<T> {
    fn from_values(values: &[T]) -> Self {
        let n = values.len();
        assert!(n > 0, "MinTree needs at least one element");
        let mut raw = Vec::with_capacity(n + 1);
        raw.push(values[0]);
        raw.extend_from_slice(values);
        let mut left = raw.clone();
        let mut right = raw.clone();
        for i in 1..=n {
            let parent = i + lowbit(i);
            if parent <= n && left[i] < left[parent] {
                left[parent] = left[i];
            }
        }
        for i in (1..=n).rev() {
            let parent = i - lowbit(i);
            if parent >= 1 && right[i] < right[parent] {
                right[parent] = right[i];
            }
        }
        Self { raw, left, right }
    }

    fn len(&self) -> usize {
        self.raw.len() - 1
    }

    fn set(&mut self, pos: usize, value: T) {
        let n = self.len();
        let p = pos + 1;
        self.raw[p] = value;

        let mut i = p;
        while i <= n {
            let mut best = self.raw[i];
            let mut step = 1;
            while step < lowbit(i) {
                best = best.min(self.left[i - step]);
                step <<= 1;
            }
            self.left[i] = best;
            i += lowbit(i);
        }

        let mut i = p;
        while i >= 1 {
            let mut best = self.raw[i];
            let mut step = 1;
            while step < lowbit(i) && i + step <= n {
                best = best.min(self.right[i + step]);
                step <<= 1;
            }
            self.right[i] = best;
            i -= lowbit(i);
        }
    }

    /// Minimum over the 0-based inclusive range `[a, b]`.
    fn query(&self, a: usize, b: usize, touches: &Cell<u64>) -> T {
        debug_assert!(a <= b && b < self.len());
        let (lo, hi) = (a + 1, b + 1);
        let mut count = 0u64;
        let mut best: Option<T> = None;
        let mut take = |v: T| {
            best = Some(match best {
                Some(b) if b <= v => b,
                _ => v,
            });
        };

        let mut i = lo;
        while i + lowbit(i) - 1 <= hi {
            take(self.right[i]);
            count += 1;
            i += lowbit(i);
        }
        let mut j = hi;
        while j >= i && j - lowbit(j) + 1 >= i {
            take(self.left[j]);
            count += 1;
            j -= lowbit(j);
        }
        if j >= i {
            // Only the single element at `i` remains uncovered.
            take(self.raw[i]);
            count += 1;
        }
        touches.set(touches.get() + count);
        best.expect("non-empty range")
    }
}

/// Fenwick-backed view of slot loads with free-space sums and min/max-load queries.
#[derive(Debug, Clone)]
pub struct SlackTree {
    capacity: i64,
    loads: Vec<i64>,
    free: SumTree,
    min_load: MinTree<(i64, usize)>,
    max_load: MinTree<(Reverse<i64>, usize)>,
    touches: Cell<u64>,
}

impl PartialEq for SlackTree {
    fn eq(&self, other: &Self) -> bool {
        self.capacity == other.capacity
            && self.loads == other.loads
            && self.free == other.free
            && self.min_load == other.min_load
            && self.max_load == other.max_load
    }
}

impl Eq for SlackTree {}

impl SlackTree {
    /// Tree for `slot_count` empty slots of the given capacity.
    pub fn new(slot_count: usize, capacity: i64) -> Self {
        Self::from_loads(capacity, &vec![0; slot_count])
    }

    /// Builds the tree from explicit loads in `O(K)`.
    pub fn from_loads(capacity: i64, loads: &[i64]) -> Self {
        assert!(!loads.is_empty(), "a slack tree needs at least one slot");
        let free: Vec<i64> = loads.iter().map(|&l| capacity - l).collect();
        let mins: Vec<(i64, usize)> = loads.iter().enumerate().map(|(j, &l)| (l, j)).collect();
        let maxs: Vec<(Reverse<i64>, usize)> = loads
            .iter()
            .enumerate()
            .map(|(j, &l)| (Reverse(l), j))
            .collect();
        Self {
            capacity,
            loads: loads.to_vec(),
            free: SumTree::from_values(&free),
            min_load: MinTree::from_values(&mins),
            max_load: MinTree::from_values(&maxs),
            touches: Cell::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    pub fn capacity(&self) -> i64 {
        self.capacity
    }

    pub fn load(&self, slot: usize) -> i64 {
        self.loads[slot]
    }

    /// Sets the load of `slot`.
    pub fn point_update(&mut self, slot: usize, new_load: i64) {
        assert!(slot < self.len(), "slot {slot} out of range");
        let old = self.loads[slot];
        if old == new_load {
            return;
        }
        self.loads[slot] = new_load;
        self.free.add(slot, old - new_load);
        self.min_load.set(slot, (new_load, slot));
        self.max_load.set(slot, (Reverse(new_load), slot));
    }

    /// Total free space `Σ (L - load)` over the inclusive slot range `[a, b]`.
    pub fn range_free(&self, a: usize, b: usize) -> i64 {
        assert!(a <= b && b < self.len(), "bad range [{a}, {b}]");
        self.free.prefix(b + 1, &self.touches) - self.free.prefix(a, &self.touches)
    }

    /// Necessary condition for placing `copies` copies of size `size` in `[a, b]`: the
    /// interval must have at least `copies * size` free space in total. It is not
    /// sufficient, since each copy needs a distinct slot with room for it.
    pub fn can_place(&self, copies: u32, size: u32, a: usize, b: usize) -> bool {
        self.range_free(a, b) >= i64::from(copies) * i64::from(size)
    }

    /// Leftmost least-loaded slot in `[a, b]` with its load.
    pub fn min_load_slot(&self, a: usize, b: usize) -> (usize, i64) {
        assert!(a <= b && b < self.len(), "bad range [{a}, {b}]");
        let (load, slot) = self.min_load.query(a, b, &self.touches);
        (slot, load)
    }

    /// Leftmost most-loaded slot in `[a, b]` with its load.
    pub fn max_load_slot(&self, a: usize, b: usize) -> (usize, i64) {
        assert!(a <= b && b < self.len(), "bad range [{a}, {b}]");
        let (Reverse(load), slot) = self.max_load.query(a, b, &self.touches);
        (slot, load)
    }

    /// Number of tree nodes read by queries since construction or the last reset.
    pub fn touches(&self) -> u64 {
        self.touches.get()
    }

    pub fn reset_touches(&self) {
        self.touches.set(0);
    }
}
