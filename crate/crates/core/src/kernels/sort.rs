//! Quicksort over f32 keys, the suite's branch-heavy workload.
//!
//! Median-of-three pivot with Hoare partitioning, insertion sort on short
//! slices. The parallel variant runs the same code inside the worker pool and
//! recurses both partitions concurrently while a slice is longer than the
//! plan's split threshold. Because the inputs are NaN-free, sorted output is
//! unique, so every backend produces an identical array.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::{copy_arena, maybe_join, run_on_pool, ExecPlan, Stage};

/// Flat buffer of totally ordered (NaN-free) keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SortBuffer {
    pub data: Vec<f32>,
}

impl SortBuffer {
    pub fn new(data: Vec<f32>) -> Self {
        SortBuffer { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

impl Stage for SortBuffer {
    fn stage(&self) -> Result<Self> {
        Ok(SortBuffer {
            data: copy_arena(&self.data)?,
        })
    }
}

fn insertion_sort(v: &mut [f32]) {
    for i in 1..v.len() {
        let key = v[i];
        let mut j = i;
        while j > 0 && v[j - 1] > key {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = key;
    }
}

/// Swap the median of the first, middle, and last element to the front.
fn median_of_three_to_front(v: &mut [f32]) {
    let (a, b, c) = (0, v.len() / 2, v.len() - 1);
    if v[b] < v[a] {
        v.swap(a, b);
    }
    if v[c] < v[a] {
        v.swap(a, c);
    }
    // Median of the three now sits at a or c; move it to the front.
    if v[b] < v[c] {
        v.swap(a, b);
    } else {
        v.swap(a, c);
    }
}

/// Hoare partition around `v[0]`. Returns `j` with both `[0..=j]` and
/// `[j+1..]` nonempty; elements left of the split are <= pivot, right are >=.
fn hoare_partition(v: &mut [f32]) -> usize {
    let pivot = v[0];
    let mut i: isize = -1;
    let mut j = v.len() as isize;
    loop {
        loop {
            j -= 1;
            if v[j as usize] <= pivot {
                break;
            }
        }
        loop {
            i += 1;
            if v[i as usize] >= pivot {
                break;
            }
        }
        if i < j {
            v.swap(i as usize, j as usize);
        } else {
            return j as usize;
        }
    }
}

fn sort_rec(v: &mut [f32], parallel: bool, par_threshold: usize, ins_threshold: usize) {
    let len = v.len();
    if len <= ins_threshold.max(1) {
        insertion_sort(v);
        return;
    }
    median_of_three_to_front(v);
    let split = hoare_partition(v);
    let (lo, hi) = v.split_at_mut(split + 1);
    if parallel && len > par_threshold {
        maybe_join(
            true,
            || sort_rec(lo, parallel, par_threshold, ins_threshold),
            || sort_rec(hi, parallel, par_threshold, ins_threshold),
        );
    } else {
        sort_rec(lo, parallel, par_threshold, ins_threshold);
        sort_rec(hi, parallel, par_threshold, ins_threshold);
    }
}

/// Sort a copy of `v` under the plan's compute backend.
pub fn quicksort(v: &SortBuffer, plan: &ExecPlan) -> SortBuffer {
    let mut data = v.data.clone();
    let parallel = plan.is_parallel();
    let (par_t, ins_t) = (plan.sort_par_threshold, plan.sort_insertion_threshold);
    run_on_pool(plan, || sort_rec(&mut data, parallel, par_t, ins_t));
    SortBuffer { data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn random_buffer(len: usize, seed: u64) -> SortBuffer {
        let mut r = rng::from_seed(seed);
        SortBuffer::new((0..len).map(|_| rng::unit_f32(&mut r)).collect())
    }

    fn is_sorted(v: &[f32]) -> bool {
        v.windows(2).all(|w| w[0] <= w[1])
    }

    #[test]
    fn empty_and_tiny() {
        let plan = ExecPlan::sequential();
        assert!(quicksort(&SortBuffer::new(vec![]), &plan).data.is_empty());
        assert_eq!(
            quicksort(&SortBuffer::new(vec![3.0, 1.0, 2.0, 1.0]), &plan).data,
            vec![1.0, 1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn sorts_seeded_10k() {
        let buf = random_buffer(10_000, 77);
        let out = quicksort(&buf, &ExecPlan::sequential());
        assert!(is_sorted(&out.data));
        let mut expect = buf.data.clone();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(out.data, expect);
    }

    #[test]
    fn parallel_matches_sequential() {
        for len in [0usize, 1, 2, 500, 5000, 50_000] {
            let buf = random_buffer(len, len as u64 + 1);
            let seq = quicksort(&buf, &ExecPlan::sequential());
            let mut plan = ExecPlan::parallel_with(4, None).unwrap();
            plan.sort_par_threshold = 512; // force concurrent recursion
            let par = quicksort(&buf, &plan);
            assert_eq!(seq, par, "len {len}");
        }
    }

    #[test]
    fn duplicates_and_presorted() {
        let plan = ExecPlan::sequential();
        let dup = SortBuffer::new(vec![0.5; 1000]);
        assert_eq!(quicksort(&dup, &plan).data, vec![0.5; 1000]);
        let asc: Vec<f32> = (0..1000).map(|i| i as f32).collect();
        let desc: Vec<f32> = (0..1000).rev().map(|i| i as f32).collect();
        assert_eq!(quicksort(&SortBuffer::new(desc), &plan).data, asc);
        assert_eq!(quicksort(&SortBuffer::new(asc.clone()), &plan).data, asc);
    }

    proptest! {
        #[test]
        fn sorted_and_same_multiset(data in proptest::collection::vec(0u32..1_000_000, 0..2000)) {
            let data: Vec<f32> = data.into_iter().map(|x| x as f32).collect();
            let buf = SortBuffer::new(data.clone());
            let out = quicksort(&buf, &ExecPlan::sequential());
            prop_assert!(is_sorted(&out.data));
            prop_assert!(crate::oracles::same_multiset(&data, &out.data));
        }
    }
}
