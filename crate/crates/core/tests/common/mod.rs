//! Shared strategies for property tests.
#![allow(dead_code)]

use proptest::prelude::*;
use skolab::StepPath;

/// Step paths on `[0, 1]` with at most `max_breaks` breakpoints on the 1/40 grid and values
/// on the 1/8 grid, so structural quantities are exactly representable.
pub fn step_path(dim: usize, max_breaks: usize) -> impl Strategy<Value = StepPath> {
    (
        proptest::collection::btree_set(1u32..40, 0..max_breaks),
        proptest::collection::vec(-16i32..=16, dim * (max_breaks + 1)),
    )
        .prop_map(move |(ts, vs)| {
            let mut times = vec![0.0];
            times.extend(ts.iter().map(|&k| k as f64 / 40.0));
            let values: Vec<f64> = vs[..dim * times.len()].iter().map(|&v| v as f64 / 8.0).collect();
            StepPath::from_flat(dim, 1.0, times, values).unwrap()
        })
}

/// A pair of paths of the same dimension (1 or 2).
pub fn path_pair(max_breaks: usize) -> impl Strategy<Value = (StepPath, StepPath)> {
    (1usize..=2).prop_flat_map(move |d| (step_path(d, max_breaks), step_path(d, max_breaks)))
}

/// A triple of paths of the same dimension (1 or 2).
pub fn path_triple(max_breaks: usize) -> impl Strategy<Value = (StepPath, StepPath, StepPath)> {
    (1usize..=2).prop_flat_map(move |d| (step_path(d, max_breaks), step_path(d, max_breaks), step_path(d, max_breaks)))
}
