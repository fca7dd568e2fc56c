//! Execution strategy for the hot loops.
//!
//! Every data-parallel site in the crate goes through [`map_indexed`] so the
//! `parallel` feature is the single switch between rayon and plain iteration.
//! The parallel map collects into an index-ordered `Vec`, so outputs are
//! byte-identical to the sequential path; scalar reductions elsewhere in the
//! crate fold those vectors sequentially to keep floating-point association
//! fixed.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}
