//! Thin shim over rayon so every data-parallel loop in the crate has a
//! sequential fallback when the `parallel` feature is disabled.
//!
//! All helpers preserve index order, so results are identical (bit for bit)
//! with and without the feature and regardless of the thread count.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<U, F>(len: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..len).map(f).collect()
}

/// Like [`map_indices`] but fallible. The error reported is always the one
/// with the smallest index, independent of scheduling.
pub(crate) fn try_map_indices<U, F>(len: usize, f: F) -> Result<Vec<U>>
where
    U: Send,
    F: Fn(usize) -> Result<U> + Sync + Send,
{
    let results = map_indices(len, f);
    let mut out = Vec::with_capacity(len);
    for r in results {
        out.push(r?);
    }
    Ok(out)
}

/// Cap the number of worker threads for all subsequent parallel sections.
/// Must be called before any parallel work; later calls fail silently.
#[cfg(feature = "parallel")]
pub fn set_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

#[cfg(not(feature = "parallel"))]
pub fn set_threads(_n: usize) {}
