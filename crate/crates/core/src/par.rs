//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon unless
//! sequential execution has been forced at runtime via [`set_sequential`].
//! Without the feature everything runs on the calling thread. Every helper
//! produces output in index order, so results never depend on the schedule;
//! reductions are always done by the caller over the ordered output.

use std::ops::Range;
#[cfg(feature = "parallel")]
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Forces sequential execution (used by the benchmarks to compare both paths).
pub fn set_sequential(on: bool) {
    #[cfg(feature = "parallel")]
    FORCE_SEQUENTIAL.store(on, Ordering::Relaxed);
    #[cfg(not(feature = "parallel"))]
    let _ = on;
}

pub fn is_parallel() -> bool {
    #[cfg(feature = "parallel")]
    {
        !FORCE_SEQUENTIAL.load(Ordering::Relaxed)
    }
    #[cfg(not(feature = "parallel"))]
    {
        false
    }
}

/// Caps the global worker pool from `QVORT_THREADS`. Returns the cap if one was applied.
///
/// Must be called before any parallel work; later calls are ignored.
pub fn init_from_env() -> Option<usize> {
    let threads = std::env::var("QVORT_THREADS").ok()?.trim().parse::<usize>().ok()?;
    if threads == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        if threads == 1 {
            set_sequential(true);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Some(threads)
}

/// Calls `f(chunk_index, chunk)` for consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Elementwise update `f(index, &mut item)`.
pub fn for_each_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    // Chunking keeps per-task overhead small for cheap closures.
    const CHUNK: usize = 4096;
    for_each_chunk_mut(data, CHUNK, |ci, c| {
        let base = ci * CHUNK;
        for (j, v) in c.iter_mut().enumerate() {
            f(base + j, v);
        }
    });
}

/// Maps every index of `range` and collects the results in index order.
pub fn map_range<R, F>(range: Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return range.into_par_iter().map(f).collect();
    }
    range.map(f).collect()
}

/// Builds a vector of `len` items from `f(index)`.
pub fn build_vec<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map_range(0..len, f)
}
