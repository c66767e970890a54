//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it the same closures run in order on the calling thread. Results
//! are always assembled in input order so output never depends on scheduling.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Splits `range` into consecutive chunks of at most `chunk` elements.
pub fn chunk_ranges(range: Range<u64>, chunk: u64) -> Vec<Range<u64>> {
    let chunk = chunk.max(1);
    let mut out = Vec::new();
    let mut lo = range.start;
    while lo < range.end {
        let hi = lo.saturating_add(chunk).min(range.end);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sums an integer-valued function over fixed chunks of `range`.
pub fn sum_over_chunks<F>(range: Range<u64>, chunk: u64, f: F) -> u64
where
    F: Fn(Range<u64>) -> u64 + Sync + Send,
{
    let chunks = chunk_ranges(range, chunk);
    map(&chunks, |r| f(r.clone())).into_iter().sum()
}

/// Runs `f` on each mutable chunk of `data` together with the chunk's offset.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, c) in data.chunks_mut(chunk).enumerate() {
            f(i * chunk, c);
        }
    }
}

/// Number of worker threads the helpers above will use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Configures the global worker pool. A no-op without the `parallel` feature
/// or when the pool was already initialised.
pub fn init_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
    }
}

/// Runs `f` with every helper above restricted to the calling thread's
/// order of execution, using a one-thread pool when `parallel` is enabled.
pub fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        static POOL: std::sync::OnceLock<rayon::ThreadPool> = std::sync::OnceLock::new();
        POOL.get_or_init(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .expect("one-thread pool")
        })
        .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}
