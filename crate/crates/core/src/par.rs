//! Execution helpers for the partition- and row-parallel loops.
//!
//! With the `parallel` feature (default) loops run on the ambient rayon pool.
//! Without it, or inside [`sequential`], every helper falls back to a plain
//! loop. Both paths produce bitwise-identical results: work is split into
//! fixed chunks whose boundaries do not depend on the worker count, and
//! partial results are always combined in index order.

use std::cell::Cell;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used by reductions. Fixed so partial sums are identical
/// whatever the worker count.
pub const REDUCE_CHUNK: usize = 1024;

/// Rows handed to a single task by row-parallel kernels.
pub const ROW_CHUNK: usize = 256;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with every helper forced onto the calling thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Restore(bool);
    impl Drop for Restore {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(FORCE_SEQUENTIAL.with(|c| c.replace(true)));
    f()
}

/// Runs `f` on a dedicated pool of `threads` workers. Without the `parallel`
/// feature this simply calls `f`.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// True when helpers will dispatch to rayon.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// `(0..n).map(f).collect()`, possibly in parallel. Output order is by index.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() && n > 1 {
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Calls `f(start, chunk)` on consecutive `chunk_len`-sized pieces of `out`.
pub(crate) fn for_each_chunk_mut<F>(out: &mut [f64], chunk_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let chunk_len = chunk_len.max(1);
    #[cfg(feature = "parallel")]
    if is_parallel() && out.len() > chunk_len {
        out.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(k, chunk)| f(k * chunk_len, chunk));
        return;
    }
    for (k, chunk) in out.chunks_mut(chunk_len).enumerate() {
        f(k * chunk_len, chunk);
    }
}

/// Calls `f(i, piece)` for each piece of `out` delimited by `bounds`
/// (`bounds[i]..bounds[i + 1]`).
pub(crate) fn for_each_segment_mut<F>(out: &mut [f64], bounds: &[usize], f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let mut pieces = Vec::with_capacity(bounds.len().saturating_sub(1));
    let mut rest = out;
    for w in bounds.windows(2) {
        let (head, tail) = rest.split_at_mut(w[1] - w[0]);
        pieces.push(head);
        rest = tail;
    }
    #[cfg(feature = "parallel")]
    if is_parallel() && pieces.len() > 1 {
        pieces
            .into_par_iter()
            .enumerate()
            .for_each(|(i, piece)| f(i, piece));
        return;
    }
    for (i, piece) in pieces.into_iter().enumerate() {
        f(i, piece);
    }
}

/// Sum of `f(chunk_start, chunk_end)` over fixed [`REDUCE_CHUNK`] ranges of
/// `0..n`, combined left to right.
pub(crate) fn chunked_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let part = |k: usize| {
        let lo = k * REDUCE_CHUNK;
        f(lo, (lo + REDUCE_CHUNK).min(n))
    };
    if chunks <= 1 {
        return if n == 0 { 0.0 } else { part(0) };
    }
    map_indexed(chunks, part).into_iter().sum()
}
