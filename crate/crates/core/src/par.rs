//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction here folds results in a fixed item order, so the output
//! does not depend on the number of workers or on whether the `parallel`
//! feature is enabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default worker count: `CENTRANK_WORKERS` if set, otherwise the number of
/// available cores.
pub fn default_workers() -> usize {
    std::env::var("CENTRANK_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run `f` with at most `workers` threads available to the data-parallel
/// helpers below.
#[cfg(feature = "parallel")]
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let workers = workers.max(1);
    if rayon::current_num_threads() == workers {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("could not build a {workers}-thread pool ({e}); using the global pool");
            f()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<R: Send>(_workers: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// Map every index in `0..len` and collect the results in index order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Map over a slice, preserving order.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
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

/// Split `0..len` into fixed-size chunks, evaluate `chunk_fn` on each chunk
/// (in parallel, a bounded wave at a time) and fold the chunk results with
/// `merge` in ascending chunk order.
///
/// Chunk boundaries depend only on `len` and `chunk_size`, so floating-point
/// results are bit-identical for any worker count.
pub fn ordered_chunk_fold<A, T, C, M>(
    len: usize,
    chunk_size: usize,
    init: A,
    chunk_fn: C,
    mut merge: M,
) -> A
where
    T: Send,
    C: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    M: FnMut(A, T) -> A,
{
    let chunk_size = chunk_size.max(1);
    let n_chunks = len.div_ceil(chunk_size);
    // Bounded so that per-chunk partials never hold more than a few
    // vertex-sized buffers at once.
    let wave = 4 * rayon_threads();
    let mut acc = init;
    let mut start_chunk = 0;
    while start_chunk < n_chunks {
        let end_chunk = (start_chunk + wave).min(n_chunks);
        let partials = map_indexed(end_chunk - start_chunk, |i| {
            let c = start_chunk + i;
            let lo = c * chunk_size;
            chunk_fn(lo..(lo + chunk_size).min(len))
        });
        for p in partials {
            acc = merge(acc, p);
        }
        start_chunk = end_chunk;
    }
    acc
}

#[cfg(feature = "parallel")]
fn rayon_threads() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn rayon_threads() -> usize {
    1
}
