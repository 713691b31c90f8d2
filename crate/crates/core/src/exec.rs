//! Execution backend selection.
//!
//! Hot loops dispatch through the helpers below. With the `parallel`
//! feature (default) they run on the rayon thread pool; without it, or
//! after [`set_parallel_enabled`]`(false)`, they run sequentially. The
//! runtime switch exists so benchmarks can compare both paths in one
//! process. Row-chunked iteration and fixed-size reduction chunks keep
//! results deterministic for a given mode.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Chunk length for dot-product style reductions. Fixed so the reduction
/// tree, and therefore rounding, does not depend on thread scheduling.
const REDUCE_CHUNK: usize = 8192;

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::Relaxed)
}

/// Runtime switch between the rayon and sequential paths. No effect when
/// the crate is built without the `parallel` feature.
pub fn set_parallel_enabled(on: bool) {
    PARALLEL.store(on, Ordering::Relaxed);
}

/// Sizes the global rayon pool (call once, before first use). Returns the
/// effective worker count; 1 when built without the `parallel` feature.
pub fn configure_threads(n: usize) -> usize {
    #[cfg(feature = "parallel")]
    {
        if n > 0 {
            // Ignore the error from a pool that is already initialized.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        return rayon::current_num_threads();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        1
    }
}

/// Fills `values` row by row; `f(j, row)` writes row `j` of length `nx`.
pub(crate) fn fill_rows<F>(values: &mut [f64], nx: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    debug_assert_eq!(values.len() % nx, 0);
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        values.par_chunks_mut(nx).enumerate().for_each(|(j, row)| f(j, row));
        return;
    }
    for (j, row) in values.chunks_mut(nx).enumerate() {
        f(j, row);
    }
}

/// Sum of `f(j)` over rows `0..ny`. Row partials are combined in row
/// order for mode- and thread-count-independent rounding.
pub(crate) fn sum_rows<F>(ny: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        let partials: Vec<f64> = (0..ny).into_par_iter().map(f).collect();
        return partials.into_iter().sum();
    }
    (0..ny).map(f).sum()
}

/// Maximum of `f(j)` over rows `0..ny` (empty range yields -inf).
pub(crate) fn max_rows<F>(ny: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return (0..ny)
            .into_par_iter()
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max);
    }
    (0..ny).map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Deterministically chunked dot product. Chunk partials are combined in
/// index order, so the result is identical in both modes and independent
/// of thread count.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunk_dot = |(ca, cb): (&[f64], &[f64])| -> f64 {
        ca.iter().zip(cb).map(|(x, y)| x * y).sum()
    };
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        let partials: Vec<f64> = a
            .par_chunks(REDUCE_CHUNK)
            .zip(b.par_chunks(REDUCE_CHUNK))
            .map(chunk_dot)
            .collect();
        return partials.into_iter().sum();
    }
    a.chunks(REDUCE_CHUNK).zip(b.chunks(REDUCE_CHUNK)).map(chunk_dot).sum()
}

/// Deterministically chunked weighted dot product `sum w * u * v`.
pub(crate) fn wdot(w: &[f64], u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), u.len());
    debug_assert_eq!(w.len(), v.len());
    let chunk_dot = |((cw, cu), cv): ((&[f64], &[f64]), &[f64])| -> f64 {
        cw.iter().zip(cu).zip(cv).map(|((a, b), c)| a * b * c).sum()
    };
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        let partials: Vec<f64> = w
            .par_chunks(REDUCE_CHUNK)
            .zip(u.par_chunks(REDUCE_CHUNK))
            .zip(v.par_chunks(REDUCE_CHUNK))
            .map(chunk_dot)
            .collect();
        return partials.into_iter().sum();
    }
    w.chunks(REDUCE_CHUNK)
        .zip(u.chunks(REDUCE_CHUNK))
        .zip(v.chunks(REDUCE_CHUNK))
        .map(chunk_dot)
        .sum()
}

/// `y += a * x`, element-wise.
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        y.par_chunks_mut(REDUCE_CHUNK)
            .zip(x.par_chunks(REDUCE_CHUNK))
            .for_each(|(cy, cx)| {
                for (py, px) in cy.iter_mut().zip(cx) {
                    *py += a * px;
                }
            });
        return;
    }
    for (py, px) in y.iter_mut().zip(x) {
        *py += a * px;
    }
}

/// `y = x + a * y`, element-wise (conjugate-gradient direction update).
pub(crate) fn xpay(y: &mut [f64], a: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        y.par_chunks_mut(REDUCE_CHUNK)
            .zip(x.par_chunks(REDUCE_CHUNK))
            .for_each(|(cy, cx)| {
                for (py, px) in cy.iter_mut().zip(cx) {
                    *py = px + a * *py;
                }
            });
        return;
    }
    for (py, px) in y.iter_mut().zip(x) {
        *py = px + a * *py;
    }
}

/// Applies `f` to each item, in parallel across items when enabled. Used
/// for per-phase work inside a time step and for sweep tuples.
pub(crate) fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        items.par_iter_mut().for_each(f);
        return;
    }
    items.iter_mut().for_each(f);
}

/// Maps items to results, in parallel across items when enabled.
pub(crate) fn map_items<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}
