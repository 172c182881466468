//! Deterministic execution helpers with a sequential fallback.
//!
//! Reductions are chunked with fixed boundaries and the partial results are
//! combined in index order, so a sum evaluates to bitwise the same value on
//! one thread, on a rayon pool, and with the `parallel` feature disabled.

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Route all helpers through the sequential path even when the `parallel`
/// feature is compiled in.  Used by the benchmark suite for A/B runs.
pub fn force_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::Relaxed);
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

const CHUNK: usize = 4096;

/// Types that can act as reduction accumulators.
pub trait Accum: Send + Default {
    fn add(self, other: Self) -> Self;
}

impl Accum for f64 {
    fn add(self, other: Self) -> Self {
        self + other
    }
}

impl Accum for (f64, f64) {
    fn add(self, o: Self) -> Self {
        (self.0 + o.0, self.1 + o.1)
    }
}

impl Accum for (f64, f64, f64) {
    fn add(self, o: Self) -> Self {
        (self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }
}

impl Accum for (f64, f64, f64, f64) {
    fn add(self, o: Self) -> Self {
        (self.0 + o.0, self.1 + o.1, self.2 + o.2, self.3 + o.3)
    }
}

fn chunk_reduce<T: Accum>(lo: usize, hi: usize, f: &(impl Fn(usize) -> T + Sync)) -> T {
    let mut acc = T::default();
    for i in lo..hi {
        acc = acc.add(f(i));
    }
    acc
}

/// Σ f(i) over 0..n with fixed 4096-element chunks.
pub fn sum_by<T: Accum>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> T {
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<T>;
    #[cfg(feature = "parallel")]
    {
        if parallel_enabled() && n_chunks > 1 {
            partials = (0..n_chunks)
                .into_par_iter()
                .map(|c| chunk_reduce(c * CHUNK, ((c + 1) * CHUNK).min(n), &f))
                .collect();
            return partials.into_iter().fold(T::default(), T::add);
        }
    }
    partials = (0..n_chunks)
        .map(|c| chunk_reduce(c * CHUNK, ((c + 1) * CHUNK).min(n), &f))
        .collect();
    partials.into_iter().fold(T::default(), T::add)
}

/// Elementwise map into a fresh vector; order-preserving in both modes.
pub fn map_by(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        if parallel_enabled() && n > CHUNK {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Coarse-grained fan-out over independent work items (sweep points,
/// amplitude scans, potential variants).
pub fn map_collect<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        if parallel_enabled() {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_is_mode_independent() {
        let xs: Vec<f64> = (0..20_000).map(|i| (i as f64 * 0.37).sin()).collect();
        let seq = {
            force_sequential(true);
            let s = sum_by(xs.len(), |i| xs[i]);
            force_sequential(false);
            s
        };
        let par = sum_by(xs.len(), |i| xs[i]);
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    #[test]
    fn map_preserves_order() {
        let v = map_by(10_000, |i| i as f64);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i as f64));
    }
}
