//! Execution-mode switch between the rayon data-parallel lane and the plain
//! sequential lane.
//!
//! Every hot loop in the crate funnels through the helpers here so that the
//! two lanes share one implementation of the actual arithmetic. Two rules keep
//! the output bit-identical across lanes and thread counts:
//!
//! * parallel work is always an order-preserving *map* into an indexed
//!   buffer — never a parallel reduction, whose association order would
//!   depend on the scheduler;
//! * any summation over mapped results happens sequentially afterwards.
//!
//! With the `parallel` cargo feature disabled the rayon dependency is gone and
//! [`Mode::Parallel`] silently degrades to the sequential lane, so callers do
//! not need to care which lane exists at compile time.

/// Which lane to run a data-parallel region on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Use rayon if the `parallel` feature is enabled, otherwise sequential.
    #[default]
    Parallel,
    /// Always run on the calling thread.
    Sequential,
}

impl Mode {
    /// The lane that will actually execute: `Parallel` degrades to
    /// `Sequential` when the feature is compiled out.
    pub fn effective(self) -> Mode {
        #[cfg(feature = "parallel")]
        {
            self
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = self;
            Mode::Sequential
        }
    }
}

/// Maps `f` over `0..n`, returning the results in index order.
pub fn map_indexed<T, F>(mode: Mode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode.effective() {
        Mode::Sequential => (0..n).map(f).collect(),
        Mode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            unreachable!("effective() never returns Parallel without the feature")
        }
    }
}

/// Maps `f` over `0..n` and sums the results sequentially (deterministic
/// association order regardless of lane).
pub fn sum_indexed<F>(mode: Mode, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    // Chunk the index range so the parallel lane does not materialize one
    // f64 per index; each chunk is summed in index order, and the chunk sums
    // are again combined in index order, so the result is lane-independent.
    const CHUNK: usize = 1024;
    if n == 0 {
        return 0.0;
    }
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(mode, chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partials.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanes_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let seq = sum_indexed(Mode::Sequential, 10_000, f);
        let par = sum_indexed(Mode::Parallel, 10_000, f);
        assert_eq!(seq.to_bits(), par.to_bits());

        let ms = map_indexed(Mode::Sequential, 257, |i| f(i).to_bits());
        let mp = map_indexed(Mode::Parallel, 257, |i| f(i).to_bits());
        assert_eq!(ms, mp);
    }
}
