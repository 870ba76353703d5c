//! Execution-mode plumbing. Parallel and sequential paths perform the same
//! partitioned reductions in the same order, so a given input produces
//! bit-identical output regardless of mode or thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How data-parallel sections execute. `Sequential` is always available and
/// is the default when the `parallel` feature is disabled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// `(0..n).map(f)` collected in index order.
pub(crate) fn map_indexed<T, F>(n: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Below this many elements a chunked pass runs inline: fork/join overhead
/// beats the work itself on small slices (measured on the FFT stages).
const PAR_MIN_LEN: usize = 1 << 16;

/// Apply `f` to disjoint chunks of `data`; chunk boundaries are fixed by
/// `chunk` and the slice length, never by the thread count, so results are
/// identical in every mode.
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, mode: ExecMode, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    match mode {
        ExecMode::Sequential => {
            for (i, c) in data.chunks_mut(chunk).enumerate() {
                f(i, c);
            }
        }
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            if data.len() < PAR_MIN_LEN {
                for (i, c) in data.chunks_mut(chunk).enumerate() {
                    f(i, c);
                }
            } else {
                data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
            }
        }
    }
}
