//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon unless the
//! caller asks for sequential execution. Every helper preserves output order and
//! never lets the thread count influence floating-point reduction order, so
//! results are bit-identical between the two paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for the data-parallel inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Use the rayon pool when the `parallel` feature is enabled.
    #[default]
    Parallel,
    /// Single-threaded reference execution.
    Sequential,
}

impl Exec {
    pub fn from_deterministic(deterministic: bool) -> Self {
        if deterministic {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    #[inline]
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Worker threads the parallel path would use; 1 without the `parallel` feature.
pub fn thread_count(exec: Exec) -> usize {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return rayon::current_num_threads();
    }
    let _ = exec;
    1
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<R, F>(n: usize, exec: Exec, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Calls `f(chunk_index, chunk)` for consecutive `chunk_len`-sized chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, exec: Exec, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert!(chunk_len > 0);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Splits `0..n` into fixed-size ranges. The partition depends only on `n` and
/// `chunk`, which keeps chunked reductions independent of the thread count.
pub fn fixed_ranges(n: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    assert!(chunk > 0);
    (0..n.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_everything_once() {
        let r = fixed_ranges(10, 4);
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
        assert!(fixed_ranges(0, 3).is_empty());
    }

    #[test]
    fn both_modes_agree() {
        let a = map_indexed(100, Exec::Parallel, |i| (i as f64).sqrt());
        let b = map_indexed(100, Exec::Sequential, |i| (i as f64).sqrt());
        assert_eq!(a, b);

        let mut x = vec![0usize; 37];
        let mut y = vec![0usize; 37];
        for_each_chunk_mut(&mut x, 5, Exec::Parallel, |ci, c| {
            c.iter_mut().for_each(|v| *v = ci)
        });
        for_each_chunk_mut(&mut y, 5, Exec::Sequential, |ci, c| {
            c.iter_mut().for_each(|v| *v = ci)
        });
        assert_eq!(x, y);
    }
}
