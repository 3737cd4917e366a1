//! Data-parallel helpers. Every helper returns results in index order, so the
//! outcome never depends on the execution mode or the thread schedule.
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] silently runs
//! sequentially.

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_range(0, n, exec, &f)
}

#[cfg(feature = "parallel")]
fn map_range<T, F>(start: usize, end: usize, exec: Execution, f: &F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if exec.is_parallel() {
        (start..end).into_par_iter().map(f).collect()
    } else {
        (start..end).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_range<T, F>(start: usize, end: usize, _exec: Execution, f: &F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (start..end).map(f).collect()
}

/// Outcome of [`scan_until`].
#[derive(Debug)]
pub struct Scan<T> {
    /// Every evaluated result, in index order.
    pub results: Vec<T>,
    /// Lowest index whose result satisfied the stop predicate.
    pub first_stop: Option<usize>,
}

/// Evaluates `f` over `0..n` in consecutive chunks and stops after the first
/// chunk containing a result accepted by `stop`.
///
/// Chunk boundaries are the same in both execution modes, so the number of
/// evaluations is identical too.
pub fn scan_until<T, F, S>(n: usize, chunk: usize, exec: Execution, f: F, stop: S) -> Scan<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    S: Fn(&T) -> bool,
{
    let chunk = chunk.max(1);
    let mut results = Vec::with_capacity(n.min(chunk * 4));
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let part = map_range(start, end, exec, &f);
        let hit = part.iter().position(&stop);
        results.extend(part);
        if let Some(pos) = hit {
            return Scan {
                results,
                first_stop: Some(start + pos),
            };
        }
        start = end;
    }
    Scan {
        results,
        first_stop: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let v = map_indexed(1000, exec, |i| i * i);
            assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        }
    }

    #[test]
    fn scan_stops_after_chunk_with_hit() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let s = scan_until(100, 8, exec, |i| i, |&x| x == 19 || x == 21);
            assert_eq!(s.first_stop, Some(19));
            assert_eq!(s.results.len(), 24);
        }
    }

    #[test]
    fn scan_without_hit_covers_everything() {
        let s = scan_until(10, 3, Execution::Parallel, |i| i, |_| false);
        assert_eq!(s.first_stop, None);
        assert_eq!(s.results, (0..10).collect::<Vec<_>>());
    }
}
