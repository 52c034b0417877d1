//! The shared work pool. `STABQ_THREADS` caps its size.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::ThreadPool;

pub const THREADS_VAR: &str = "STABQ_THREADS";

pub fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool starts")
    })
}

/// `f(0), ..., f(count - 1)` evaluated on the pool, returned in index order.
pub fn par_map<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    pool().install(|| (0..count).into_par_iter().map(&f).collect())
}

/// As [`par_map`], stopping at the first error in index order.
pub fn try_par_map<T, E, F>(count: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    par_map(count, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        let v = par_map(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == (i as u64) * (i as u64)));
        let e: Result<Vec<u64>, u64> = try_par_map(50, |i| if i % 7 == 3 { Err(i) } else { Ok(i) });
        assert_eq!(e, Err(3));
    }
}
