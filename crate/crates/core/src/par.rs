//! Data-parallel map over independent work items (runs, sweep points,
//! estimator trials). Backed by rayon with the `parallel` feature; falls back
//! to a sequential loop otherwise.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Parallel with at most `workers` threads; `0` means the rayon default.
    Parallel { workers: usize },
    #[default]
    Auto,
}

impl Exec {
    pub fn with_workers(workers: usize) -> Self {
        if workers == 1 {
            Exec::Sequential
        } else {
            Exec::Parallel { workers }
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Exec, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel { workers } if workers > 0 => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => pool.install(|| items.into_par_iter().map(f).collect()),
                Err(_) => items.into_par_iter().map(f).collect(),
            }
        }
        #[cfg(feature = "parallel")]
        Exec::Parallel { .. } | Exec::Auto => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Exec::Parallel { .. } | Exec::Auto => items.into_iter().map(f).collect(),
    }
}
