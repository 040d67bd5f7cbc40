use std::ops::Range;

/// Runs independent work items either on the calling thread or on a private
/// rayon pool.
///
/// Output order always follows input order, so reductions over the returned
/// vector are bit-identical for any worker count.
pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn sequential() -> Self {
        Self {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// `workers == 0` means "one per available core". Without the `parallel`
    /// feature this always degrades to [`Executor::sequential`].
    pub fn with_workers(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let workers = if workers == 0 {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            } else {
                workers
            };
            if workers <= 1 {
                return Self::sequential();
            }
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => Self {
                    workers,
                    pool: Some(pool),
                },
                Err(_) => Self::sequential(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Self::sequential()
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn map_range<T, F>(&self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| range.into_par_iter().map(&f).collect());
        }
        range.map(f).collect()
    }

    pub fn map_slice<I, T, F>(&self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::sequential()
    }
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}
