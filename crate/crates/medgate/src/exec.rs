use medgate_core::optimize::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Runs optimizer jobs on a dedicated rayon pool.
///
/// Results come back in job order, so a run with `workers = 1` and a run
/// with many workers see the same candidate sequence per batch.
pub struct RayonExecutor {
    pool: ThreadPool,
    workers: usize,
}

impl RayonExecutor {
    pub fn new(workers: usize) -> anyhow::Result<Self> {
        let workers = workers.max(1);
        let pool = ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, n: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.workers == 1 {
            return (0..n).map(job).collect();
        }
        self.pool.install(|| (0..n).into_par_iter().map(&job).collect())
    }

    fn batch_size(&self) -> usize {
        self.workers
    }
}
