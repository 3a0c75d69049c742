//! Shared worker budget for ops that parallelize internally.

use std::sync::atomic::{AtomicUsize, Ordering};

/// A fixed budget of worker slots shared by all concurrent executions.
/// Slots are granted first-come; a request is never blocked, it may simply
/// receive fewer slots than asked for (possibly zero).
#[derive(Debug)]
pub struct ComputePool {
    budget: usize,
    held: AtomicUsize,
}

impl ComputePool {
    pub fn new(budget: usize) -> Self {
        Self {
            budget: budget.max(1),
            held: AtomicUsize::new(0),
        }
    }

    pub fn with_available_parallelism() -> Self {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn held(&self) -> usize {
        self.held.load(Ordering::Acquire)
    }

    pub fn acquire(&self, wanted: usize) -> SlotLease<'_> {
        let mut cur = self.held.load(Ordering::Acquire);
        loop {
            let grant = wanted.min(self.budget - cur);
            if grant == 0 {
                return SlotLease { pool: self, count: 0 };
            }
            match self
                .held
                .compare_exchange_weak(cur, cur + grant, Ordering::AcqRel, Ordering::Acquire)
            {
                Ok(_) => {
                    return SlotLease {
                        pool: self,
                        count: grant,
                    }
                }
                Err(actual) => cur = actual,
            }
        }
    }

    /// Runs `f(i)` for every `i in 0..n` and returns the results in index
    /// order, spreading the work over as many slots as can be acquired.
    /// Output is independent of how many slots were granted.
    pub fn map_indexed<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
        let lease = self.acquire(n.min(self.budget));
        let workers = lease.count().max(1);
        if workers == 1 || n < 2 {
            return (0..n).map(&f).collect();
        }
        let chunk = n.div_ceil(workers);
        let mut parts: Vec<Vec<T>> = Vec::with_capacity(workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let f = &f;
                    s.spawn(move || {
                        let start = (w * chunk).min(n);
                        let end = ((w + 1) * chunk).min(n);
                        (start..end).map(f).collect::<Vec<T>>()
                    })
                })
                .collect();
            for h in handles {
                parts.push(h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)));
            }
        });
        parts.into_iter().flatten().collect()
    }
}

impl Default for ComputePool {
    fn default() -> Self {
        Self::with_available_parallelism()
    }
}

#[derive(Debug)]
pub struct SlotLease<'a> {
    pool: &'a ComputePool,
    count: usize,
}

impl SlotLease<'_> {
    pub fn count(&self) -> usize {
        self.count
    }
}

impl Drop for SlotLease<'_> {
    fn drop(&mut self) {
        if self.count > 0 {
            self.pool.held.fetch_sub(self.count, Ordering::AcqRel);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicUsize;
    use std::sync::Arc;

    #[test]
    fn grants_never_exceed_budget() {
        let pool = ComputePool::new(4);
        let a = pool.acquire(2);
        let b = pool.acquire(2);
        let c = pool.acquire(2);
        assert_eq!((a.count(), b.count(), c.count()), (2, 2, 0));
        drop(a);
        assert_eq!(pool.acquire(3).count(), 2);
        drop((b, c));
        assert_eq!(pool.held(), 0);
    }

    #[test]
    fn concurrent_holders_bounded() {
        let pool = Arc::new(ComputePool::new(4));
        let peak = Arc::new(AtomicUsize::new(0));
        std::thread::scope(|s| {
            for _ in 0..16 {
                let (pool, peak) = (pool.clone(), peak.clone());
                s.spawn(move || {
                    for _ in 0..200 {
                        let lease = pool.acquire(3);
                        peak.fetch_max(pool.held(), Ordering::SeqCst);
                        assert!(lease.count() <= 3);
                    }
                });
            }
        });
        assert!(peak.load(Ordering::SeqCst) <= 4);
        assert_eq!(pool.held(), 0);
    }

    #[test]
    fn map_indexed_is_budget_independent() {
        let serial = ComputePool::new(1).map_indexed(37, |i| i * i);
        let parallel = ComputePool::new(4).map_indexed(37, |i| i * i);
        assert_eq!(serial, parallel);
        assert_eq!(serial[36], 36 * 36);
    }
}
