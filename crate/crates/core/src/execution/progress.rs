//! Progress reporting from running ops to registered listeners.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressReport {
    /// Distinguishes concurrent or successive executions.
    pub task: u64,
    pub op_label: String,
    pub fraction: f64,
    pub stage: String,
}

type Listener = Arc<dyn Fn(&ProgressReport) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListenerId(u64);

/// Delivers reports synchronously, in listener registration order.
#[derive(Default)]
pub struct ProgressHub {
    listeners: RwLock<Vec<(ListenerId, Listener)>>,
    next_listener: AtomicU64,
    next_task: AtomicU64,
}

impl ProgressHub {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_listener(&self, f: impl Fn(&ProgressReport) + Send + Sync + 'static) -> ListenerId {
        let id = ListenerId(self.next_listener.fetch_add(1, Ordering::Relaxed));
        self.listeners
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .push((id, Arc::new(f)));
        id
    }

    pub fn remove_listener(&self, id: ListenerId) -> bool {
        let mut ls = self.listeners.write().unwrap_or_else(|e| e.into_inner());
        let before = ls.len();
        ls.retain(|(l, _)| *l != id);
        ls.len() != before
    }

    fn deliver(&self, report: &ProgressReport) {
        let ls = self.listeners.read().unwrap_or_else(|e| e.into_inner());
        for (_, l) in ls.iter() {
            l(report);
        }
    }

    pub fn task(&self, label: &str, stage: &str, steps: usize) -> ProgressTask<'_> {
        ProgressTask {
            hub: self,
            id: self.next_task.fetch_add(1, Ordering::Relaxed),
            label: label.to_string(),
            stage: stage.to_string(),
            total: steps,
            done: Mutex::new((0, false)),
        }
    }
}

/// One execution's progress. Fractions are non-decreasing; `finish` makes
/// sure the last delivered fraction is exactly 1.0.
pub struct ProgressTask<'a> {
    hub: &'a ProgressHub,
    id: u64,
    label: String,
    stage: String,
    total: usize,
    /// (steps done, 1.0 already delivered)
    done: Mutex<(usize, bool)>,
}

impl ProgressTask<'_> {
    /// Records one completed step. Safe to call from worker threads; the
    /// lock is held while delivering so reports arrive in order.
    pub fn step(&self) {
        let mut done = self.done.lock().unwrap_or_else(|e| e.into_inner());
        if done.0 >= self.total {
            return;
        }
        done.0 += 1;
        let fraction = if done.0 == self.total {
            done.1 = true;
            1.0
        } else {
            done.0 as f64 / self.total as f64
        };
        self.hub.deliver(&self.report(fraction));
    }

    pub fn finish(&self) {
        let mut done = self.done.lock().unwrap_or_else(|e| e.into_inner());
        if !done.1 {
            done.0 = self.total;
            done.1 = true;
            self.hub.deliver(&self.report(1.0));
        }
    }

    fn report(&self, fraction: f64) -> ProgressReport {
        ProgressReport {
            task: self.id,
            op_label: self.label.clone(),
            fraction,
            stage: self.stage.clone(),
        }
    }
}
