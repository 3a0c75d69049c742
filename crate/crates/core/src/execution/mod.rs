//! The builder API, execution of resolved trees, history, progress and the
//! shared compute pool.

mod builder;
mod callable;
mod help;
mod history;
mod instantiate;
mod pool;
mod progress;

pub use builder::{Arg, ExecError, OpBuilder, OpHandle};
pub use callable::{args, Callable, ComputerBody, ExecContext, FunctionBody, OpError};
pub use help::{describe_type, help, help_verbose, signature_line};
pub use history::{history_for, HistoryRecord, OpHistory};
pub use instantiate::instantiate;
pub use pool::{ComputePool, SlotLease};
pub use progress::{ListenerId, ProgressHub, ProgressReport, ProgressTask};

use crate::types::DescriptorTable;

/// Execution services shared by an environment and every handle it hands
/// out.
pub struct Runtime {
    pub(crate) history: OpHistory,
    pub(crate) progress: ProgressHub,
    pub(crate) pool: ComputePool,
    pub(crate) descriptors: DescriptorTable,
    pub(crate) record_history: bool,
}

impl Runtime {
    pub fn new(descriptors: DescriptorTable, pool: ComputePool, record_history: bool) -> Self {
        Self {
            history: OpHistory::new(),
            progress: ProgressHub::new(),
            pool,
            descriptors,
            record_history,
        }
    }

    pub fn context(&self) -> ExecContext<'_> {
        ExecContext::new(&self.progress, &self.pool, &self.descriptors)
    }

    pub fn history(&self) -> &OpHistory {
        &self.history
    }

    pub fn progress(&self) -> &ProgressHub {
        &self.progress
    }

    pub fn pool(&self) -> &ComputePool {
        &self.pool
    }

    pub fn descriptors(&self) -> &DescriptorTable {
        &self.descriptors
    }

    pub fn records_history(&self) -> bool {
        self.record_history
    }
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime")
            .field("pool_budget", &self.pool.budget())
            .field("record_history", &self.record_history)
            .finish()
    }
}
