//! Executable op bodies and their calling convention.
//!
//! Every body receives its read-only inputs in declared order. Computers also
//! receive the container; inplace bodies receive the mutable argument
//! separately and only the remaining arguments as inputs.

use std::sync::Arc;

use thiserror::Error;

use super::pool::ComputePool;
use super::progress::{ProgressHub, ProgressTask};
use crate::registry::OpKind;
use crate::types::{DescriptorTable, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("argument {index}: expected {expected}, found {found}")]
    Payload {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("{0}")]
    Failed(String),
}

impl OpError {
    pub fn payload(index: usize, expected: &str, found: &Value) -> Self {
        OpError::Payload {
            index,
            expected: expected.to_string(),
            found: found.ty().to_string(),
        }
    }
}

/// Services available to op bodies during execution.
#[derive(Clone, Copy)]
pub struct ExecContext<'a> {
    pub(crate) progress: &'a ProgressHub,
    pub(crate) pool: &'a ComputePool,
    pub(crate) descriptors: &'a DescriptorTable,
}

impl<'a> ExecContext<'a> {
    pub fn new(progress: &'a ProgressHub, pool: &'a ComputePool, descriptors: &'a DescriptorTable) -> Self {
        Self {
            progress,
            pool,
            descriptors,
        }
    }

    pub fn pool(&self) -> &'a ComputePool {
        self.pool
    }

    pub fn descriptors(&self) -> &'a DescriptorTable {
        self.descriptors
    }

    /// Starts a progress task of `steps` units.
    pub fn task(&self, label: &str, stage: &str, steps: usize) -> ProgressTask<'a> {
        self.progress.task(label, stage, steps)
    }
}

pub type FunctionBody = dyn Fn(&[&Value], &ExecContext<'_>) -> Result<Value, OpError> + Send + Sync;
pub type ComputerBody = dyn Fn(&[&Value], &mut Value, &ExecContext<'_>) -> Result<(), OpError> + Send + Sync;

#[derive(Clone)]
pub enum Callable {
    Function(Arc<FunctionBody>),
    Computer(Arc<ComputerBody>),
    Inplace { index: usize, body: Arc<ComputerBody> },
}

impl std::fmt::Debug for Callable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Callable({})", self.kind())
    }
}

impl Callable {
    pub fn function(f: impl Fn(&[&Value], &ExecContext<'_>) -> Result<Value, OpError> + Send + Sync + 'static) -> Self {
        Callable::Function(Arc::new(f))
    }

    pub fn computer(
        f: impl Fn(&[&Value], &mut Value, &ExecContext<'_>) -> Result<(), OpError> + Send + Sync + 'static,
    ) -> Self {
        Callable::Computer(Arc::new(f))
    }

    pub fn inplace(
        index: usize,
        f: impl Fn(&[&Value], &mut Value, &ExecContext<'_>) -> Result<(), OpError> + Send + Sync + 'static,
    ) -> Self {
        Callable::Inplace {
            index,
            body: Arc::new(f),
        }
    }

    pub fn kind(&self) -> OpKind {
        match self {
            Callable::Function(_) => OpKind::Function,
            Callable::Computer(_) => OpKind::Computer,
            Callable::Inplace { index, .. } => OpKind::Inplace(*index),
        }
    }

    pub fn apply(&self, inputs: &[&Value], ctx: &ExecContext<'_>) -> Result<Value, OpError> {
        match self {
            Callable::Function(f) => f(inputs, ctx),
            _ => Err(OpError::Failed(format!("{} called as a function", self.kind()))),
        }
    }

    pub fn compute(&self, inputs: &[&Value], out: &mut Value, ctx: &ExecContext<'_>) -> Result<(), OpError> {
        match self {
            Callable::Computer(f) => f(inputs, out, ctx),
            _ => Err(OpError::Failed(format!("{} called as a computer", self.kind()))),
        }
    }

    /// `others` are the arguments except the mutable one, in order.
    pub fn mutate(&self, others: &[&Value], target: &mut Value, ctx: &ExecContext<'_>) -> Result<(), OpError> {
        match self {
            Callable::Inplace { body, .. } => body(others, target, ctx),
            _ => Err(OpError::Failed(format!("{} called as inplace", self.kind()))),
        }
    }
}

/// Helpers for bodies extracting typed arguments.
pub mod args {
    use super::OpError;
    use crate::types::{Image, Value};

    fn arg<'v>(inputs: &[&'v Value], i: usize) -> Result<&'v Value, OpError> {
        inputs
            .get(i)
            .copied()
            .ok_or_else(|| OpError::Failed(format!("missing argument {i}")))
    }

    pub fn integer(inputs: &[&Value], i: usize) -> Result<i64, OpError> {
        let v = arg(inputs, i)?;
        v.as_integer().ok_or_else(|| OpError::payload(i, "Integer", v))
    }

    pub fn real(inputs: &[&Value], i: usize) -> Result<f64, OpError> {
        let v = arg(inputs, i)?;
        v.as_real().ok_or_else(|| OpError::payload(i, "Real", v))
    }

    pub fn boolean(inputs: &[&Value], i: usize) -> Result<bool, OpError> {
        let v = arg(inputs, i)?;
        v.as_bool().ok_or_else(|| OpError::payload(i, "Boolean", v))
    }

    pub fn text<'v>(inputs: &[&'v Value], i: usize) -> Result<&'v str, OpError> {
        let v = arg(inputs, i)?;
        v.as_text().ok_or_else(|| OpError::payload(i, "Text", v))
    }

    pub fn bytes<'v>(inputs: &[&'v Value], i: usize) -> Result<&'v [u8], OpError> {
        let v = arg(inputs, i)?;
        v.as_bytes().ok_or_else(|| OpError::payload(i, "ByteArray", v))
    }

    pub fn reals<'v>(inputs: &[&'v Value], i: usize) -> Result<&'v [f64], OpError> {
        let v = arg(inputs, i)?;
        v.as_reals().ok_or_else(|| OpError::payload(i, "RealArray", v))
    }

    pub fn image_f64<'v>(inputs: &[&'v Value], i: usize) -> Result<&'v Image<f64>, OpError> {
        let v = arg(inputs, i)?;
        v.as_image_f64().ok_or_else(|| OpError::payload(i, "ImageF64", v))
    }

    pub fn image_u8<'v>(inputs: &[&'v Value], i: usize) -> Result<&'v Image<u8>, OpError> {
        let v = arg(inputs, i)?;
        v.as_image_u8().ok_or_else(|| OpError::payload(i, "ImageU8", v))
    }

    /// Optional trailing argument: `None` when a reduced variant omitted it.
    pub fn optional<'v>(inputs: &[&'v Value], i: usize) -> Option<&'v Value> {
        inputs.get(i).copied()
    }
}
