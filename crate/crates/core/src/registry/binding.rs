//! The table that connects descriptor source URIs to compiled bodies.

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use thiserror::Error;

use super::info::{OpInfo, OpKind};
use crate::execution::{Callable, ExecContext, OpError};
use crate::types::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("no binding registered for source {0:?}")]
    Unbound(String),
    #[error("{source_uri}: {message}")]
    Invalid { source_uri: String, message: String },
}

/// Builds a callable for an op from its resolved dependencies, given in
/// declaration order.
pub type OpFactory = dyn Fn(&OpInfo, Vec<Callable>) -> Result<Callable, BindError> + Send + Sync;
/// Wraps an op callable into a callable of another shape.
pub type AdapterFactory = dyn Fn(Callable, Vec<Callable>) -> Result<Callable, BindError> + Send + Sync;

#[derive(Clone)]
pub enum Binding {
    Op {
        kind: OpKind,
        inputs: RangeInclusive<usize>,
        factory: Arc<OpFactory>,
    },
    Adapter(Arc<AdapterFactory>),
}

impl Binding {
    pub fn op(
        kind: OpKind,
        inputs: RangeInclusive<usize>,
        factory: impl Fn(&OpInfo, Vec<Callable>) -> Result<Callable, BindError> + Send + Sync + 'static,
    ) -> Self {
        Binding::Op {
            kind,
            inputs,
            factory: Arc::new(factory),
        }
    }

    pub fn function(
        inputs: RangeInclusive<usize>,
        f: impl Fn(&[&Value], &ExecContext<'_>) -> Result<Value, OpError> + Send + Sync + 'static,
    ) -> Self {
        let c = Callable::function(f);
        Self::op(OpKind::Function, inputs, move |_, _| Ok(c.clone()))
    }

    pub fn computer(
        inputs: RangeInclusive<usize>,
        f: impl Fn(&[&Value], &mut Value, &ExecContext<'_>) -> Result<(), OpError> + Send + Sync + 'static,
    ) -> Self {
        let c = Callable::computer(f);
        Self::op(OpKind::Computer, inputs, move |_, _| Ok(c.clone()))
    }

    /// `inputs` counts all arguments including the mutable one.
    pub fn inplace(
        inputs: RangeInclusive<usize>,
        f: impl Fn(&[&Value], &mut Value, &ExecContext<'_>) -> Result<(), OpError> + Send + Sync + 'static,
    ) -> Self {
        let body: Arc<crate::execution::ComputerBody> = Arc::new(f);
        Self::op(OpKind::Inplace(0), inputs, move |info, _| match info.kind {
            OpKind::Inplace(index) => Ok(Callable::Inplace {
                index,
                body: body.clone(),
            }),
            k => Err(BindError::Invalid {
                source_uri: info.source.clone(),
                message: format!("inplace body bound to a {k} op"),
            }),
        })
    }

    pub fn adapter(f: impl Fn(Callable, Vec<Callable>) -> Result<Callable, BindError> + Send + Sync + 'static) -> Self {
        Binding::Adapter(Arc::new(f))
    }

    pub fn is_adapter(&self) -> bool {
        matches!(self, Binding::Adapter(_))
    }

    /// Checks that this binding can serve `info`.
    pub fn check(&self, info: &OpInfo, is_adapter_op: bool) -> Result<(), String> {
        match self {
            Binding::Adapter(_) if is_adapter_op => Ok(()),
            Binding::Adapter(_) => Err("adapter body bound to an ordinary op".into()),
            Binding::Op { .. } if is_adapter_op => Err("adapter op bound to an ordinary body".into()),
            Binding::Op { kind, inputs, .. } => {
                if !kind.same_class(info.kind) {
                    return Err(format!(
                        "body is a {} but the op is a {}",
                        kind.name(),
                        info.kind.name()
                    ));
                }
                let n = info.shape().input_count();
                if !inputs.contains(&n) {
                    return Err(format!(
                        "body accepts {}..={} inputs but the op declares {n}",
                        inputs.start(),
                        inputs.end()
                    ));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Default)]
pub struct BindingTable {
    entries: HashMap<String, Binding>,
}

impl BindingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, uri: impl Into<String>, binding: Binding) -> &mut Self {
        self.entries.insert(uri.into(), binding);
        self
    }

    pub fn get(&self, uri: &str) -> Option<&Binding> {
        self.entries.get(uri)
    }

    pub fn contains(&self, uri: &str) -> bool {
        self.entries.contains_key(uri)
    }

    pub fn extend(&mut self, other: BindingTable) {
        self.entries.extend(other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn uris(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
