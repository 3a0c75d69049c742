use std::cell::RefCell;
use std::fmt::Write;
use std::rc::Rc;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

use super::callable::OpError;
use super::Runtime;
use crate::matcher::LocalResolved;
use crate::matcher::{self, InfoTree, MatchError, OpRequest, RequestTarget, Resolved};
use crate::registry::{OpEnvironment, OpKind};
use crate::types::{Image, SemanticType, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("{signature}: {error}")]
    Op { signature: Arc<str>, error: OpError },
    #[error("{0}")]
    Usage(String),
}

impl ExecError {
    pub fn op_error(&self) -> Option<&OpError> {
        match self {
            ExecError::Op { error, .. } => Some(error),
            _ => None,
        }
    }
}

/// A staged argument.
#[derive(Debug)]
pub enum Arg<'a> {
    Owned(Value),
    Ref(&'a Value),
    /// Only meaningful at the mutable index of an inplace call.
    Mut(&'a mut Value),
    /// Type only, for resolving a handle without values.
    Type(SemanticType),
}

impl Arg<'_> {
    pub fn value(&self) -> Option<&Value> {
        match self {
            Arg::Owned(v) => Some(v),
            Arg::Ref(v) => Some(v),
            Arg::Mut(v) => Some(v),
            Arg::Type(_) => None,
        }
    }

    pub fn ty(&self) -> SemanticType {
        match self {
            Arg::Type(t) => t.clone(),
            a => a
                .value()
                .map(Value::ty)
                .unwrap_or_else(|| SemanticType::named("Nothing")),
        }
    }

    fn write_type(&self, out: &mut String) {
        match self {
            Arg::Type(t) => {
                let _ = write!(out, "{t}");
            }
            a => {
                if let Some(v) = a.value() {
                    v.write_type(out)
                }
            }
        }
    }
}

impl From<Value> for Arg<'_> {
    fn from(v: Value) -> Self {
        Arg::Owned(v)
    }
}

impl<'a> From<&'a Value> for Arg<'a> {
    fn from(v: &'a Value) -> Self {
        Arg::Ref(v)
    }
}

impl<'a> From<&'a mut Value> for Arg<'a> {
    fn from(v: &'a mut Value) -> Self {
        Arg::Mut(v)
    }
}

macro_rules! owned_arg {
    ($($t:ty),*) => {$(
        impl From<$t> for Arg<'_> {
            fn from(v: $t) -> Self {
                Arg::Owned(Value::from(v))
            }
        }
    )*};
}
owned_arg!(i64, f64, bool, &str, Image<f64>, Image<u8>);

fn push_index(k: &mut String, i: usize) {
    if i < 10 {
        k.push(char::from(b'0' + i as u8));
    } else {
        let _ = write!(k, "{i}");
    }
}

thread_local! {
    static KEY_BUF: RefCell<String> = RefCell::new(String::with_capacity(128));
}

/// Fluent request construction; a terminal call matches and runs.
pub struct OpBuilder<'e, 'a> {
    env: &'e OpEnvironment,
    name: &'a str,
    inputs: SmallVec<[Arg<'a>; 3]>,
    output: Option<SemanticType>,
    container: Option<&'a mut Value>,
    container_type: Option<SemanticType>,
}

impl OpEnvironment {
    pub fn op<'a>(&self, name: &'a str) -> OpBuilder<'_, 'a> {
        OpBuilder {
            env: self,
            name,
            inputs: SmallVec::new(),
            output: None,
            container: None,
            container_type: None,
        }
    }

    /// Lists ops under a namespace or the implementations of one op.
    pub fn help(&self, query: &str) -> String {
        super::help::help(self, query)
    }

    pub fn help_verbose(&self, query: &str) -> String {
        super::help::help_verbose(self, query)
    }

    /// History of this environment's executions.
    pub fn history(&self) -> &super::OpHistory {
        &self.runtime.history
    }

    pub fn progress(&self) -> &super::ProgressHub {
        &self.runtime.progress
    }
}

impl<'e, 'a> OpBuilder<'e, 'a> {
    pub fn input(mut self, arg: impl Into<Arg<'a>>) -> Self {
        self.inputs.push(arg.into());
        self
    }

    pub fn inputs<A: Into<Arg<'a>>>(mut self, args: impl IntoIterator<Item = A>) -> Self {
        self.inputs.extend(args.into_iter().map(Into::into));
        self
    }

    pub fn input_type(mut self, t: SemanticType) -> Self {
        self.inputs.push(Arg::Type(t));
        self
    }

    pub fn output_type(mut self, t: SemanticType) -> Self {
        self.output = Some(t);
        self
    }

    pub fn container(mut self, c: &'a mut Value) -> Self {
        self.container = Some(c);
        self
    }

    pub fn container_type(mut self, t: SemanticType) -> Self {
        self.container_type = Some(t);
        self
    }

    /// Help restricted to implementations compatible with what is staged.
    pub fn help(&self) -> String {
        let types: Vec<SemanticType> = self.inputs.iter().map(Arg::ty).collect();
        super::help::help_staged(self.env, self.name, &types)
    }

    fn arg_types(&self) -> Vec<SemanticType> {
        self.inputs.iter().map(Arg::ty).collect()
    }

    fn container_ty(&self) -> Result<SemanticType, ExecError> {
        if let Some(t) = &self.container_type {
            return Ok(t.clone());
        }
        self.container
            .as_ref()
            .map(|c| c.ty())
            .ok_or_else(|| ExecError::Usage("computer requests need a container or container type".into()))
    }

    pub fn request(&self, kind: OpKind) -> Result<OpRequest, ExecError> {
        let target = match kind {
            OpKind::Function => RequestTarget::Function(self.output.clone()),
            OpKind::Computer => RequestTarget::Computer(self.container_ty()?),
            OpKind::Inplace(i) => RequestTarget::Inplace(i),
        };
        Ok(OpRequest {
            name: self.name.to_string(),
            args: self.arg_types(),
            target,
        })
    }

    /// Mirrors `OpRequest::cache_key` without building the request.
    fn write_key(&self, k: &mut String, kind: OpKind) {
        k.push_str(&self.env.key_prefix);
        k.push('|');
        k.push_str(self.name);
        k.push('|');
        k.push_str(kind.name());
        k.push('|');
        for (i, a) in self.inputs.iter().enumerate() {
            if i > 0 {
                k.push(',');
            }
            a.write_type(k);
        }
        k.push('|');
        match kind {
            OpKind::Function => match &self.output {
                Some(t) => {
                    let _ = write!(k, "{t}");
                }
                None => k.push('?'),
            },
            OpKind::Computer => match (&self.container_type, &self.container) {
                (Some(t), _) => {
                    let _ = write!(k, "{t}");
                }
                (None, Some(c)) => c.write_type(k),
                (None, None) => {}
            },
            OpKind::Inplace(i) => push_index(k, i),
        }
    }

    fn lookup(&self, kind: OpKind) -> Result<LocalResolved, ExecError> {
        let env = self.env;
        if env.cache_enabled {
            let hit = KEY_BUF.with(|buf| {
                let mut k = buf.borrow_mut();
                k.clear();
                self.write_key(&mut k, kind);
                env.cache.get_local(&k)
            });
            if let Some(r) = hit {
                return Ok(r);
            }
        }
        let req = self.request(kind)?;
        Ok(Rc::new(matcher::resolve(env, &req)?))
    }

    fn values(&self) -> Result<SmallVec<[&Value; 4]>, ExecError> {
        self.inputs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.value()
                    .ok_or_else(|| ExecError::Usage(format!("input {i} has a type but no value")))
            })
            .collect()
    }

    /// Runs as a function and returns the new value.
    pub fn apply(self) -> Result<Value, ExecError> {
        let resolved = self.lookup(OpKind::Function)?;
        let inputs = self.values()?;
        run_function(&self.env.runtime, &resolved, &inputs)
    }

    /// Runs as a computer, filling the staged container.
    pub fn compute(mut self) -> Result<(), ExecError> {
        if self.container.is_none() {
            return Err(ExecError::Usage("compute() needs a staged container".into()));
        }
        let resolved = self.lookup(OpKind::Computer)?;
        let container = self.container.take().expect("checked above");
        let inputs = self.values()?;
        run_computer(&self.env.runtime, &resolved, &inputs, container)
    }

    /// Runs inplace, overwriting the argument staged mutably at `index`.
    pub fn mutate(mut self, index: usize) -> Result<(), ExecError> {
        if !matches!(self.inputs.get(index), Some(Arg::Mut(_))) {
            return Err(ExecError::Usage(format!(
                "mutate({index}) needs a mutable argument at {index}"
            )));
        }
        let resolved = self.lookup(OpKind::Inplace(index))?;
        let mut target = None;
        let mut others: SmallVec<[&Value; 4]> = SmallVec::new();
        for (i, a) in self.inputs.iter_mut().enumerate() {
            if i == index {
                if let Arg::Mut(v) = a {
                    target = Some(&mut **v);
                }
                continue;
            }
            others.push(
                a.value()
                    .ok_or_else(|| ExecError::Usage(format!("input {i} has a type but no value")))?,
            );
        }
        let target = target.expect("checked above");
        run_inplace(&self.env.runtime, &resolved, &others, target)
    }

    pub fn function(self) -> Result<OpHandle, ExecError> {
        self.handle(OpKind::Function)
    }

    pub fn computer(self) -> Result<OpHandle, ExecError> {
        self.handle(OpKind::Computer)
    }

    pub fn inplace(self, index: usize) -> Result<OpHandle, ExecError> {
        self.handle(OpKind::Inplace(index))
    }

    fn handle(self, kind: OpKind) -> Result<OpHandle, ExecError> {
        let resolved = self.lookup(kind)?;
        Ok(OpHandle {
            runtime: self.env.runtime.clone(),
            resolved: Arc::clone(&resolved),
        })
    }
}

fn fail(resolved: &Resolved, error: OpError) -> ExecError {
    ExecError::Op {
        signature: resolved.tree.signature_arc(),
        error,
    }
}

fn record(rt: &Runtime, resolved: &Resolved, value: &Value) {
    if rt.record_history {
        rt.history.record(value.id(), resolved.tree.signature_arc());
    }
}

fn run_function(rt: &Runtime, resolved: &Resolved, inputs: &[&Value]) -> Result<Value, ExecError> {
    let out = resolved
        .callable
        .apply(inputs, &rt.context())
        .map_err(|e| fail(resolved, e))?;
    record(rt, resolved, &out);
    Ok(out)
}

fn run_computer(rt: &Runtime, resolved: &Resolved, inputs: &[&Value], out: &mut Value) -> Result<(), ExecError> {
    resolved
        .callable
        .compute(inputs, out, &rt.context())
        .map_err(|e| fail(resolved, e))?;
    record(rt, resolved, out);
    Ok(())
}

fn run_inplace(rt: &Runtime, resolved: &Resolved, others: &[&Value], target: &mut Value) -> Result<(), ExecError> {
    resolved
        .callable
        .mutate(others, target, &rt.context())
        .map_err(|e| fail(resolved, e))?;
    record(rt, resolved, target);
    Ok(())
}

/// A resolved op that runs without further matching. It keeps the runtime
/// alive on its own and stays valid after the environment is dropped.
#[derive(Clone)]
pub struct OpHandle {
    runtime: Arc<Runtime>,
    resolved: Arc<Resolved>,
}

impl std::fmt::Debug for OpHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpHandle")
            .field("signature", &self.signature())
            .finish()
    }
}

impl OpHandle {
    pub fn tree(&self) -> &InfoTree {
        &self.resolved.tree
    }

    pub fn signature(&self) -> &str {
        self.resolved.tree.signature()
    }

    pub fn kind(&self) -> OpKind {
        self.resolved.callable.kind()
    }

    pub fn runtime(&self) -> &Arc<Runtime> {
        &self.runtime
    }

    pub fn apply(&self, inputs: &[&Value]) -> Result<Value, ExecError> {
        run_function(&self.runtime, &self.resolved, inputs)
    }

    pub fn compute(&self, inputs: &[&Value], container: &mut Value) -> Result<(), ExecError> {
        run_computer(&self.runtime, &self.resolved, inputs, container)
    }

    /// `others` excludes the mutable argument.
    pub fn mutate(&self, others: &[&Value], target: &mut Value) -> Result<(), ExecError> {
        run_inplace(&self.runtime, &self.resolved, others, target)
    }
}
