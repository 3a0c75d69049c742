//! Turns a resolved tree into a callable by invoking binding factories
//! bottom-up and wrapping adapters and conversions around the result.

use std::sync::Arc;

use super::callable::{Callable, ExecContext, OpError};
use crate::matcher::InfoTree;
use crate::registry::{BindError, Binding, BindingTable, OpKind};
use crate::types::Value;

pub fn instantiate(bindings: &BindingTable, tree: &InfoTree) -> Result<Callable, BindError> {
    let children = instantiate_all(bindings, &tree.children)?;
    let mut callable = match bindings.get(&tree.info.source) {
        Some(Binding::Op { factory, .. }) => factory(&tree.info, children)?,
        Some(Binding::Adapter(_)) => {
            return Err(BindError::Invalid {
                source_uri: tree.info.source.clone(),
                message: "adapter body used as an op".into(),
            })
        }
        None => return Err(BindError::Unbound(tree.info.source.clone())),
    };
    if let Some(adapter) = tree.adapter_chain.first() {
        let deps = instantiate_all(bindings, &adapter.children)?;
        callable = match bindings.get(&adapter.info.source) {
            Some(Binding::Adapter(f)) => f(callable, deps)?,
            Some(_) => {
                return Err(BindError::Invalid {
                    source_uri: adapter.info.source.clone(),
                    message: "ordinary body used as an adapter".into(),
                })
            }
            None => return Err(BindError::Unbound(adapter.info.source.clone())),
        };
    }
    if !tree.conversions.is_empty() {
        callable = wrap_conversions(bindings, tree, callable)?;
    }
    Ok(callable)
}

fn instantiate_all(bindings: &BindingTable, trees: &[InfoTree]) -> Result<Vec<Callable>, BindError> {
    trees.iter().map(|t| instantiate(bindings, t)).collect()
}

/// Converters for the caller's buffer: in, back out, copy into it.
struct BufferPlan {
    input: Callable,
    output: Callable,
    copy: Callable,
}

struct Plan {
    inputs: Vec<Option<Callable>>,
    output: Option<Callable>,
    buffer: Option<BufferPlan>,
}

impl Plan {
    fn convert_inputs(
        &self,
        inputs: &[&Value],
        positions: impl Fn(usize) -> usize,
        ctx: &ExecContext<'_>,
    ) -> Result<Vec<Option<Value>>, OpError> {
        inputs
            .iter()
            .enumerate()
            .map(|(k, v)| match self.inputs.get(positions(k)).and_then(Option::as_ref) {
                Some(c) => c.apply(&[v], ctx).map(Some),
                None => Ok(None),
            })
            .collect()
    }

    fn run_buffered(
        &self,
        target: &mut Value,
        ctx: &ExecContext<'_>,
        run: impl FnOnce(&mut Value) -> Result<(), OpError>,
    ) -> Result<(), OpError> {
        match &self.buffer {
            None => run(target),
            Some(b) => {
                let mut staged = b.input.apply(&[target], ctx)?;
                run(&mut staged)?;
                let back = b.output.apply(&[&staged], ctx)?;
                b.copy.compute(&[&back], target, ctx)
            }
        }
    }
}

fn refs<'v>(inputs: &[&'v Value], converted: &'v [Option<Value>]) -> Vec<&'v Value> {
    inputs
        .iter()
        .zip(converted)
        .map(|(orig, c)| c.as_ref().unwrap_or(orig))
        .collect()
}

fn wrap_conversions(bindings: &BindingTable, tree: &InfoTree, inner: Callable) -> Result<Callable, BindError> {
    let mut plan = Plan {
        inputs: Vec::new(),
        output: None,
        buffer: None,
    };
    for c in &tree.conversions {
        let make = |t: &Option<InfoTree>| t.as_ref().map(|t| instantiate(bindings, t)).transpose();
        let input = make(&c.input)?;
        let output = make(&c.output)?;
        let copy = make(&c.copy)?;
        let is_buffer = copy.is_some();
        match (is_buffer, input, output, copy) {
            (true, Some(input), Some(output), Some(copy)) => plan.buffer = Some(BufferPlan { input, output, copy }),
            (false, Some(input), None, None) => {
                if c.position >= plan.inputs.len() {
                    plan.inputs.resize(c.position + 1, None);
                }
                plan.inputs[c.position] = Some(input);
            }
            (false, None, Some(output), None) => plan.output = Some(output),
            _ => {
                return Err(BindError::Invalid {
                    source_uri: tree.info.source.clone(),
                    message: format!("malformed conversion at position {}", c.position),
                })
            }
        }
    }
    let plan = Arc::new(plan);
    Ok(match (tree.kind, inner) {
        (OpKind::Function, Callable::Function(f)) => Callable::function(move |inputs, ctx| {
            let converted = plan.convert_inputs(inputs, |k| k, ctx)?;
            let out = f(&refs(inputs, &converted), ctx)?;
            match &plan.output {
                Some(c) => c.apply(&[&out], ctx),
                None => Ok(out),
            }
        }),
        (OpKind::Computer, Callable::Computer(f)) => Callable::computer(move |inputs, out, ctx| {
            let converted = plan.convert_inputs(inputs, |k| k, ctx)?;
            let args = refs(inputs, &converted);
            plan.run_buffered(out, ctx, |target| f(&args, target, ctx))
        }),
        (OpKind::Inplace(i), Callable::Inplace { index, body }) if i == index => {
            Callable::inplace(index, move |others, target, ctx| {
                let converted = plan.convert_inputs(others, |k| if k < index { k } else { k + 1 }, ctx)?;
                let args = refs(others, &converted);
                plan.run_buffered(target, ctx, |t| body(&args, t, ctx))
            })
        }
        (kind, c) => {
            return Err(BindError::Invalid {
                source_uri: tree.info.source.clone(),
                message: format!("expected a {kind} callable, got {}", c.kind()),
            })
        }
    })
}
