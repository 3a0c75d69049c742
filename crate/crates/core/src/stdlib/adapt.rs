//! Bodies of the `engine.adapt` ops.

use crate::execution::{args, Callable, ExecContext, OpError};
use crate::registry::{BindError, Binding, BindingTable};
use crate::types::{Image, Payload, Value};

fn dep(deps: &[Callable], i: usize, what: &str) -> Result<Callable, BindError> {
    deps.get(i).cloned().ok_or_else(|| BindError::Invalid {
        source_uri: format!("builtin:adapt/{what}"),
        message: format!("missing dependency {i}"),
    })
}

#[derive(Clone, Copy)]
enum Aggregate {
    Image,
    Array,
}

/// Runs an element computer over every element in index order, then
/// replaces the container's payload in one step.
fn elementwise(
    agg: Aggregate,
    op: &Callable,
    inputs: &[&Value],
    out: &mut Value,
    ctx: &ExecContext<'_>,
) -> Result<(), OpError> {
    let (columns, dims): (Vec<&[f64]>, (usize, usize)) = match agg {
        Aggregate::Image => {
            let target = out
                .as_image_f64()
                .ok_or_else(|| OpError::payload(inputs.len(), "ImageF64", out))?;
            let mut cols = Vec::with_capacity(inputs.len());
            for i in 0..inputs.len() {
                let img = args::image_f64(inputs, i)?;
                if img.dims() != target.dims() {
                    return Err(OpError::Dimension(format!(
                        "input {i} is {}x{} but the container is {}x{}",
                        img.width(),
                        img.height(),
                        target.width(),
                        target.height()
                    )));
                }
                cols.push(img.data());
            }
            (cols, target.dims())
        }
        Aggregate::Array => {
            let target = out
                .as_reals()
                .ok_or_else(|| OpError::payload(inputs.len(), "RealArray", out))?;
            let mut cols = Vec::with_capacity(inputs.len());
            for i in 0..inputs.len() {
                let a = args::reals(inputs, i)?;
                if a.len() != target.len() {
                    return Err(OpError::Dimension(format!(
                        "input {i} has length {} but the container has length {}",
                        a.len(),
                        target.len()
                    )));
                }
                cols.push(a);
            }
            (cols, (target.len(), 1))
        }
    };
    let len = dims.0 * dims.1;
    let mut elems: Vec<Value> = (0..columns.len()).map(|_| Value::real(0.0)).collect();
    let mut cell = Value::real(0.0);
    let mut data = Vec::with_capacity(len);
    for k in 0..len {
        for (e, col) in elems.iter_mut().zip(&columns) {
            e.set_payload(Payload::Real(col[k]));
        }
        let refs: Vec<&Value> = elems.iter().collect();
        op.compute(&refs, &mut cell, ctx)?;
        data.push(cell.as_real().ok_or_else(|| OpError::payload(0, "Real", &cell))?);
    }
    out.set_payload(match agg {
        Aggregate::Image => {
            Payload::ImageF64(Image::new(dims.0, dims.1, data).map_err(|e| OpError::Failed(e.to_string()))?)
        }
        Aggregate::Array => Payload::RealArray(data),
    });
    Ok(())
}

pub(super) fn register(t: &mut BindingTable) {
    for n in 1..=4 {
        t.insert(
            format!("builtin:adapt/computer_to_function{n}"),
            Binding::adapter(|op, deps| {
                let create = dep(&deps, 0, "computer_to_function")?;
                Ok(Callable::function(move |inputs, ctx| {
                    let model = inputs.first().ok_or_else(|| OpError::Failed("no model input".into()))?;
                    let mut out = create.apply(&[model], ctx)?;
                    op.compute(inputs, &mut out, ctx)?;
                    Ok(out)
                }))
            }),
        );
        t.insert(
            format!("builtin:adapt/function_to_computer{n}"),
            Binding::adapter(|op, deps| {
                let copy = dep(&deps, 0, "function_to_computer")?;
                Ok(Callable::computer(move |inputs, out, ctx| {
                    let result = op.apply(inputs, ctx)?;
                    copy.compute(&[&result], out, ctx)
                }))
            }),
        );
    }
    for n in 1..=2 {
        t.insert(
            format!("builtin:adapt/inplace_to_function{n}"),
            Binding::adapter(|op, deps| {
                let create = dep(&deps, 0, "inplace_to_function")?;
                let copy = dep(&deps, 1, "inplace_to_function")?;
                Ok(Callable::function(move |inputs, ctx| {
                    let (first, rest) = inputs
                        .split_first()
                        .ok_or_else(|| OpError::Failed("no argument to mutate".into()))?;
                    let mut fresh = create.apply(&[first], ctx)?;
                    copy.compute(&[first], &mut fresh, ctx)?;
                    op.mutate(rest, &mut fresh, ctx)?;
                    Ok(fresh)
                }))
            }),
        );
    }
    for (short, agg) in [("image", Aggregate::Image), ("array", Aggregate::Array)] {
        for n in 1..=2 {
            t.insert(
                format!("builtin:adapt/lift{n}_{short}_computer"),
                Binding::adapter(move |op, _| {
                    Ok(Callable::computer(move |inputs, out, ctx| {
                        elementwise(agg, &op, inputs, out, ctx)
                    }))
                }),
            );
            t.insert(
                format!("builtin:adapt/lift{n}_{short}_function"),
                Binding::adapter(move |op, deps| {
                    let create = dep(&deps, 0, "lift")?;
                    Ok(Callable::function(move |inputs, ctx| {
                        let model = inputs.first().ok_or_else(|| OpError::Failed("no model input".into()))?;
                        let mut out = create.apply(&[model], ctx)?;
                        elementwise(agg, &op, inputs, &mut out, ctx)?;
                        Ok(out)
                    }))
                }),
            );
        }
    }
}
