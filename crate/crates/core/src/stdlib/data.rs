//! Copy, create, convert and describe ops.

use crate::execution::{args, OpError};
use crate::registry::{Binding, BindingTable};
use crate::types::{Image, Payload, Value};

/// Clamps to `[0, 255]` and rounds half away from zero. NaN maps to 0.
pub fn real_to_byte(x: f64) -> u8 {
    x.clamp(0.0, 255.0).round() as u8
}

/// Rounds half away from zero, saturating at the `i64` range. NaN maps to 0.
pub fn real_to_integer(x: f64) -> i64 {
    x.round() as i64
}

fn same_dims<T: Clone + Default>(a: &Image<T>, b: &Image<T>) -> Result<(), OpError> {
    if a.dims() == b.dims() {
        Ok(())
    } else {
        Err(OpError::Dimension(format!(
            "input is {}x{} but container is {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

fn same_len(a: usize, b: usize) -> Result<(), OpError> {
    if a == b {
        Ok(())
    } else {
        Err(OpError::Dimension(format!(
            "input has length {a} but container has length {b}"
        )))
    }
}

fn copy_into(input: &Value, out: &mut Value) -> Result<(), OpError> {
    let payload = match (input.payload(), out.payload()) {
        (Payload::ByteArray(a), Payload::ByteArray(b)) => {
            same_len(a.len(), b.len())?;
            Payload::ByteArray(a.clone())
        }
        (Payload::RealArray(a), Payload::RealArray(b)) => {
            same_len(a.len(), b.len())?;
            Payload::RealArray(a.clone())
        }
        (Payload::ImageF64(a), Payload::ImageF64(b)) => {
            same_dims(a, b)?;
            Payload::ImageF64(a.clone())
        }
        (Payload::ImageU8(a), Payload::ImageU8(b)) => {
            same_dims(a, b)?;
            Payload::ImageU8(a.clone())
        }
        (_, _) => return Err(OpError::payload(0, out.payload().type_name(), input)),
    };
    out.set_payload(payload);
    Ok(())
}

fn create_like(model: &Value) -> Result<Value, OpError> {
    Ok(match model.payload() {
        Payload::ByteArray(a) => Value::bytes(vec![0; a.len()]),
        Payload::RealArray(a) => Value::reals(vec![0.0; a.len()]),
        Payload::ImageF64(i) => Value::image_f64(Image::zeros(i.width(), i.height())),
        Payload::ImageU8(i) => Value::image_u8(Image::zeros(i.width(), i.height())),
        _ => return Err(OpError::payload(0, "an array or image", model)),
    })
}

pub(super) fn register(t: &mut BindingTable) {
    for uri in [
        "builtin:copy/bytes",
        "builtin:copy/reals",
        "builtin:copy/image_f64",
        "builtin:copy/image_u8",
    ] {
        t.insert(
            uri,
            Binding::computer(1..=1, |inputs, out, _| copy_into(inputs[0], out)),
        );
    }
    for uri in [
        "builtin:create/image_f64",
        "builtin:create/image_u8",
        "builtin:create/bytes",
        "builtin:create/reals",
    ] {
        t.insert(uri, Binding::function(1..=1, |inputs, _| create_like(inputs[0])));
    }

    t.insert(
        "builtin:convert/u8_to_f64",
        Binding::function(1..=1, |inputs, _| {
            Ok(Value::image_f64(args::image_u8(inputs, 0)?.map(|&p| f64::from(p))))
        }),
    );
    t.insert(
        "builtin:convert/f64_to_u8",
        Binding::function(1..=1, |inputs, _| {
            Ok(Value::image_u8(args::image_f64(inputs, 0)?.map(|&p| real_to_byte(p))))
        }),
    );
    t.insert(
        "builtin:convert/int_to_real",
        Binding::function(1..=1, |inputs, _| Ok(Value::real(args::integer(inputs, 0)? as f64))),
    );
    t.insert(
        "builtin:convert/real_to_int",
        Binding::function(1..=1, |inputs, _| {
            Ok(Value::integer(real_to_integer(args::real(inputs, 0)?)))
        }),
    );
    t.insert(
        "builtin:convert/bytes_to_reals",
        Binding::function(1..=1, |inputs, _| {
            Ok(Value::reals(
                args::bytes(inputs, 0)?.iter().map(|&b| f64::from(b)).collect(),
            ))
        }),
    );
    t.insert(
        "builtin:convert/reals_to_bytes",
        Binding::function(1..=1, |inputs, _| {
            Ok(Value::bytes(
                args::reals(inputs, 0)?.iter().map(|&x| real_to_byte(x)).collect(),
            ))
        }),
    );

    t.insert(
        "builtin:engine/describe",
        Binding::function(1..=1, |inputs, ctx| {
            let v = inputs[0];
            let t = v.as_type().ok_or_else(|| OpError::payload(0, "Type", v))?;
            Ok(Value::text(ctx.descriptors().describe(t)))
        }),
    );
}
