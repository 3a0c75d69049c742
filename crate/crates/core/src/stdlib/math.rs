use crate::execution::args;
use crate::registry::{Binding, BindingTable};
use crate::types::{Payload, Value};

type IntOp = fn(i64, i64) -> i64;
type RealOp = fn(f64, f64) -> f64;

const OPS: [(&str, IntOp, RealOp); 3] = [
    ("add", i64::wrapping_add, |a, b| a + b),
    ("sub", i64::wrapping_sub, |a, b| a - b),
    ("mul", i64::wrapping_mul, |a, b| a * b),
];

pub(super) fn register(t: &mut BindingTable) {
    for (verb, int_op, real_op) in OPS {
        t.insert(
            format!("builtin:math/{verb}_ints"),
            Binding::function(2..=2, move |inputs, _| {
                Ok(Value::integer(int_op(
                    args::integer(inputs, 0)?,
                    args::integer(inputs, 1)?,
                )))
            }),
        );
        t.insert(
            format!("builtin:math/{verb}_reals"),
            Binding::function(2..=2, move |inputs, _| {
                Ok(Value::real(real_op(args::real(inputs, 0)?, args::real(inputs, 1)?)))
            }),
        );
        t.insert(
            format!("builtin:math/{verb}_real_computer"),
            Binding::computer(2..=2, move |inputs, out, _| {
                let r = real_op(args::real(inputs, 0)?, args::real(inputs, 1)?);
                out.set_payload(Payload::Real(r));
                Ok(())
            }),
        );
    }
}
