//! Generic wrapping of plain Rust functions as op bodies.

use crate::execution::OpError;
use crate::registry::Binding;
use crate::types::{Image, Value};

pub trait FromValue: Sized {
    const TYPE: &'static str;
    fn from_value(v: &Value) -> Option<Self>;
}

pub trait IntoValue {
    fn into_value(self) -> Value;
}

impl FromValue for f64 {
    const TYPE: &'static str = "Real";
    fn from_value(v: &Value) -> Option<Self> {
        v.as_real()
    }
}

impl FromValue for i64 {
    const TYPE: &'static str = "Integer";
    fn from_value(v: &Value) -> Option<Self> {
        v.as_integer()
    }
}

impl FromValue for Vec<f64> {
    const TYPE: &'static str = "RealArray";
    fn from_value(v: &Value) -> Option<Self> {
        v.as_reals().map(<[f64]>::to_vec)
    }
}

/// Images travel as rows.
impl FromValue for Vec<Vec<f64>> {
    const TYPE: &'static str = "ImageF64";
    fn from_value(v: &Value) -> Option<Self> {
        let img = v.as_image_f64()?;
        let w = img.width();
        if w == 0 {
            return Some(vec![Vec::new(); img.height()]);
        }
        Some(img.data().chunks(w).map(<[f64]>::to_vec).collect())
    }
}

impl IntoValue for f64 {
    fn into_value(self) -> Value {
        Value::real(self)
    }
}

impl IntoValue for i64 {
    fn into_value(self) -> Value {
        Value::integer(self)
    }
}

impl IntoValue for Vec<f64> {
    fn into_value(self) -> Value {
        Value::reals(self)
    }
}

impl IntoValue for Vec<Vec<f64>> {
    fn into_value(self) -> Value {
        let h = self.len();
        let w = self.first().map_or(0, Vec::len);
        let data = self.concat();
        match Image::new(w, h, data) {
            Ok(img) => Value::image_f64(img),
            Err(_) => Value::image_f64(Image::zeros(0, 0)),
        }
    }
}

fn extract<A: FromValue>(inputs: &[&Value], i: usize) -> Result<A, OpError> {
    let v = inputs
        .get(i)
        .ok_or_else(|| OpError::Failed(format!("missing argument {i}")))?;
    A::from_value(v).ok_or_else(|| OpError::payload(i, A::TYPE, v))
}

pub fn function1<A, R>(f: fn(A) -> R) -> Binding
where
    A: FromValue + 'static,
    R: IntoValue + 'static,
{
    Binding::function(1..=1, move |inputs, _| Ok(f(extract(inputs, 0)?).into_value()))
}

pub fn function2<A, B, R>(f: fn(A, B) -> R) -> Binding
where
    A: FromValue + 'static,
    B: FromValue + 'static,
    R: IntoValue + 'static,
{
    Binding::function(2..=2, move |inputs, _| {
        Ok(f(extract(inputs, 0)?, extract(inputs, 1)?).into_value())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_rows_round_trip() {
        let img = Value::image_f64(Image::from_fn(3, 2, |x, y| (x + 10 * y) as f64));
        let rows = Vec::<Vec<f64>>::from_value(&img).unwrap();
        assert_eq!(rows, vec![vec![0.0, 1.0, 2.0], vec![10.0, 11.0, 12.0]]);
        assert_eq!(rows.into_value(), img);
    }
}
