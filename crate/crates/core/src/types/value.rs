//! Runtime values tagged with their semantic type.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use super::semantic::SemanticType;

pub const INTEGER: &str = "Integer";
pub const REAL: &str = "Real";
pub const BOOLEAN: &str = "Boolean";
pub const TEXT: &str = "Text";
pub const BYTE_ARRAY: &str = "ByteArray";
pub const REAL_ARRAY: &str = "RealArray";
pub const IMAGE_U8: &str = "ImageU8";
pub const IMAGE_F64: &str = "ImageF64";
/// Type tokens are typed `Type<T>`.
pub const TYPE: &str = "Type";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("image payload has {len} elements, expected {width}x{height}")]
pub struct ShapeError {
    pub width: usize,
    pub height: usize,
    pub len: usize,
}

/// Row-major 2-D raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone + Default> Image<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self, ShapeError> {
        if width.checked_mul(height) != Some(data.len()) {
            return Err(ShapeError {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::default(); width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Mutable pixel access. The length cannot change through this slice so
    /// the shape invariant holds.
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Clone + Default>(&self, f: impl FnMut(&T) -> U) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Integer(i64),
    Real(f64),
    Boolean(bool),
    Text(String),
    ByteArray(Vec<u8>),
    RealArray(Vec<f64>),
    ImageU8(Image<u8>),
    ImageF64(Image<f64>),
    /// A type used as a value, e.g. the argument of `engine.describe`.
    Type(SemanticType),
}

impl Payload {
    /// Base name of the payload's semantic type.
    pub fn type_name(&self) -> &'static str {
        match self {
            Payload::Integer(_) => INTEGER,
            Payload::Real(_) => REAL,
            Payload::Boolean(_) => BOOLEAN,
            Payload::Text(_) => TEXT,
            Payload::ByteArray(_) => BYTE_ARRAY,
            Payload::RealArray(_) => REAL_ARRAY,
            Payload::ImageU8(_) => IMAGE_U8,
            Payload::ImageF64(_) => IMAGE_F64,
            Payload::Type(_) => TYPE,
        }
    }
}

/// Unique identity of a value, assigned at creation.
///
/// Clones receive a fresh identity: a clone is a different buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(u64);

impl ValueId {
    fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        ValueId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub struct Value {
    id: ValueId,
    payload: Payload,
}

impl Value {
    pub fn new(payload: Payload) -> Self {
        Self {
            id: ValueId::fresh(),
            payload,
        }
    }

    pub fn integer(v: i64) -> Self {
        Self::new(Payload::Integer(v))
    }

    pub fn real(v: f64) -> Self {
        Self::new(Payload::Real(v))
    }

    pub fn boolean(v: bool) -> Self {
        Self::new(Payload::Boolean(v))
    }

    pub fn text(v: impl Into<String>) -> Self {
        Self::new(Payload::Text(v.into()))
    }

    pub fn bytes(v: Vec<u8>) -> Self {
        Self::new(Payload::ByteArray(v))
    }

    pub fn reals(v: Vec<f64>) -> Self {
        Self::new(Payload::RealArray(v))
    }

    pub fn image_u8(img: Image<u8>) -> Self {
        Self::new(Payload::ImageU8(img))
    }

    pub fn image_f64(img: Image<f64>) -> Self {
        Self::new(Payload::ImageF64(img))
    }

    pub fn type_token(t: SemanticType) -> Self {
        Self::new(Payload::Type(t))
    }

    pub fn id(&self) -> ValueId {
        self.id
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn payload_mut(&mut self) -> &mut Payload {
        &mut self.payload
    }

    pub fn into_payload(self) -> Payload {
        self.payload
    }

    /// Replaces the payload in place, keeping this value's identity.
    pub fn set_payload(&mut self, payload: Payload) {
        self.payload = payload;
    }

    pub fn ty(&self) -> SemanticType {
        match &self.payload {
            Payload::Type(t) => SemanticType::with_params(TYPE, vec![t.clone()]),
            p => SemanticType::named(p.type_name()),
        }
    }

    /// Appends the printed type to `out` without an intermediate allocation
    /// for the common scalar and aggregate payloads.
    pub fn write_type(&self, out: &mut String) {
        match &self.payload {
            Payload::Type(t) => {
                use std::fmt::Write;
                let _ = write!(out, "{TYPE}<{t}>");
            }
            p => out.push_str(p.type_name()),
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self.payload {
            Payload::Integer(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self.payload {
            Payload::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.payload {
            Payload::Boolean(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match &self.payload {
            Payload::Text(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match &self.payload {
            Payload::ByteArray(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_reals(&self) -> Option<&[f64]> {
        match &self.payload {
            Payload::RealArray(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_image_u8(&self) -> Option<&Image<u8>> {
        match &self.payload {
            Payload::ImageU8(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_image_f64(&self) -> Option<&Image<f64>> {
        match &self.payload {
            Payload::ImageF64(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_type(&self) -> Option<&SemanticType> {
        match &self.payload {
            Payload::Type(t) => Some(t),
            _ => None,
        }
    }
}

impl Clone for Value {
    fn clone(&self) -> Self {
        Value::new(self.payload.clone())
    }
}

/// Equality compares contents only; identities are ignored.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.payload == other.payload
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({}, {:?})", self.id, self.payload)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::integer(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::real(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::boolean(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::text(v)
    }
}

impl From<Image<f64>> for Value {
    fn from(v: Image<f64>) -> Self {
        Value::image_f64(v)
    }
}

impl From<Image<u8>> for Value {
    fn from(v: Image<u8>) -> Self {
        Value::image_u8(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_shape_checked() {
        assert!(Image::new(2, 3, vec![0u8; 6]).is_ok());
        let err = Image::new(2, 3, vec![0u8; 5]).unwrap_err();
        assert_eq!(err.len, 5);
        let empty: Image<f64> = Image::new(0, 0, vec![]).unwrap();
        assert_eq!(empty.dims(), (0, 0));
    }

    #[test]
    fn clone_gets_fresh_identity() {
        let a = Value::bytes(vec![1, 2]);
        let b = a.clone();
        assert_eq!(a, b);
        assert_ne!(a.id(), b.id());
    }

    #[test]
    fn type_agrees_with_payload() {
        assert_eq!(Value::integer(1).ty().to_string(), "Integer");
        assert_eq!(Value::image_u8(Image::zeros(1, 1)).ty().to_string(), "ImageU8");
        let tok = Value::type_token(SemanticType::named("ImageF64"));
        assert_eq!(tok.ty().to_string(), "Type<ImageF64>");
        let mut s = String::new();
        tok.write_type(&mut s);
        assert_eq!(s, "Type<ImageF64>");
    }
}
