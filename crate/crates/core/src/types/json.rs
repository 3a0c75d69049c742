//! JSON wire format for values: `{"type": "<Type>", "value": <payload>}`.
//!
//! Images are `{"w": width, "h": height, "data": [...]}` in row-major order.

use serde_json::{json, Map, Number};
use thiserror::Error;

use super::semantic::SemanticType;
use super::value::{self, Image, Payload, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {ty} payload: {message}")]
pub struct JsonValueError {
    pub ty: String,
    pub message: String,
}

fn err(ty: &SemanticType, message: impl Into<String>) -> JsonValueError {
    JsonValueError {
        ty: ty.to_string(),
        message: message.into(),
    }
}

pub fn payload_to_json(value: &Value) -> serde_json::Value {
    match value.payload() {
        Payload::Integer(v) => json!(v),
        Payload::Real(v) => real_json(*v),
        Payload::Boolean(v) => json!(v),
        Payload::Text(v) => json!(v),
        Payload::ByteArray(v) => json!(v),
        Payload::RealArray(v) => serde_json::Value::Array(v.iter().map(|x| real_json(*x)).collect()),
        Payload::ImageU8(img) => json!({"w": img.width(), "h": img.height(), "data": img.data()}),
        Payload::ImageF64(img) => {
            let data: Vec<_> = img.data().iter().map(|x| real_json(*x)).collect();
            json!({"w": img.width(), "h": img.height(), "data": data})
        }
        Payload::Type(t) => json!(t.to_string()),
    }
}

fn real_json(v: f64) -> serde_json::Value {
    Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// Serializes a value with its type tag.
pub fn to_json(value: &Value) -> serde_json::Value {
    let mut m = Map::new();
    m.insert("type".into(), json!(value.ty().to_string()));
    m.insert("value".into(), payload_to_json(value));
    serde_json::Value::Object(m)
}

/// Builds a value of type `ty` from an untagged JSON payload.
pub fn from_json(ty: &SemanticType, json: &serde_json::Value) -> Result<Value, JsonValueError> {
    let base = ty.base().ok_or_else(|| err(ty, "type variables are not values"))?;
    if base != value::TYPE && !ty.params().is_empty() {
        return Err(err(ty, "unknown parameterized value type"));
    }
    let payload = match base {
        value::INTEGER => Payload::Integer(json.as_i64().ok_or_else(|| err(ty, "expected an integer"))?),
        value::REAL => Payload::Real(json.as_f64().ok_or_else(|| err(ty, "expected a number"))?),
        value::BOOLEAN => Payload::Boolean(json.as_bool().ok_or_else(|| err(ty, "expected a boolean"))?),
        value::TEXT => Payload::Text(json.as_str().ok_or_else(|| err(ty, "expected a string"))?.to_string()),
        value::BYTE_ARRAY => Payload::ByteArray(byte_list(ty, json)?),
        value::REAL_ARRAY => Payload::RealArray(real_list(ty, json)?),
        value::IMAGE_U8 => {
            let (w, h, data) = image_parts(ty, json)?;
            let data = byte_list(ty, data)?;
            Payload::ImageU8(Image::new(w, h, data).map_err(|e| err(ty, e.to_string()))?)
        }
        value::IMAGE_F64 => {
            let (w, h, data) = image_parts(ty, json)?;
            let data = real_list(ty, data)?;
            Payload::ImageF64(Image::new(w, h, data).map_err(|e| err(ty, e.to_string()))?)
        }
        value::TYPE => {
            let inner = match json.as_str() {
                Some(s) => SemanticType::parse(s).map_err(|e| err(ty, e.to_string()))?,
                None if ty.params().len() == 1 => ty.params()[0].clone(),
                None => return Err(err(ty, "expected a type string")),
            };
            if !inner.is_concrete() {
                return Err(err(ty, "type tokens must be concrete"));
            }
            Payload::Type(inner)
        }
        other => return Err(err(ty, format!("no JSON encoding for {other}"))),
    };
    Ok(Value::new(payload))
}

/// Parses a tagged `{"type":..., "value":...}` object.
pub fn from_tagged_json(json: &serde_json::Value) -> Result<Value, JsonValueError> {
    let unknown = SemanticType::named("?");
    let ty = json
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| err(&unknown, "missing \"type\" tag"))?;
    let ty = SemanticType::parse(ty).map_err(|e| err(&unknown, e.to_string()))?;
    let payload = json.get("value").ok_or_else(|| err(&ty, "missing \"value\""))?;
    from_json(&ty, payload)
}

fn byte_list(ty: &SemanticType, json: &serde_json::Value) -> Result<Vec<u8>, JsonValueError> {
    json.as_array()
        .ok_or_else(|| err(ty, "expected an array of bytes"))?
        .iter()
        .map(|v| {
            v.as_u64()
                .filter(|b| *b <= 255)
                .map(|b| b as u8)
                .ok_or_else(|| err(ty, format!("{v} is not a byte")))
        })
        .collect()
}

fn real_list(ty: &SemanticType, json: &serde_json::Value) -> Result<Vec<f64>, JsonValueError> {
    json.as_array()
        .ok_or_else(|| err(ty, "expected an array of numbers"))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| err(ty, format!("{v} is not a number"))))
        .collect()
}

fn image_parts<'j>(
    ty: &SemanticType,
    json: &'j serde_json::Value,
) -> Result<(usize, usize, &'j serde_json::Value), JsonValueError> {
    let dim = |key: &str| {
        json.get(key)
            .and_then(|v| v.as_u64())
            .map(|v| v as usize)
            .ok_or_else(|| err(ty, format!("expected a non-negative integer \"{key}\"")))
    };
    let data = json.get("data").ok_or_else(|| err(ty, "missing \"data\""))?;
    Ok((dim("w")?, dim("h")?, data))
}
