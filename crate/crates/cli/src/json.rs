use opsforge::types::json::from_json;
use opsforge::{SemanticType, Value};

/// Parses a `<Type>:<json>` argument.
pub fn parse_typed(s: &str) -> Result<Value, String> {
    let (ty, literal) = s
        .split_once(':')
        .ok_or_else(|| format!("{s:?}: expected <Type>:<json>"))?;
    let ty = SemanticType::parse(ty.trim()).map_err(|e| format!("{ty:?}: {e}"))?;
    let json: serde_json::Value =
        serde_json::from_str(literal).map_err(|e| format!("{literal:?}: invalid JSON: {e}"))?;
    from_json(&ty, &json).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_literals() {
        assert_eq!(parse_typed("Integer:5").unwrap().as_integer(), Some(5));
        let img = parse_typed(r#"ImageU8:{"w":2,"h":1,"data":[1,2]}"#).unwrap();
        assert_eq!(img.as_image_u8().unwrap().dims(), (2, 1));
    }

    #[test]
    fn rejections() {
        for bad in [
            "Integer",
            "Integer:2.5",
            "Widget:1",
            "Integer:[",
            "ByteArray:[1,-1]",
            "<:1",
        ] {
            assert!(parse_typed(bad).is_err(), "{bad}");
        }
    }
}
