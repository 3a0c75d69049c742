//! YAML descriptor files.
//!
//! ```yaml
//! ops:
//!   - name: "filter.gauss"
//!     aliases: ["filter.smooth"]
//!     kind: "computer"
//!     priority: 100.0
//!     source: "builtin:filter/gauss_f64"
//!     description: "Gaussian blur"
//!     parameters:
//!       - { name: "input",  type: "ImageF64", io: "input" }
//!       - { name: "sigma",  type: "Real",     io: "input" }
//!       - { name: "output", type: "ImageF64", io: "container" }
//!     optional: []
//!     dependencies: []
//! ```

use std::collections::HashSet;
use std::fmt::Write;

use serde::Deserialize;
use thiserror::Error;

use super::info::{DependencySpec, IoRole, OpInfo, OpKind, ParamSpec};
use crate::types::SemanticType;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescriptorError {
    #[error("malformed YAML: {0}")]
    Yaml(String),
    #[error("ops[{entry}].{path}: {message}")]
    Schema {
        entry: usize,
        path: String,
        message: String,
    },
    #[error("ops[{entry}]: duplicate op {name} {signature} from {source_uri}")]
    Duplicate {
        entry: usize,
        name: String,
        signature: String,
        source_uri: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    ops: Option<Vec<serde_yaml::Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    name: Option<String>,
    #[serde(default)]
    aliases: Vec<String>,
    kind: Option<String>,
    priority: Option<f64>,
    source: Option<String>,
    #[serde(default)]
    description: String,
    parameters: Option<Vec<RawParam>>,
    #[serde(default)]
    optional: Vec<String>,
    #[serde(default)]
    dependencies: Vec<RawDependency>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParam {
    name: Option<String>,
    #[serde(rename = "type")]
    ty: Option<String>,
    io: Option<String>,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDependency {
    field: Option<String>,
    name: Option<String>,
    kind: Option<String>,
    #[serde(default)]
    signature: Vec<String>,
}

fn schema(entry: usize, path: impl Into<String>, message: impl Into<String>) -> DescriptorError {
    DescriptorError::Schema {
        entry,
        path: path.into(),
        message: message.into(),
    }
}

fn parse_type(entry: usize, path: &str, text: &str) -> Result<SemanticType, DescriptorError> {
    SemanticType::parse(text).map_err(|e| schema(entry, path, format!("{text:?}: {e}")))
}

/// Parses one descriptor document into op infos, in document order.
pub fn parse_descriptors(yaml: &str) -> Result<Vec<OpInfo>, DescriptorError> {
    let doc: RawDocument = if yaml.trim().is_empty() {
        RawDocument { ops: None }
    } else {
        serde_yaml::from_str(yaml).map_err(|e| DescriptorError::Yaml(e.to_string()))?
    };
    let entries = doc.ops.unwrap_or_default();
    let mut infos = Vec::with_capacity(entries.len());
    let mut seen = HashSet::new();
    for (i, raw) in entries.into_iter().enumerate() {
        let raw: RawEntry = serde_yaml::from_value(raw).map_err(|e| schema(i, "", e.to_string()))?;
        let info = convert_entry(i, raw)?;
        let key = (info.name().to_string(), info.signature_key(), info.source.clone());
        if !seen.insert(key.clone()) {
            return Err(DescriptorError::Duplicate {
                entry: i,
                name: key.0,
                signature: key.1,
                source_uri: key.2,
            });
        }
        infos.push(info);
    }
    Ok(infos)
}

fn convert_entry(i: usize, raw: RawEntry) -> Result<OpInfo, DescriptorError> {
    let name = raw.name.ok_or_else(|| schema(i, "name", "missing required field"))?;
    let source = raw
        .source
        .ok_or_else(|| schema(i, "source", "missing required field"))?;
    let raw_params = raw
        .parameters
        .ok_or_else(|| schema(i, "parameters", "missing required field"))?;

    let mut params = Vec::with_capacity(raw_params.len());
    for (j, p) in raw_params.into_iter().enumerate() {
        let at = |f: &str| format!("parameters[{j}].{f}");
        let pname = p.name.ok_or_else(|| schema(i, at("name"), "missing required field"))?;
        let ty_text = p.ty.ok_or_else(|| schema(i, at("type"), "missing required field"))?;
        let ty = parse_type(i, &at("type"), &ty_text)?;
        let io_text = p.io.ok_or_else(|| schema(i, at("io"), "missing required field"))?;
        let io = IoRole::parse(&io_text).ok_or_else(|| schema(i, at("io"), format!("unknown io role {io_text:?}")))?;
        params.push(ParamSpec {
            name: pname,
            ty,
            io,
            optional: false,
            description: p.description,
        });
    }

    for (k, opt) in raw.optional.iter().enumerate() {
        match params.iter_mut().find(|p| &p.name == opt) {
            Some(p) if p.io == IoRole::Input => p.optional = true,
            Some(_) => {
                return Err(schema(
                    i,
                    format!("optional[{k}]"),
                    format!("{opt:?} is not an input parameter"),
                ))
            }
            None => {
                return Err(schema(
                    i,
                    format!("optional[{k}]"),
                    format!("no parameter named {opt:?}"),
                ))
            }
        }
    }

    let inferred = OpKind::infer(params.iter().map(|p| p.io)).map_err(|m| schema(i, "parameters", m))?;
    let kind = match raw.kind {
        None => inferred,
        Some(k) => {
            let declared = OpKind::parse(&k).ok_or_else(|| schema(i, "kind", format!("unknown kind {k:?}")))?;
            if !declared.same_class(inferred) {
                return Err(schema(
                    i,
                    "kind",
                    format!("declared kind {k:?} contradicts parameter roles ({inferred})"),
                ));
            }
            inferred
        }
    };

    let mut dependencies = Vec::with_capacity(raw.dependencies.len());
    for (j, d) in raw.dependencies.into_iter().enumerate() {
        let at = |f: &str| format!("dependencies[{j}].{f}");
        let field = d
            .field
            .ok_or_else(|| schema(i, at("field"), "missing required field"))?;
        let op_name = d.name.ok_or_else(|| schema(i, at("name"), "missing required field"))?;
        let kind_text = d.kind.ok_or_else(|| schema(i, at("kind"), "missing required field"))?;
        let dkind =
            OpKind::parse(&kind_text).ok_or_else(|| schema(i, at("kind"), format!("unknown kind {kind_text:?}")))?;
        let signature = d
            .signature
            .iter()
            .enumerate()
            .map(|(k, t)| parse_type(i, &format!("dependencies[{j}].signature[{k}]"), t))
            .collect::<Result<Vec<_>, _>>()?;
        dependencies.push(DependencySpec {
            field,
            op_name,
            kind: dkind,
            signature,
        });
    }

    let mut names = vec![name];
    names.extend(raw.aliases);
    let info = OpInfo {
        names,
        kind,
        priority: raw.priority.unwrap_or(0.0),
        params,
        dependencies,
        source,
        description: raw.description,
        reduced_from: None,
    };
    info.validate().map_err(|(path, msg)| schema(i, path, msg))?;
    Ok(info)
}

/// Serializes infos as a descriptor document with a fixed key order.
///
/// Reduced variants are skipped; they are regenerated on load.
pub fn emit_descriptors<'a>(infos: impl IntoIterator<Item = &'a OpInfo>) -> String {
    let infos: Vec<&OpInfo> = infos.into_iter().filter(|i| i.reduced_from.is_none()).collect();
    if infos.is_empty() {
        return "ops: []\n".to_string();
    }
    let mut out = String::from("ops:\n");
    for info in infos {
        let _ = writeln!(out, "  - name: {}", quote(info.name()));
        if !info.aliases().is_empty() {
            let aliases: Vec<String> = info.aliases().iter().map(|a| quote(a)).collect();
            let _ = writeln!(out, "    aliases: [{}]", aliases.join(", "));
        }
        let _ = writeln!(out, "    kind: {}", quote(&info.kind.to_string()));
        let _ = writeln!(out, "    priority: {}", format_priority(info.priority));
        let _ = writeln!(out, "    source: {}", quote(&info.source));
        let _ = writeln!(out, "    description: {}", quote(&info.description));
        if info.params.is_empty() {
            out.push_str("    parameters: []\n");
        } else {
            out.push_str("    parameters:\n");
            for p in &info.params {
                let _ = write!(
                    out,
                    "      - {{ name: {}, type: {}, io: {}",
                    quote(&p.name),
                    quote(&p.ty.to_string()),
                    quote(p.io.as_str())
                );
                if !p.description.is_empty() {
                    let _ = write!(out, ", description: {}", quote(&p.description));
                }
                out.push_str(" }\n");
            }
        }
        let optional: Vec<String> = info
            .params
            .iter()
            .filter(|p| p.optional)
            .map(|p| quote(&p.name))
            .collect();
        let _ = writeln!(out, "    optional: [{}]", optional.join(", "));
        if info.dependencies.is_empty() {
            out.push_str("    dependencies: []\n");
        } else {
            out.push_str("    dependencies:\n");
            for d in &info.dependencies {
                let sig: Vec<String> = d.signature.iter().map(|t| quote(&t.to_string())).collect();
                let _ = writeln!(
                    out,
                    "      - {{ field: {}, name: {}, kind: {}, signature: [{}] }}",
                    quote(&d.field),
                    quote(&d.op_name),
                    quote(&d.kind.to_string()),
                    sig.join(", ")
                );
            }
        }
    }
    out
}

/// JSON string literals are valid YAML double-quoted scalars.
fn quote(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_else(|_| "\"\"".to_string())
}

fn format_priority(p: f64) -> String {
    if p.fract() == 0.0 && p.abs() < 1e15 {
        format!("{p:.1}")
    } else {
        format!("{p}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COPY_ARRAY: &str = r#"
ops:
  - name: "copy.array"
    source: "builtin:copy/array_bytes"
    parameters:
      - { name: "input", type: "ByteArray", io: "input" }
      - { name: "output", type: "ByteArray", io: "container" }
"#;

    #[test]
    fn infers_computer_kind() {
        let infos = parse_descriptors(COPY_ARRAY).unwrap();
        assert_eq!(infos.len(), 1);
        assert_eq!(infos[0].kind, OpKind::Computer);
        assert_eq!(infos[0].priority, 0.0);
    }

    #[test]
    fn empty_document() {
        assert!(parse_descriptors("ops: []").unwrap().is_empty());
        assert!(parse_descriptors("").unwrap().is_empty());
    }

    #[test]
    fn kind_contradiction_rejected() {
        let yaml = COPY_ARRAY.replace("    source:", "    kind: \"function\"\n    source:");
        match parse_descriptors(&yaml).unwrap_err() {
            DescriptorError::Schema { entry, path, .. } => {
                assert_eq!(entry, 0);
                assert_eq!(path, "kind");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad_io = COPY_ARRAY.replace("io: \"container\"", "io: \"sideways\"");
        let err = parse_descriptors(&bad_io).unwrap_err();
        assert_eq!(err.to_string(), "ops[0].parameters[1].io: unknown io role \"sideways\"");

        let bad_type = COPY_ARRAY.replace("type: \"ByteArray\", io: \"input\"", "type: \"List<\", io: \"input\"");
        let err = parse_descriptors(&bad_type).unwrap_err();
        assert!(err.to_string().starts_with("ops[0].parameters[0].type"), "{err}");

        let no_name = COPY_ARRAY.replace("name: \"copy.array\"", "aliases: []");
        assert!(parse_descriptors(&no_name)
            .unwrap_err()
            .to_string()
            .contains("ops[0].name"));
    }

    #[test]
    fn duplicates_rejected() {
        let twice = format!("{COPY_ARRAY}{}", COPY_ARRAY.trim_start().trim_start_matches("ops:\n"));
        assert!(matches!(
            parse_descriptors(&twice),
            Err(DescriptorError::Duplicate { entry: 1, .. })
        ));
    }

    #[test]
    fn optional_must_name_inputs() {
        let yaml = COPY_ARRAY.replace("    parameters:", "    optional: [\"output\"]\n    parameters:");
        assert!(parse_descriptors(&yaml).is_err());
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let yaml = r#"
ops:
  - name: "filter.gauss"
    aliases: ["filter.smooth"]
    priority: 2.5
    source: "builtin:filter/gauss_f64"
    description: "Gaussian \"blur\""
    parameters:
      - { name: "input", type: "ImageF64", io: "input", description: "the image" }
      - { name: "sigma", type: "Real", io: "input" }
      - { name: "output", type: "ImageF64", io: "container" }
    optional: ["sigma"]
    dependencies:
      - { field: "sub", name: "math.sub", kind: "computer", signature: ["ImageF64", "ImageF64", "ImageF64"] }
"#;
        let infos = parse_descriptors(yaml).unwrap();
        let emitted = emit_descriptors(&infos);
        let reparsed = parse_descriptors(&emitted).unwrap();
        assert_eq!(reparsed, infos);
        assert_eq!(emit_descriptors(&reparsed), emitted);
    }
}
