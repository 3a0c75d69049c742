use super::scan::{CommentBlock, Diagnostic};
use crate::registry::{is_op_name, IoRole, OpInfo, OpKind, ParamSpec};
use crate::types::SemanticType;

/// Metadata parsed from one tagged comment.
#[derive(Debug, Clone, PartialEq)]
pub struct OpTagSet {
    pub names: Vec<String>,
    pub priority: Option<f64>,
    pub kind: Option<OpKind>,
    pub params: Vec<ParamSpec>,
    pub description: String,
    pub source: String,
    pub path: String,
    pub line: usize,
}

impl OpTagSet {
    pub fn to_info(&self) -> OpInfo {
        let kind = self
            .kind
            .or_else(|| OpKind::infer(self.params.iter().map(|p| p.io)).ok())
            .unwrap_or(OpKind::Function);
        OpInfo {
            names: self.names.clone(),
            kind,
            priority: self.priority.unwrap_or(0.0),
            params: self.params.clone(),
            dependencies: Vec::new(),
            source: self.source.clone(),
            description: self.description.clone(),
            reduced_from: None,
        }
    }
}

struct Header {
    names: Vec<String>,
    priority: Option<f64>,
    kind: Option<OpKind>,
}

/// Splits `key='value'` pairs; single or double quotes.
fn attributes(s: &str) -> Result<Vec<(&str, &str)>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim_start();
    while !rest.is_empty() {
        let eq = rest
            .find('=')
            .ok_or_else(|| format!("expected key='value' near {rest:?}"))?;
        let key = rest[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("bad attribute name {key:?}"));
        }
        let after = rest[eq + 1..].trim_start();
        let quote = after
            .chars()
            .next()
            .filter(|c| *c == '\'' || *c == '"')
            .ok_or_else(|| format!("value of {key} must be quoted"))?;
        let close = after[1..]
            .find(quote)
            .ok_or_else(|| format!("unterminated value for {key}"))?;
        out.push((key, &after[1..1 + close]));
        rest = after[close + 2..].trim_start();
    }
    Ok(out)
}

fn parse_header(rest: &str) -> Result<Header, Vec<String>> {
    let rest = rest.trim();
    let Some(attrs) = rest
        .strip_prefix("op")
        .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
    else {
        return Err(vec!["expected `op` after @implNote".into()]);
    };
    let attrs = attributes(attrs).map_err(|e| vec![e])?;
    let mut errors = Vec::new();
    let mut header = Header {
        names: Vec::new(),
        priority: None,
        kind: None,
    };
    for (key, value) in attrs {
        match key {
            "names" => {
                header.names = value
                    .split(',')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .map(str::to_string)
                    .collect();
                for n in &header.names {
                    if !is_op_name(n) {
                        errors.push(format!("{n:?} is not a dotted op name"));
                    }
                }
            }
            "priority" => match value.trim().parse::<f64>() {
                Ok(p) if p.is_finite() => header.priority = Some(p),
                _ => errors.push("priority must be numeric".into()),
            },
            "kind" => match OpKind::parse(value.trim()) {
                Some(k) => header.kind = Some(k),
                None => errors.push(format!("unknown kind {value:?}")),
            },
            other => errors.push(format!("unknown @implNote attribute {other:?}")),
        }
    }
    if header.names.is_empty() {
        errors.insert(0, "missing names".into());
    }
    if errors.is_empty() {
        Ok(header)
    } else {
        Err(errors)
    }
}

/// Splits a leading type off `s`, keeping `<..>` groups together.
fn split_type(s: &str) -> (&str, &str) {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '<' => depth += 1,
            '>' => depth -= 1,
            c if c.is_whitespace() && depth <= 0 => return (&s[..i], s[i..].trim_start()),
            _ => {}
        }
    }
    (s, "")
}

fn split_word(s: &str) -> (&str, &str) {
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim_start()),
        None => (s, ""),
    }
}

fn parse_param(role: IoRole, rest: &str) -> Result<ParamSpec, String> {
    let tag = role.as_str();
    let (name, rest) = if role == IoRole::Output {
        ("output", rest)
    } else {
        let (n, r) = split_word(rest);
        if n.is_empty() {
            return Err(format!("@{tag} needs a name and a type"));
        }
        (n, r)
    };
    let (name, optional) = match name.strip_suffix('?') {
        Some(n) => (n, true),
        None => (name, false),
    };
    let (ty, desc) = split_type(rest);
    if ty.is_empty() {
        return Err(format!("@{tag} {name} needs a type"));
    }
    let ty = SemanticType::parse(ty).map_err(|e| format!("@{tag} {name}: bad type {ty:?}: {e}"))?;
    let mut p = ParamSpec::new(name, ty, role);
    p.optional = optional;
    p.description = desc.to_string();
    Ok(p)
}

/// Parses the op tags of one block. All problems are reported, each with
/// the line it occurs on.
pub fn parse_tags(block: &CommentBlock) -> Result<OpTagSet, Vec<Diagnostic>> {
    let diag = |line: usize, msg: String| Diagnostic::new(block.path.clone(), line, msg);
    let mut diagnostics = Vec::new();
    let mut header: Option<(usize, Header)> = None;
    let mut description: Vec<&str> = Vec::new();
    let mut params: Vec<ParamSpec> = Vec::new();
    let mut outputs = 0;
    let mut seen_tag = false;
    // Continuation lines extend the description of the last parameter tag.
    let mut continues = false;

    for (line, text) in block.lines() {
        let t = text.trim();
        if t.is_empty() {
            continues = false;
            if !seen_tag && !description.is_empty() {
                seen_tag = true;
            }
            continue;
        }
        let Some(tagged) = t.strip_prefix('@') else {
            if !seen_tag {
                description.push(t);
            } else if continues {
                if let Some(p) = params.last_mut() {
                    if !p.description.is_empty() {
                        p.description.push(' ');
                    }
                    p.description.push_str(t);
                }
            }
            continue;
        };
        seen_tag = true;
        continues = false;
        let (tag, rest) = split_word(tagged);
        let role = match tag {
            "implNote" => {
                if header.is_some() {
                    diagnostics.push(diag(line, "multiple @implNote tags".into()));
                    continue;
                }
                match parse_header(rest) {
                    Ok(h) => header = Some((line, h)),
                    Err(errors) => {
                        diagnostics.extend(errors.into_iter().map(|e| diag(line, e)));
                    }
                }
                continue;
            }
            "input" => IoRole::Input,
            "container" => IoRole::Container,
            "mutable" => IoRole::Mutable,
            "output" => IoRole::Output,
            _ => continue,
        };
        if role == IoRole::Output {
            outputs += 1;
            if outputs > 1 {
                diagnostics.push(diag(line, "multiple outputs".into()));
                continue;
            }
        }
        match parse_param(role, rest) {
            Ok(p) => {
                params.push(p);
                continues = true;
            }
            Err(e) => diagnostics.push(diag(line, e)),
        }
    }

    let Some((header_line, header)) = header else {
        if diagnostics.is_empty() {
            diagnostics.push(diag(block.start_line, "no @implNote tag".into()));
        }
        return Err(diagnostics);
    };
    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }
    let set = OpTagSet {
        names: header.names,
        priority: header.priority,
        kind: header.kind,
        params,
        description: description.join(" "),
        source: format!("indexed:{}#L{}", block.path, block.start_line),
        path: block.path.clone(),
        line: header_line,
    };
    if let Err(m) = OpKind::infer(set.params.iter().map(|p| p.io)) {
        return Err(vec![diag(header_line, m)]);
    }
    if let Err((field, m)) = set.to_info().validate() {
        return Err(vec![diag(header_line, format!("{field}: {m}"))]);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(text: &str) -> CommentBlock {
        CommentBlock {
            path: "src/lib.rs".into(),
            start_line: 10,
            text: text.into(),
        }
    }

    fn messages(r: Result<OpTagSet, Vec<Diagnostic>>) -> Vec<String> {
        r.unwrap_err().into_iter().map(|d| d.to_string()).collect()
    }

    #[test]
    fn copy_array_block() {
        let b = block(
            "Copies an array into a preallocated one.\n\
             @input input RealArray the source\n\
             @container output RealArray the destination\n\
             @implNote op names='copy.array, engine.copy' priority='100'",
        );
        let t = parse_tags(&b).unwrap();
        assert_eq!(t.names, ["copy.array", "engine.copy"]);
        assert_eq!(t.priority, Some(100.0));
        assert_eq!(t.source, "indexed:src/lib.rs#L10");
        assert_eq!(t.line, 13);
        assert_eq!(t.description, "Copies an array into a preallocated one.");
        let info = t.to_info();
        assert_eq!(info.kind, OpKind::Computer);
        assert_eq!(info.params.len(), 2);
        assert_eq!(info.params[1].description, "the destination");
    }

    #[test]
    fn two_outputs() {
        let b = block("@implNote op names='a.b'\n@input x Real\n@output Real\n@output Real");
        assert_eq!(messages(parse_tags(&b)), ["src/lib.rs:13: multiple outputs"]);
    }

    #[test]
    fn bad_priority() {
        let b = block("@implNote op names='a.b' priority='abc'\n@input x Real\n@output Real");
        assert_eq!(messages(parse_tags(&b)), ["src/lib.rs:10: priority must be numeric"]);
    }

    #[test]
    fn missing_names() {
        let b = block("@input x Real\n@output Real\n@implNote op priority='1'");
        assert_eq!(messages(parse_tags(&b)), ["src/lib.rs:12: missing names"]);
    }

    #[test]
    fn bad_type() {
        let b = block("@implNote op names='a.b'\n@input x List<Real\n@output Real");
        let m = messages(parse_tags(&b));
        assert_eq!(m.len(), 1);
        assert!(m[0].starts_with("src/lib.rs:11: @input x: bad type"), "{m:?}");
    }

    #[test]
    fn generic_types_with_spaces() {
        let b = block("@implNote op names='a.b'\n@input x Map<Text, Real> lookup table\n@output Real");
        let t = parse_tags(&b).unwrap();
        assert_eq!(t.params[0].ty.to_string(), "Map<Text, Real>");
        assert_eq!(t.params[0].description, "lookup table");
    }

    #[test]
    fn optional_and_mutable() {
        let b = block("@implNote op names='a.b'\n@mutable data ByteArray\n@input step? Integer\n  spans lines");
        let t = parse_tags(&b).unwrap();
        assert_eq!(t.to_info().kind, OpKind::Inplace(0));
        assert!(t.params[1].optional);
        assert_eq!(t.params[1].description, "spans lines");
    }

    #[test]
    fn kind_contradiction() {
        let b = block("@implNote op names='a.b' kind='function'\n@input x Real\n@container y Real");
        let m = messages(parse_tags(&b));
        assert!(m[0].contains("contradicts"), "{m:?}");
    }

    #[test]
    fn no_role() {
        let b = block("@implNote op names='a.b'\n@input x Real");
        assert_eq!(
            messages(parse_tags(&b)),
            ["src/lib.rs:10: no output, container or mutable parameter"]
        );
    }

    #[test]
    fn not_an_op() {
        let b = block("@implNote this is just a note");
        assert_eq!(
            messages(parse_tags(&b)),
            ["src/lib.rs:10: expected `op` after @implNote"]
        );
    }
}
