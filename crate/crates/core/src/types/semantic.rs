//! Nominal semantic types and their textual grammar.
//!
//! The grammar is `Name`, `Name<T1, T2, ...>` or a type variable `'Name`.
//! Whitespace is permitted around names, commas and angle brackets.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Variable bindings produced by unification, keyed by variable name
/// (without the leading tick).
pub type Bindings = BTreeMap<String, SemanticType>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticType {
    Named {
        base: String,
        params: Vec<SemanticType>,
    },
    /// A type variable. Only legal in op signatures and adapter patterns.
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type syntax error at offset {offset}: {message}")]
pub struct TypeParseError {
    pub offset: usize,
    pub message: String,
}

impl SemanticType {
    pub fn named(base: impl Into<String>) -> Self {
        SemanticType::Named {
            base: base.into(),
            params: Vec::new(),
        }
    }

    pub fn with_params(base: impl Into<String>, params: Vec<SemanticType>) -> Self {
        SemanticType::Named {
            base: base.into(),
            params,
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        SemanticType::Var(name.into())
    }

    pub fn parse(text: &str) -> Result<Self, TypeParseError> {
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        parser.skip_ws();
        if parser.pos >= parser.src.len() {
            return Err(parser.error("expected a type name"));
        }
        let ty = parser.parse_type()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(ty)
    }

    /// Base name, or `None` for a type variable.
    pub fn base(&self) -> Option<&str> {
        match self {
            SemanticType::Named { base, .. } => Some(base),
            SemanticType::Var(_) => None,
        }
    }

    pub fn params(&self) -> &[SemanticType] {
        match self {
            SemanticType::Named { params, .. } => params,
            SemanticType::Var(_) => &[],
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, SemanticType::Var(_))
    }

    /// True when no type variable occurs anywhere in the type.
    pub fn is_concrete(&self) -> bool {
        match self {
            SemanticType::Var(_) => false,
            SemanticType::Named { params, .. } => params.iter().all(SemanticType::is_concrete),
        }
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            SemanticType::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            SemanticType::Named { params, .. } => {
                for p in params {
                    p.variables(out);
                }
            }
        }
    }

    /// Replaces bound variables, following chains of bindings.
    pub fn substitute(&self, bindings: &Bindings) -> SemanticType {
        self.substitute_depth(bindings, 0)
    }

    fn substitute_depth(&self, bindings: &Bindings, depth: usize) -> SemanticType {
        match self {
            SemanticType::Var(v) => match bindings.get(v) {
                // Self-referential chains are impossible from unification, the
                // depth cap only keeps a malformed map from recursing forever.
                Some(bound) if depth < 64 && bound != self => bound.substitute_depth(bindings, depth + 1),
                _ => self.clone(),
            },
            SemanticType::Named { base, params } => SemanticType::Named {
                base: base.clone(),
                params: params.iter().map(|p| p.substitute_depth(bindings, depth)).collect(),
            },
        }
    }

    /// Renames every variable by appending `suffix`.
    pub fn rename_vars(&self, suffix: &str) -> SemanticType {
        match self {
            SemanticType::Var(v) => SemanticType::Var(format!("{v}{suffix}")),
            SemanticType::Named { base, params } => SemanticType::Named {
                base: base.clone(),
                params: params.iter().map(|p| p.rename_vars(suffix)).collect(),
            },
        }
    }
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticType::Var(v) => write!(f, "'{v}"),
            SemanticType::Named { base, params } => {
                f.write_str(base)?;
                if !params.is_empty() {
                    f.write_str("<")?;
                    for (i, p) in params.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{p}")?;
                    }
                    f.write_str(">")?;
                }
                Ok(())
            }
        }
    }
}

impl std::str::FromStr for SemanticType {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SemanticType::parse(s)
    }
}

/// Checks the identifier grammar `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> TypeParseError {
        TypeParseError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String, TypeParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => self.pos += 1,
            _ => return Err(self.error("expected an identifier")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        // the slice is pure ASCII by construction
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn parse_type(&mut self) -> Result<SemanticType, TypeParseError> {
        self.skip_ws();
        if self.peek() == Some(b'\'') {
            self.pos += 1;
            return Ok(SemanticType::Var(self.ident()?));
        }
        let base = self.ident()?;
        self.skip_ws();
        let mut params = Vec::new();
        if self.peek() == Some(b'<') {
            self.pos += 1;
            loop {
                params.push(self.parse_type()?);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b'>') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected ',' or '>'")),
                }
            }
        }
        Ok(SemanticType::Named { base, params })
    }
}
