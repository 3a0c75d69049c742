use std::fmt::{self, Write};

use crate::registry::OpKind;
use crate::types::SemanticType;

/// What the caller wants back from the op.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RequestTarget {
    /// A new value; `None` accepts any output type.
    Function(Option<SemanticType>),
    /// Results written into a caller-owned container of this type.
    Computer(SemanticType),
    /// The argument at this index is overwritten.
    Inplace(usize),
}

/// A declarative request: op name plus concrete argument types.
///
/// For inplace requests `args` contains every argument, including the
/// mutable one at the target index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpRequest {
    pub name: String,
    pub args: Vec<SemanticType>,
    pub target: RequestTarget,
}

impl OpRequest {
    pub fn function(name: impl Into<String>, args: Vec<SemanticType>, output: Option<SemanticType>) -> Self {
        Self {
            name: name.into(),
            args,
            target: RequestTarget::Function(output),
        }
    }

    pub fn computer(name: impl Into<String>, args: Vec<SemanticType>, container: SemanticType) -> Self {
        Self {
            name: name.into(),
            args,
            target: RequestTarget::Computer(container),
        }
    }

    pub fn inplace(name: impl Into<String>, args: Vec<SemanticType>, index: usize) -> Self {
        Self {
            name: name.into(),
            args,
            target: RequestTarget::Inplace(index),
        }
    }

    /// Parses every type string; panics on malformed input. Intended for
    /// tests and examples.
    pub fn parse_function(name: &str, args: &[&str], output: Option<&str>) -> Self {
        let p = |s: &str| SemanticType::parse(s).expect("valid type");
        Self::function(name, args.iter().map(|a| p(a)).collect(), output.map(p))
    }

    pub fn kind(&self) -> OpKind {
        match self.target {
            RequestTarget::Function(_) => OpKind::Function,
            RequestTarget::Computer(_) => OpKind::Computer,
            RequestTarget::Inplace(i) => OpKind::Inplace(i),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !crate::registry::is_op_name(&self.name) {
            return Err(format!("{:?} is not a dotted op name", self.name));
        }
        let target_ty = match &self.target {
            RequestTarget::Function(t) => t.as_ref(),
            RequestTarget::Computer(t) => Some(t),
            RequestTarget::Inplace(i) => {
                if *i >= self.args.len() {
                    return Err(format!(
                        "mutable index {i} out of range for {} arguments",
                        self.args.len()
                    ));
                }
                None
            }
        };
        if let Some(t) = self.args.iter().chain(target_ty).find(|t| !t.is_concrete()) {
            return Err(format!("request types must be concrete, found {t}"));
        }
        Ok(())
    }

    /// Cache key: `<env>|<name>|<kind>|<arg,...>|<target>`.
    pub fn cache_key(&self, env_prefix: &str) -> String {
        let mut key = String::with_capacity(64);
        key.push_str(env_prefix);
        key.push('|');
        key.push_str(&self.name);
        key.push('|');
        key.push_str(self.kind().name());
        key.push('|');
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                key.push(',');
            }
            let _ = write!(key, "{a}");
        }
        key.push('|');
        match &self.target {
            RequestTarget::Function(Some(t)) | RequestTarget::Computer(t) => {
                let _ = write!(key, "{t}");
            }
            RequestTarget::Function(None) => key.push('?'),
            RequestTarget::Inplace(i) => {
                let _ = write!(key, "{i}");
            }
        }
        key
    }
}

impl fmt::Display for OpRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if self.target == RequestTarget::Inplace(i) {
                f.write_str("mut ")?;
            }
            write!(f, "{a}")?;
        }
        match &self.target {
            RequestTarget::Function(Some(t)) => write!(f, ") -> {t}"),
            RequestTarget::Function(None) => f.write_str(") -> ?"),
            RequestTarget::Computer(t) => write!(f, ") => container {t}"),
            RequestTarget::Inplace(_) => f.write_str(")"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_key() {
        let r = OpRequest::parse_function("math.add", &["Integer", "Integer"], Some("Integer"));
        assert_eq!(r.to_string(), "math.add(Integer, Integer) -> Integer");
        assert_eq!(r.cache_key("h"), "h|math.add|function|Integer,Integer|Integer");
        let ip = OpRequest::inplace("benchmark.increment", vec![SemanticType::named("ByteArray")], 0);
        assert_eq!(ip.to_string(), "benchmark.increment(mut ByteArray)");
        assert_eq!(ip.cache_key("h"), "h|benchmark.increment|inplace|ByteArray|0");
    }

    #[test]
    fn validation() {
        assert!(OpRequest::parse_function("math.add", &["'T"], None).validate().is_err());
        assert!(OpRequest::inplace("a.b", vec![], 0).validate().is_err());
        assert!(OpRequest::parse_function("Bad", &[], None).validate().is_err());
        assert!(OpRequest::parse_function("a.b", &["Real"], None).validate().is_ok());
    }
}
