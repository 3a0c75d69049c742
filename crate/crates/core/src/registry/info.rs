//! Op metadata records.

use std::fmt;
use std::sync::Arc;

use crate::types::{is_identifier, SemanticType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IoRole {
    Input,
    Container,
    Mutable,
    Output,
}

impl IoRole {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "input" => Some(IoRole::Input),
            "container" => Some(IoRole::Container),
            "mutable" => Some(IoRole::Mutable),
            "output" => Some(IoRole::Output),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IoRole::Input => "input",
            IoRole::Container => "container",
            IoRole::Mutable => "mutable",
            IoRole::Output => "output",
        }
    }
}

/// Functional kind of an op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Function,
    Computer,
    /// Index of the mutable argument.
    Inplace(usize),
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Function => "function",
            OpKind::Computer => "computer",
            OpKind::Inplace(_) => "inplace",
        }
    }

    pub fn same_class(self, other: OpKind) -> bool {
        std::mem::discriminant(&self) == std::mem::discriminant(&other)
    }

    /// `function`, `computer`, `inplace` (index 0) or `inplace:<i>`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "function" => Some(OpKind::Function),
            "computer" => Some(OpKind::Computer),
            "inplace" => Some(OpKind::Inplace(0)),
            _ => s
                .strip_prefix("inplace:")
                .and_then(|i| i.parse().ok())
                .map(OpKind::Inplace),
        }
    }

    /// Infers the kind from the io roles of a parameter list.
    pub fn infer(roles: impl IntoIterator<Item = IoRole>) -> Result<Self, String> {
        let (mut outputs, mut containers, mut mutable) = (0, 0, None);
        let mut mutables = 0;
        for (i, role) in roles.into_iter().enumerate() {
            match role {
                IoRole::Input => {}
                IoRole::Output => outputs += 1,
                IoRole::Container => containers += 1,
                IoRole::Mutable => {
                    mutables += 1;
                    mutable = Some(i);
                }
            }
        }
        match (outputs, containers, mutables) {
            (1, 0, 0) => Ok(OpKind::Function),
            (0, 1, 0) => Ok(OpKind::Computer),
            (0, 0, 1) => Ok(OpKind::Inplace(mutable.unwrap_or(0))),
            (0, 0, 0) => Err("no output, container or mutable parameter".to_string()),
            _ => Err(format!(
                "exactly one output, container or mutable parameter is required \
                 (found {outputs} output, {containers} container, {mutables} mutable)"
            )),
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpKind::Inplace(i) if *i != 0 => write!(f, "inplace:{i}"),
            k => f.write_str(k.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub ty: SemanticType,
    pub io: IoRole,
    pub optional: bool,
    pub description: String,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, ty: SemanticType, io: IoRole) -> Self {
        Self {
            name: name.into(),
            ty,
            io,
            optional: false,
            description: String::new(),
        }
    }
}

/// A helper op an op needs, resolved by the matcher.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencySpec {
    pub field: String,
    pub op_name: String,
    pub kind: OpKind,
    /// Function: inputs then output. Computer: inputs then container.
    /// Inplace: all arguments.
    pub signature: Vec<SemanticType>,
}

/// The positional, kind-annotated view of a signature: inputs followed by
/// the output or container; for inplace ops all arguments in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    pub kind: OpKind,
    pub types: Vec<SemanticType>,
    pub names: Vec<String>,
}

impl Shape {
    pub fn input_count(&self) -> usize {
        match self.kind {
            OpKind::Function | OpKind::Computer => self.types.len().saturating_sub(1),
            OpKind::Inplace(_) => self.types.len(),
        }
    }

    /// Encodes the shape as `Function<..>`, `Computer<..>` or `Inplace<i><..>`.
    pub fn functional_type(&self) -> SemanticType {
        let base = match self.kind {
            OpKind::Function => "Function".to_string(),
            OpKind::Computer => "Computer".to_string(),
            OpKind::Inplace(i) => format!("Inplace{i}"),
        };
        SemanticType::with_params(base, self.types.clone())
    }

    pub fn from_functional_type(t: &SemanticType) -> Option<Shape> {
        let base = t.base()?;
        let kind = match base {
            "Function" => OpKind::Function,
            "Computer" => OpKind::Computer,
            _ => OpKind::Inplace(base.strip_prefix("Inplace")?.parse().ok()?),
        };
        let types = t.params().to_vec();
        let valid = match kind {
            OpKind::Function | OpKind::Computer => !types.is_empty(),
            OpKind::Inplace(i) => i < types.len(),
        };
        if !valid {
            return None;
        }
        let names = (0..types.len()).map(|i| format!("arg{i}")).collect();
        Some(Shape { kind, types, names })
    }
}

/// Immutable metadata for one registered op.
#[derive(Debug, Clone, PartialEq)]
pub struct OpInfo {
    /// Canonical name first, then aliases.
    pub names: Vec<String>,
    pub kind: OpKind,
    pub priority: f64,
    pub params: Vec<ParamSpec>,
    pub dependencies: Vec<DependencySpec>,
    pub source: String,
    pub description: String,
    pub reduced_from: Option<Arc<OpInfo>>,
}

impl OpInfo {
    pub fn name(&self) -> &str {
        &self.names[0]
    }

    pub fn aliases(&self) -> &[String] {
        &self.names[1..]
    }

    pub fn has_name(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    /// Number of optional parameters dropped to produce this variant.
    pub fn removed_params(&self) -> usize {
        self.reduced_from
            .as_ref()
            .map_or(0, |orig| orig.params.len() - self.params.len())
    }

    pub fn inputs(&self) -> impl Iterator<Item = &ParamSpec> {
        self.params.iter().filter(|p| p.io == IoRole::Input)
    }

    pub fn shape(&self) -> Shape {
        let mut types = Vec::with_capacity(self.params.len());
        let mut names = Vec::with_capacity(self.params.len());
        match self.kind {
            OpKind::Inplace(_) => {
                for p in self.params.iter().filter(|p| p.io != IoRole::Output) {
                    types.push(p.ty.clone());
                    names.push(p.name.clone());
                }
            }
            OpKind::Function | OpKind::Computer => {
                for p in self.inputs() {
                    types.push(p.ty.clone());
                    names.push(p.name.clone());
                }
                if let Some(p) = self
                    .params
                    .iter()
                    .find(|p| matches!(p.io, IoRole::Output | IoRole::Container))
                {
                    types.push(p.ty.clone());
                    names.push(p.name.clone());
                }
            }
        }
        Shape {
            kind: self.kind,
            types,
            names,
        }
    }

    /// Key used for duplicate detection and as the last ordering tie-break.
    pub fn signature_key(&self) -> String {
        self.shape().functional_type().to_string()
    }

    /// Checks the structural invariants. Returns `(field path, message)` on
    /// the first violation.
    pub fn validate(&self) -> Result<(), (String, String)> {
        if self.names.is_empty() {
            return Err(("name".into(), "an op needs at least one name".into()));
        }
        for (i, n) in self.names.iter().enumerate() {
            if !is_op_name(n) {
                let field = if i == 0 {
                    "name".to_string()
                } else {
                    format!("aliases[{}]", i - 1)
                };
                return Err((field, format!("{n:?} is not a dotted op name")));
            }
        }
        if self.source.trim().is_empty() {
            return Err(("source".into(), "source URI is empty".into()));
        }
        if !self.priority.is_finite() {
            return Err(("priority".into(), "priority must be finite".into()));
        }
        let inferred = OpKind::infer(self.params.iter().map(|p| p.io)).map_err(|m| ("parameters".to_string(), m))?;
        if inferred != self.kind {
            return Err((
                "kind".into(),
                format!("declared kind {} contradicts parameter roles ({inferred})", self.kind),
            ));
        }
        let mut seen = Vec::new();
        for (i, p) in self.params.iter().enumerate() {
            if !is_identifier(&p.name) {
                return Err((
                    format!("parameters[{i}].name"),
                    format!("{:?} is not an identifier", p.name),
                ));
            }
            if seen.contains(&p.name.as_str()) {
                return Err((
                    format!("parameters[{i}].name"),
                    format!("duplicate parameter {:?}", p.name),
                ));
            }
            seen.push(&p.name);
            if p.optional && p.io != IoRole::Input {
                return Err((
                    format!("parameters[{i}]"),
                    "only input parameters may be optional".into(),
                ));
            }
        }
        let mut vars = Vec::new();
        for p in &self.params {
            p.ty.variables(&mut vars);
        }
        for (i, d) in self.dependencies.iter().enumerate() {
            if !is_op_name(&d.op_name) {
                return Err((
                    format!("dependencies[{i}].name"),
                    format!("{:?} is not a dotted op name", d.op_name),
                ));
            }
            let valid_len = match d.kind {
                OpKind::Function | OpKind::Computer => !d.signature.is_empty(),
                OpKind::Inplace(m) => m < d.signature.len(),
            };
            if !valid_len {
                return Err((
                    format!("dependencies[{i}].signature"),
                    "signature too short for its kind".into(),
                ));
            }
            let mut dep_vars = Vec::new();
            for t in &d.signature {
                t.variables(&mut dep_vars);
            }
            if let Some(v) = dep_vars.iter().find(|v| !vars.contains(v)) {
                return Err((
                    format!("dependencies[{i}].signature"),
                    format!("type variable '{v} is not bound by the op's parameters"),
                ));
            }
        }
        Ok(())
    }
}

/// Dotted names with identifier segments that start lowercase,
/// e.g. `filter.gauss` or `transform.rescale2D`.
pub fn is_op_name(s: &str) -> bool {
    !s.is_empty()
        && s.split('.')
            .all(|seg| seg.chars().next().is_some_and(|c| c.is_ascii_lowercase()) && is_identifier(seg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn op_names() {
        assert!(is_op_name("filter.gauss"));
        assert!(is_op_name("transform.rescale2D"));
        assert!(!is_op_name("Filter.gauss"));
        assert!(!is_op_name("filter..gauss"));
        assert!(!is_op_name(""));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(OpKind::parse("inplace:2"), Some(OpKind::Inplace(2)));
        assert_eq!(OpKind::parse("inplace"), Some(OpKind::Inplace(0)));
        assert_eq!(OpKind::parse("lambda"), None);
        assert_eq!(OpKind::Inplace(2).to_string(), "inplace:2");
    }

    #[test]
    fn functional_type_round_trip() {
        let t = SemanticType::parse("Inplace1<Real, ByteArray>").unwrap();
        let s = Shape::from_functional_type(&t).unwrap();
        assert_eq!(s.kind, OpKind::Inplace(1));
        assert_eq!(s.functional_type(), t);
        assert!(Shape::from_functional_type(&SemanticType::parse("Inplace2<Real>").unwrap()).is_none());
    }

    fn role() -> impl Strategy<Value = IoRole> {
        prop_oneof![
            Just(IoRole::Input),
            Just(IoRole::Container),
            Just(IoRole::Mutable),
            Just(IoRole::Output)
        ]
    }

    proptest! {
        // every legal role combination has exactly one kind; illegal ones none
        #[test]
        fn kind_inference_total(roles in prop::collection::vec(role(), 0..6)) {
            let count = |r| roles.iter().filter(|x| **x == r).count();
            let special = count(IoRole::Output) + count(IoRole::Container) + count(IoRole::Mutable);
            match OpKind::infer(roles.iter().copied()) {
                Ok(OpKind::Function) => prop_assert!(special == 1 && count(IoRole::Output) == 1),
                Ok(OpKind::Computer) => prop_assert!(special == 1 && count(IoRole::Container) == 1),
                Ok(OpKind::Inplace(i)) => {
                    prop_assert!(special == 1);
                    prop_assert_eq!(roles[i], IoRole::Mutable);
                }
                Err(_) => prop_assert!(special != 1),
            }
        }
    }
}
