use std::fmt::{self, Write};
use std::sync::Arc;

use crate::registry::{OpInfo, OpKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoutineTag {
    Direct,
    Adapted,
    Converted,
    AdaptedAndConverted,
}

impl RoutineTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RoutineTag::Direct => "DIRECT",
            RoutineTag::Adapted => "ADAPTED",
            RoutineTag::Converted => "CONVERTED",
            RoutineTag::AdaptedAndConverted => "ADAPTED_AND_CONVERTED",
        }
    }
}

impl fmt::Display for RoutineTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Conversions applied at one request position. For containers and mutable
/// arguments `input` converts the caller's value in, `output` converts the
/// op's result back and `copy` writes it into the caller's value.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamConversion {
    pub position: usize,
    pub input: Option<InfoTree>,
    pub output: Option<InfoTree>,
    pub copy: Option<InfoTree>,
}

/// A resolved match: the chosen op, how it was fitted to the request, and
/// its recursively resolved dependencies.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoTree {
    pub info: Arc<OpInfo>,
    pub routine: RoutineTag,
    /// The kind of callable this tree produces.
    pub kind: OpKind,
    pub conversions: Vec<ParamConversion>,
    /// At most one adapter; its own dependencies are its children.
    pub adapter_chain: Vec<InfoTree>,
    /// One per dependency, in declaration order.
    pub children: Vec<InfoTree>,
    signature: Arc<str>,
}

impl InfoTree {
    pub fn new(
        info: Arc<OpInfo>,
        routine: RoutineTag,
        kind: OpKind,
        conversions: Vec<ParamConversion>,
        adapter_chain: Vec<InfoTree>,
        children: Vec<InfoTree>,
    ) -> Self {
        let signature = render_signature(&info, routine, &conversions, &adapter_chain, &children).into();
        Self {
            info,
            routine,
            kind,
            conversions,
            adapter_chain,
            children,
            signature,
        }
    }

    pub fn direct(info: Arc<OpInfo>, kind: OpKind, children: Vec<InfoTree>) -> Self {
        Self::new(info, RoutineTag::Direct, kind, Vec::new(), Vec::new(), children)
    }

    /// Canonical serialization:
    /// `source|ROUTINE|[adapt:<sig>,conv:<pos>:in=<sig>,...]|(<child>,...)`.
    /// Reduced variants render their source as `source~<omitted count>`.
    pub fn signature(&self) -> &str {
        &self.signature
    }

    pub fn signature_arc(&self) -> Arc<str> {
        self.signature.clone()
    }

    /// Visits this tree and every nested tree, depth first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a InfoTree)) {
        f(self);
        for a in &self.adapter_chain {
            a.walk(f);
        }
        for c in &self.conversions {
            for t in [&c.input, &c.output, &c.copy].into_iter().flatten() {
                t.walk(f);
            }
        }
        for c in &self.children {
            c.walk(f);
        }
    }
}

pub fn signature(tree: &InfoTree) -> &str {
    tree.signature()
}

fn render_signature(
    info: &OpInfo,
    routine: RoutineTag,
    conversions: &[ParamConversion],
    adapters: &[InfoTree],
    children: &[InfoTree],
) -> String {
    let mut s = String::with_capacity(64);
    s.push_str(&info.source);
    let removed = info.removed_params();
    if removed > 0 {
        let _ = write!(s, "~{removed}");
    }
    s.push('|');
    s.push_str(routine.as_str());
    s.push_str("|[");
    let mut first = true;
    let mut sep = |s: &mut String| {
        if !first {
            s.push(',');
        }
        first = false;
    };
    for a in adapters {
        sep(&mut s);
        s.push_str("adapt:");
        s.push_str(a.signature());
    }
    for c in conversions {
        for (dir, t) in [("in", &c.input), ("out", &c.output), ("copy", &c.copy)] {
            if let Some(t) = t {
                sep(&mut s);
                let _ = write!(s, "conv:{}:{dir}={}", c.position, t.signature());
            }
        }
    }
    s.push_str("]|(");
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(c.signature());
    }
    s.push(')');
    s
}
