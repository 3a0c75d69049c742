use std::fmt::Write;

use crate::matcher::OpRequest;
use crate::registry::{IoRole, OpEnvironment, OpInfo, OpKind};
use crate::types::{SemanticType, Value};

const MAX_DISTANCE: usize = 2;
const DESCRIBE_OP: &str = "engine.describe";

/// Simplified type name, obtained by running `engine.describe` when the
/// environment provides it.
pub fn describe_type(env: &OpEnvironment, t: &SemanticType) -> String {
    let table = env.descriptor_table();
    if !t.is_concrete() {
        return table.describe(t);
    }
    let token = Value::type_token(t.clone());
    let req = OpRequest::function(
        DESCRIBE_OP,
        vec![token.ty()],
        Some(SemanticType::named(crate::types::TEXT)),
    );
    let described = crate::matcher::resolve(env, &req)
        .ok()
        .and_then(|r| r.callable.apply(&[&token], &env.runtime().context()).ok())
        .and_then(|v| v.as_text().map(str::to_string));
    described.unwrap_or_else(|| table.describe(t))
}

/// One-line signature with types rendered by `describe`.
pub fn signature_line(info: &OpInfo, describe: impl Fn(&SemanticType) -> String) -> String {
    let mut s = format!("{}(", info.name());
    let mut first = true;
    let mut output = None;
    for p in &info.params {
        if p.io == IoRole::Output {
            output = Some(p);
            continue;
        }
        if !first {
            s.push_str(", ");
        }
        first = false;
        let _ = write!(
            s,
            "{}{}: {}",
            p.name,
            if p.optional { "?" } else { "" },
            describe(&p.ty)
        );
    }
    s.push(')');
    if let Some(p) = output {
        let _ = write!(s, " -> {}", describe(&p.ty));
    }
    s
}

fn originals(env: &OpEnvironment) -> impl Iterator<Item = &OpInfo> {
    env.infos().iter().map(|i| &**i).filter(|i| i.reduced_from.is_none())
}

fn implementations<'e>(env: &'e OpEnvironment, name: &str) -> Vec<&'e OpInfo> {
    originals(env).filter(|i| i.has_name(name)).collect()
}

fn namespace_members<'e>(env: &'e OpEnvironment, prefix: &str) -> Vec<&'e str> {
    let mut names: Vec<&str> = originals(env)
        .map(|i| i.name())
        .filter(|n| prefix.is_empty() || n.strip_prefix(prefix).is_some_and(|r| r.starts_with('.')))
        .collect();
    names.sort_unstable();
    names.dedup();
    names
}

fn no_match(env: &OpEnvironment, query: &str) -> String {
    let mut candidates: Vec<String> = Vec::new();
    for info in originals(env) {
        for n in &info.names {
            candidates.push(n.clone());
            let mut ns = n.as_str();
            while let Some((head, _)) = ns.rsplit_once('.') {
                candidates.push(head.to_string());
                ns = head;
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let suggestions: Vec<&String> = candidates
        .iter()
        .filter(|c| strsim::levenshtein(c, query) <= MAX_DISTANCE)
        .collect();
    let mut s = format!("No ops found matching {query}\n");
    if !suggestions.is_empty() {
        s.push_str("Did you mean:\n");
        for c in suggestions {
            let _ = writeln!(s, "  {c}");
        }
    }
    s
}

fn kind_label(kind: OpKind) -> String {
    kind.to_string()
}

/// Namespace query: distinct op names under it. Full name: one line per
/// implementation.
pub fn help(env: &OpEnvironment, query: &str) -> String {
    let query = query.trim();
    let impls = implementations(env, query);
    if !impls.is_empty() {
        let mut s = String::new();
        for i in impls {
            let _ = writeln!(
                s,
                "{}  [{}]",
                signature_line(i, |t| describe_type(env, t)),
                kind_label(i.kind)
            );
        }
        return s;
    }
    let members = namespace_members(env, query);
    if !members.is_empty() {
        let mut s = String::new();
        for n in members {
            let _ = writeln!(s, "{n}");
        }
        return s;
    }
    no_match(env, query)
}

/// Adds descriptions, parameter docs, priority, source and dependencies.
pub fn help_verbose(env: &OpEnvironment, query: &str) -> String {
    let query = query.trim();
    let impls = implementations(env, query);
    if impls.is_empty() {
        let members = namespace_members(env, query);
        if members.is_empty() {
            return no_match(env, query);
        }
        let mut s = String::new();
        for n in members {
            s.push_str(&help_verbose(env, n));
        }
        return s;
    }
    let mut s = String::new();
    for i in impls {
        let _ = writeln!(s, "{}", signature_line(i, |t| describe_type(env, t)));
        if !i.aliases().is_empty() {
            let _ = writeln!(s, "  aliases: {}", i.aliases().join(", "));
        }
        let _ = writeln!(s, "  kind: {}", i.kind);
        let _ = writeln!(s, "  priority: {}", i.priority);
        let _ = writeln!(s, "  source: {}", i.source);
        if !i.description.is_empty() {
            let _ = writeln!(s, "  description: {}", i.description);
        }
        s.push_str("  parameters:\n");
        for p in &i.params {
            let _ = write!(
                s,
                "    {} ({}{}, {})",
                p.name,
                p.io.as_str(),
                if p.optional { ", optional" } else { "" },
                p.ty
            );
            if !p.description.is_empty() {
                let _ = write!(s, ": {}", p.description);
            }
            s.push('\n');
        }
        if !i.dependencies.is_empty() {
            s.push_str("  dependencies:\n");
            for d in &i.dependencies {
                let sig: Vec<String> = d.signature.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "    {}: {} {} [{}]", d.field, d.op_name, d.kind, sig.join(", "));
            }
        }
    }
    s
}

/// Implementations of `name` whose inputs accept the staged types.
pub(crate) fn help_staged(env: &OpEnvironment, name: &str, staged: &[SemanticType]) -> String {
    let mut s = String::new();
    for i in implementations(env, name) {
        let inputs: Vec<&SemanticType> = i.inputs().map(|p| &p.ty).collect();
        if staged.len() > inputs.len() {
            continue;
        }
        let mut b = Default::default();
        if staged
            .iter()
            .zip(&inputs)
            .all(|(a, p)| env.hierarchy().assign(a, p, &mut b))
        {
            let _ = writeln!(
                s,
                "{}  [{}]",
                signature_line(i, |t| describe_type(env, t)),
                kind_label(i.kind)
            );
        }
    }
    if s.is_empty() {
        return no_match(env, name);
    }
    s
}
