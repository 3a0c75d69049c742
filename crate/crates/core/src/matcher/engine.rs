use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use thiserror::Error;

use super::cache::Resolved;
use super::request::{OpRequest, RequestTarget};
use super::tree::{InfoTree, ParamConversion, RoutineTag};
use crate::registry::{BindError, DependencySpec, OpEnvironment, OpInfo, OpKind, Shape};
use crate::types::{unify, Bindings, SemanticType};

/// Maximum nesting of dependency resolution.
pub const MAX_DEPTH: usize = 32;

const CONVERT_OP: &str = "engine.convert";
const COPY_OP: &str = "engine.copy";
const CANDIDATE_SUFFIX: &str = "#c";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MissReason {
    Unbound,
    ArityMismatch { expected: usize, found: usize },
    TypeMismatch { expected: String, found: String },
    MissingConvert { from: String, to: String },
    MissingAdapter { from: String, to: String },
    UnmetDependency { detail: String },
}

impl fmt::Display for MissReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MissReason::Unbound => f.write_str("no bound implementation"),
            MissReason::ArityMismatch { expected, found } => {
                write!(f, "arity mismatch (expected {expected} arguments, found {found})")
            }
            MissReason::TypeMismatch { expected, found } => {
                write!(f, "type mismatch (expected {expected}, found {found})")
            }
            MissReason::MissingConvert { from, to } => write!(f, "missing convert ({from} -> {to})"),
            MissReason::MissingAdapter { from, to } => write!(f, "missing adapter ({from} -> {to})"),
            MissReason::UnmetDependency { detail } => write!(f, "unmet dependency ({detail})"),
        }
    }
}

/// One rejected candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearMiss {
    pub source: String,
    pub reason: MissReason,
    pub param: String,
}

impl fmt::Display for NearMiss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :: {} @ param {}", self.source, self.reason, self.param)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("{}", render_no_match(name, request, near_misses))]
    NoMatch {
        name: String,
        request: String,
        near_misses: Vec<NearMiss>,
    },
    #[error("dependency cycle: {}", path.join(" -> "))]
    Cycle { path: Vec<String> },
    #[error("cannot instantiate {signature}: {error}")]
    Bind { signature: String, error: BindError },
}

fn render_no_match(name: &str, request: &str, misses: &[NearMiss]) -> String {
    if misses.is_empty() {
        return format!("no op matches {request}: no candidates named {name}; try `help` to list available ops");
    }
    let mut s = format!("no op matches {request}; {} candidate(s) rejected:", misses.len());
    for m in misses {
        s.push_str("\n  ");
        s.push_str(&m.to_string());
    }
    s
}

impl MatchError {
    pub fn near_misses(&self) -> &[NearMiss] {
        match self {
            MatchError::NoMatch { near_misses, .. } => near_misses,
            _ => &[],
        }
    }
}

struct Miss {
    reason: MissReason,
    param: String,
}

impl Miss {
    fn new(reason: MissReason, param: impl Into<String>) -> Self {
        Self {
            reason,
            param: param.into(),
        }
    }
}

struct Fitted {
    bindings: Bindings,
    conversions: Vec<ParamConversion>,
}

#[derive(Default)]
struct Misses(BTreeMap<usize, Miss>);

impl Misses {
    fn set(&mut self, idx: usize, miss: Miss) {
        self.0.insert(idx, miss);
    }

    fn into_near_misses(self, env: &OpEnvironment) -> Vec<NearMiss> {
        self.0
            .into_iter()
            .map(|(idx, m)| NearMiss {
                source: source_label(&env.infos[idx]),
                reason: m.reason,
                param: m.param,
            })
            .collect()
    }
}

fn source_label(info: &OpInfo) -> String {
    match info.removed_params() {
        0 => info.source.clone(),
        k => format!("{}~{k}", info.source),
    }
}

type Step<T> = Result<Result<T, Miss>, MatchError>;

pub(crate) struct Resolver<'e> {
    env: &'e OpEnvironment,
    stack: Vec<String>,
}

impl<'e> Resolver<'e> {
    pub(crate) fn new(env: &'e OpEnvironment) -> Self {
        Self { env, stack: Vec::new() }
    }

    /// Full resolution with cache and all routines in order.
    pub(crate) fn resolve(&mut self, req: &OpRequest) -> Result<Arc<Resolved>, MatchError> {
        let env = self.env;
        let key = env.cache_enabled.then(|| req.cache_key(&env.key_prefix));
        if let Some(hit) = key.as_deref().and_then(|k| env.cache.get(k)) {
            return Ok(hit);
        }
        let label = req.to_string();
        if self.stack.len() >= MAX_DEPTH {
            let start = self.stack.iter().position(|s| *s == label).unwrap_or(0);
            let mut path = self.stack[start..].to_vec();
            path.push(label);
            return Err(MatchError::Cycle { path });
        }
        self.stack.push(label);
        let result = self.resolve_uncached(req);
        self.stack.pop();
        let tree = result?;
        env.resolutions.fetch_add(1, Ordering::Relaxed);
        let callable = crate::execution::instantiate(env.bindings(), &tree).map_err(|error| MatchError::Bind {
            signature: tree.signature().to_string(),
            error,
        })?;
        let resolved = Arc::new(Resolved {
            tree: Arc::new(tree),
            callable,
        });
        Ok(match key {
            Some(k) => env.cache.insert(k, resolved),
            None => resolved,
        })
    }

    fn resolve_uncached(&mut self, req: &OpRequest) -> Result<InfoTree, MatchError> {
        req.validate().map_err(MatchError::InvalidRequest)?;
        let mut misses = Misses::default();
        if let Some(t) = self.direct(req, &mut misses)? {
            return Ok(t);
        }
        if let Some(t) = self.adapted(req, false, &mut misses)? {
            return Ok(t);
        }
        if let Some(t) = self.converted(req, &mut misses)? {
            return Ok(t);
        }
        if let Some(t) = self.adapted(req, true, &mut misses)? {
            return Ok(t);
        }
        Err(MatchError::NoMatch {
            name: req.name.clone(),
            request: req.to_string(),
            near_misses: misses.into_near_misses(self.env),
        })
    }

    fn direct(&mut self, req: &OpRequest, misses: &mut Misses) -> Result<Option<InfoTree>, MatchError> {
        let env = self.env;
        for &idx in env.candidates(&req.name) {
            if !env.bound[idx] {
                misses.set(idx, Miss::new(MissReason::Unbound, "*"));
                continue;
            }
            let fitted = match self.fit(&env.shapes[idx], req, Bindings::new(), false)? {
                Ok(f) => f,
                Err(m) => {
                    misses.set(idx, m);
                    continue;
                }
            };
            let info = &env.infos[idx];
            match self.dependencies(info, &fitted.bindings)? {
                Ok(children) => return Ok(Some(InfoTree::direct(info.clone(), req.kind(), children))),
                Err(m) => misses.set(idx, m),
            }
        }
        Ok(None)
    }

    fn converted(&mut self, req: &OpRequest, misses: &mut Misses) -> Result<Option<InfoTree>, MatchError> {
        let env = self.env;
        for &idx in env.candidates(&req.name) {
            if !env.bound[idx] || env.shapes[idx].kind != req.kind() {
                continue;
            }
            let fitted = match self.fit(&env.shapes[idx], req, Bindings::new(), true)? {
                Ok(f) => f,
                Err(m) => {
                    misses.set(idx, m);
                    continue;
                }
            };
            let info = &env.infos[idx];
            match self.dependencies(info, &fitted.bindings)? {
                Ok(children) => {
                    return Ok(Some(InfoTree::new(
                        info.clone(),
                        RoutineTag::Converted,
                        req.kind(),
                        fitted.conversions,
                        Vec::new(),
                        children,
                    )))
                }
                Err(m) => misses.set(idx, m),
            }
        }
        Ok(None)
    }

    /// Tries every candidate against every adapter, candidates outermost.
    fn adapted(&mut self, req: &OpRequest, convert: bool, misses: &mut Misses) -> Result<Option<InfoTree>, MatchError> {
        let env = self.env;
        for &idx in env.candidates(&req.name) {
            if !env.bound[idx] {
                continue;
            }
            let base = &env.shapes[idx];
            let cshape = rename_shape(base);
            let same_kind = base.kind == req.kind();
            let mut unified_any = false;
            let mut first_miss = None;
            for ad in &env.adapters {
                if !env.bound[ad.index] {
                    continue;
                }
                let mut ab = Bindings::new();
                if !unify_shape(&ad.from, &cshape, &mut ab) {
                    continue;
                }
                unified_any = true;
                let to = Shape {
                    kind: ad.to.kind,
                    types: ad.to.types.iter().map(|t| t.substitute(&ab)).collect(),
                    names: if ad.to.types.len() == base.names.len() {
                        base.names.clone()
                    } else {
                        ad.to.names.clone()
                    },
                };
                let fitted = match self.fit(&to, req, Bindings::new(), convert)? {
                    Ok(f) => f,
                    Err(m) => {
                        first_miss.get_or_insert(m);
                        continue;
                    }
                };
                if convert && fitted.conversions.is_empty() {
                    continue;
                }
                let mut base_vars = Vec::new();
                for t in &base.types {
                    t.variables(&mut base_vars);
                }
                let mut candidate_bindings = Bindings::new();
                for v in base_vars {
                    let t = SemanticType::var(format!("{v}{CANDIDATE_SUFFIX}")).substitute(&fitted.bindings);
                    if t.is_concrete() {
                        candidate_bindings.insert(v, t);
                    }
                }
                let adapter_bindings: Bindings = ab
                    .iter()
                    .map(|(k, t)| (k.clone(), t.substitute(&fitted.bindings)))
                    .collect();

                let info = &env.infos[idx];
                let children = match self.dependencies(info, &candidate_bindings)? {
                    Ok(c) => c,
                    Err(m) => {
                        first_miss.get_or_insert(m);
                        continue;
                    }
                };
                let ad_info = &env.infos[ad.index];
                let ad_children = match self.dependencies(ad_info, &adapter_bindings)? {
                    Ok(c) => c,
                    Err(m) => {
                        first_miss.get_or_insert(Miss::new(
                            MissReason::UnmetDependency {
                                detail: format!("adapter {}: {}", ad_info.source, m.reason),
                            },
                            m.param,
                        ));
                        continue;
                    }
                };
                let adapter = InfoTree::direct(ad_info.clone(), ad_info.kind, ad_children);
                let routine = if convert {
                    RoutineTag::AdaptedAndConverted
                } else {
                    RoutineTag::Adapted
                };
                return Ok(Some(InfoTree::new(
                    info.clone(),
                    routine,
                    req.kind(),
                    fitted.conversions,
                    vec![adapter],
                    children,
                )));
            }
            // same-kind candidates keep the more specific reason from the
            // direct and conversion routines
            if !same_kind {
                let miss = match first_miss {
                    Some(m) if unified_any => m,
                    _ => Miss::new(
                        MissReason::MissingAdapter {
                            from: base.kind.to_string(),
                            to: req.kind().to_string(),
                        },
                        "*",
                    ),
                };
                misses.set(idx, miss);
            }
        }
        Ok(None)
    }

    /// Checks a shape against the request. With `convert` set, failing
    /// positions are bridged with `engine.convert` ops.
    fn fit(&mut self, shape: &Shape, req: &OpRequest, mut b: Bindings, convert: bool) -> Step<Fitted> {
        let h = &self.env.hierarchy;
        if shape.kind != req.kind() {
            return Ok(Err(Miss::new(
                MissReason::MissingAdapter {
                    from: shape.kind.to_string(),
                    to: req.kind().to_string(),
                },
                "*",
            )));
        }
        let n = req.args.len();
        let arity = match shape.kind {
            OpKind::Inplace(_) => shape.types.len(),
            _ => shape.input_count(),
        };
        if arity != n {
            return Ok(Err(Miss::new(
                MissReason::ArityMismatch {
                    expected: arity,
                    found: n,
                },
                "*",
            )));
        }
        let mutable = match req.target {
            RequestTarget::Inplace(i) => Some(i),
            _ => None,
        };
        let param = |j: usize| shape.names.get(j).cloned().unwrap_or_else(|| format!("arg{j}"));
        let mut conversions = Vec::new();

        for j in 0..n {
            if Some(j) == mutable {
                continue;
            }
            let (arg, p) = (&req.args[j], &shape.types[j]);
            if h.assign(arg, p, &mut b) {
                continue;
            }
            let target = p.substitute(&b);
            if !convert || !target.is_concrete() {
                return Ok(Err(Miss::new(
                    MissReason::TypeMismatch {
                        expected: target.to_string(),
                        found: arg.to_string(),
                    },
                    param(j),
                )));
            }
            match self.converter(arg, &target)? {
                Some(t) => conversions.push(ParamConversion {
                    position: j,
                    input: Some(t),
                    output: None,
                    copy: None,
                }),
                None => {
                    return Ok(Err(Miss::new(
                        MissReason::MissingConvert {
                            from: arg.to_string(),
                            to: target.to_string(),
                        },
                        param(j),
                    )))
                }
            }
        }

        match &req.target {
            RequestTarget::Function(None) => {}
            RequestTarget::Function(Some(out)) => {
                let p = &shape.types[n];
                if !h.assign(p, out, &mut b) {
                    let produced = p.substitute(&b);
                    if !convert || !produced.is_concrete() {
                        return Ok(Err(Miss::new(
                            MissReason::TypeMismatch {
                                expected: out.to_string(),
                                found: produced.to_string(),
                            },
                            param(n),
                        )));
                    }
                    match self.converter(&produced, out)? {
                        Some(t) => conversions.push(ParamConversion {
                            position: n,
                            input: None,
                            output: Some(t),
                            copy: None,
                        }),
                        None => {
                            return Ok(Err(Miss::new(
                                MissReason::MissingConvert {
                                    from: produced.to_string(),
                                    to: out.to_string(),
                                },
                                param(n),
                            )))
                        }
                    }
                }
            }
            RequestTarget::Computer(container) => {
                if let Err(m) = self.fit_buffer(
                    n,
                    container,
                    &shape.types[n],
                    &param(n),
                    &mut b,
                    convert,
                    &mut conversions,
                )? {
                    return Ok(Err(m));
                }
            }
            &RequestTarget::Inplace(i) => {
                if let Err(m) = self.fit_buffer(
                    i,
                    &req.args[i],
                    &shape.types[i],
                    &param(i),
                    &mut b,
                    convert,
                    &mut conversions,
                )? {
                    return Ok(Err(m));
                }
            }
        }
        conversions.sort_by_key(|c| c.position);
        Ok(Ok(Fitted {
            bindings: b,
            conversions,
        }))
    }

    /// A caller-owned buffer (container or mutable argument): converted in,
    /// converted back and copied into the caller's value.
    #[allow(clippy::too_many_arguments)]
    fn fit_buffer(
        &mut self,
        position: usize,
        user: &SemanticType,
        p: &SemanticType,
        param: &str,
        b: &mut Bindings,
        convert: bool,
        conversions: &mut Vec<ParamConversion>,
    ) -> Step<()> {
        if self.env.hierarchy.assign(user, p, b) {
            return Ok(Ok(()));
        }
        let op_ty = p.substitute(b);
        if !convert || !op_ty.is_concrete() {
            return Ok(Err(Miss::new(
                MissReason::TypeMismatch {
                    expected: op_ty.to_string(),
                    found: user.to_string(),
                },
                param,
            )));
        }
        let missing = |from: &SemanticType, to: &SemanticType| {
            Miss::new(
                MissReason::MissingConvert {
                    from: from.to_string(),
                    to: to.to_string(),
                },
                param,
            )
        };
        let Some(input) = self.converter(user, &op_ty)? else {
            return Ok(Err(missing(user, &op_ty)));
        };
        let Some(output) = self.converter(&op_ty, user)? else {
            return Ok(Err(missing(&op_ty, user)));
        };
        let copy_req = OpRequest::computer(COPY_OP, vec![user.clone()], user.clone());
        let Some(copy) = self.direct_only(&copy_req)? else {
            return Ok(Err(Miss::new(
                MissReason::UnmetDependency {
                    detail: format!("no {COPY_OP} for {user}"),
                },
                param,
            )));
        };
        conversions.push(ParamConversion {
            position,
            input: Some(input),
            output: Some(output),
            copy: Some(copy),
        });
        Ok(Ok(()))
    }

    fn converter(&mut self, from: &SemanticType, to: &SemanticType) -> Result<Option<InfoTree>, MatchError> {
        let req = OpRequest::function(CONVERT_OP, vec![from.clone()], Some(to.clone()));
        self.direct_only(&req)
    }

    /// Helper lookups use direct matching only, so conversion never
    /// recurses into further adaptation or conversion.
    fn direct_only(&mut self, req: &OpRequest) -> Result<Option<InfoTree>, MatchError> {
        let env = self.env;
        if env.cache_enabled {
            if let Some(hit) = env.cache.peek(&req.cache_key(&env.key_prefix)) {
                if hit.tree.routine == RoutineTag::Direct {
                    return Ok(Some((*hit.tree).clone()));
                }
            }
        }
        let mut misses = Misses::default();
        self.direct(req, &mut misses)
    }

    fn dependencies(&mut self, info: &OpInfo, b: &Bindings) -> Step<Vec<InfoTree>> {
        let mut children = Vec::with_capacity(info.dependencies.len());
        for d in &info.dependencies {
            let sig: Vec<SemanticType> = d.signature.iter().map(|t| t.substitute(b)).collect();
            if let Some(t) = sig.iter().find(|t| !t.is_concrete()) {
                return Ok(Err(Miss::new(
                    MissReason::UnmetDependency {
                        detail: format!("{} type {t} is not determined by the request", d.op_name),
                    },
                    d.field.clone(),
                )));
            }
            let req = dependency_request(d, sig);
            match self.resolve(&req) {
                Ok(r) => children.push((*r.tree).clone()),
                Err(MatchError::NoMatch { .. }) | Err(MatchError::InvalidRequest(_)) => {
                    return Ok(Err(Miss::new(
                        MissReason::UnmetDependency {
                            detail: format!("no match for {req}"),
                        },
                        d.field.clone(),
                    )))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Ok(children))
    }
}

fn dependency_request(d: &DependencySpec, mut sig: Vec<SemanticType>) -> OpRequest {
    match d.kind {
        OpKind::Function => {
            let out = sig.pop();
            OpRequest::function(d.op_name.clone(), sig, out)
        }
        OpKind::Computer => {
            let container = sig.pop().unwrap_or_else(|| SemanticType::named("Nothing"));
            OpRequest::computer(d.op_name.clone(), sig, container)
        }
        OpKind::Inplace(i) => OpRequest::inplace(d.op_name.clone(), sig, i),
    }
}

fn rename_shape(shape: &Shape) -> Shape {
    Shape {
        kind: shape.kind,
        types: shape.types.iter().map(|t| t.rename_vars(CANDIDATE_SUFFIX)).collect(),
        names: shape.names.clone(),
    }
}

fn unify_shape(pattern: &Shape, target: &Shape, b: &mut Bindings) -> bool {
    pattern.kind == target.kind
        && pattern.types.len() == target.types.len()
        && pattern.types.iter().zip(&target.types).all(|(p, t)| unify(p, t, b))
}

/// Full match with cache, returning the resolved tree.
pub fn match_op(env: &OpEnvironment, req: &OpRequest) -> Result<Arc<InfoTree>, MatchError> {
    resolve(env, req).map(|r| r.tree.clone())
}

/// Full match returning the tree together with its instantiated callable.
pub fn resolve(env: &OpEnvironment, req: &OpRequest) -> Result<Arc<Resolved>, MatchError> {
    env.match_calls.fetch_add(1, Ordering::Relaxed);
    Resolver::new(env).resolve(req)
}

/// Runs only the direct routine.
pub fn match_direct(env: &OpEnvironment, req: &OpRequest) -> Result<Option<InfoTree>, MatchError> {
    req.validate().map_err(MatchError::InvalidRequest)?;
    Resolver::new(env).direct(req, &mut Misses::default())
}

/// Runs only the adaptation routine.
pub fn match_adapted(env: &OpEnvironment, req: &OpRequest) -> Result<Option<InfoTree>, MatchError> {
    req.validate().map_err(MatchError::InvalidRequest)?;
    Resolver::new(env).adapted(req, false, &mut Misses::default())
}

/// Runs the conversion routine; with `allow_adaptation` the combined
/// routine is tried as well.
pub fn match_converted(
    env: &OpEnvironment,
    req: &OpRequest,
    allow_adaptation: bool,
) -> Result<Option<InfoTree>, MatchError> {
    req.validate().map_err(MatchError::InvalidRequest)?;
    let mut r = Resolver::new(env);
    let mut misses = Misses::default();
    if let Some(t) = r.converted(req, &mut misses)? {
        return Ok(Some(t));
    }
    if allow_adaptation {
        return r.adapted(req, true, &mut misses);
    }
    Ok(None)
}
