use std::collections::{HashMap, HashSet};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

use super::binding::BindingTable;
use super::descriptor::{parse_descriptors, DescriptorError};
use super::info::{OpInfo, Shape};
use super::reduce::{reduce_optional, ReductionError};
use crate::execution::Runtime;
use crate::matcher::MatchCache;
use crate::types::{DescriptorTable, TypeHierarchy};

/// Name shared by all adapter ops.
pub const ADAPT_OP: &str = "engine.adapt";
/// Environment variable listing extra descriptor locations.
pub const PATH_VAR: &str = "OPSFORGE_PATH";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {error}")]
    Descriptor {
        origin: String,
        #[source]
        error: DescriptorError,
    },
    #[error("{origin}: duplicate op {name} {signature} from {source_uri}")]
    Duplicate {
        origin: String,
        name: String,
        signature: String,
        source_uri: String,
    },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("unresolved source {uri:?} for {op}: zero-code wrapping requires a registered binding")]
    Unbound { uri: String, op: String },
    #[error("{op} ({uri}): {message}")]
    BadBinding { uri: String, op: String, message: String },
    #[error("adapter {uri}: {message}")]
    BadAdapter { uri: String, message: String },
}

#[derive(Debug, Clone)]
pub struct EnvOptions {
    pub cache_enabled: bool,
    /// Load the embedded builtin descriptor document.
    pub include_builtins: bool,
    /// Keep ops whose source has no binding (listing and help only; such ops
    /// never match).
    pub allow_unbound: bool,
    pub record_history: bool,
    pub pool_size: Option<usize>,
    pub hierarchy: TypeHierarchy,
    pub descriptor_table: DescriptorTable,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            cache_enabled: true,
            include_builtins: true,
            allow_unbound: false,
            record_history: true,
            pool_size: None,
            hierarchy: crate::stdlib::standard_hierarchy(),
            descriptor_table: crate::stdlib::standard_descriptions(),
        }
    }
}

/// An adapter op with its parsed source and target shapes.
#[derive(Debug, Clone)]
pub(crate) struct AdapterSpec {
    pub index: usize,
    pub from: Shape,
    pub to: Shape,
}

/// The sealed collection of ops plus everything needed to run them.
pub struct OpEnvironment {
    pub(crate) hierarchy: TypeHierarchy,
    pub(crate) infos: Vec<Arc<OpInfo>>,
    pub(crate) shapes: Vec<Shape>,
    pub(crate) bound: Vec<bool>,
    pub(crate) by_name: HashMap<String, Vec<usize>>,
    pub(crate) adapters: Vec<AdapterSpec>,
    pub(crate) bindings: BindingTable,
    pub(crate) content_hash: u64,
    pub(crate) key_prefix: String,
    pub(crate) cache_enabled: bool,
    pub(crate) cache: MatchCache,
    pub(crate) runtime: Arc<Runtime>,
    pub(crate) resolutions: AtomicU64,
    pub(crate) match_calls: AtomicU64,
}

impl std::fmt::Debug for OpEnvironment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpEnvironment")
            .field("infos", &self.infos.len())
            .field("content_hash", &format_args!("{:016x}", self.content_hash))
            .field("cache_enabled", &self.cache_enabled)
            .finish()
    }
}

impl OpEnvironment {
    /// Canonically ordered infos, including reduced variants.
    pub fn infos(&self) -> &[Arc<OpInfo>] {
        &self.infos
    }

    pub fn hierarchy(&self) -> &TypeHierarchy {
        &self.hierarchy
    }

    pub fn descriptor_table(&self) -> &DescriptorTable {
        &self.runtime.descriptors
    }

    pub fn runtime(&self) -> &Arc<Runtime> {
        &self.runtime
    }

    pub fn content_hash(&self) -> u64 {
        self.content_hash
    }

    pub fn cache_enabled(&self) -> bool {
        self.cache_enabled
    }

    pub fn cache(&self) -> &MatchCache {
        &self.cache
    }

    /// Number of full (non-cached) resolutions performed so far.
    pub fn resolution_count(&self) -> u64 {
        self.resolutions.load(Ordering::Relaxed)
    }

    /// Number of top-level match requests, cached or not.
    pub fn match_count(&self) -> u64 {
        self.match_calls.load(Ordering::Relaxed) + self.cache.fast_hits()
    }

    /// Indices of infos answering to `name`, canonical order.
    pub fn candidates(&self, name: &str) -> &[usize] {
        self.by_name.get(name).map_or(&[], Vec::as_slice)
    }

    /// Distinct canonical names, sorted.
    pub fn names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.infos.iter().map(|i| i.name()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    pub fn is_bound(&self, index: usize) -> bool {
        self.bound[index]
    }

    pub fn bindings(&self) -> &BindingTable {
        &self.bindings
    }
}

/// Sort key: priority desc, canonical name asc, source asc, then signature
/// and reduction depth so that the order is total.
fn canonical_cmp(a: &OpInfo, b: &OpInfo) -> std::cmp::Ordering {
    b.priority
        .total_cmp(&a.priority)
        .then_with(|| a.name().cmp(b.name()))
        .then_with(|| a.source.cmp(&b.source))
        .then_with(|| a.signature_key().cmp(&b.signature_key()))
        .then_with(|| a.removed_params().cmp(&b.removed_params()))
}

fn read_sources(paths: &[PathBuf]) -> Result<Vec<(String, String)>, RegistryError> {
    let mut out = Vec::new();
    for path in paths {
        let meta = std::fs::metadata(path).map_err(|source| RegistryError::Io {
            path: path.clone(),
            source,
        })?;
        let files = if meta.is_dir() {
            let rd = std::fs::read_dir(path).map_err(|source| RegistryError::Io {
                path: path.clone(),
                source,
            })?;
            let mut files: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("yaml" | "yml")))
                .collect();
            files.sort();
            files
        } else {
            vec![path.clone()]
        };
        for f in files {
            let text = std::fs::read_to_string(&f).map_err(|source| RegistryError::Io {
                path: f.clone(),
                source,
            })?;
            out.push((f.display().to_string(), text));
        }
    }
    Ok(out)
}

/// Parses all descriptor files, generates reduced variants, validates the
/// bindings and seals the result.
pub fn build_environment(
    paths: &[PathBuf],
    bindings: BindingTable,
    options: EnvOptions,
) -> Result<OpEnvironment, RegistryError> {
    let mut documents = Vec::new();
    if options.include_builtins {
        documents.push(("<builtin>".to_string(), crate::stdlib::BUILTIN_OPS_YAML.to_string()));
    }
    documents.extend(read_sources(paths)?);

    // loading the same document twice is a no-op
    let mut seen_docs = HashSet::new();
    let mut raw: Vec<(String, OpInfo)> = Vec::new();
    for (origin, text) in documents {
        let mut h = DefaultHasher::new();
        text.hash(&mut h);
        if !seen_docs.insert(h.finish()) {
            continue;
        }
        let infos = parse_descriptors(&text).map_err(|error| RegistryError::Descriptor {
            origin: origin.clone(),
            error,
        })?;
        raw.extend(infos.into_iter().map(|i| (origin.clone(), i)));
    }

    let mut keys = HashSet::new();
    for (origin, info) in &raw {
        let key = (info.name().to_string(), info.signature_key(), info.source.clone());
        if !keys.insert(key.clone()) {
            return Err(RegistryError::Duplicate {
                origin: origin.clone(),
                name: key.0,
                signature: key.1,
                source_uri: key.2,
            });
        }
    }

    let mut infos = Vec::new();
    for (_, info) in &raw {
        infos.extend(reduce_optional(info)?);
    }
    infos.sort_by(canonical_cmp);

    let mut bound = Vec::with_capacity(infos.len());
    for info in &infos {
        let is_adapter = info.name() == ADAPT_OP;
        match bindings.get(&info.source) {
            Some(b) => {
                b.check(info, is_adapter).map_err(|message| RegistryError::BadBinding {
                    uri: info.source.clone(),
                    op: info.name().to_string(),
                    message,
                })?;
                bound.push(true);
            }
            None if options.allow_unbound => bound.push(false),
            None => {
                return Err(RegistryError::Unbound {
                    uri: info.source.clone(),
                    op: info.name().to_string(),
                })
            }
        }
    }

    let infos: Vec<Arc<OpInfo>> = infos.into_iter().map(Arc::new).collect();
    let shapes: Vec<Shape> = infos.iter().map(|i| i.shape()).collect();

    let mut by_name: HashMap<String, Vec<usize>> = HashMap::new();
    for (idx, info) in infos.iter().enumerate() {
        for n in &info.names {
            let list = by_name.entry(n.clone()).or_default();
            if !list.contains(&idx) {
                list.push(idx);
            }
        }
    }

    let mut adapters = Vec::new();
    for &idx in by_name.get(ADAPT_OP).map_or(&[][..], Vec::as_slice) {
        adapters.push(parse_adapter(idx, &infos[idx])?);
    }

    let mut hasher = DefaultHasher::new();
    for info in &infos {
        format!("{info:?}").hash(&mut hasher);
    }
    for (sub, sup) in options.hierarchy.edges() {
        (sub, sup).hash(&mut hasher);
    }
    let content_hash = hasher.finish();

    let pool = match options.pool_size {
        Some(n) => crate::execution::ComputePool::new(n),
        None => crate::execution::ComputePool::with_available_parallelism(),
    };
    let runtime = Arc::new(Runtime::new(options.descriptor_table, pool, options.record_history));

    Ok(OpEnvironment {
        hierarchy: options.hierarchy,
        infos,
        shapes,
        bound,
        by_name,
        adapters,
        bindings,
        content_hash,
        key_prefix: format!("{content_hash:016x}"),
        cache_enabled: options.cache_enabled,
        cache: MatchCache::new(),
        runtime,
        resolutions: AtomicU64::new(0),
        match_calls: AtomicU64::new(0),
    })
}

fn parse_adapter(index: usize, info: &OpInfo) -> Result<AdapterSpec, RegistryError> {
    let bad = |message: &str| RegistryError::BadAdapter {
        uri: info.source.clone(),
        message: message.to_string(),
    };
    let shape = info.shape();
    if shape.kind != super::OpKind::Function || shape.types.len() != 2 {
        return Err(bad("adapters are functions from one op type to another"));
    }
    let from = Shape::from_functional_type(&shape.types[0]).ok_or_else(|| bad("input is not a functional type"))?;
    let to = Shape::from_functional_type(&shape.types[1]).ok_or_else(|| bad("output is not a functional type"))?;
    let mut from_vars = Vec::new();
    shape.types[0].variables(&mut from_vars);
    let mut to_vars = Vec::new();
    shape.types[1].variables(&mut to_vars);
    if let Some(v) = to_vars.iter().find(|v| !from_vars.contains(v)) {
        return Err(bad(&format!(
            "target variable '{v} does not occur in the source pattern"
        )));
    }
    Ok(AdapterSpec { index, from, to })
}

/// Resolves the descriptor search path: an explicit comma-separated list
/// wins over `OPSFORGE_PATH`, which wins over the shipped descriptor
/// directory.
pub fn search_path(explicit: Option<&str>) -> Vec<PathBuf> {
    if let Some(list) = explicit {
        return list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(PathBuf::from)
            .collect();
    }
    if let Some(var) = std::env::var_os(PATH_VAR) {
        return std::env::split_paths(&var)
            .filter(|p| !p.as_os_str().is_empty())
            .collect();
    }
    vec![default_descriptor_dir().to_path_buf()]
}

/// Directory holding the shipped `builtin-ops.yaml` and `legacy-ops.yaml`.
pub fn default_descriptor_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/descriptors"))
}
