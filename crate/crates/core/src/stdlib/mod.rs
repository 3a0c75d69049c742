//! Built-in op bodies and their descriptors.

mod adapt;
pub mod benchmark;
pub mod data;
pub mod filter;
pub mod legacy;
mod math;
pub mod transform;
pub mod wrap;

use crate::registry::{
    build_environment, default_descriptor_dir, BindingTable, EnvOptions, OpEnvironment, RegistryError,
};
use crate::types::{DescriptorTable, TypeHierarchy};

/// Descriptor document for the built-in ops, always loaded unless disabled.
pub const BUILTIN_OPS_YAML: &str = include_str!("../../descriptors/builtin-ops.yaml");
/// Descriptor document exposing the legacy functions.
pub const LEGACY_OPS_YAML: &str = include_str!("../../descriptors/legacy-ops.yaml");

pub fn standard_hierarchy() -> TypeHierarchy {
    let mut h = TypeHierarchy::new();
    for (sub, sup) in [
        ("ImageU8", "Image"),
        ("ImageF64", "Image"),
        ("ByteArray", "Array"),
        ("RealArray", "Array"),
        ("Integer", "Number"),
        ("Real", "Number"),
    ] {
        h.add_edge(sub, sup).expect("acyclic standard hierarchy");
    }
    h
}

pub fn standard_descriptions() -> DescriptorTable {
    [
        ("ImageU8", "image"),
        ("ImageF64", "image"),
        ("Image", "image"),
        ("Integer", "integer"),
        ("Real", "number"),
        ("Number", "number"),
        ("Boolean", "boolean"),
        ("Text", "text"),
        ("ByteArray", "array"),
        ("RealArray", "array"),
        ("Array", "array"),
    ]
    .into_iter()
    .collect()
}

/// Bindings for every built-in and legacy source URI.
pub fn bindings() -> BindingTable {
    let mut t = BindingTable::new();
    math::register(&mut t);
    data::register(&mut t);
    adapt::register(&mut t);
    filter::register(&mut t);
    transform::register(&mut t);
    benchmark::register(&mut t);
    t.insert("legacy:stats/sum", wrap::function1(legacy::sum));
    t.insert("legacy:array/reverse", wrap::function1(legacy::reverse));
    t.insert("legacy:image/transpose", wrap::function1(legacy::transpose));
    t
}

/// Built-ins plus the shipped descriptor directory, default options.
pub fn environment() -> Result<OpEnvironment, RegistryError> {
    environment_with(EnvOptions::default())
}

pub fn environment_with(options: EnvOptions) -> Result<OpEnvironment, RegistryError> {
    build_environment(&[default_descriptor_dir().to_path_buf()], bindings(), options)
}
