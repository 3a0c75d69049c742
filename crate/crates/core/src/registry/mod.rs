//! Descriptor parsing, optional-parameter reduction, body bindings and the
//! sealed op environment.

mod binding;
mod descriptor;
mod environment;
mod info;
mod reduce;

pub use binding::{AdapterFactory, BindError, Binding, BindingTable, OpFactory};
pub use descriptor::{emit_descriptors, parse_descriptors, DescriptorError};
pub use environment::{
    build_environment, default_descriptor_dir, search_path, EnvOptions, OpEnvironment, RegistryError, ADAPT_OP,
    PATH_VAR,
};
pub use info::{is_op_name, DependencySpec, IoRole, OpInfo, OpKind, ParamSpec, Shape};
pub use reduce::{reduce_optional, ReductionError, REDUCTION_PENALTY};
