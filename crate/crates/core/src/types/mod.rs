//! Semantic types, the subtype hierarchy, runtime values and type
//! descriptions.

mod describe;
mod hierarchy;
pub mod json;
mod semantic;
mod value;

pub use describe::DescriptorTable;
pub use hierarchy::{unify, HierarchyError, TypeHierarchy};
pub use semantic::{is_identifier, Bindings, SemanticType, TypeParseError};
pub use value::{
    Image, Payload, ShapeError, Value, ValueId, BOOLEAN, BYTE_ARRAY, IMAGE_F64, IMAGE_U8, INTEGER, REAL, REAL_ARRAY,
    TEXT, TYPE,
};

/// Describes `t` through the given table.
pub fn describe_type(t: &SemanticType, table: &DescriptorTable) -> String {
    table.describe(t)
}
