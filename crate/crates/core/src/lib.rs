//! A typed op engine: ops are declared in YAML descriptors, bound to Rust
//! bodies, and requested by name and argument types. The matcher picks the
//! best implementation, adapting kinds and converting arguments when no
//! exact match exists.
//!
//! ```
//! use opsforge::stdlib;
//!
//! let env = stdlib::environment().unwrap();
//! let sum = env.op("math.add").input(2).input(3).apply().unwrap();
//! assert_eq!(sum.as_integer(), Some(5));
//! ```

pub mod bench;
pub mod execution;
pub mod indexer;
pub mod matcher;
pub mod registry;
pub mod stdlib;
pub mod types;

pub use execution::{Arg, ExecError, OpBuilder, OpHandle};
pub use matcher::{InfoTree, MatchError, OpRequest, RoutineTag};
pub use registry::{build_environment, BindingTable, EnvOptions, OpEnvironment, OpInfo, OpKind};
pub use types::{Image, SemanticType, Value};
