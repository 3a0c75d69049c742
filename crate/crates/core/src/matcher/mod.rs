//! Request resolution: the four matching routines, dependency resolution
//! and the resolution cache.

mod cache;
mod engine;
mod request;
mod tree;

pub(crate) use cache::LocalResolved;
pub use cache::{MatchCache, Resolved};
pub use engine::{
    match_adapted, match_converted, match_direct, match_op, resolve, MatchError, MissReason, NearMiss, MAX_DEPTH,
};
pub use request::{OpRequest, RequestTarget};
pub use tree::{signature, InfoTree, ParamConversion, RoutineTag};
