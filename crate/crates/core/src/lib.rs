//! Voting trees over tournaments: construction, evaluation, serialization
//! and exhaustive or sampled verification of winner guarantees.

pub mod constructions;
pub mod f3;
pub mod sexp;
pub mod tournament;
pub mod tree;
pub mod verify;

pub use tournament::{Candidate, Direction, PmClass, PmSpec, ScaleGuard, Tournament};
pub use tree::{Bindings, Forest, Label, NodeId, Program, VotingTree};
