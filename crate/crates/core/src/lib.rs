//! Lazily enumerated countable ultrahomogeneous structures, partial
//! automorphisms, and the group-theoretic algebraic closure operator.
//!
//! The built-in structures are the pure set, the Rado graph, the rational
//! order, the countable atomless Boolean algebra and the integer line with
//! distance relations. Each one fixes a concrete enumeration of its domain,
//! so "the least n points" and "the k-th candidate" are well defined and
//! reproducible.

pub mod candidates;
pub mod clopen;
pub mod error;
pub mod pauto;
pub mod point;
pub mod rado;
pub mod sbnode;
pub mod structure;
pub mod userdef;
pub mod util;

pub use candidates::{Candidates, Verdict};
pub use clopen::{Clopen, Status};
pub use error::CoreError;
pub use pauto::PartialAutomorphism;
pub use point::Point;
pub use sbnode::SbNode;
pub use structure::{RunContext, Structure, StructureKind};
