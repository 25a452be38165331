//! The staged random construction of a partial automorphism, with
//! parameter schedules, closure-minimal enumeration, the finite/infinite
//! candidate choice rule and a reproducible event trace; plus orbit,
//! partial-path, bad-event, orbital and witness analysis of the runs.

pub mod analysis;
pub mod error;
pub mod params;
pub mod runner;
pub mod schedule;
pub mod stats;
pub mod trace;

pub use error::ProcessError;
pub use params::{CheckLevel, NSchedule, ProcessParams, Schedule};
pub use runner::{sample, PairStore, RunArtifact};
pub use schedule::OrbitSchedule;
pub use trace::{CandidateCount, Event, Mode, Trace};
