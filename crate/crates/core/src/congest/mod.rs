//! Round-accurate CONGEST simulation of the distributed construction.

mod distributed;
mod engine;
mod protocols;

pub use distributed::{
    identify_large_parts, local_sampling, run_known_diameter, run_with_guessing, Accepted, BfsOutcome,
    DistributedResult, GuessFailure, GuessRecord, NodeState, Numbering, PartTree, SimConfig, Simulator,
};
pub use engine::{Ctx, Engine, EngineConfig, Envelope, NodeProgram, Payload, Trace, TraceEntry};
pub use protocols::{TreePorts, MAX_WORDS};
