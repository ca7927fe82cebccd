//! Randomized low-congestion shortcuts for constant-diameter graphs.
//!
//! * [`graph`]: CSR graph, BFS, exact diameter, generators, partitions.
//! * [`shortcut`]: centralized construction (even and odd diameter) and
//!   congestion/dilation measurement.
//! * [`tree_lab`]: layered auxiliary graph, sampled BFS tree and walk search.
//! * [`congest`]: round-accurate CONGEST engine and the distributed
//!   construction with diameter guessing.
//! * [`mst`]: Borůvka MST over shortcuts with a Kruskal oracle.
//! * [`experiment`]: sweeps, CSV reports and exponent fitting.

pub mod error;
pub mod graph;
pub mod par;
pub mod shortcut;
pub mod tree_lab;
pub mod congest;
pub mod mst;
pub mod experiment;

pub use error::{Error, Result};
