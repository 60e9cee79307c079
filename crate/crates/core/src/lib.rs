//! Structured graph families with all holes of length five or seven:
//! generators, forbidden-pattern detection, structural recognition with
//! verifiable certificates, bounded-width k-expressions, and exact coloring.

pub mod cliquewidth;
pub mod coloring;
pub mod families;
pub mod graph;
pub mod patterns;
pub mod recognizer;

pub use graph::{Graph, GraphError, Partition, VertexSet};
pub use patterns::{Embedding, ForbiddenProfile, Pattern};
pub use recognizer::{CertCore, Certificate, ClassifyOutcome};
