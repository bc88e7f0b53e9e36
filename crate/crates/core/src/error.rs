use crate::complex::{ValidationReport, VertexId};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("vertex {vertex}: weight {weight} is not a positive finite number")]
    NonPositiveWeight { vertex: VertexId, weight: f64 },

    #[error("weight {weight} in slot {slot} is not a positive finite number")]
    NonPositiveSlot { slot: usize, weight: f64 },

    #[error("vertex {0} is not part of the complex")]
    UnknownVertex(VertexId),

    #[error("invalid complex:\n{0}")]
    InvalidComplex(ValidationReport),

    #[error("unknown preset `{0}` (expected double_tetrahedron or boundary_4_simplex)")]
    UnknownPreset(String),

    #[error("degenerate tetrahedron with weights {weights:?}: Q = {q:e}")]
    Degenerate { weights: [f64; 4], q: f64 },

    #[error("tetrahedron #{index} {vertices:?} is degenerate: Q = {q:e}")]
    DegenerateTetrahedron {
        index: usize,
        vertices: [VertexId; 4],
        q: f64,
    },

    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),

    #[error("probe direction never reaches Q = 0")]
    NeverDegenerates,

    #[error("weight in slot {slot} collapses to zero before Q reaches 0")]
    WeightCollapse { slot: usize },
}
