//! Conformal tetrahedra, combinatorial curvature, and the curvature flow on
//! closed three-dimensional simplicial complexes, with numerical audits of
//! the identities and sign properties they satisfy.

pub mod analysis;
pub mod complex;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod tetra;
pub mod tolerance;

#[cfg(test)]
mod properties;

pub use complex::{
    parse_complex, preset, serialize_complex, MetricAssignment, Preset, SimplicialComplex,
    ValidationIssue, ValidationReport, VertexId,
};
pub use error::{Error, Result};
pub use flow::{
    curvature, run_flow, CurvatureState, FlowConfig, FlowSample, FlowTrace, LaplacianCoefficients,
    Termination,
};
pub use tetra::{ConformalTetra, JacobianBlock, TetraScalars};
