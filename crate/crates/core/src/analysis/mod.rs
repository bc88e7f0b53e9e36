//! Numerical audits of the identities, sign lemmas, and maximum principle
//! satisfied by conformal tetrahedra and the curvature flow.

mod operator;
mod probe;
mod report;
mod sampling;
mod scan;
mod spectrum;

pub use operator::{
    classify_operator, growth_bound_violation, max_principle_along_trace, monotone_pair,
    monotone_state, monotonicity_check, MonotonicityReport, OperatorClassification, TraceAudit,
};
pub use probe::{degeneration_probe, ProbeLevel, ProbeReport, PROBE_LEVELS};
pub use report::{run_audit, AuditConfig, AuditInput, AuditReport, ClaimResult, Witness};
pub use sampling::{random_tetrahedra, TetraSampler};
pub use scan::{
    angle_monotonicity_scan, derivative_fidelity, girard_consistency, omega_sign_audit,
    volume_identity_error, AngleScanReport, FidelityReport, OmegaSignReport,
};
pub use spectrum::{
    hessian_spectrum, minor_closed_form, minor_determinant_check, minor_determinant_report,
    MinorReport, SpectrumReport,
};
