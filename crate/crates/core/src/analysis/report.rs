//! The full audit behind the `check` command.
//!
//! Every claim is evaluated over a seeded random sample of conformal
//! tetrahedra and, where it makes sense, on the complex under audit. A claim
//! fails with the offending state attached as a [`Witness`].

use std::f64::consts::TAU;

use serde::Serialize;

use super::operator::{
    classify_operator, growth_bound_violation, max_principle_along_trace, monotonicity_check,
};
use super::probe::degeneration_probe;
use super::sampling::random_tetrahedra;
use super::scan::{
    angle_monotonicity_scan, derivative_fidelity, girard_consistency, omega_sign_audit,
    volume_identity_error,
};
use super::spectrum::{hessian_spectrum, minor_determinant_report};
use crate::complex::{MetricAssignment, Preset, SimplicialComplex, VertexId};
use crate::error::Result;
use crate::flow::{assemble_laplacian, curvature, curvature_rhs, run_flow, tetra_at, FlowConfig};
use crate::tetra::{ConformalTetra, TetraScalars};
use crate::tolerance::*;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 42,
        }
    }
}

pub struct AuditInput {
    pub label: String,
    pub complex: SimplicialComplex,
    pub metric: MetricAssignment,
}

impl AuditInput {
    /// The two presets started from `(1,1,1,2)` and `(1,1,1,1,3)`.
    pub fn preset_defaults() -> Vec<AuditInput> {
        [
            (Preset::DoubleTetrahedron, 4, 2.0),
            (Preset::Boundary4Simplex, 5, 3.0),
        ]
        .into_iter()
        .map(|(p, v, w)| {
            let (complex, mut metric) = p.build();
            metric.set(v, w).expect("preset vertex");
            AuditInput {
                label: format!("{} with r{v} = {w}", p.name()),
                complex,
                metric,
            }
        })
        .collect()
    }
}

/// State that exhibits the worst case of a claim.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub weights: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<[VertexId; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalars: Option<TetraScalars>,
}

impl Witness {
    fn of(t: &ConformalTetra) -> Self {
        Self {
            weights: t.weights(),
            vertices: None,
            scalars: t.scalars().ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimResult {
    pub claim: String,
    /// Label of the audited input, for claims about a specific complex.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub passed: bool,
    /// Worst observed value of the claim's error measure.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Facts about the audited state that are reported but not claims.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputObservations {
    pub label: String,
    pub vertices: Vec<VertexId>,
    pub weights: Vec<f64>,
    pub curvature: Vec<f64>,
    pub parabolic: bool,
    pub negative_edges: Vec<[VertexId; 2]>,
    pub parabolic_like_for_k: bool,
    pub monotone: bool,
    pub negative_omega: Vec<NegativeOmega>,
    pub eigenvalues: Vec<[f64; 4]>,
    pub preset_type: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegativeOmega {
    pub tetrahedron: usize,
    pub from: VertexId,
    pub to: VertexId,
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub seed: u64,
    pub samples: usize,
    pub all_passed: bool,
    /// Failed claims, suffixed with `@label` for input-specific claims.
    pub failed: Vec<String>,
    pub claims: Vec<ClaimResult>,
    pub inputs: Vec<InputObservations>,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Tracks the worst value of an error measure over a sample.
struct Worst {
    value: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            witness: None,
        }
    }

    fn offer(&mut self, value: f64, t: &ConformalTetra) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.witness = Some(Witness::of(t));
        }
    }

    fn at_most(self, claim: &str, tolerance: f64, detail: String) -> ClaimResult {
        ClaimResult {
            claim: claim.to_string(),
            input: None,
            passed: self.value <= tolerance,
            worst: self.value,
            tolerance,
            detail,
            witness: self.witness,
        }
    }
}

fn boolean_claim(claim: &str, passed: bool, detail: String) -> ClaimResult {
    ClaimResult {
        claim: claim.to_string(),
        input: None,
        passed,
        worst: if passed { 0.0 } else { 1.0 },
        tolerance: 0.0,
        detail,
        witness: None,
    }
}

fn count_claim(
    claim: &str,
    violations: usize,
    checked: usize,
    witness: Option<Witness>,
) -> ClaimResult {
    ClaimResult {
        claim: claim.to_string(),
        input: None,
        passed: violations == 0,
        worst: violations as f64,
        tolerance: 0.0,
        detail: format!("{violations} violations over {checked} checks"),
        witness,
    }
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn scale_defect(t: &ConformalTetra) -> Result<f64> {
    let alpha = t.solid_angles()?;
    let omega = t.omega_block()?.omega;
    let alpha_scale = max_abs(alpha);
    let omega_scale = max_abs(omega.iter().flatten().copied());
    let mut worst = 0.0f64;
    for lambda in [1e-3, 1.0, 1e3] {
        let s = t.scaled(lambda)?;
        let sa = s.solid_angles()?;
        let so = s.omega_block()?.omega;
        worst = worst.max(max_abs((0..4).map(|a| sa[a] - alpha[a])) / alpha_scale);
        worst = worst
            .max(max_abs((0..16).map(|n| so[n / 4][n % 4] - omega[n / 4][n % 4])) / omega_scale);
    }
    Ok(worst)
}

fn sample_claims(config: &AuditConfig, claims: &mut Vec<ClaimResult>) -> Result<()> {
    let tets = random_tetrahedra(config.samples, config.seed);
    let n = tets.len();
    let mut fidelity = Worst::new();
    let mut schlafli = Worst::new();
    let mut symmetry = Worst::new();
    let mut diagonal = Worst::new();
    let mut girard = Worst::new();
    let mut volume = Worst::new();
    let mut angle_sum = Worst::new();
    let mut null_eigen = Worst::new();
    let mut negative_eigen = Worst::new();
    let mut null_angle = Worst::new();
    let mut minors = Worst::new();
    let mut full_det = Worst::new();
    let mut scale = Worst::new();
    let mut lemma = (0usize, None);
    let mut min_slot = (0usize, None);
    let mut negatives = 0usize;

    for t in &tets {
        let r = t.weights();
        let block = t.omega_block()?;
        fidelity.offer(derivative_fidelity(t)?.worst(), t);
        schlafli.offer(block.max_row_residual(&r), t);
        symmetry.offer(block.symmetry_defect(), t);
        // the diagonal entries must be negative: report the largest
        // diagonal relative to the block scale (a positive value fails)
        let block_scale = max_abs(block.dalpha.iter().flatten().copied());
        let diag = (0..4)
            .map(|a| block.dalpha[a][a])
            .fold(f64::NEG_INFINITY, f64::max);
        diagonal.offer(diag / block_scale + 1.0, t);
        girard.offer(girard_consistency(t)?, t);
        volume.offer(volume_identity_error(t)?, t);
        let sum: f64 = t.solid_angles()?.iter().sum();
        angle_sum.offer(sum - TAU, t);

        let spectrum = hessian_spectrum(t)?;
        let rho = spectrum.spectral_radius;
        null_eigen.offer(spectrum.eigenvalues[3].abs() / rho, t);
        negative_eigen.offer(spectrum.eigenvalues[2] / rho + 1.0, t);
        null_angle.offer(spectrum.null_vector_angle, t);
        let minor = minor_determinant_report(t)?;
        minors.offer(minor.worst_relative_error, t);
        full_det.offer(minor.full_determinant_ratio, t);

        let signs = omega_sign_audit(t)?;
        negatives += signs.negative_pairs.len();
        if !signs.lemma_violations.is_empty() {
            lemma.0 += signs.lemma_violations.len();
            lemma.1.get_or_insert_with(|| Witness::of(t));
        }
        if !signs.min_slot_violations.is_empty() {
            min_slot.0 += signs.min_slot_violations.len();
            min_slot.1.get_or_insert_with(|| Witness::of(t));
        }
        scale.offer(scale_defect(t)?, t);
    }

    let over = |what: &str| format!("{what} over {n} random tetrahedra");
    claims.push(fidelity.at_most(
        "derivative_fidelity",
        DERIVATIVE_FIDELITY,
        over("closed-form solid and dihedral angle derivatives vs central differences"),
    ));
    claims.push(schlafli.at_most(
        "schlafli_row_identity",
        SCHLAFLI,
        over("relative residual of sum_b (d alpha_a / d r_b) r_b"),
    ));
    claims.push(symmetry.at_most(
        "jacobian_symmetry",
        SCHLAFLI,
        over("relative asymmetry of d alpha_a / d r_b"),
    ));
    claims.push(diagonal.at_most(
        "negative_diagonal",
        1.0 - 1e-15,
        over("1 + max_a (d alpha_a / d r_a) / max |entry|; below 1 means every diagonal entry is negative"),
    ));
    claims.push(girard.at_most(
        "solid_angle_consistency",
        GIRARD,
        over("dihedral-sum solid angle vs triple-product evaluation (radians)"),
    ));
    claims.push(volume.at_most(
        "volume_identity",
        VOLUME_IDENTITY,
        over("relative gap between Cayley-Menger volume and the two-face formula"),
    ));
    claims.push(angle_sum.at_most(
        "solid_angle_sum_below_2pi",
        0.0,
        over("max (sum of solid angles - 2 pi)"),
    ));
    let mut psd = null_eigen.at_most(
        "null_eigenvalue",
        NULL_EIGENVALUE,
        over("|largest eigenvalue| / spectral radius"),
    );
    psd.passed &= psd.worst.is_finite();
    claims.push(psd);
    claims.push(negative_eigen.at_most(
        "rank_three_negative",
        1.0 - NEGATIVE_EIGENVALUE,
        over("1 + (second largest eigenvalue) / spectral radius; below 1 means three strictly negative eigenvalues"),
    ));
    claims.push(null_angle.at_most(
        "null_vector_alignment",
        NULL_VECTOR_ANGLE,
        over("angle between the null eigenvector and the weight vector (radians)"),
    ));
    claims.push(minors.at_most(
        "minor_determinants",
        MINOR_DETERMINANT,
        over("worst relative error of the 16 minor determinants"),
    ));
    claims.push(full_det.at_most("singular_jacobian", 1e-12, over("|det| / max|entry|^4")));
    claims.push(count_claim(
        "negative_omega_needs_large_weights",
        lemma.0,
        12 * n,
        lemma.1,
    ));
    let mut min_claim = count_claim(
        "minimum_weight_omega_nonnegative",
        min_slot.0,
        6 * n,
        min_slot.1,
    );
    min_claim.detail.push_str(&format!(
        "; {negatives} negative ordered pairs seen in total"
    ));
    claims.push(min_claim);
    claims.push(scale.at_most(
        "scale_invariance",
        SCALE_INVARIANCE,
        over("relative change of solid angles and omega under scaling by 1e-3, 1, 1e3"),
    ));

    let scan_samples = 10 * config.samples;
    let scan = angle_monotonicity_scan(scan_samples, config.seed);
    let scan_witness = scan
        .first_violation
        .and_then(|r| ConformalTetra::new(r).ok())
        .map(|t| Witness::of(&t));
    claims.push(count_claim(
        "solid_angle_monotonicity",
        scan.violations,
        6 * scan_samples,
        scan_witness.clone(),
    ));
    claims.push(count_claim(
        "face_area_opposite_solid_angle",
        scan.face_area_violations,
        scan_samples,
        scan_witness,
    ));

    claims.push(probe_claim(&tets)?);
    Ok(())
}

fn probe_claim(tets: &[ConformalTetra]) -> Result<ClaimResult> {
    let reference = ConformalTetra::new([1.0, 1.0, 1.0, 0.3])?;
    let mut worst = Worst::new();
    let mut trends_ok = true;
    let mut checked = 0;
    for t in std::iter::once(&reference).chain(tets.iter().take(100)) {
        let mut direction = [0.0; 4];
        direction[t.min_slot()] = -1.0;
        let report = degeneration_probe(t, direction)?;
        let gap = (TAU - report.min_slot_angle).max(report.max_other_angle);
        worst.offer(gap, t);
        trends_ok &= report.monotone_trends;
        checked += 1;
    }
    let mut claim = worst.at_most(
        "degeneration_limit",
        DEGENERATE_LIMIT,
        format!(
            "distance of solid angles from 2 pi (minimum slot) and 0 (others) at relative Q = 1e-10 \
             over {checked} probes shrinking the minimum weight; monotone trends: {trends_ok}"
        ),
    );
    claim.passed &= trends_ok;
    Ok(claim)
}

fn input_claims(input: &AuditInput, claims: &mut Vec<ClaimResult>) -> Result<InputObservations> {
    let c = &input.complex;
    let m = &input.metric;
    let r = m.dense(c)?;
    let state = curvature(c, m)?;
    let class = classify_operator(c, m)?;
    let mono = monotonicity_check(c, m)?;
    let laplacian = assemble_laplacian(c, m)?;

    let mut spectrum_worst = Worst::new();
    let mut minors = Worst::new();
    let mut sign_violations = (0usize, None);
    let mut negative_omega = Vec::new();
    let mut eigenvalues = Vec::new();
    for (ti, verts) in c.tetrahedra().iter().enumerate() {
        let t = tetra_at(c, &r, ti)?;
        let spectrum = hessian_spectrum(&t)?;
        let rho = spectrum.spectral_radius;
        let strictly_negative = spectrum.eigenvalues[2] < -NEGATIVE_EIGENVALUE * rho;
        let defect = (spectrum.eigenvalues[3].abs() / rho / NULL_EIGENVALUE)
            .max(spectrum.null_vector_angle / NULL_VECTOR_ANGLE)
            .max(if strictly_negative {
                0.0
            } else {
                f64::INFINITY
            });
        spectrum_worst.offer(defect, &t);
        eigenvalues.push(spectrum.eigenvalues);
        minors.offer(spectrum.minor_check, &t);

        let signs = omega_sign_audit(&t)?;
        if !signs.is_consistent() {
            sign_violations.0 += signs.lemma_violations.len() + signs.min_slot_violations.len();
            sign_violations.1.get_or_insert_with(|| Witness {
                vertices: Some(*verts),
                ..Witness::of(&t)
            });
        }
        for [a, b] in signs.negative_pairs {
            negative_omega.push(NegativeOmega {
                tetrahedron: ti,
                from: verts[a],
                to: verts[b],
                omega: signs.omega[a][b],
            });
        }
    }
    let ntets = c.tetrahedra().len();
    claims.push(spectrum_worst.at_most(
        "input_spectrum",
        1.0,
        format!("normalized spectrum defect over the {ntets} tetrahedra of {}; at most 1 means negative semidefinite of rank 3 with null vector along the weights", input.label),
    ));
    claims.push(minors.at_most(
        "input_minor_determinants",
        MINOR_DETERMINANT,
        format!(
            "worst relative minor error over the {ntets} tetrahedra of {}",
            input.label
        ),
    ));
    claims.push(count_claim(
        "input_omega_signs",
        sign_violations.0,
        12 * ntets,
        sign_violations.1,
    ));

    claims.push(boolean_claim(
        "parabolic_implies_parabolic_like",
        !class.parabolic || class.parabolic_like_for_k,
        format!(
            "parabolic = {}, parabolic-like for K = {} (rate at max {:e}, at min {:e})",
            class.parabolic, class.parabolic_like_for_k, class.rate_at_max, class.rate_at_min
        ),
    ));
    claims.push(boolean_claim(
        "monotonicity_implies_parabolic_like",
        !mono.all || class.parabolic_like_for_k,
        format!(
            "monotone = {}, parabolic-like for K = {}",
            mono.all, class.parabolic_like_for_k
        ),
    ));
    let adjoint = laplacian.self_adjointness_defect();
    claims.push(ClaimResult {
        input: None,
        claim: "laplacian_self_adjoint".into(),
        passed: adjoint <= SCHLAFLI,
        worst: adjoint,
        tolerance: SCHLAFLI,
        detail: "relative defect of r_i a_ij = r_j a_ji".into(),
        witness: None,
    });
    let rhs = curvature_rhs(c, m)?;
    let applied = laplacian.apply(&state.k);
    let scale = max_abs(applied.iter().copied()).max(max_abs(state.k.iter().copied()));
    let gap = max_abs(rhs.iter().zip(&applied).map(|(a, b)| a - b)) / scale;
    claims.push(ClaimResult {
        input: None,
        claim: "curvature_rate_is_laplacian".into(),
        passed: gap <= VOLUME_IDENTITY,
        worst: gap,
        tolerance: VOLUME_IDENTITY,
        detail: "dK/dt from the chain rule vs the assembled Laplacian applied to K".into(),
        witness: None,
    });

    let preset_type = Preset::identify(c);
    if let Some(p) = preset_type {
        claims.push(boolean_claim(
            "preset_monotonicity",
            mono.all,
            format!("weight/curvature monotonicity on a {} complex", p.name()),
        ));
        preset_flow_claims(input, claims)?;
    }

    Ok(InputObservations {
        label: input.label.clone(),
        vertices: c.vertices().to_vec(),
        weights: r,
        curvature: state.k,
        parabolic: class.parabolic,
        negative_edges: class.negative_edges,
        parabolic_like_for_k: class.parabolic_like_for_k,
        monotone: mono.all,
        negative_omega,
        eigenvalues,
        preset_type: preset_type.map(|p| p.name().to_string()),
    })
}

fn preset_flow_claims(input: &AuditInput, claims: &mut Vec<ClaimResult>) -> Result<()> {
    let config = FlowConfig {
        t_end: 2.0,
        ..FlowConfig::default()
    };
    let trace = run_flow(&input.complex, &input.metric, &config)?;
    let audit = max_principle_along_trace(&trace);
    let worst = audit.worst_max_increase.max(audit.worst_min_decrease);
    claims.push(ClaimResult {
        input: None,
        claim: "flow_maximum_principle".into(),
        passed: audit.max_non_increasing && audit.min_non_decreasing && audit.sign_preserved,
        worst,
        tolerance: MAX_PRINCIPLE_STEP,
        detail: format!(
            "largest step increase of max K or decrease of min K over {} samples to t = {} ({})",
            trace.samples.len(),
            trace.last().t,
            trace.termination.as_str()
        ),
        witness: None,
    });
    claims.push(boolean_claim(
        "flow_monotonicity",
        audit.monotone_throughout,
        "weight/curvature monotonicity at every trace sample".into(),
    ));
    let mut like = true;
    for s in &trace.samples {
        let m = MetricAssignment::from_dense(&input.complex, &s.r)?;
        like &= classify_operator(&input.complex, &m)?.parabolic_like_for_k;
    }
    claims.push(boolean_claim(
        "flow_parabolic_like",
        like,
        "curvature rate sign at argmax/argmin K at every trace sample".into(),
    ));
    let growth = growth_bound_violation(&trace);
    claims.push(ClaimResult {
        input: None,
        claim: "flow_growth_bounds".into(),
        passed: growth <= GROWTH_BOUND,
        worst: growth,
        tolerance: GROWTH_BOUND,
        detail: "relative excursion outside r(0) exp(-Ct) .. r(0) exp(Ct)".into(),
        witness: None,
    });
    Ok(())
}

pub fn run_audit(inputs: &[AuditInput], config: &AuditConfig) -> Result<AuditReport> {
    let mut claims = Vec::new();
    sample_claims(config, &mut claims)?;
    let mut observations = Vec::with_capacity(inputs.len());
    for input in inputs {
        let first = claims.len();
        observations.push(input_claims(input, &mut claims)?);
        for claim in &mut claims[first..] {
            claim.input = Some(input.label.clone());
        }
    }
    let failed: Vec<String> = claims
        .iter()
        .filter(|c| !c.passed)
        .map(|c| match &c.input {
            Some(label) => format!("{}@{label}", c.claim),
            None => c.claim.clone(),
        })
        .collect();
    Ok(AuditReport {
        seed: config.seed,
        samples: config.samples,
        all_passed: failed.is_empty(),
        failed,
        claims,
        inputs: observations,
    })
}
