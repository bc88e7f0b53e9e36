use serde::Serialize;

use crate::complex::{MetricAssignment, SimplicialComplex, VertexId};
use crate::error::Result;
use crate::flow::{assemble_laplacian_dense, curvature_dense, curvature_rhs_dense, FlowTrace};
use crate::tolerance::{IFF_CONCLUSION, IFF_HYPOTHESIS};

/// Sign structure of the curvature Laplacian at one state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorClassification {
    /// Every coefficient `a_ij` is nonnegative.
    pub parabolic: bool,
    pub negative_edges: Vec<[VertexId; 2]>,
    /// `dK/dt ≤ 0` at every maximum-curvature vertex and `≥ 0` at every minimum.
    pub parabolic_like_for_k: bool,
    /// Largest `dK/dt` over the argmax-K vertices.
    pub rate_at_max: f64,
    /// Smallest `dK/dt` over the argmin-K vertices.
    pub rate_at_min: f64,
}

pub fn classify_operator(
    complex: &SimplicialComplex,
    metric: &MetricAssignment,
) -> Result<OperatorClassification> {
    let r = metric.dense(complex)?;
    let laplacian = assemble_laplacian_dense(complex, &r)?;
    let k = curvature_dense(complex, &r)?.k;
    let rate = curvature_rhs_dense(complex, &r, &k)?;

    let k_max = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k_min = k.iter().copied().fold(f64::INFINITY, f64::min);
    let mut rate_at_max = f64::NEG_INFINITY;
    let mut rate_at_min = f64::INFINITY;
    for (i, &ki) in k.iter().enumerate() {
        if k_max - ki <= IFF_CONCLUSION {
            rate_at_max = rate_at_max.max(rate[i]);
        }
        if ki - k_min <= IFF_CONCLUSION {
            rate_at_min = rate_at_min.min(rate[i]);
        }
    }
    let negative_edges = laplacian.negative_edges();
    Ok(OperatorClassification {
        parabolic: negative_edges.is_empty(),
        negative_edges,
        parabolic_like_for_k: rate_at_max <= IFF_CONCLUSION && rate_at_min >= -IFF_CONCLUSION,
        rate_at_max,
        rate_at_min,
    })
}

/// The biconditional `x_i ≤ x_j ⟺ y_i ≤ y_j` with dead bands: near-equal
/// hypotheses demand near-equal conclusions, otherwise the orderings agree.
pub fn monotone_pair(xi: f64, xj: f64, yi: f64, yj: f64) -> bool {
    let dx = xj - xi;
    let dy = yj - yi;
    if dx.abs() <= IFF_HYPOTHESIS * xi.abs().max(xj.abs()) {
        dy.abs() <= IFF_CONCLUSION
    } else {
        dx.signum() * dy >= -IFF_CONCLUSION
    }
}

fn tetra_monotone(local: &[usize; 4], r: &[f64], k: &[f64]) -> bool {
    (0..4).all(|a| {
        ((a + 1)..4).all(|b| {
            let (i, j) = (local[a], local[b]);
            monotone_pair(r[i], r[j], k[i], k[j])
        })
    })
}

/// Whether every tetrahedron satisfies `r_i ≤ r_j ⟺ K_i ≤ K_j`.
pub fn monotone_state(complex: &SimplicialComplex, r: &[f64], k: &[f64]) -> bool {
    complex
        .local_tetrahedra()
        .iter()
        .all(|local| tetra_monotone(local, r, k))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub per_tet: Vec<bool>,
    pub all: bool,
}

pub fn monotonicity_check(
    complex: &SimplicialComplex,
    metric: &MetricAssignment,
) -> Result<MonotonicityReport> {
    let r = metric.dense(complex)?;
    let k = curvature_dense(complex, &r)?.k;
    let per_tet: Vec<bool> = complex
        .local_tetrahedra()
        .iter()
        .map(|local| tetra_monotone(local, &r, &k))
        .collect();
    Ok(MonotonicityReport {
        all: per_tet.iter().all(|&m| m),
        per_tet,
    })
}

/// Maximum-principle bookkeeping over the samples of a trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceAudit {
    /// Largest sample-to-sample increase of `max K` (≤ 0 when non-increasing).
    pub worst_max_increase: f64,
    /// Largest sample-to-sample decrease of `min K`.
    pub worst_min_decrease: f64,
    pub monotone_throughout: bool,
    pub max_non_increasing: bool,
    pub min_non_decreasing: bool,
    /// Nonnegative initial curvature stays nonnegative (vacuous otherwise).
    pub sign_preserved: bool,
}

pub fn max_principle_along_trace(trace: &FlowTrace) -> TraceAudit {
    let mut worst_max_increase = f64::NEG_INFINITY;
    let mut worst_min_decrease = f64::NEG_INFINITY;
    for w in trace.samples.windows(2) {
        worst_max_increase = worst_max_increase.max(w[1].k_max() - w[0].k_max());
        worst_min_decrease = worst_min_decrease.max(w[0].k_min() - w[1].k_min());
    }
    let first = &trace.samples[0];
    let sign_preserved = if first.k_min() >= 0.0 {
        trace.samples.iter().all(|s| s.k_min() >= -IFF_CONCLUSION)
    } else if first.k_max() <= 0.0 {
        trace.samples.iter().all(|s| s.k_max() <= IFF_CONCLUSION)
    } else {
        true
    };
    TraceAudit {
        max_non_increasing: worst_max_increase <= crate::tolerance::MAX_PRINCIPLE_STEP,
        min_non_decreasing: worst_min_decrease <= crate::tolerance::MAX_PRINCIPLE_STEP,
        worst_max_increase,
        worst_min_decrease,
        monotone_throughout: trace.samples.iter().all(|s| s.monotone),
        sign_preserved,
    }
}

/// Worst relative violation of `r_i(0)e^{−Ct} ≤ r_i(t) ≤ r_i(0)e^{Ct}` with
/// `C = max(K_max(0), −K_min(0))`; zero or negative means the bounds hold.
pub fn growth_bound_violation(trace: &FlowTrace) -> f64 {
    let first = &trace.samples[0];
    let c = first.k_max().max(-first.k_min());
    let mut worst = f64::NEG_INFINITY;
    for s in &trace.samples {
        for (i, &r0) in first.r.iter().enumerate() {
            let lower = r0 * (-c * s.t).exp();
            let upper = r0 * (c * s.t).exp();
            worst = worst.max((lower - s.r[i]) / r0).max((s.r[i] - upper) / r0);
        }
    }
    worst
}
