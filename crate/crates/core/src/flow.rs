//! Global curvature, the Ω-weighted Laplacian, and the Yamabe flow
//! `dr_i/dt = −K_i r_i`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::analysis::monotone_state;
use crate::complex::{MetricAssignment, SimplicialComplex, VertexId};
use crate::error::{Error, Result};
use crate::tetra::{others, ConformalTetra, JacobianBlock};

/// Curvature `K_i = 4π − Σ α_i` over the star of each vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureState {
    pub vertices: Vec<VertexId>,
    pub k: Vec<f64>,
    /// Solid angles per tetrahedron, in slot order.
    pub alpha_by_tet: Vec<[f64; 4]>,
}

impl CurvatureState {
    pub fn get(&self, v: VertexId) -> Option<f64> {
        self.vertices.binary_search(&v).ok().map(|i| self.k[i])
    }

    pub fn max(&self) -> f64 {
        self.k.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.k.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn spread(&self) -> f64 {
        self.max() - self.min()
    }
}

/// The tetrahedron `ti` of `complex` under dense weights `r`.
pub fn tetra_at(complex: &SimplicialComplex, r: &[f64], ti: usize) -> Result<ConformalTetra> {
    let local = complex.local_tetrahedra()[ti];
    let t = ConformalTetra::new(local.map(|i| r[i]))?;
    if t.is_degenerate() {
        return Err(Error::DegenerateTetrahedron {
            index: ti,
            vertices: complex.tetrahedra()[ti],
            q: t.nondegeneracy_q(),
        });
    }
    Ok(t)
}

fn tetra_error(complex: &SimplicialComplex, ti: usize, t: &ConformalTetra) -> Error {
    Error::DegenerateTetrahedron {
        index: ti,
        vertices: complex.tetrahedra()[ti],
        q: t.nondegeneracy_q(),
    }
}

pub fn curvature(complex: &SimplicialComplex, metric: &MetricAssignment) -> Result<CurvatureState> {
    curvature_dense(complex, &metric.dense(complex)?)
}

/// Curvature from weights listed in the complex's vertex order.
pub fn curvature_dense(complex: &SimplicialComplex, r: &[f64]) -> Result<CurvatureState> {
    let mut k = vec![4.0 * PI; complex.num_vertices()];
    let mut alpha_by_tet = Vec::with_capacity(complex.tetrahedra().len());
    for (ti, local) in complex.local_tetrahedra().iter().enumerate() {
        let t = tetra_at(complex, r, ti)?;
        let alpha = t.solid_angles().map_err(|_| tetra_error(complex, ti, &t))?;
        for (slot, &v) in local.iter().enumerate() {
            k[v] -= alpha[slot];
        }
        alpha_by_tet.push(alpha);
    }
    Ok(CurvatureState {
        vertices: complex.vertices().to_vec(),
        k,
        alpha_by_tet,
    })
}

fn omega_blocks(complex: &SimplicialComplex, r: &[f64]) -> Result<Vec<JacobianBlock>> {
    (0..complex.tetrahedra().len())
        .map(|ti| {
            let t = tetra_at(complex, r, ti)?;
            t.omega_block().map_err(|_| tetra_error(complex, ti, &t))
        })
        .collect()
}

/// Coefficients `a_ij` of `(△f)_i = Σ_j a_ij (f_j − f_i)`.
///
/// `a_ij` is the sum of `Ω_ij` over the tetrahedra containing the edge, so
/// `r_i a_ij = r_j a_ji`. Coefficients may be negative.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianCoefficients {
    pub vertices: Vec<VertexId>,
    /// The self-adjointness metric, `b_i = r_i`.
    pub b_metric: Vec<f64>,
    /// Keyed by ordered pairs of vertex positions.
    pub a: BTreeMap<(usize, usize), f64>,
}

impl LaplacianCoefficients {
    pub fn coefficient(&self, i: VertexId, j: VertexId) -> Option<f64> {
        let i = self.vertices.binary_search(&i).ok()?;
        let j = self.vertices.binary_search(&j).ok()?;
        self.a.get(&(i, j)).copied()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.vertices.len()];
        for (&(i, j), &a) in &self.a {
            out[i] += a * (f[j] - f[i]);
        }
        out
    }

    /// Edges with a negative coefficient, as sorted vertex-id pairs.
    pub fn negative_edges(&self) -> Vec<[VertexId; 2]> {
        let mut edges: Vec<[VertexId; 2]> = self
            .a
            .iter()
            .filter(|(_, &a)| a < 0.0)
            .map(|(&(i, j), _)| {
                let (a, b) = (self.vertices[i], self.vertices[j]);
                if a < b {
                    [a, b]
                } else {
                    [b, a]
                }
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a.values().all(|&a| a >= 0.0)
    }

    /// Largest `|r_i a_ij − r_j a_ji|` relative to `r_i |a_ij|`.
    pub fn self_adjointness_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&(i, j), &a) in &self.a {
            let lhs = self.b_metric[i] * a;
            let rhs = self.b_metric[j] * self.a[&(j, i)];
            let scale = lhs.abs().max(rhs.abs());
            if scale > 0.0 {
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
        worst
    }
}

pub fn assemble_laplacian(
    complex: &SimplicialComplex,
    metric: &MetricAssignment,
) -> Result<LaplacianCoefficients> {
    assemble_laplacian_dense(complex, &metric.dense(complex)?)
}

pub fn assemble_laplacian_dense(
    complex: &SimplicialComplex,
    r: &[f64],
) -> Result<LaplacianCoefficients> {
    let blocks = omega_blocks(complex, r)?;
    let mut a: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (local, block) in complex.local_tetrahedra().iter().zip(&blocks) {
        for sa in 0..4 {
            for sb in others(sa) {
                *a.entry((local[sa], local[sb])).or_insert(0.0) += block.omega[sa][sb];
            }
        }
    }
    Ok(LaplacianCoefficients {
        vertices: complex.vertices().to_vec(),
        b_metric: r.to_vec(),
        a,
    })
}

/// `dK_i/dt` as the tetrahedron-by-tetrahedron Ω-weighted sum.
pub fn curvature_rhs(complex: &SimplicialComplex, metric: &MetricAssignment) -> Result<Vec<f64>> {
    let r = metric.dense(complex)?;
    let state = curvature_dense(complex, &r)?;
    curvature_rhs_dense(complex, &r, &state.k)
}

/// `dK_i/dt` given weights and the curvature they induce.
pub fn curvature_rhs_dense(complex: &SimplicialComplex, r: &[f64], k: &[f64]) -> Result<Vec<f64>> {
    let blocks = omega_blocks(complex, r)?;
    let mut out = vec![0.0; complex.num_vertices()];
    for (local, block) in complex.local_tetrahedra().iter().zip(&blocks) {
        for sa in 0..4 {
            let i = local[sa];
            out[i] += others(sa)
                .iter()
                .map(|&sb| block.omega[sa][sb] * (k[local[sb]] - k[i]))
                .sum::<f64>();
        }
    }
    Ok(out)
}

/// `dQ/dt = −Σ_a (∂Q/∂r_a) K_a r_a` for one tetrahedron under the flow.
pub fn q_rate(t: &ConformalTetra, k: &[f64; 4]) -> f64 {
    let g = t.q_gradient();
    let r = t.weights();
    -(0..4).map(|a| g[a] * k[a] * r[a]).sum::<f64>()
}

/// The same rate with `Σ_a (∂Q/∂r_a) r_a = −2Q` dropped, which is exact on
/// `Q = 0`: `−Σ_{a≠base} (∂Q/∂r_a) r_a (K_a − K_base)`.
pub fn q_rate_at_boundary(t: &ConformalTetra, k: &[f64; 4], base: usize) -> f64 {
    let g = t.q_gradient();
    let r = t.weights();
    -others(base)
        .iter()
        .map(|&a| g[a] * r[a] * (k[a] - k[base]))
        .sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowConfig {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub rel_tol: f64,
    /// Steps are rejected if any tetrahedron's relative Q would fall below this.
    pub q_guard: f64,
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            dt_init: 1e-3,
            dt_min: 1e-10,
            rel_tol: 1e-8,
            q_guard: 1e-10,
            record_every: 1,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("t_end must be positive");
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init.is_finite()) {
            return bad("need 0 < dt_min <= dt_init");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be positive");
        }
        if !(self.q_guard >= 0.0 && self.q_guard < 0.5) {
            return bad("q_guard must lie in [0, 0.5)");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTEnd,
    DegeneracyStop,
    StepUnderflow,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedTEnd => "reached_t_end",
            Termination::DegeneracyStop => "degeneracy_stop",
            Termination::StepUnderflow => "step_underflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub r: Vec<f64>,
    pub k: Vec<f64>,
    pub min_q: f64,
    /// Smallest `Q / (Σ 1/r)²` over the tetrahedra.
    pub min_q_rel: f64,
    /// All Laplacian coefficients are nonnegative.
    pub parabolic: bool,
    /// Every tetrahedron satisfies the weight/curvature monotonicity condition.
    pub monotone: bool,
}

impl FlowSample {
    pub fn k_max(&self) -> f64 {
        self.k.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn k_min(&self) -> f64 {
        self.k.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn k_spread(&self) -> f64 {
        self.k_max() - self.k_min()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace {
    pub vertices: Vec<VertexId>,
    pub samples: Vec<FlowSample>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowSample {
        self.samples
            .last()
            .expect("a trace always holds the initial sample")
    }
}

fn min_relative_q(complex: &SimplicialComplex, r: &[f64]) -> (f64, f64) {
    let mut min_q = f64::INFINITY;
    let mut min_rel = f64::INFINITY;
    for local in complex.local_tetrahedra() {
        let weights = local.map(|i| r[i]);
        let t = match ConformalTetra::new(weights) {
            Ok(t) => t,
            Err(_) => return (f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        min_q = min_q.min(t.nondegeneracy_q());
        min_rel = min_rel.min(t.relative_q());
    }
    (min_q, min_rel)
}

fn sample_at(complex: &SimplicialComplex, t: f64, r: &[f64]) -> Result<FlowSample> {
    let state = curvature_dense(complex, r)?;
    let laplacian = assemble_laplacian_dense(complex, r)?;
    let (min_q, min_q_rel) = min_relative_q(complex, r);
    Ok(FlowSample {
        t,
        r: r.to_vec(),
        monotone: monotone_state(complex, r, &state.k),
        k: state.k,
        min_q,
        min_q_rel,
        parabolic: laplacian.is_nonnegative(),
    })
}

fn velocity(complex: &SimplicialComplex, r: &[f64]) -> Result<Vec<f64>> {
    let k = curvature_dense(complex, r)?.k;
    Ok(r.iter().zip(&k).map(|(ri, ki)| -ki * ri).collect())
}

fn axpy(r: &[f64], h: f64, v: &[f64]) -> Vec<f64> {
    r.iter().zip(v).map(|(x, y)| x + h * y).collect()
}

fn rk4_step(complex: &SimplicialComplex, r: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = velocity(complex, r)?;
    let k2 = velocity(complex, &axpy(r, h / 2.0, &k1))?;
    let k3 = velocity(complex, &axpy(r, h / 2.0, &k2))?;
    let k4 = velocity(complex, &axpy(r, h, &k3))?;
    Ok((0..r.len())
        .map(|i| r[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

enum Rejection {
    Guard,
    Accuracy(f64),
}

/// Integrates the flow with classical RK4 and step doubling.
///
/// Each step is taken once at `h` and twice at `h/2`; the local error is the
/// largest relative difference over vertices divided by 15. Steps whose
/// stages or result come within `q_guard` of degeneracy are rejected and
/// `h` halved; the run stops once `h` would fall below `dt_min`.
pub fn run_flow(
    complex: &SimplicialComplex,
    initial: &MetricAssignment,
    config: &FlowConfig,
) -> Result<FlowTrace> {
    config.validate()?;
    let mut r = initial.dense(complex)?;
    let (_, rel) = min_relative_q(complex, &r);
    if rel <= config.q_guard {
        // report the first offending tetrahedron
        for ti in 0..complex.tetrahedra().len() {
            let t = tetra_at(complex, &r, ti)?;
            if t.relative_q() <= config.q_guard {
                return Err(tetra_error(complex, ti, &t));
            }
        }
    }

    let mut samples = vec![sample_at(complex, 0.0, &r)?];
    let mut t = 0.0;
    let mut dt = config.dt_init;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut since_record = 0usize;
    let t_end = config.t_end;

    let termination = loop {
        if t_end - t <= 1e-12 * t_end {
            break Termination::ReachedTEnd;
        }
        let h = dt.min(t_end - t);
        let outcome = (|| -> std::result::Result<Vec<f64>, Rejection> {
            let full = rk4_step(complex, &r, h).map_err(|_| Rejection::Guard)?;
            let mid = rk4_step(complex, &r, h / 2.0).map_err(|_| Rejection::Guard)?;
            let fine = rk4_step(complex, &mid, h / 2.0).map_err(|_| Rejection::Guard)?;
            if fine.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Rejection::Guard);
            }
            if min_relative_q(complex, &fine).1 < config.q_guard {
                return Err(Rejection::Guard);
            }
            let err = full
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).abs() / b.abs())
                .fold(0.0, f64::max)
                / 15.0;
            if err > config.rel_tol {
                return Err(Rejection::Accuracy(err));
            }
            dt = h * growth_factor(err, config.rel_tol);
            Ok(fine)
        })();

        match outcome {
            Ok(next) => {
                r = next;
                t = if t_end - (t + h) <= 1e-12 * t_end {
                    t_end
                } else {
                    t + h
                };
                accepted += 1;
                since_record += 1;
                if since_record >= config.record_every || t == t_end {
                    samples.push(sample_at(complex, t, &r)?);
                    since_record = 0;
                }
            }
            Err(reason) => {
                rejected += 1;
                let guard = matches!(reason, Rejection::Guard);
                dt = match reason {
                    Rejection::Guard => h / 2.0,
                    Rejection::Accuracy(err) => h * growth_factor(err, config.rel_tol),
                };
                if dt < config.dt_min {
                    break if guard {
                        Termination::DegeneracyStop
                    } else {
                        Termination::StepUnderflow
                    };
                }
            }
        }
    };

    if since_record > 0 {
        samples.push(sample_at(complex, t, &r)?);
    }

    Ok(FlowTrace {
        vertices: complex.vertices().to_vec(),
        samples,
        termination,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

fn growth_factor(err: f64, tol: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * (tol / err).powf(0.2)).clamp(0.1, 5.0)
    }
}

/// A float written with 17 significant digits.
struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(sig17(self.0))
                .map_err(serde::ser::Error::custom)?
                .serialize(serializer)
        } else {
            serializer.serialize_none()
        }
    }
}

pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct SampleDoc {
    t: Sig17,
    r: Vec<Sig17>,
    #[serde(rename = "K")]
    k: Vec<Sig17>,
    min_q: Sig17,
    min_q_rel: Sig17,
    parabolic: bool,
    monotone: bool,
}

#[derive(Serialize)]
struct TraceDoc<'a> {
    vertices: &'a [VertexId],
    termination: Termination,
    accepted_steps: usize,
    rejected_steps: usize,
    samples: Vec<SampleDoc>,
}

impl FlowTrace {
    /// CSV with header `t,vertex,r,K`, one row per vertex per sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,vertex,r,K")?;
        for s in &self.samples {
            for (i, v) in self.vertices.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    sig17(s.t),
                    v,
                    sig17(s.r[i]),
                    sig17(s.k[i])
                )?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = TraceDoc {
            vertices: &self.vertices,
            termination: self.termination,
            accepted_steps: self.accepted_steps,
            rejected_steps: self.rejected_steps,
            samples: self
                .samples
                .iter()
                .map(|s| SampleDoc {
                    t: Sig17(s.t),
                    r: s.r.iter().map(|&x| Sig17(x)).collect(),
                    k: s.k.iter().map(|&x| Sig17(x)).collect(),
                    min_q: Sig17(s.min_q),
                    min_q_rel: Sig17(s.min_q_rel),
                    parabolic: s.parabolic,
                    monotone: s.monotone,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("trace serialization cannot fail")
    }
}
