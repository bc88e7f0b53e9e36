use serde::Serialize;

use super::operator::monotone_pair;
use super::sampling::TetraSampler;
use crate::complex::EDGE_SLOTS;
use crate::error::Result;
use crate::tetra::{complement, edge_index, others, ConformalTetra};
use crate::tolerance::{FD_STEP, IFF_CONCLUSION};

/// Closed-form derivatives against finite differences, each block
/// normalized by its largest finite-difference entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    pub dalpha_error: f64,
    pub dbeta_error: f64,
}

impl FidelityReport {
    pub fn worst(&self) -> f64 {
        self.dalpha_error.max(self.dbeta_error)
    }
}

fn block_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = analytic
        .iter()
        .zip(numeric)
        .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
    diff / scale
}

/// Dihedral and solid angles evaluated independently of the production
/// path, through half-angle forms that stay well conditioned on slivers.
///
/// The face angle at `a` in triangle `(a, b, c)` satisfies
/// `tan(θ/2) = √(r_b r_c / (r_a (r_a + r_b + r_c)))`, and the dihedral angle
/// along `(a, b)` is the angle of the spherical triangle at `a`, recovered
/// from its sides by `tan²(X/2) = sin(s−y) sin(s−z) / (sin s sin(s−x))`.
fn oracle_angles(r: [f64; 4]) -> Result<([f64; 6], [f64; 4])> {
    let t = ConformalTetra::new(r)?;
    if t.is_degenerate() {
        return Err(crate::error::Error::Degenerate {
            weights: r,
            q: t.nondegeneracy_q(),
        });
    }
    let face_angle = |a: usize, b: usize, c: usize| {
        2.0 * (r[b] * r[c] / (r[a] * (r[a] + r[b] + r[c]))).sqrt().atan()
    };
    let mut beta = [0.0; 6];
    for (e, &(a, b)) in EDGE_SLOTS.iter().enumerate() {
        let [c, d] = complement(a, b);
        let x = face_angle(a, c, d);
        let y = face_angle(a, b, c);
        let z = face_angle(a, b, d);
        let s = 0.5 * (x + y + z);
        let ratio = ((s - y).sin() * (s - z).sin()) / (s.sin() * (s - x).sin());
        beta[e] = 2.0 * ratio.sqrt().atan();
    }
    let alpha = std::array::from_fn(|a| {
        others(a)
            .iter()
            .map(|&b| beta[edge_index(a, b)])
            .sum::<f64>()
            - std::f64::consts::PI
    });
    Ok((beta, alpha))
}

/// Central difference of the oracle angles in weight `b`.
fn central_difference(r: [f64; 4], b: usize, h: f64) -> Result<([f64; 6], [f64; 4])> {
    let mut up = r;
    let mut down = r;
    up[b] += h;
    down[b] -= h;
    let (beta_up, alpha_up) = oracle_angles(up)?;
    let (beta_down, alpha_down) = oracle_angles(down)?;
    Ok((
        std::array::from_fn(|e| (beta_up[e] - beta_down[e]) / (2.0 * h)),
        std::array::from_fn(|a| (alpha_up[a] - alpha_down[a]) / (2.0 * h)),
    ))
}

/// Compares the closed forms with central differences at steps `h = FD_STEP·r`
/// and `h/2`, Richardson-combined so that truncation error stays small near
/// degeneracy.
pub fn derivative_fidelity(t: &ConformalTetra) -> Result<FidelityReport> {
    let r = t.weights();
    let block = t.omega_block()?;
    let mut fd_alpha = [[0.0; 4]; 4];
    let mut fd_beta = [[0.0; 6]; 4];
    for b in 0..4 {
        let h = FD_STEP * r[b];
        let (beta_h, alpha_h) = central_difference(r, b, h)?;
        let (beta_half, alpha_half) = central_difference(r, b, h / 2.0)?;
        for a in 0..4 {
            fd_alpha[a][b] = (4.0 * alpha_half[a] - alpha_h[a]) / 3.0;
        }
        for e in 0..6 {
            fd_beta[b][e] = (4.0 * beta_half[e] - beta_h[e]) / 3.0;
        }
    }

    let mut analytic_beta = Vec::with_capacity(12);
    let mut numeric_beta = Vec::with_capacity(12);
    for i in 0..4 {
        for j in others(i) {
            analytic_beta.push(t.dbeta_dri(i, j)?);
            numeric_beta.push(fd_beta[i][edge_index(i, j)]);
        }
    }
    let analytic_alpha: Vec<f64> = block.dalpha.iter().flatten().copied().collect();
    let numeric_alpha: Vec<f64> = fd_alpha.iter().flatten().copied().collect();
    Ok(FidelityReport {
        dalpha_error: block_error(&analytic_alpha, &numeric_alpha),
        dbeta_error: block_error(&analytic_beta, &numeric_beta),
    })
}

/// Largest gap between the dihedral-sum solid angles and the vector
/// triple-product evaluation `2·atan2(6V, D)`, with `D` built from edge lengths.
pub fn girard_consistency(t: &ConformalTetra) -> Result<f64> {
    let alpha = t.solid_angles()?;
    let six_v = 6.0 * t.volume()?;
    let mut worst = 0.0f64;
    for a in 0..4 {
        let [i, j, k] = others(a);
        let (li, lj, lk) = (
            t.edge_length(a, i),
            t.edge_length(a, j),
            t.edge_length(a, k),
        );
        let dot = |p: usize, lp: f64, q: usize, lq: f64| {
            (lp * lp + lq * lq - t.edge_length(p, q).powi(2)) / 2.0
        };
        let denom =
            li * lj * lk + dot(i, li, j, lj) * lk + dot(i, li, k, lk) * lj + dot(j, lj, k, lk) * li;
        let independent = 2.0 * six_v.atan2(denom);
        worst = worst.max((alpha[a] - independent).abs());
    }
    Ok(worst)
}

/// Worst relative gap between the Cayley–Menger volume and
/// `2 A_f A_g sin β / (3 ℓ)` over the six edges.
pub fn volume_identity_error(t: &ConformalTetra) -> Result<f64> {
    let s = t.scalars()?;
    let mut worst = 0.0f64;
    for (e, &(a, b)) in EDGE_SLOTS.iter().enumerate() {
        let [c, d] = complement(a, b);
        let v = 2.0 * s.areas[c] * s.areas[d] * s.dihedral[e].sin() / (3.0 * t.edge_length(a, b));
        worst = worst.max((v - s.volume).abs() / s.volume);
    }
    Ok(worst)
}

/// Sign structure of the Ω weights of one tetrahedron.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaSignReport {
    pub omega: [[f64; 4]; 4],
    /// Ordered slot pairs with Ω < 0.
    pub negative_pairs: Vec<[usize; 2]>,
    /// Negative pairs where a weight fails to exceed the smaller of the other two.
    pub lemma_violations: Vec<[usize; 2]>,
    pub min_slot: usize,
    /// Pairs touching the minimum slot with a negative Ω.
    pub min_slot_violations: Vec<[usize; 2]>,
}

impl OmegaSignReport {
    pub fn is_consistent(&self) -> bool {
        self.lemma_violations.is_empty() && self.min_slot_violations.is_empty()
    }
}

pub fn omega_sign_audit(t: &ConformalTetra) -> Result<OmegaSignReport> {
    const NEGATIVE: f64 = -1e-12;
    let omega = t.omega_block()?.omega;
    let r = t.weights();
    let min_slot = t.min_slot();
    let mut negative_pairs = Vec::new();
    let mut lemma_violations = Vec::new();
    let mut min_slot_violations = Vec::new();
    for a in 0..4 {
        for b in others(a) {
            let w = omega[a][b];
            if w < 0.0 {
                negative_pairs.push([a, b]);
            }
            if w < NEGATIVE {
                let [c, d] = complement(a, b);
                let floor = r[c].min(r[d]);
                if r[a] <= floor || r[b] <= floor {
                    lemma_violations.push([a, b]);
                }
                if a == min_slot || b == min_slot {
                    min_slot_violations.push([a, b]);
                }
            }
        }
    }
    Ok(OmegaSignReport {
        omega,
        negative_pairs,
        lemma_violations,
        min_slot,
        min_slot_violations,
    })
}

/// Ordering of solid angles against weights, and of face areas against
/// solid angles, over a seeded random sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleScanReport {
    pub samples: usize,
    pub seed: u64,
    /// Pairs violating `r_i ≤ r_j ⟺ α_i ≥ α_j`.
    pub violations: usize,
    /// Tetrahedra whose largest (smallest) face is not opposite a largest
    /// (smallest) solid angle.
    pub face_area_violations: usize,
    pub first_violation: Option<[f64; 4]>,
}

fn extreme_face_matches(areas: &[f64; 4], alpha: &[f64; 4]) -> bool {
    let arg = |xs: &[f64; 4], better: fn(f64, f64) -> bool| {
        (1..4).fold(0, |best, s| if better(xs[s], xs[best]) { s } else { best })
    };
    let a_max = alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a_min = alpha.iter().copied().fold(f64::INFINITY, f64::min);
    let largest_face = arg(areas, |x, y| x > y);
    let smallest_face = arg(areas, |x, y| x < y);
    alpha[largest_face] >= a_max - IFF_CONCLUSION && alpha[smallest_face] <= a_min + IFF_CONCLUSION
}

pub fn angle_monotonicity_scan(samples: usize, seed: u64) -> AngleScanReport {
    let mut report = AngleScanReport {
        samples,
        seed,
        violations: 0,
        face_area_violations: 0,
        first_violation: None,
    };
    for t in TetraSampler::new(seed).take(samples) {
        let r = t.weights();
        let s = t
            .scalars()
            .expect("sampler yields nondegenerate tetrahedra");
        let mut bad = false;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if !monotone_pair(r[i], r[j], -s.solid[i], -s.solid[j]) {
                    report.violations += 1;
                    bad = true;
                }
            }
        }
        if !extreme_face_matches(&s.areas, &s.solid) {
            report.face_area_violations += 1;
            bad = true;
        }
        if bad && report.first_violation.is_none() {
            report.first_violation = Some(r);
        }
    }
    report
}
