use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tetra::ConformalTetra;
use crate::tolerance::DEGENERATE_LIMIT;

/// Relative nondegeneracy levels at which the probe samples the angles.
pub const PROBE_LEVELS: [f64; 9] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];

const BISECTION_STEPS: usize = 200;
const MAX_MARCH: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeLevel {
    pub relative_q: f64,
    pub weights: [f64; 4],
    pub solid: [f64; 4],
}

/// Solid angles along a straight path in weight space approaching `Q = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub boundary_weights: [f64; 4],
    pub min_slot: usize,
    pub levels: Vec<ProbeLevel>,
    /// Solid angle at the minimum slot on the closest level.
    pub min_slot_angle: f64,
    /// Largest of the remaining solid angles on the closest level.
    pub max_other_angle: f64,
    pub angle_sum: f64,
    /// The minimum-slot angle increases and the others decrease level by level.
    pub monotone_trends: bool,
    /// Final angles lie within the degeneration tolerance of 2π and 0.
    pub limits_reached: bool,
}

fn point(r0: &[f64; 4], d: &[f64; 4], s: f64) -> [f64; 4] {
    std::array::from_fn(|a| r0[a] + s * d[a])
}

fn rel_q(r: &[f64; 4]) -> f64 {
    let inv: f64 = r.iter().map(|x| 1.0 / x).sum();
    let inv_sq: f64 = r.iter().map(|x| 1.0 / (x * x)).sum();
    (inv * inv - 2.0 * inv_sq) / (inv * inv)
}

/// Smallest `s` in `(lo, hi]` with `g(s) ≤ 0`, given `g(lo) > 0 ≥ g(hi)`.
fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Walks from `t0` along `direction` until the tetrahedron degenerates, then
/// samples the solid angles at decreasing relative `Q`.
pub fn degeneration_probe(t0: &ConformalTetra, direction: [f64; 4]) -> Result<ProbeReport> {
    let r0 = t0.weights();
    let q_at = |s: f64| rel_q(&point(&r0, &direction, s));

    // Parameter at which the first weight reaches zero.
    let collapse = (0..4)
        .filter(|&a| direction[a] < 0.0)
        .map(|a| (r0[a] / -direction[a], a))
        .min_by(|x, y| x.0.total_cmp(&y.0));

    let mut lo = 0.0;
    let mut hi = None;
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::NeverDegenerates);
    }
    let mut step = 1e-3 * r0.iter().copied().fold(f64::INFINITY, f64::min) / norm;
    for k in 1..=MAX_MARCH {
        let s = match collapse {
            Some((s_max, _)) => s_max * (1.0 - 0.5f64.powi(k as i32)),
            None => {
                step *= 2.0;
                step
            }
        };
        if s <= lo {
            break;
        }
        if q_at(s) <= 0.0 {
            hi = Some(s);
            break;
        }
        lo = s;
    }
    let hi = match (hi, collapse) {
        (Some(h), _) => h,
        (None, Some((_, slot))) => return Err(Error::WeightCollapse { slot }),
        (None, None) => return Err(Error::NeverDegenerates),
    };
    let boundary = bisect(lo, hi, q_at);
    let boundary_weights = point(&r0, &direction, boundary);
    let min_slot = (0..4)
        .min_by(|&a, &b| boundary_weights[a].total_cmp(&boundary_weights[b]))
        .unwrap();

    let start_q = q_at(0.0);
    let mut levels = Vec::new();
    for &delta in PROBE_LEVELS.iter().filter(|&&d| d < start_q) {
        let s = bisect(0.0, boundary, |s| q_at(s) - delta);
        // step back inside so the sampled tetrahedron is on the nondegenerate side
        let s = if q_at(s) < delta { s.next_down() } else { s };
        let weights = point(&r0, &direction, s);
        let t = ConformalTetra::new(weights)?;
        levels.push(ProbeLevel {
            relative_q: t.relative_q(),
            weights,
            solid: t.solid_angles()?,
        });
    }

    let last = levels.last().ok_or(Error::NeverDegenerates)?;
    let min_slot_angle = last.solid[min_slot];
    let max_other_angle = (0..4)
        .filter(|&a| a != min_slot)
        .map(|a| last.solid[a])
        .fold(f64::NEG_INFINITY, f64::max);
    let angle_sum = last.solid.iter().sum();
    let monotone_trends = levels.windows(2).all(|w| {
        (0..4).all(|a| {
            if a == min_slot {
                w[1].solid[a] >= w[0].solid[a] - 1e-12
            } else {
                w[1].solid[a] <= w[0].solid[a] + 1e-12
            }
        })
    });
    let limits_reached =
        min_slot_angle > TAU - DEGENERATE_LIMIT && max_other_angle < DEGENERATE_LIMIT;
    Ok(ProbeReport {
        boundary_weights,
        min_slot,
        min_slot_angle,
        max_other_angle,
        angle_sum,
        monotone_trends,
        limits_reached,
        levels,
    })
}
