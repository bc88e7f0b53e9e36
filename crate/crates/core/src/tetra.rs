//! Closed-form geometry of a single conformal tetrahedron.
//!
//! A tetrahedron is described by four positive vertex weights; the edge
//! between slots `a` and `b` has length `r_a + r_b`. Slot order is fixed at
//! construction and every 4-vector or 4×4 block is reported in that order.
//! Faces are indexed by the slot they omit, dihedral angles by
//! [`EDGE_SLOTS`](crate::complex::EDGE_SLOTS).

use std::f64::consts::PI;

use serde::Serialize;

use crate::complex::EDGE_SLOTS;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConformalTetra {
    r: [f64; 4],
}

/// Derived scalar geometry of a nondegenerate tetrahedron.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TetraScalars {
    pub q: f64,
    /// Perimeter of the face opposite each slot.
    pub perimeters: [f64; 4],
    /// Area of the face opposite each slot.
    pub areas: [f64; 4],
    pub volume: f64,
    /// Dihedral angle along each edge of `EDGE_SLOTS`.
    pub dihedral: [f64; 6],
    /// Solid angle at each slot.
    pub solid: [f64; 4],
}

/// The matrix `∂α_a/∂r_b` and the Laplacian weights `Ω_ab = (∂α_a/∂r_b)·r_b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobianBlock {
    pub dalpha: Mat4,
    /// Off-diagonal only; the diagonal is zero.
    pub omega: Mat4,
}

/// The three slots other than `a`, ascending.
pub fn others(a: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut n = 0;
    for s in 0..4 {
        if s != a {
            out[n] = s;
            n += 1;
        }
    }
    out
}

/// The two slots other than `a` and `b`, ascending.
pub fn complement(a: usize, b: usize) -> [usize; 2] {
    debug_assert_ne!(a, b);
    let mut out = [0; 2];
    let mut n = 0;
    for s in 0..4 {
        if s != a && s != b {
            out[n] = s;
            n += 1;
        }
    }
    out
}

/// Position of the edge `{a, b}` in `EDGE_SLOTS`.
pub fn edge_index(a: usize, b: usize) -> usize {
    let key = if a < b { (a, b) } else { (b, a) };
    EDGE_SLOTS
        .iter()
        .position(|&e| e == key)
        .expect("distinct slots")
}

impl ConformalTetra {
    pub fn new(r: [f64; 4]) -> Result<Self> {
        for (slot, &weight) in r.iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::NonPositiveSlot { slot, weight });
            }
        }
        Ok(Self { r })
    }

    pub fn weights(&self) -> [f64; 4] {
        self.r
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.r.map(|x| x * factor))
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        self.r[a] + self.r[b]
    }

    fn inverse_sum(&self) -> f64 {
        self.r.iter().map(|x| 1.0 / x).sum()
    }

    /// The nondegeneracy quadratic `(Σ 1/r)² − 2 Σ 1/r²`.
    pub fn nondegeneracy_q(&self) -> f64 {
        let s = self.inverse_sum();
        let s2: f64 = self.r.iter().map(|x| 1.0 / (x * x)).sum();
        s * s - 2.0 * s2
    }

    /// `Q / (Σ 1/r)²`, which is scale free and at most 1/2.
    pub fn relative_q(&self) -> f64 {
        let s = self.inverse_sum();
        self.nondegeneracy_q() / (s * s)
    }

    pub fn is_degenerate(&self) -> bool {
        self.relative_q() <= tolerance::DEGENERATE_REL_Q
    }

    fn ensure_nondegenerate(&self) -> Result<f64> {
        let q = self.nondegeneracy_q();
        if self.is_degenerate() {
            Err(Error::Degenerate { weights: self.r, q })
        } else {
            Ok(q)
        }
    }

    /// `∂Q/∂r_a = −(2/r_a²)(Σ_{b≠a} 1/r_b − 1/r_a)`.
    pub fn q_gradient(&self) -> [f64; 4] {
        let s = self.inverse_sum();
        self.r.map(|ra| -2.0 / (ra * ra) * (s - 2.0 / ra))
    }

    /// Perimeter `2(r_i + r_j + r_k)` of the triangle on three slots.
    pub fn perimeter(&self, i: usize, j: usize, k: usize) -> f64 {
        2.0 * (self.r[i] + self.r[j] + self.r[k])
    }

    /// Area `√(r_i r_j r_k (r_i + r_j + r_k))` of the triangle on three slots.
    pub fn area(&self, i: usize, j: usize, k: usize) -> f64 {
        let (a, b, c) = (self.r[i], self.r[j], self.r[k]);
        (a * b * c * (a + b + c)).sqrt()
    }

    /// Perimeters and areas of the faces, indexed by the omitted slot.
    pub fn face_geometry(&self) -> ([f64; 4], [f64; 4]) {
        let mut p = [0.0; 4];
        let mut a = [0.0; 4];
        for omit in 0..4 {
            let [i, j, k] = others(omit);
            p[omit] = self.perimeter(i, j, k);
            a[omit] = self.area(i, j, k);
        }
        (p, a)
    }

    /// Volume from the Cayley–Menger determinant of the six edge lengths.
    pub fn volume(&self) -> Result<f64> {
        let q = self.ensure_nondegenerate()?;
        let mut cm = [[1.0; 5]; 5];
        cm[0][0] = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let l = if a == b { 0.0 } else { self.edge_length(a, b) };
                cm[a + 1][b + 1] = l * l;
            }
        }
        let v2 = linalg::det(cm) / 288.0;
        if v2 <= 0.0 {
            return Err(Error::Degenerate { weights: self.r, q });
        }
        Ok(v2.sqrt())
    }

    /// `(1/3) Π r √Q`, equal to the Cayley–Menger volume and better
    /// conditioned near degeneracy; used inside the derivative formulas.
    fn volume_from_q(&self, q: f64) -> f64 {
        self.r.iter().product::<f64>() * q.sqrt() / 3.0
    }

    /// Cosine of the face angle at slot `a` in the triangle `(a, b, c)`.
    fn face_angle_cos(&self, a: usize, b: usize, c: usize) -> f64 {
        let ab = self.edge_length(a, b);
        let ac = self.edge_length(a, c);
        let bc = self.edge_length(b, c);
        (ab * ab + ac * ac - bc * bc) / (2.0 * ab * ac)
    }

    fn face_angle_sin(&self, a: usize, b: usize, c: usize) -> f64 {
        2.0 * self.area(a, b, c) / (self.edge_length(a, b) * self.edge_length(a, c))
    }

    /// Dihedral angles (edge order) and solid angles (slot order).
    ///
    /// Each dihedral angle comes from the spherical law of cosines on the
    /// face angles at the edge's lower slot; each solid angle is the sum of
    /// its three dihedral angles minus π.
    pub fn dihedral_and_solid_angles(&self) -> Result<([f64; 6], [f64; 4])> {
        let q = self.ensure_nondegenerate()?;
        let mut beta = [0.0; 6];
        for (e, &(a, b)) in EDGE_SLOTS.iter().enumerate() {
            let [c, d] = complement(a, b);
            let cos_bc = self.face_angle_cos(a, b, c);
            let cos_bd = self.face_angle_cos(a, b, d);
            let cos_cd = self.face_angle_cos(a, c, d);
            let sin_bc = self.face_angle_sin(a, b, c);
            let sin_bd = self.face_angle_sin(a, b, d);
            let cos_beta = (cos_cd - cos_bc * cos_bd) / (sin_bc * sin_bd);
            beta[e] = clamped_acos(cos_beta).ok_or(Error::Degenerate { weights: self.r, q })?;
        }
        let mut alpha = [0.0; 4];
        for (a, slot_alpha) in alpha.iter_mut().enumerate() {
            *slot_alpha = others(a)
                .iter()
                .map(|&b| beta[edge_index(a, b)])
                .sum::<f64>()
                - PI;
        }
        Ok((beta, alpha))
    }

    pub fn solid_angles(&self) -> Result<[f64; 4]> {
        Ok(self.dihedral_and_solid_angles()?.1)
    }

    pub fn scalars(&self) -> Result<TetraScalars> {
        let q = self.ensure_nondegenerate()?;
        let (perimeters, areas) = self.face_geometry();
        let volume = self.volume()?;
        let (dihedral, solid) = self.dihedral_and_solid_angles()?;
        Ok(TetraScalars {
            q,
            perimeters,
            areas,
            volume,
            dihedral,
            solid,
        })
    }

    /// `∂α_i/∂r_i` at slot `i`, evaluated in closed form.
    pub fn dalpha_dri(&self, i: usize) -> Result<f64> {
        let q = self.ensure_nondegenerate()?;
        Ok(self.dalpha_dri_with(i, q, self.volume_from_q(q)))
    }

    fn dalpha_dri_with(&self, i: usize, q: f64, v: f64) -> f64 {
        let [j, k, l] = others(i);
        let r = &self.r;
        let (ri, rj, rk, rl) = (r[i], r[j], r[k], r[l]);
        let prefactor = -8.0 * (rj * rk * rl).powi(2)
            / (3.0
                * self.perimeter(i, j, k)
                * self.perimeter(i, j, l)
                * self.perimeter(i, k, l)
                * v);
        let bracket = (2.0 / ri + 1.0 / rj + 1.0 / rk + 1.0 / rl)
            + rj / ri * (1.0 / ri + 1.0 / rk + 1.0 / rl)
            + rk / ri * (1.0 / ri + 1.0 / rj + 1.0 / rl)
            + rl / ri * (1.0 / ri + 1.0 / rj + 1.0 / rk)
            + (2.0 * ri + rj + rk + rl) * q;
        prefactor * bracket
    }

    /// `∂α_i/∂r_j` for distinct slots, evaluated in closed form.
    pub fn dalpha_drj(&self, i: usize, j: usize) -> Result<f64> {
        assert_ne!(i, j, "use dalpha_dri for the diagonal");
        let q = self.ensure_nondegenerate()?;
        Ok(self.dalpha_drj_with(i, j, self.volume_from_q(q)))
    }

    fn dalpha_drj_with(&self, i: usize, j: usize, v: f64) -> f64 {
        let [k, l] = complement(i, j);
        let r = &self.r;
        let (ri, rj, rk, rl) = (r[i], r[j], r[k], r[l]);
        let prefactor = 4.0 * ri * rj * (rk * rl).powi(2)
            / (3.0 * self.perimeter(i, j, k) * self.perimeter(i, j, l) * v);
        let spread = 1.0 / rk - 1.0 / rl;
        let factor = (1.0 / ri) * (1.0 / rj + 1.0 / rk + 1.0 / rl)
            + (1.0 / rj) * (1.0 / ri + 1.0 / rk + 1.0 / rl)
            - spread * spread;
        prefactor * factor
    }

    /// The full Jacobian `∂α_a/∂r_b` with its Ω weights.
    ///
    /// Every off-diagonal entry is evaluated independently from its own
    /// ordered pair, so symmetry of `dalpha` is a property of the formulas
    /// rather than of the assembly.
    pub fn omega_block(&self) -> Result<JacobianBlock> {
        let q = self.ensure_nondegenerate()?;
        let v = self.volume_from_q(q);
        let mut dalpha = [[0.0; 4]; 4];
        let mut omega = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    dalpha[a][a] = self.dalpha_dri_with(a, q, v);
                } else {
                    dalpha[a][b] = self.dalpha_drj_with(a, b, v);
                    omega[a][b] = dalpha[a][b] * self.r[b];
                }
            }
        }
        Ok(JacobianBlock { dalpha, omega })
    }

    /// Derivative of the dihedral angle along edge `{i, j}` with respect to `r_i`.
    pub fn dbeta_dri(&self, i: usize, j: usize) -> Result<f64> {
        assert_ne!(i, j);
        let q = self.ensure_nondegenerate()?;
        let v = self.volume_from_q(q);
        let [k, l] = complement(i, j);
        let r = &self.r;
        let (ri, rj, rk, rl) = (r[i], r[j], r[k], r[l]);
        let prefactor = 2.0 * ri * rj * (rk * rl).powi(2)
            / (3.0 * self.perimeter(i, j, k) * self.perimeter(i, j, l) * v);
        let bracket = -1.0 / (rk * rk)
            - 1.0 / (rl * rl)
            - 2.0 * rj / ri
                * (1.0 / (ri * rk) + 1.0 / (ri * rl) + 1.0 / (rk * rl) * (2.0 + rj / ri))
            + (1.0 / rj - 1.0 / ri) * (2.0 / ri + 1.0 / rk + 1.0 / rl);
        Ok(prefactor * bracket)
    }

    /// Slot of the smallest weight (first on ties).
    pub fn min_slot(&self) -> usize {
        (0..4)
            .min_by(|&a, &b| self.r[a].total_cmp(&self.r[b]))
            .unwrap()
    }
}

fn clamped_acos(x: f64) -> Option<f64> {
    if x.is_nan() || x.abs() > 1.0 + tolerance::ACOS_CLAMP {
        None
    } else {
        Some(x.clamp(-1.0, 1.0).acos())
    }
}

impl JacobianBlock {
    /// `|Σ_b (∂α_a/∂r_b) r_b|` relative to `Σ_b |∂α_a/∂r_b| r_b`.
    pub fn row_residual(&self, a: usize, r: &[f64; 4]) -> f64 {
        let sum: f64 = (0..4).map(|b| self.dalpha[a][b] * r[b]).sum();
        let scale: f64 = (0..4).map(|b| (self.dalpha[a][b] * r[b]).abs()).sum();
        sum.abs() / scale
    }

    pub fn max_row_residual(&self, r: &[f64; 4]) -> f64 {
        (0..4).map(|a| self.row_residual(a, r)).fold(0.0, f64::max)
    }

    /// `max |dalpha_ab − dalpha_ba|` relative to `max |dalpha|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self
            .dalpha
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let mut worst = 0.0f64;
        for a in 0..4 {
            for b in (a + 1)..4 {
                worst = worst.max((self.dalpha[a][b] - self.dalpha[b][a]).abs());
            }
        }
        worst / scale
    }
}
