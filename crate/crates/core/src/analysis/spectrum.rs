use serde::Serialize;

use crate::error::Result;
use crate::linalg::{det, det3, jacobi_eigen, minor4, Mat4};
use crate::tetra::{others, ConformalTetra};
use crate::tolerance::JACOBI_OFF_DIAGONAL;

/// Eigen-analysis of the solid-angle Jacobian of one tetrahedron.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Ascending; the last entry is the null eigenvalue.
    pub eigenvalues: [f64; 4],
    /// Angle in `[0, π/2]` between the null eigenvector and the weight vector.
    pub null_vector_angle: f64,
    /// Worst relative error of the closed-form minor determinants.
    pub minor_check: f64,
    pub spectral_radius: f64,
}

pub fn hessian_spectrum(t: &ConformalTetra) -> Result<SpectrumReport> {
    let a = t.omega_block()?.dalpha;
    let eig = jacobi_eigen(&a, JACOBI_OFF_DIAGONAL);
    let spectral_radius = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let null = eig.vectors[3];
    Ok(SpectrumReport {
        eigenvalues: eig.values,
        null_vector_angle: angle_to(&null, &t.weights()),
        minor_check: minor_errors(t, &a)?.0,
        spectral_radius,
    })
}

fn angle_to(v: &[f64; 4], w: &[f64; 4]) -> f64 {
    let norm = |x: &[f64; 4]| x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (nv, nw) = (norm(v), norm(w));
    let dot: f64 = (0..4).map(|i| v[i] * w[i]).sum::<f64>() / (nv * nw);
    let perp = (0..4)
        .map(|i| v[i] / nv - dot * w[i] / nw)
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt();
    perp.atan2(dot.abs())
}

fn face_perimeter_product(t: &ConformalTetra) -> f64 {
    (0..4)
        .map(|omit| {
            let [i, j, k] = others(omit);
            t.perimeter(i, j, k)
        })
        .product()
}

/// Closed form of `det A(i, j)`, the minor of the Jacobian with row `i` and
/// column `j` removed: `(−1)^{i+j+1} · 288 V r_i r_j / (Π r · Π P)`.
pub fn minor_closed_form(t: &ConformalTetra, i: usize, j: usize) -> Result<f64> {
    let v = t.volume()?;
    let r = t.weights();
    let sign = if (i + j) % 2 == 0 { -1.0 } else { 1.0 };
    let weight_product: f64 = r.iter().product();
    Ok(sign * 288.0 * v * r[i] * r[j] / (weight_product * face_perimeter_product(t)))
}

/// The reciprocal form `(−1)^{i+j+1} · 288 V / (r_i r_j Π P)`, which agrees
/// with [`minor_closed_form`] only when `r_i r_j = r_k r_l`.
fn minor_reciprocal_form(t: &ConformalTetra, i: usize, j: usize) -> Result<f64> {
    let v = t.volume()?;
    let r = t.weights();
    let sign = if (i + j) % 2 == 0 { -1.0 } else { 1.0 };
    Ok(sign * 288.0 * v / (r[i] * r[j] * face_perimeter_product(t)))
}

fn minor_errors(t: &ConformalTetra, a: &Mat4) -> Result<(f64, f64)> {
    let mut worst = 0.0f64;
    let mut worst_reciprocal = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let numeric = det3(&minor4(a, i, j));
            let closed = minor_closed_form(t, i, j)?;
            let reciprocal = minor_reciprocal_form(t, i, j)?;
            worst = worst.max((numeric - closed).abs() / closed.abs());
            worst_reciprocal =
                worst_reciprocal.max((numeric - reciprocal).abs() / reciprocal.abs());
        }
    }
    Ok((worst, worst_reciprocal))
}

/// Worst relative error over all 16 minors.
pub fn minor_determinant_check(t: &ConformalTetra) -> Result<f64> {
    let a = t.omega_block()?.dalpha;
    Ok(minor_errors(t, &a)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorReport {
    pub worst_relative_error: f64,
    /// Same comparison against the reciprocal form.
    pub reciprocal_form_error: f64,
    /// `|det A| / ‖A‖_max⁴`.
    pub full_determinant_ratio: f64,
}

pub fn minor_determinant_report(t: &ConformalTetra) -> Result<MinorReport> {
    let a = t.omega_block()?.dalpha;
    let (worst_relative_error, reciprocal_form_error) = minor_errors(t, &a)?;
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(MinorReport {
        worst_relative_error,
        reciprocal_form_error,
        full_determinant_ratio: det(a).abs() / scale.powi(4),
    })
}
