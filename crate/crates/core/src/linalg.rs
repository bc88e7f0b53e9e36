//! Small dense helpers: determinants and a cyclic Jacobi eigensolver.

pub type Mat4 = [[f64; 4]; 4];

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det<const N: usize>(mut m: [[f64; N]; N]) -> f64 {
    let mut det = 1.0;
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..N {
            let factor = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    det
}

/// The 3×3 matrix left after deleting `row` and `col`.
pub fn minor4(m: &Mat4, row: usize, col: usize) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (oi, i) in (0..4).filter(|&i| i != row).enumerate() {
        for (oj, j) in (0..4).filter(|&j| j != col).enumerate() {
            out[oi][oj] = m[i][j];
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: [f64; 4],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [[f64; 4]; 4],
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &Mat4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += a[i][j] * a[i][j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls to
/// `tol` times the norm of the input (or reaches exact zero).
pub fn jacobi_eigen(matrix: &Mat4, tol: f64) -> SymmetricEigen {
    const MAX_SWEEPS: usize = 64;
    let mut a = *matrix;
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS && off_diagonal_norm(&a) > tol * scale {
        sweeps += 1;
        for p in 0..3 {
            for q in (p + 1)..4 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.map(|k| a[k][k]);
    let vectors = order.map(|k| [v[0][k], v[1][k], v[2][k], v[3][k]]);
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn determinants_agree() {
        let m = [[2.0, -1.0, 0.5], [0.3, 4.0, 1.0], [1.0, 1.0, -3.0]];
        assert_relative_eq!(det(m), det3(&m), max_relative = 1e-14);
        assert_eq!(det([[1.0, 2.0], [2.0, 4.0]]), 0.0);
    }

    #[test]
    fn jacobi_reconstructs() {
        let m = [
            [4.0, 1.0, -2.0, 0.5],
            [1.0, 3.0, 0.0, 1.5],
            [-2.0, 0.0, -1.0, 0.25],
            [0.5, 1.5, 0.25, 2.0],
        ];
        let e = jacobi_eigen(&m, 1e-15);
        for k in 0..4 {
            let v = e.vectors[k];
            for i in 0..4 {
                let mv: f64 = (0..4).map(|j| m[i][j] * v[j]).sum();
                assert!((mv - e.values[k] * v[i]).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = (0..4).map(|i| m[i][i]).sum();
        assert_relative_eq!(e.values.iter().sum::<f64>(), trace, max_relative = 1e-13);
    }
}
