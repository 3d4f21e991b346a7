//! Tiny dense solvers for the 2x2 / 3x3 systems the estimators need.

use crate::error::{Error, Result};

/// Solves A x = b for a 3x3 system by Gaussian elimination with partial
/// pivoting.
pub fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Result<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::Singular("3x3 solve: zero pivot".into()));
        }
        m.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut s = m[i][3];
        for k in (i + 1)..3 {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
        if !x[i].is_finite() {
            return Err(Error::Singular("3x3 solve: non-finite solution".into()));
        }
    }
    Ok(x)
}

/// Inverse of a symmetric 3x3 matrix via the adjugate.
pub fn inv3(a: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::Singular(format!("3x3 inverse: det = {det}")));
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c0, c1) = match j {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let cof = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // adjugate transposes, symmetric input keeps it simple either way
            out[j][i] = sign * cof * inv_det;
        }
    }
    Ok(out)
}

/// Solves the 2x2 system [[a, b], [b, c]] x = rhs (symmetric).
pub fn solve2_sym(a: f64, b: f64, c: f64, rhs: &[f64; 2]) -> Result<[f64; 2]> {
    let det = a * c - b * b;
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::Singular(format!("2x2 solve: det = {det}")));
    }
    Ok([
        (c * rhs[0] - b * rhs[1]) / det,
        (a * rhs[1] - b * rhs[0]) / det,
    ])
}

#[cfg(test)]
pub fn mat_vec3(a: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

/// Eigenvalues of a symmetric 3x3 matrix by the trigonometric solution of
/// the characteristic cubic, ascending order.
pub fn sym3_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut out = [e1, e2, e3];
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve_and_invert_roundtrip() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]];
        let b = [1.0, -2.0, 0.7];
        let x = solve3(&a, &b).unwrap();
        let back = mat_vec3(&a, &x);
        for i in 0..3 {
            assert_relative_eq!(back[i], b[i], max_relative = 1e-12, epsilon = 1e-12);
        }
        let inv = inv3(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let prod: f64 = (0..3).map(|k| a[i][k] * inv[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod, expect, max_relative = 1e-10, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn singular_matrices_error() {
        let a = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]];
        assert!(solve3(&a, &[1.0, 2.0, 3.0]).is_err());
        assert!(inv3(&a).is_err());
        assert!(solve2_sym(1.0, 1.0, 1.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn symmetric_2x2() {
        let x = solve2_sym(2.0, 0.5, 1.0, &[1.0, 2.0]).unwrap();
        assert_relative_eq!(2.0 * x[0] + 0.5 * x[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(0.5 * x[0] + 1.0 * x[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]];
        let ev = sym3_eigenvalues(&a);
        for &l in &ev {
            // det(A - l I) = 0
            let m = [
                [a[0][0] - l, a[0][1], a[0][2]],
                [a[1][0], a[1][1] - l, a[1][2]],
                [a[2][0], a[2][1], a[2][2] - l],
            ];
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            assert!(det.abs() < 1e-9, "eigenvalue {l} residual {det}");
        }
        assert!(ev[0] <= ev[1] && ev[1] <= ev[2]);
        // trace preserved
        assert_relative_eq!(ev.iter().sum::<f64>(), 9.0, max_relative = 1e-12);
    }
}
