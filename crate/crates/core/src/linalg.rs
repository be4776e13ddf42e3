//! Closed-form 2×2 algebra over any [`Real`], plus a small dense solver.

use nalgebra::{Matrix3, Vector3};

use crate::jets::Real;

pub type Mat2<T> = [[T; 2]; 2];

pub fn det2<T: Real>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Inverse by the adjugate formula. Singular input yields non-finite entries.
pub fn inv2<T: Real>(m: &Mat2<T>) -> Mat2<T> {
    let r = det2(m).recip();
    [[m[1][1] * r, -m[0][1] * r], [-m[1][0] * r, m[0][0] * r]]
}

pub fn mul2<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn apply2<T: Real>(m: &Mat2<T>, v: [T; 2]) -> [T; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn quad2<T: Real>(m: &Mat2<T>, a: [T; 2], b: [T; 2]) -> T {
    let mb = apply2(m, b);
    a[0] * mb[0] + a[1] * mb[1]
}

pub fn scale2<T: Real>(m: &Mat2<T>, s: T) -> Mat2<T> {
    m.map(|row| row.map(|e| e * s))
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym_eigenvalues(m: &Mat2<f64>) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let r = half_diff.hypot(m[0][1]);
    [mean - r, mean + r]
}

/// Solve a 3×3 system given by its columns; `None` if numerically singular.
pub fn solve3(columns: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let m = Matrix3::from_columns(&columns.map(Vector3::from));
    let scale = m.abs().max().max(1e-300);
    if m.determinant().abs() < 1e-10 * scale.powi(3) {
        return None;
    }
    let x = m.lu().solve(&Vector3::from(rhs))?;
    Some([x[0], x[1], x[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = [[2.0, 0.5], [0.5, 3.0]];
        let p = mul2(&m, &inv2(&m));
        assert!((p[0][0] - 1.0).abs() < 1e-15 && p[0][1].abs() < 1e-15);
        assert!((p[1][1] - 1.0).abs() < 1e-15 && p[1][0].abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        assert_eq!(sym_eigenvalues(&[[3.0, 0.0], [0.0, 1.0]]), [1.0, 3.0]);
    }

    #[test]
    fn solve3_rejects_singular() {
        assert!(solve3(
            [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            [1.0; 3]
        )
        .is_none());
        let x = solve3(
            [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [1.0, 0.0, 1.0]],
            [3.0, 4.0, 1.0],
        )
        .unwrap();
        assert_eq!(x, [1.0, 1.0, 1.0]);
    }
}
