//! Small dense linear-algebra helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Orthonormal basis of the span of `vectors` (modified Gram–Schmidt, two passes).
///
/// Components smaller than `rel_tol` times the largest input norm are dropped.
pub fn orthonormal_basis(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let scale = vectors.iter().map(|v| norm2(v)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if scale == 0.0 {
        return basis;
    }
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= d * bi;
                }
            }
        }
        let nw = norm2(&w);
        if nw > rel_tol * scale {
            w.iter_mut().for_each(|x| *x /= nw);
            basis.push(w);
        }
    }
    basis
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for a square system by LU; `None` when singular.
pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let lu = a.clone().lu();
    lu.solve(&DVector::from_column_slice(b)).map(|x| x.iter().copied().collect())
}

/// Smallest singular value and its left singular vector.
pub fn smallest_left_singular(m: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let n = m.nrows();
    // Eigen-decomposition of M Mᵀ keeps the left factor available for wide matrices.
    let gram = m * m.transpose();
    let eig = gram.symmetric_eigen();
    let mut best = 0;
    for i in 1..n {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let v: Vec<f64> = eig.eigenvectors.column(best).iter().copied().collect();
    let sv = singular_values(m);
    let smallest = if sv.len() < n { 0.0 } else { sv[n - 1] };
    (smallest, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn basis_and_rank() {
        let vs = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]];
        assert_eq!(orthonormal_basis(&vs, 1e-10).len(), 2);
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(rank(&m, 1e-10), 1);
        assert!(orthonormal_basis(&[vec![0.0, 0.0]], 1e-10).is_empty());
    }

    #[test]
    fn smallest_vector() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5]);
        let (s, v) = smallest_left_singular(&m);
        assert!((s - 0.5).abs() < 1e-14);
        assert!((v[1].abs() - 1.0).abs() < 1e-12);
    }
}
