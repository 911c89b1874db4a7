//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Euclidean operator norm.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix (the reciprocal of `‖A⁻¹‖`).
pub fn smallest_singular_value(a: &DMatrix<f64>) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Number of singular values strictly above `rel_tol * σ_max`.
pub fn numerical_rank(sv: &[f64], rel_tol: f64) -> usize {
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Generalized cross product of the `k` columns of a `(k+1) × k` matrix.
///
/// The result is orthogonal to every column and its length equals the
/// `k`-volume spanned by them, so it vanishes exactly when the columns are
/// dependent.
pub fn cofactor_normal(cols: &DMatrix<f64>) -> DVector<f64> {
    let rows = cols.nrows();
    assert_eq!(rows, cols.ncols() + 1, "cofactor_normal needs a (k+1) x k matrix");
    let mut out = DVector::zeros(rows);
    for r in 0..rows {
        let minor = cols.clone().remove_row(r);
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        out[r] = sign * minor.determinant();
    }
    out
}

/// Unit left and right singular vectors belonging to the smallest singular
/// value of a square matrix.
pub fn null_pair(a: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let (idx, smin) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("nonempty matrix");
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let left = u.column(idx).into_owned();
    let right = v_t.row(idx).transpose().into_owned();
    (left, right, smin)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Neumaier-compensated sum in slice order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactor_normal_is_orthogonal() {
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.5, -1.0, 0.0, 3.0, 2.0, 1.0, 1.0, 0.0, -2.0, 4.0]);
        let n = cofactor_normal(&a);
        for c in 0..3 {
            assert!(n.dot(&a.column(c)).abs() < 1e-12);
        }
        assert!(n.norm() > 1e-3);
    }

    #[test]
    fn rank_counts_relative_to_top() {
        assert_eq!(numerical_rank(&[2.0, 1.0, 1e-9], 1e-7), 2);
        assert_eq!(numerical_rank(&[], 1e-7), 0);
        assert_eq!(numerical_rank(&[0.0, 0.0], 1e-7), 0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
