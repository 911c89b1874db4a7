//! Norm of `(ρI + B)⁻¹` for real skew-symmetric `B`.
//!
//! `B` is normal with spectrum `±iλ_k` (plus a zero when `N` is odd), so
//! `ρI + B` has singular values `√(ρ² + λ_k²)` and the inverse norm is
//! governed by the smallest `|λ_k|`, which equals `σ_min(B)`.

use nalgebra::DMatrix;

use crate::error::{structure, Result};
use crate::linalg;

/// Outcome of [`skew_inverse_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkewNorm {
    Finite(f64),
    Singular,
}

impl SkewNorm {
    pub fn value(self) -> Option<f64> {
        match self {
            SkewNorm::Finite(v) => Some(v),
            SkewNorm::Singular => None,
        }
    }
}

/// Relative threshold below which `σ_min(B)` counts as `det B = 0`.
const SINGULAR_REL: f64 = 1e-13;

/// `‖(ρI + B)⁻¹‖` in the spectral norm.
///
/// Even `N`: `|ρ|⁻¹` when `det B = 0`, otherwise `(ρ² + ‖B⁻¹‖⁻²)^{−1/2}`.
/// Odd `N`: always `|ρ|⁻¹`.
pub fn skew_inverse_norm(rho: f64, b: &DMatrix<f64>) -> Result<SkewNorm> {
    let n = b.nrows();
    if b.ncols() != n || n == 0 {
        return Err(structure(format!("expected a nonempty square matrix, got {}x{}", b.nrows(), b.ncols())));
    }
    let scale = b.amax().max(1.0);
    if (b + b.transpose()).amax() > 1e-14 * scale {
        return Err(structure("matrix is not skew-symmetric"));
    }
    if n % 2 == 1 {
        return Ok(if rho == 0.0 { SkewNorm::Singular } else { SkewNorm::Finite(rho.abs().recip()) });
    }
    let smin = linalg::smallest_singular_value(b);
    let singular_b = smin <= SINGULAR_REL * linalg::spectral_norm(b).max(f64::MIN_POSITIVE);
    Ok(match (rho == 0.0, singular_b) {
        (true, true) => SkewNorm::Singular,
        (false, true) => SkewNorm::Finite(rho.abs().recip()),
        _ => SkewNorm::Finite((rho * rho + smin * smin).sqrt().recip()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scaled_identity() {
        assert_eq!(skew_inverse_norm(2.0, &DMatrix::zeros(4, 4)).unwrap(), SkewNorm::Finite(0.5));
        assert_eq!(skew_inverse_norm(0.0, &DMatrix::zeros(2, 2)).unwrap(), SkewNorm::Singular);
    }

    #[test]
    fn planar_rotation() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let v = skew_inverse_norm(1.0, &b).unwrap().value().unwrap();
        assert_relative_eq!(v, 0.5f64.sqrt(), max_relative = 1e-15);
        assert_eq!(skew_inverse_norm(0.0, &b).unwrap(), SkewNorm::Finite(1.0));
    }

    #[test]
    fn odd_dimension() {
        let b = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0]);
        assert_eq!(skew_inverse_norm(-4.0, &b).unwrap(), SkewNorm::Finite(0.25));
        assert_eq!(skew_inverse_norm(0.0, &b).unwrap(), SkewNorm::Singular);
    }

    #[test]
    fn rejects_non_skew() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(skew_inverse_norm(1.0, &b).is_err());
    }
}
