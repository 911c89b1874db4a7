//! Two-step nilpotent groups of Métivier type in exponential coordinates.
//!
//! A structure is the datum `(n, m, J_1..J_m, Λ)`: the horizontal layer is
//! `ℝ^{2n}`, the center is `ℝ^m`, each `J_i` is a skew-symmetric `2n × 2n`
//! matrix, and `Λ` is an `m × 2n` tilt of the averaging surface. The product
//! is
//!
//! ```text
//! x · y = (x̲ + y̲, x̄ + ȳ + (x̲ᵀ J_i y̲)_{i=1..m})
//! ```
//!
//! and `δ_t(x̲, x̄) = (t x̲, t² x̄)` are automorphisms.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, structure, Error, Result};
use crate::linalg;

/// Group datum `(n, m, J, Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetivierStructure {
    n: usize,
    m: usize,
    j: Vec<DMatrix<f64>>,
    lambda: DMatrix<f64>,
}

/// A point `(x̲, x̄)` with `x̲ ∈ ℝ^{2n}` and `x̄ ∈ ℝ^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub ubar: Vec<f64>,
    pub bar: Vec<f64>,
}

impl GroupPoint {
    pub fn new(ubar: Vec<f64>, bar: Vec<f64>) -> Self {
        Self { ubar, bar }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self { ubar: vec![0.0; 2 * n], bar: vec![0.0; m] }
    }

    /// Concatenated coordinates `(x̲, x̄)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.ubar.clone();
        v.extend_from_slice(&self.bar);
        v
    }

    pub fn from_coords(coords: &[f64], n: usize) -> Self {
        Self { ubar: coords[..2 * n].to_vec(), bar: coords[2 * n..].to_vec() }
    }

    pub fn as_ref(&self) -> PointRef<'_> {
        PointRef { ubar: &self.ubar, bar: &self.bar }
    }

    /// Largest coordinate difference to `other`.
    pub fn max_abs_diff(&self, other: &GroupPoint) -> f64 {
        self.ubar
            .iter()
            .zip(&other.ubar)
            .chain(self.bar.iter().zip(&other.bar))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Borrowed view of a point, used on hot evaluation paths.
#[derive(Debug, Clone, Copy)]
pub struct PointRef<'a> {
    pub ubar: &'a [f64],
    pub bar: &'a [f64],
}

impl PointRef<'_> {
    pub fn to_owned(self) -> GroupPoint {
        GroupPoint { ubar: self.ubar.to_vec(), bar: self.bar.to_vec() }
    }
}

impl MetivierStructure {
    /// Validates shapes and exact skew-symmetry of every `J_i`.
    pub fn new(n: usize, j: Vec<DMatrix<f64>>, lambda: DMatrix<f64>) -> Result<Self> {
        if n == 0 {
            return Err(structure("n must be at least 1"));
        }
        let m = j.len();
        if m == 0 {
            return Err(structure("at least one commutator matrix J_i is required"));
        }
        for (i, ji) in j.iter().enumerate() {
            if ji.nrows() != 2 * n || ji.ncols() != 2 * n {
                return Err(structure(format!("J_{} has shape {}x{}, expected {}x{}", i + 1, ji.nrows(), ji.ncols(), 2 * n, 2 * n)));
            }
            if (ji + ji.transpose()).iter().any(|&v| v != 0.0) {
                return Err(structure(format!("J_{} is not skew-symmetric", i + 1)));
            }
        }
        if lambda.nrows() != m || lambda.ncols() != 2 * n {
            return Err(structure(format!("Λ has shape {}x{}, expected {}x{}", lambda.nrows(), lambda.ncols(), m, 2 * n)));
        }
        Ok(Self { n, m, j, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Topological dimension `d = 2n + m`.
    pub fn d(&self) -> usize {
        2 * self.n + self.m
    }

    pub fn j(&self) -> &[DMatrix<f64>] {
        &self.j
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    /// Replaces the tilt `Λ`.
    pub fn with_lambda(&self, lambda: DMatrix<f64>) -> Result<Self> {
        Self::new(self.n, self.j.clone(), lambda)
    }

    /// `J^θ = Σ θ_i J_i`.
    pub fn j_theta(&self, theta: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(2 * self.n, 2 * self.n);
        for (ji, &th) in self.j.iter().zip(theta) {
            out += ji * th;
        }
        out
    }

    /// `Λ^θ = Σ θ_i Λ_i` as a vector in `ℝ^{2n}`.
    pub fn lambda_theta(&self, theta: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(2 * self.n);
        for (i, &th) in theta.iter().enumerate() {
            out += self.lambda.row(i).transpose() * th;
        }
        out
    }

    /// Spectral norm of `Λ` viewed as an `m × 2n` matrix.
    pub fn lambda_norm(&self) -> f64 {
        linalg::spectral_norm(&self.lambda)
    }

    pub fn max_j_norm(&self) -> f64 {
        self.j.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn sum_j_norm(&self) -> f64 {
        self.j.iter().map(linalg::spectral_norm).sum()
    }

    /// The bilinear term `(x̲ᵀ J_i y̲)_i`.
    pub fn commutator(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.j.iter().map(|ji| bilinear(ji, x, y)).collect()
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::zeros(self.n, self.m)
    }

    pub fn check_point(&self, x: &GroupPoint) -> Result<()> {
        if x.ubar.len() != 2 * self.n || x.bar.len() != self.m {
            return Err(structure(format!(
                "point has dimensions ({}, {}), structure expects ({}, {})",
                x.ubar.len(),
                x.bar.len(),
                2 * self.n,
                self.m
            )));
        }
        Ok(())
    }
}

pub(crate) fn bilinear(j: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let dim = x.len();
    let mut acc = 0.0;
    for a in 0..dim {
        if x[a] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for b in 0..dim {
            row += j[(a, b)] * y[b];
        }
        acc += x[a] * row;
    }
    acc
}

/// Group product in exponential coordinates.
pub fn group_multiply(s: &MetivierStructure, x: &GroupPoint, y: &GroupPoint) -> Result<GroupPoint> {
    s.check_point(x)?;
    s.check_point(y)?;
    let ubar = x.ubar.iter().zip(&y.ubar).map(|(a, b)| a + b).collect();
    let twist = s.commutator(&x.ubar, &y.ubar);
    let bar = x.bar.iter().zip(&y.bar).zip(twist).map(|((a, b), c)| a + b + c).collect();
    Ok(GroupPoint { ubar, bar })
}

/// Group inverse `(-x̲, -x̄)`.
pub fn inverse(s: &MetivierStructure, x: &GroupPoint) -> Result<GroupPoint> {
    s.check_point(x)?;
    Ok(GroupPoint { ubar: x.ubar.iter().map(|v| -v).collect(), bar: x.bar.iter().map(|v| -v).collect() })
}

/// Automorphic dilation `δ_t(x̲, x̄) = (t x̲, t² x̄)`.
pub fn dilate(s: &MetivierStructure, t: f64, x: &GroupPoint) -> Result<GroupPoint> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("dilation parameter must be positive, got {t}")));
    }
    s.check_point(x)?;
    Ok(GroupPoint { ubar: x.ubar.iter().map(|v| t * v).collect(), bar: x.bar.iter().map(|v| t * t * v).collect() })
}

/// The Heisenberg group `ℍ^n` with `x̲ᵀJy̲ = ½ Σ_j (x_{n+j} y_j − x_j y_{n+j})` and `Λ = 0`.
pub fn standard_heisenberg(n: usize) -> MetivierStructure {
    MetivierStructure::new(n.max(1), vec![symplectic_matrix(n.max(1), 0.5)], DMatrix::zeros(1, 2 * n.max(1)))
        .expect("standard Heisenberg datum is valid")
}

/// `ℍ^n` normalized so that `J² = −I`, i.e. `x̲ᵀJy̲ = Σ_j (x_{n+j} y_j − x_j y_{n+j})`.
///
/// This is twice the standard form; the Knapp-type family and the circular
/// means on `ℍ^1` are stated in this normalization.
pub fn unit_heisenberg(n: usize) -> MetivierStructure {
    MetivierStructure::new(n.max(1), vec![symplectic_matrix(n.max(1), 1.0)], DMatrix::zeros(1, 2 * n.max(1)))
        .expect("unit Heisenberg datum is valid")
}

fn symplectic_matrix(n: usize, scale: f64) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(n + k, k)] = scale;
        j[(k, n + k)] = -scale;
    }
    j
}

/// Left multiplication by the quaternion units `i, j, k` on `ℍ ≅ ℝ⁴`
/// (basis `1, i, j, k`).
fn quaternion_unit(which: usize) -> DMatrix<f64> {
    // images of the basis vectors 1, i, j, k as (index, sign)
    let images: [(usize, f64); 4] = match which {
        0 => [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
        1 => [(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)],
        _ => [(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)],
    };
    let mut m = DMatrix::zeros(4, 4);
    for (col, (row, sign)) in images.into_iter().enumerate() {
        m[(row, col)] = sign;
    }
    m
}

/// Heisenberg-type group on `ℝ^{4·blocks} × ℝ^m`, `m ≤ 3`, with each `J_i`
/// block diagonal in copies of left multiplication by `i, j, k`.
pub fn quaternionic_htype(blocks: usize, m: usize) -> Result<MetivierStructure> {
    if blocks == 0 {
        return Err(domain("need at least one quaternionic block"));
    }
    if m == 0 || m > 3 {
        return Err(Error::Unsupported(format!("quaternionic construction supports 1 <= m <= 3, got m = {m}")));
    }
    let dim = 4 * blocks;
    assert!(m < radon_hurwitz(dim), "H-type groups require m < RH(2n)");
    let js = (0..m)
        .map(|u| {
            let unit = quaternion_unit(u);
            let mut big = DMatrix::zeros(dim, dim);
            for b in 0..blocks {
                big.view_mut((4 * b, 4 * b), (4, 4)).copy_from(&unit);
            }
            big
        })
        .collect();
    MetivierStructure::new(2 * blocks, js, DMatrix::zeros(m, dim))
}

/// Radon–Hurwitz number: for `k = (2ℓ+1)·2^{4p+q}` with `q ∈ {0,1,2,3}`,
/// `RH(k) = 8p + 2^q`.
///
/// The formula gives `RH(16) = 9`; a remark elsewhere lists the value 8 for
/// `2n = 16`, which is not what the formula produces.
pub fn radon_hurwitz(k: usize) -> usize {
    assert!(k >= 1, "RH(k) needs k >= 1");
    let a = k.trailing_zeros() as usize;
    let (p, q) = (a / 4, a % 4);
    8 * p + (1 << q)
}

/// Finite quasi-uniform subsets of `S^{m−1}` used to certify conditions
/// that are quantified over all directions of the center.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGrid {
    pub points: Vec<Vec<f64>>,
}

impl ThetaGrid {
    /// Default density: `{±1}` for `m = 1`, 360 points for `m = 2`, about
    /// `10⁴` spiral points for `m = 3`.
    pub fn default_for(m: usize) -> Self {
        match m {
            1 => Self::with_resolution(1, 2),
            2 => Self::with_resolution(2, 360),
            3 => Self::with_resolution(3, 10_000),
            _ => Self::with_resolution(m, 10_000),
        }
    }

    pub fn with_resolution(m: usize, count: usize) -> Self {
        let points = match m {
            1 => vec![vec![1.0], vec![-1.0]],
            2 => (0..count.max(1))
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / count.max(1) as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
            3 => fibonacci_sphere(count.max(2)),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + m as u64);
                (0..count.max(1)).map(|_| random_unit(&mut rng, m)).collect()
            }
        };
        Self { points }
    }
}

fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = linalg::norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Result of evaluating `min_θ [‖(J^θ)⁻¹‖⁻¹ − ‖Λ^θ‖]` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallnessMargin {
    pub margin: f64,
    /// False when some `J^θ` on the grid was singular.
    pub nondegenerate: bool,
    pub worst_theta: Vec<f64>,
}

impl SmallnessMargin {
    pub fn certified(&self) -> bool {
        self.nondegenerate && self.margin > 0.0
    }
}

/// Smallest value of `σ_min(J^θ) − ‖Λ^θ‖` over the grid.
pub fn smallness_margin(s: &MetivierStructure, grid: &ThetaGrid) -> Result<SmallnessMargin> {
    let mut best = SmallnessMargin { margin: f64::INFINITY, nondegenerate: true, worst_theta: Vec::new() };
    for theta in &grid.points {
        if theta.len() != s.m() {
            return Err(structure(format!("grid direction has length {}, structure has m = {}", theta.len(), s.m())));
        }
        let jt = s.j_theta(theta);
        let smin = linalg::smallest_singular_value(&jt);
        let scale = linalg::spectral_norm(&jt).max(1.0);
        let lam = s.lambda_theta(theta).norm();
        let value = if smin <= 1e-14 * scale {
            best.nondegenerate = false;
            -lam
        } else {
            smin - lam
        };
        if value < best.margin {
            best.margin = value;
            best.worst_theta = theta.clone();
        }
    }
    Ok(best)
}

/// Whether every `J^θ` on the grid is invertible.
pub fn is_nondegenerate(s: &MetivierStructure, grid: &ThetaGrid) -> bool {
    grid.points.iter().all(|theta| {
        let jt = s.j_theta(theta);
        linalg::smallest_singular_value(&jt) > 1e-14 * linalg::spectral_norm(&jt).max(1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn standard_form_matches_bilinear_form() {
        let s = standard_heisenberg(1);
        let j = &s.j()[0];
        // ½ (x₂y₁ − x₁y₂)
        assert_eq!(j[(1, 0)], 0.5);
        assert_eq!(j[(0, 1)], -0.5);
        assert_eq!(j.transpose(), -j.clone());
        let x = [0.3, -1.2];
        let y = [2.0, 0.7];
        assert_abs_diff_eq!(bilinear(j, &x, &y), 0.5 * (x[1] * y[0] - x[0] * y[1]), epsilon = 1e-15);
        let sv = linalg::singular_values(j);
        assert!(sv.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn identity_and_inverse() {
        let s = standard_heisenberg(2);
        let x = GroupPoint::new(vec![1.0, -2.0, 0.5, 3.0], vec![0.25]);
        let e = s.identity();
        assert_eq!(group_multiply(&s, &x, &e).unwrap(), x);
        let xi = inverse(&s, &x).unwrap();
        assert_eq!(group_multiply(&s, &x, &xi).unwrap(), e);
    }

    #[test]
    fn dilation_examples() {
        let s = standard_heisenberg(1);
        let x = GroupPoint::new(vec![1.0, 0.0], vec![1.0]);
        assert_eq!(dilate(&s, 1.0, &x).unwrap(), x);
        assert_eq!(dilate(&s, 2.0, &x).unwrap(), GroupPoint::new(vec![2.0, 0.0], vec![4.0]));
        assert!(matches!(dilate(&s, 0.0, &x), Err(Error::Domain(_))));
        assert!(matches!(dilate(&s, -1.0, &x), Err(Error::Domain(_))));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let s = standard_heisenberg(1);
        let x = GroupPoint::new(vec![1.0, 0.0, 0.0], vec![1.0]);
        assert!(matches!(group_multiply(&s, &x, &x), Err(Error::Structure(_))));
    }

    #[test]
    fn rejects_non_skew() {
        let mut j = DMatrix::zeros(2, 2);
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -0.999;
        assert!(matches!(MetivierStructure::new(1, vec![j], DMatrix::zeros(1, 2)), Err(Error::Structure(_))));
    }

    #[test]
    fn radon_hurwitz_values() {
        assert_eq!(radon_hurwitz(1), 1);
        assert_eq!(radon_hurwitz(2), 2);
        assert_eq!(radon_hurwitz(4), 4);
        assert_eq!(radon_hurwitz(8), 8);
        assert_eq!(radon_hurwitz(12), 4);
        assert_eq!(radon_hurwitz(16), 9);
        for n in [1usize, 3, 5, 7] {
            assert_eq!(radon_hurwitz(2 * n), 2);
        }
        for k in (2..200).step_by(2) {
            assert!(radon_hurwitz(k) >= 2);
        }
    }

    #[test]
    fn quaternion_units() {
        let s = quaternionic_htype(1, 3).unwrap();
        for ji in s.j() {
            let sq = ji * ji;
            assert_eq!(sq, -DMatrix::<f64>::identity(4, 4));
        }
        let s1 = quaternionic_htype(2, 1).unwrap();
        let sv = linalg::singular_values(&s1.j()[0]);
        assert!(sv.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(matches!(quaternionic_htype(1, 4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn margins() {
        let m = smallness_margin(&standard_heisenberg(3), &ThetaGrid::default_for(1)).unwrap();
        assert_abs_diff_eq!(m.margin, 0.5, epsilon = 1e-14);
        let q = quaternionic_htype(1, 3).unwrap();
        let m = smallness_margin(&q, &ThetaGrid::with_resolution(3, 500)).unwrap();
        assert_abs_diff_eq!(m.margin, 1.0, epsilon = 1e-12);
        let tilted = standard_heisenberg(1).with_lambda(DMatrix::from_row_slice(1, 2, &[1.0, 0.0])).unwrap();
        let m = smallness_margin(&tilted, &ThetaGrid::default_for(1)).unwrap();
        assert_abs_diff_eq!(m.margin, -0.5, epsilon = 1e-14);
        assert!(!m.certified());
    }

    #[test]
    fn degenerate_commutator_is_flagged() {
        let s = MetivierStructure::new(1, vec![DMatrix::zeros(2, 2)], DMatrix::from_row_slice(1, 2, &[0.3, 0.4])).unwrap();
        let m = smallness_margin(&s, &ThetaGrid::default_for(1)).unwrap();
        assert!(!m.nondegenerate);
        assert_abs_diff_eq!(m.margin, -0.5, epsilon = 1e-14);
    }
}
