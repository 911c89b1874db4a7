//! Index-addressable lattices with cell weights, and Lebesgue norms on them.
//!
//! Every domain maps an index to a sample point and the measure of its cell.
//! Evaluation runs in parallel and is collected in index order; the final
//! reduction is sequential and compensated, so sums do not depend on the
//! number of threads.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{domain, structure, Result};
use crate::field::BoxND;
use crate::group::{GroupPoint, PointRef};
use crate::linalg::{self, compensated_sum};
use crate::sphere::{Frame, SphereRule};

pub trait Domain: Send + Sync + fmt::Debug {
    fn len(&self) -> usize;

    /// Sample point and cell measure for index `i < len()`.
    fn sample(&self, i: usize) -> (GroupPoint, f64);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn volume(&self) -> f64 {
        compensated_sum((0..self.len()).map(|i| self.sample(i).1))
    }
}

/// Evaluates `f` on every sample, in index order.
pub fn evaluate<D, F>(dom: &D, f: F) -> Vec<(f64, f64)>
where
    D: Domain + ?Sized,
    F: Fn(PointRef<'_>) -> f64 + Sync,
{
    (0..dom.len())
        .into_par_iter()
        .map(|i| {
            let (x, w) = dom.sample(i);
            (f(x.as_ref()), w)
        })
        .collect()
}

/// `(Σ w |v|^p)^{1/p}`, or `max |v|` over cells of positive weight when `p = ∞`.
pub fn norm_of_samples(samples: &[(f64, f64)], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(domain(format!("Lebesgue exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(samples.iter().filter(|(_, w)| *w > 0.0).map(|(v, _)| v.abs()).fold(0.0, f64::max));
    }
    let s = compensated_sum(samples.iter().map(|(v, w)| w * v.abs().powf(p)));
    Ok(s.powf(1.0 / p))
}

/// Riemann-sum approximation of `‖f‖_{L^p(dom)}`.
pub fn lp_norm<D, F>(f: F, p: f64, dom: &D) -> Result<f64>
where
    D: Domain + ?Sized,
    F: Fn(PointRef<'_>) -> f64 + Sync,
{
    if dom.is_empty() {
        return Err(domain("empty lattice"));
    }
    norm_of_samples(&evaluate(dom, f), p)
}

/// [`lp_norm`] on an axis-aligned box with `resolution[k]` midpoints along axis `k`.
pub fn lp_norm_box<F>(f: F, p: f64, bx: &BoxND, horizontal: usize, resolution: &[usize]) -> Result<f64>
where
    F: Fn(PointRef<'_>) -> f64 + Sync,
{
    if bx.is_empty() {
        return Err(domain("empty box"));
    }
    let dom = AffineBox::from_box(bx, horizontal, resolution)?;
    lp_norm(f, p, &dom)
}

fn unravel(mut i: usize, counts: &[usize], out: &mut [usize]) {
    for (k, &c) in counts.iter().enumerate() {
        out[k] = i % c;
        i /= c;
    }
}

fn midpoint(k: usize, count: usize) -> f64 {
    -1.0 + (2 * k + 1) as f64 / count as f64
}

/// The parallelepiped `{c + A s : s ∈ [−1, 1]^d}` with a midpoint grid in `s`.
#[derive(Debug, Clone)]
pub struct AffineBox {
    center: Vec<f64>,
    axes: DMatrix<f64>,
    counts: Vec<usize>,
    horizontal: usize,
    cell: f64,
}

impl AffineBox {
    /// `axes` holds the half-edge vectors as columns; `horizontal = 2n`.
    pub fn new(center: Vec<f64>, axes: DMatrix<f64>, counts: Vec<usize>, horizontal: usize) -> Result<Self> {
        let d = center.len();
        if axes.nrows() != d || axes.ncols() != d || counts.len() != d || horizontal > d {
            return Err(structure("affine box dimensions do not match"));
        }
        if counts.contains(&0) {
            return Err(domain("lattice counts must be positive"));
        }
        let det = axes.determinant().abs();
        let cell = det * 2f64.powi(d as i32) / counts.iter().product::<usize>() as f64;
        Ok(Self { center, axes, counts, horizontal, cell })
    }

    pub fn from_box(bx: &BoxND, horizontal: usize, counts: &[usize]) -> Result<Self> {
        let d = bx.dim();
        let center = (0..d).map(|k| 0.5 * (bx.lo[k] + bx.hi[k])).collect();
        let axes = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, (0..d).map(|k| 0.5 * (bx.hi[k] - bx.lo[k]))));
        Self::new(center, axes, counts.to_vec(), horizontal)
    }
}

impl Domain for AffineBox {
    fn len(&self) -> usize {
        self.counts.iter().product()
    }

    fn sample(&self, i: usize) -> (GroupPoint, f64) {
        let d = self.center.len();
        let mut idx = vec![0; d];
        unravel(i, &self.counts, &mut idx);
        let mut x = self.center.clone();
        for k in 0..d {
            let s = midpoint(idx[k], self.counts[k]);
            for r in 0..d {
                x[r] += self.axes[(r, k)] * s;
            }
        }
        (GroupPoint::from_coords(&x, self.horizontal / 2), self.cell)
    }
}

/// How the center coordinate of a slab follows the horizontal one.
#[derive(Debug, Clone, PartialEq)]
pub enum Shear {
    None,
    /// `x̄ = tΛx̲ + s`.
    Fixed(f64),
    /// `x̄ = |x̲|Λx̲ + s`.
    Radial,
}

fn shear_center(shear: &Shear, lambda: &DMatrix<f64>, ubar: &[f64]) -> Vec<f64> {
    let t = match shear {
        Shear::None => return vec![0.0; lambda.nrows()],
        Shear::Fixed(t) => *t,
        Shear::Radial => linalg::norm(ubar),
    };
    (0..lambda.nrows()).map(|i| t * (0..ubar.len()).map(|k| lambda[(i, k)] * ubar[k]).sum::<f64>()).collect()
}

/// `{x̲ = rθ : r₀ ≤ r ≤ r₁, θ ∈ S^{2n−1}} × {x̄ = shear(x̲) + s : |s_i| ≤ h}`
/// in polar coordinates; the shear has unit Jacobian.
#[derive(Debug, Clone)]
pub struct ShellSlab {
    pub radii: (f64, f64),
    pub radial_count: usize,
    pub directions: SphereRule,
    pub offset_half: f64,
    pub offset_count: usize,
    pub shear: Shear,
    pub lambda: DMatrix<f64>,
}

impl ShellSlab {
    fn m(&self) -> usize {
        self.lambda.nrows()
    }

    fn offsets(&self) -> usize {
        self.offset_count.pow(self.m() as u32)
    }
}

impl Domain for ShellSlab {
    fn len(&self) -> usize {
        self.radial_count * self.directions.len() * self.offsets()
    }

    fn sample(&self, i: usize) -> (GroupPoint, f64) {
        let m = self.m();
        let no = self.offsets();
        let (io, rest) = (i % no, i / no);
        let (id, ir) = (rest % self.directions.len(), rest / self.directions.len());
        let (r0, r1) = self.radii;
        let dr = (r1 - r0) / self.radial_count as f64;
        let r = r0 + (ir as f64 + 0.5) * dr;
        let theta = self.directions.node(id);
        let ubar: Vec<f64> = theta.iter().map(|v| r * v).collect();
        let mut bar = shear_center(&self.shear, &self.lambda, &ubar);
        let mut idx = vec![0; m];
        unravel(io, &vec![self.offset_count; m], &mut idx);
        for k in 0..m {
            bar[k] += self.offset_half * midpoint(idx[k], self.offset_count);
        }
        let dim = theta.len();
        let w_dir = self.directions.weights()[id] * crate::sphere::sphere_area(dim);
        let ds = (2.0 * self.offset_half / self.offset_count as f64).powi(m as i32);
        (GroupPoint::new(ubar, bar), r.powi(dim as i32 - 1) * dr * w_dir * ds)
    }
}

/// Slab adapted to a plane `V = span(u, v)`:
///
/// ```text
/// x̲ = r(cos φ u + sin φ v) + Σ b_k w_k,   |b| ≤ β,
/// x̄ = rΛx̲ + s,   |s| ≤ h,
/// ```
///
/// with `r ∈ [r₀, r₁]`, `φ ∈ [φ₀, φ₁]`. Requires `m = 1`.
#[derive(Debug, Clone)]
pub struct KnappSlab {
    pub frame: Frame,
    pub radii: (f64, f64),
    pub angles: (f64, f64),
    pub perp_radius: f64,
    pub offset_half: f64,
    pub lambda: DMatrix<f64>,
    /// Counts for `r`, `φ`, each `b_k`, and `s`.
    pub counts: [usize; 4],
}

impl Domain for KnappSlab {
    fn len(&self) -> usize {
        let [cr, ca, cb, cs] = self.counts;
        cr * ca * cb.pow(self.frame.w.len() as u32) * cs
    }

    fn sample(&self, i: usize) -> (GroupPoint, f64) {
        let [cr, ca, cb, cs] = self.counts;
        let pd = self.frame.w.len();
        let mut counts = vec![cs, ca, cr];
        counts.extend(std::iter::repeat_n(cb, pd));
        let mut idx = vec![0; counts.len()];
        unravel(i, &counts, &mut idx);
        let half_r = 0.5 * (self.radii.1 - self.radii.0);
        let half_a = 0.5 * (self.angles.1 - self.angles.0);
        let r = self.radii.0 + half_r * (1.0 + midpoint(idx[2], cr));
        let phi = self.angles.0 + half_a * (1.0 + midpoint(idx[1], ca));
        let s = self.offset_half * midpoint(idx[0], cs);
        let b: Vec<f64> = (0..pd).map(|k| self.perp_radius * midpoint(idx[3 + k], cb)).collect();
        let dim = self.frame.dim();
        let mut ubar = vec![0.0; dim];
        for k in 0..dim {
            ubar[k] = r * (phi.cos() * self.frame.u[k] + phi.sin() * self.frame.v[k]);
            for (bk, wk) in b.iter().zip(&self.frame.w) {
                ubar[k] += bk * wk[k];
            }
        }
        let mut bar = shear_center(&Shear::Fixed(r), &self.lambda, &ubar);
        bar[0] += s;
        let inside = linalg::dot(&b, &b) <= self.perp_radius * self.perp_radius;
        let w = if inside {
            let db = (2.0 * self.perp_radius / cb as f64).powi(pd as i32);
            r * (2.0 * half_r / cr as f64) * (2.0 * half_a / ca as f64) * db * (2.0 * self.offset_half / cs as f64)
        } else {
            0.0
        };
        (GroupPoint::new(ubar, bar), w)
    }
}
