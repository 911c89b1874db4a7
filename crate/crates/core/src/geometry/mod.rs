//! Phase functions of the localized averaging operator and the numerical
//! certificates built on them.
//!
//! Points are written `x = (x', x_{2n}, x̄) ∈ ℝ^d`, `t ∈ [1, 2]` and
//! `y = (y', y_{2n}, ȳ) ∈ ℝ^d` with `d = 2n + m`. The sphere is parametrized
//! near its north pole by `ω = (w', g(w'))`, `g(w') = √(1 − |w'|²)`, and
//!
//! ```text
//! S^{2n}(x,t,y') = x_{2n} − t g(w),                 w = (x' − y')/t
//! S̄_i(x,t,y')    = x̄_i + (x̲ᵀJ_i − tΛ_i)(Pᵀy' − t g(w) e_{2n})
//! Φ(x,t,y)       = y_{2n} S^{2n} + Σ ȳ_i S̄_i
//! Ξ              = ∇_{x,t} Φ ∈ ℝ^{d+1}
//! ```
//!
//! `Ξ` is ordered as `(x_1, …, x_d, t)`; `Π` drops the last entry.

mod curvature;
mod sampling;

pub use curvature::{CurvatureReport, FoldReport, Transversality};
pub use sampling::{certify_point, sample_points, ChartPoint, PointCertificate, SampleKind, GEOMETRY_CSV_HEADER};

use nalgebra::{DMatrix, DVector};

use crate::error::{structure, Error, Result};
use crate::group::MetivierStructure;
use crate::linalg;

/// Relative singular-value threshold used for every rank in this module.
pub const RANK_TOL: f64 = 1e-7;

/// `g(w) = √(1 − |w|²)`.
pub fn g(w: &[f64]) -> f64 {
    (1.0 - linalg::dot(w, w)).sqrt()
}

/// `∇g(w) = −w / g`.
pub fn grad_g(w: &[f64]) -> Vec<f64> {
    let gw = g(w);
    w.iter().map(|v| -v / gw).collect()
}

/// `g''(w) = −I/g − w wᵀ/g³`.
pub fn hess_g(w: &[f64]) -> DMatrix<f64> {
    let gw = g(w);
    let k = w.len();
    DMatrix::from_fn(k, k, |a, b| {
        let diag = if a == b { -1.0 / gw } else { 0.0 };
        diag - w[a] * w[b] / gw.powi(3)
    })
}

/// `h(w) = ⟨w, ∇g(w)⟩ − g(w)`, which simplifies to `−1/g`.
pub fn h(w: &[f64]) -> f64 {
    -1.0 / g(w)
}

/// `∇h(w) = −w / g³`.
pub fn grad_h(w: &[f64]) -> Vec<f64> {
    let gw = g(w);
    w.iter().map(|v| -v / gw.powi(3)).collect()
}

/// The phase-function model attached to a structure.
#[derive(Debug, Clone)]
pub struct PhaseModel {
    s: MetivierStructure,
}

/// Quantities shared by all formulas at one `(x, t, y')`.
pub(crate) struct Local {
    pub g: f64,
    pub grad_g: Vec<f64>,
    pub hess_g: DMatrix<f64>,
    pub h: f64,
    pub grad_h: Vec<f64>,
    /// `c_i = (x̲ᵀJ_i − tΛ_i) e_{2n}`.
    pub c: Vec<f64>,
    /// `Y = Pᵀy' − t g(w) e_{2n}`.
    pub big_y: Vec<f64>,
}

impl PhaseModel {
    pub fn new(s: MetivierStructure) -> Self {
        Self { s }
    }

    pub fn structure(&self) -> &MetivierStructure {
        &self.s
    }

    fn hn(&self) -> usize {
        2 * self.s.n()
    }

    pub(crate) fn local(&self, x: &[f64], t: f64, yp: &[f64]) -> Result<Local> {
        let (hn, d, m) = (self.hn(), self.s.d(), self.s.m());
        if x.len() != d || yp.len() != hn - 1 {
            return Err(structure(format!("expected x of length {d} and y' of length {}, got {} and {}", hn - 1, x.len(), yp.len())));
        }
        if !(t > 0.0) {
            return Err(Error::Chart(format!("t must be positive, got {t}")));
        }
        let w: Vec<f64> = (0..hn - 1).map(|k| (x[k] - yp[k]) / t).collect();
        if linalg::dot(&w, &w) >= 1.0 {
            return Err(Error::Chart(format!("|x' − y'|/t = {} is not below 1", linalg::norm(&w))));
        }
        let gw = g(&w);
        let e = hn - 1;
        let c = (0..m)
            .map(|i| {
                let ji = &self.s.j()[i];
                (0..hn).map(|k| x[k] * ji[(k, e)]).sum::<f64>() - t * self.s.lambda()[(i, e)]
            })
            .collect();
        let mut big_y = yp.to_vec();
        big_y.push(-t * gw);
        Ok(Local { grad_g: grad_g(&w), hess_g: hess_g(&w), h: h(&w), grad_h: grad_h(&w), g: gw, c, big_y })
    }

    fn split<'a>(&self, y: &'a [f64]) -> Result<(&'a [f64], f64, &'a [f64])> {
        let (hn, d) = (self.hn(), self.s.d());
        if y.len() != d {
            return Err(structure(format!("expected y of length {d}, got {}", y.len())));
        }
        Ok((&y[..hn - 1], y[hn - 1], &y[hn..]))
    }

    /// `(S^{2n}, S̄)` at `(x, t, y')`.
    pub fn defining_functions(&self, x: &[f64], t: f64, yp: &[f64]) -> Result<(f64, Vec<f64>)> {
        let loc = self.local(x, t, yp)?;
        let hn = self.hn();
        let s2n = x[hn - 1] - t * loc.g;
        let bar = (0..self.s.m())
            .map(|i| {
                let ji = &self.s.j()[i];
                let mut v = x[hn + i];
                for b in 0..hn {
                    let row: f64 = (0..hn).map(|a| x[a] * ji[(a, b)]).sum::<f64>() - t * self.s.lambda()[(i, b)];
                    v += row * loc.big_y[b];
                }
                v
            })
            .collect();
        Ok((s2n, bar))
    }

    /// The defining functions before the shear of `x` is absorbed, obtained
    /// by substituting `y_{2n} = x_{2n} − t g(w)` into
    /// `ȳ = x̄ + tΛ(x̲ − y̲) + x̲ᵀJ y̲`. They differ from
    /// [`defining_functions`](Self::defining_functions) by a function of
    /// `(x, t)` alone.
    pub fn composed_defining_functions(&self, x: &[f64], t: f64, yp: &[f64]) -> Result<(f64, Vec<f64>)> {
        let loc = self.local(x, t, yp)?;
        let hn = self.hn();
        let s2n = x[hn - 1] - t * loc.g;
        let mut yu = yp.to_vec();
        yu.push(s2n);
        let bar = (0..self.s.m())
            .map(|i| {
                let ji = &self.s.j()[i];
                let lam: f64 = (0..hn).map(|k| self.s.lambda()[(i, k)] * (x[k] - yu[k])).sum();
                let form: f64 = (0..hn).map(|a| (0..hn).map(|b| x[a] * ji[(a, b)] * yu[b]).sum::<f64>()).sum();
                x[hn + i] + t * lam + form
            })
            .collect();
        Ok((s2n, bar))
    }

    /// `Φ(x, t, y)`.
    pub fn phi(&self, x: &[f64], t: f64, y: &[f64]) -> Result<f64> {
        let (yp, y2n, ybar) = self.split(y)?;
        let (s2n, bar) = self.defining_functions(x, t, yp)?;
        Ok(y2n * s2n + linalg::dot(ybar, &bar))
    }

    /// `σ = y_{2n} + (x̲ᵀJ^ȳ − tΛ^ȳ) e_{2n}`.
    pub fn sigma_value(&self, x: &[f64], t: f64, y: &[f64]) -> Result<f64> {
        let (_, y2n, ybar) = self.split(y)?;
        Ok(y2n - self.fold_height(x, t, ybar)?)
    }

    /// `𝔶_{2n}(ȳ) = (tΛ^ȳ − x̲ᵀJ^ȳ) e_{2n}`, the root of `σ = 0` in `y_{2n}`.
    pub fn fold_height(&self, x: &[f64], t: f64, ybar: &[f64]) -> Result<f64> {
        let (hn, m) = (self.hn(), self.s.m());
        if x.len() != self.s.d() || ybar.len() != m {
            return Err(structure("point dimensions do not match the structure"));
        }
        let e = hn - 1;
        let mut out = 0.0;
        for i in 0..m {
            let ji = &self.s.j()[i];
            let ci: f64 = (0..hn).map(|k| x[k] * ji[(k, e)]).sum::<f64>() - t * self.s.lambda()[(i, e)];
            out -= ybar[i] * ci;
        }
        Ok(out)
    }

    /// `∇_{x,t}S^{2n}` and `∇_{x,t}S̄_i`, i.e. the columns `Ξ_{y_{2n}}` and `Ξ_{ȳ_i}`.
    fn fiber_columns(&self, loc: &Local) -> Vec<DVector<f64>> {
        let (hn, d, m) = (self.hn(), self.s.d(), self.s.m());
        let mut cols = Vec::with_capacity(m + 1);
        let mut c0 = DVector::zeros(d + 1);
        for k in 0..hn - 1 {
            c0[k] = -loc.grad_g[k];
        }
        c0[hn - 1] = 1.0;
        c0[d] = loc.h;
        cols.push(c0);
        for i in 0..m {
            let ji = &self.s.j()[i];
            let mut col = DVector::zeros(d + 1);
            for a in 0..hn {
                col[a] = (0..hn).map(|b| ji[(a, b)] * loc.big_y[b]).sum();
            }
            for k in 0..hn - 1 {
                col[k] -= loc.c[i] * loc.grad_g[k];
            }
            col[hn + i] = 1.0;
            let ly: f64 = (0..hn).map(|b| self.s.lambda()[(i, b)] * loc.big_y[b]).sum();
            col[d] = loc.h * loc.c[i] - ly;
            cols.push(col);
        }
        cols
    }

    /// `Ξ = ∇_{x,t}Φ`, from the closed-form gradients of the defining functions.
    pub fn xi(&self, x: &[f64], t: f64, y: &[f64]) -> Result<DVector<f64>> {
        let (yp, y2n, ybar) = self.split(y)?;
        let loc = self.local(x, t, yp)?;
        let cols = self.fiber_columns(&loc);
        let mut out = &cols[0] * y2n;
        for (i, &yi) in ybar.iter().enumerate() {
            out += &cols[i + 1] * yi;
        }
        Ok(out)
    }

    /// The `(d+1) × d` matrix `Ξ_y = (Ξ_{y_1}, …, Ξ_{y_d})`.
    pub fn mixed_hessian(&self, x: &[f64], t: f64, y: &[f64]) -> Result<DMatrix<f64>> {
        let (yp, y2n, ybar) = self.split(y)?;
        let loc = self.local(x, t, yp)?;
        let (hn, d) = (self.hn(), self.s.d());
        let jy = self.s.j_theta(ybar);
        let ly = self.s.lambda_theta(ybar);
        let sigma = y2n + linalg::dot(ybar, &loc.c);
        let mut out = DMatrix::zeros(d + 1, d);
        for j in 0..hn - 1 {
            let mut v = DVector::zeros(hn);
            v[j] = 1.0;
            v[hn - 1] = loc.grad_g[j];
            let jv = &jy * &v;
            for k in 0..hn - 1 {
                out[(k, j)] = sigma / t * loc.hess_g[(k, j)] + jv[k];
            }
            out[(hn - 1, j)] = jv[hn - 1];
            out[(d, j)] = -sigma / t * loc.grad_h[j] - ly.dot(&v);
        }
        for (k, col) in self.fiber_columns(&loc).into_iter().enumerate() {
            out.set_column(hn - 1 + k, &col);
        }
        Ok(out)
    }

    /// Singular values and numerical rank of `Ξ_y` and of `ΠΞ_y`.
    pub fn mixed_hessian_rank(&self, x: &[f64], t: f64, y: &[f64], tol: f64) -> Result<RankReport> {
        let xy = self.mixed_hessian(x, t, y)?;
        let d = self.s.d();
        let full = linalg::singular_values(&xy);
        let spatial = linalg::singular_values(&xy.rows(0, d).into_owned());
        Ok(RankReport { rank: linalg::numerical_rank(&full, tol), spatial_rank: linalg::numerical_rank(&spatial, tol), singular_values: full, spatial_singular_values: spatial })
    }

    /// `det ΠΞ_y`.
    pub fn spatial_determinant(&self, x: &[f64], t: f64, y: &[f64]) -> Result<f64> {
        let d = self.s.d();
        Ok(self.mixed_hessian(x, t, y)?.rows(0, d).into_owned().determinant())
    }

    /// The reduced `(2n−1) × (2n−1)` matrix `t⁻¹σ g'' + PJ^ȳPᵀ + B − Bᵀ` with
    /// `B = PJ^ȳ e_{2n} ∇gᵀ`, whose determinant equals `det ΠΞ_y`.
    pub fn reduced_matrix(&self, x: &[f64], t: f64, y: &[f64]) -> Result<DMatrix<f64>> {
        let (yp, _, ybar) = self.split(y)?;
        let loc = self.local(x, t, yp)?;
        let sigma = self.sigma_value(x, t, y)?;
        let hn = self.hn();
        let jy = self.s.j_theta(ybar);
        let k = hn - 1;
        Ok(DMatrix::from_fn(k, k, |a, b| {
            let bab = jy[(a, hn - 1)] * loc.grad_g[b];
            let bba = jy[(b, hn - 1)] * loc.grad_g[a];
            sigma / t * loc.hess_g[(a, b)] + jy[(a, b)] + bab - bba
        }))
    }
}

/// Rank data for the mixed Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub spatial_singular_values: Vec<f64>,
    pub spatial_rank: usize,
}
