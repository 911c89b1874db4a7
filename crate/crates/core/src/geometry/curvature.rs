//! Normal vectors, curvature matrices and the fold structure of `ΠΞ_y`.

use nalgebra::{DMatrix, DVector};

use super::{PhaseModel, RANK_TOL};
use crate::error::{domain, Error, Result};
use crate::linalg;

const FD_STEP: f64 = 1e-4;

/// Central difference refined once by Richardson extrapolation.
fn derivative<F>(f: F, step: f64) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let central = |s: f64| -> Result<DVector<f64>> { Ok((f(s)? - f(-s)?) / (2.0 * s)) };
    let coarse = central(step)?;
    let fine = central(step / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

fn symmetrize(c: &DMatrix<f64>) -> DMatrix<f64> {
    (c + c.transpose()) * 0.5
}

/// One row of the geometry certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub x: Vec<f64>,
    pub t: f64,
    pub y: Vec<f64>,
    pub sigma: f64,
    /// `N = (α', α_{2n}, ᾱ, α_{d+1})`.
    pub normal: Vec<f64>,
    pub c_value: f64,
    /// `t⁻¹|ȳ||α̲|(σ_min(J^ϑ) − ‖Λ^ϑ‖)`.
    pub c_bound: f64,
    pub singular_values_xi: Vec<f64>,
    pub singular_values_curv: Vec<f64>,
    pub rank_xi: usize,
    pub rank_curv: usize,
}

/// Curvature data of the fold cone `{ΠΞ : σ = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// `ν = (α̲, ᾱ)`, unit normal with `γ ≥ 0`.
    pub normal: Vec<f64>,
    /// `γ = α̲ᵀJ^ȳ e_{2n}`.
    pub gamma: f64,
    pub curvature: DMatrix<f64>,
}

/// Directional derivatives of `det ΠΞ_y` along the kernel and cokernel fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Transversality {
    pub left: f64,
    pub right: f64,
    /// Unit kernel vector `b` of `ΠΞ_y`.
    pub kernel: Vec<f64>,
    /// Unit cokernel vector `a` of `ΠΞ_y`.
    pub cokernel: Vec<f64>,
    /// `−e_{2n}ᵀJ^ȳPᵀb'`.
    pub b2n_predicted: f64,
}

impl PhaseModel {
    /// Unit normal to the columns of `Ξ_y`, oriented so that `α_{2n} ≥ 0`.
    pub fn normal_vector(&self, x: &[f64], t: f64, y: &[f64]) -> Result<DVector<f64>> {
        let xy = self.mixed_hessian(x, t, y)?;
        let sv = linalg::singular_values(&xy);
        if linalg::numerical_rank(&sv, RANK_TOL) < xy.ncols() {
            return Err(Error::Degenerate("Ξ_y is rank deficient, the normal is not defined".into()));
        }
        let nv = linalg::cofactor_normal(&xy);
        let mut nv = &nv / nv.norm();
        let e = 2 * self.structure().n() - 1;
        let d = self.structure().d();
        let pivot = if nv[e].abs() > 1e-14 { nv[e] } else { nv[d] };
        if pivot < 0.0 {
            nv = -nv;
        }
        Ok(nv)
    }

    /// `𝒞^N_{jl} = ∂_{y_l}⟨N, Ξ_{y_j}⟩`, differentiated numerically from the
    /// analytic `Ξ_y`; returns the symmetrized matrix and its rank.
    pub fn curvature_matrix(&self, x: &[f64], t: f64, y: &[f64], normal: &DVector<f64>) -> Result<(DMatrix<f64>, usize)> {
        let d = self.structure().d();
        if normal.len() != d + 1 {
            return Err(Error::Structure(format!("normal must have length {}", d + 1)));
        }
        let mut c = DMatrix::zeros(d, d);
        for l in 0..d {
            let col = derivative(
                |s| {
                    let mut yv = y.to_vec();
                    yv[l] += s;
                    Ok(self.mixed_hessian(x, t, &yv)?.tr_mul(normal))
                },
                FD_STEP,
            )?;
            c.set_column(l, &col);
        }
        let c = symmetrize(&c);
        let rank = linalg::numerical_rank(&linalg::singular_values(&c), RANK_TOL);
        Ok((c, rank))
    }

    /// `c = t⁻¹α̲ᵀJ^ȳe_{2n} − t⁻²α_{d+1}σ − t⁻¹α_{d+1}Λ^ȳe_{2n}`.
    pub fn c_value(&self, x: &[f64], t: f64, y: &[f64], normal: &DVector<f64>) -> Result<f64> {
        let s = self.structure();
        let (hn, d) = (2 * s.n(), s.d());
        let ybar = &y[hn..];
        let sigma = self.sigma_value(x, t, y)?;
        let jy = s.j_theta(ybar);
        let ly = s.lambda_theta(ybar);
        let a_top: f64 = (0..hn).map(|k| normal[k] * jy[(k, hn - 1)]).sum();
        let ad = normal[d];
        Ok(a_top / t - ad * sigma / (t * t) - ad * ly[hn - 1] / t)
    }

    /// The lower bound `t⁻¹|ȳ||α̲|(σ_min(J^ϑ) − ‖Λ^ϑ‖)`, `ϑ = ȳ/|ȳ|`.
    pub fn c_lower_bound(&self, t: f64, y: &[f64], normal: &DVector<f64>) -> f64 {
        let s = self.structure();
        let hn = 2 * s.n();
        let ybar = &y[hn..];
        let r = linalg::norm(ybar);
        let theta: Vec<f64> = ybar.iter().map(|v| v / r).collect();
        let margin = linalg::smallest_singular_value(&s.j_theta(&theta)) - s.lambda_theta(&theta).norm();
        let alpha = normal.rows(0, hn).norm();
        r * alpha * margin / t
    }

    /// The block form `[[c I_{2n−1}, PA], [AᵀPᵀ, 0]]` of `𝒞^N` at `x' = y'`.
    pub fn curvature_block_form(&self, x: &[f64], t: f64, y: &[f64], normal: &DVector<f64>) -> Result<DMatrix<f64>> {
        let s = self.structure();
        let (hn, d, m) = (2 * s.n(), s.d(), s.m());
        let c = self.c_value(x, t, y, normal)?;
        let alpha: Vec<f64> = (0..hn).map(|k| normal[k]).collect();
        let ad = normal[d];
        let mut a = DMatrix::zeros(hn, m + 1);
        for k in 0..hn {
            a[(k, 0)] = -alpha[k] / t;
        }
        for i in 0..m {
            let ji = &s.j()[i];
            let ci = (0..hn).map(|k| x[k] * ji[(k, hn - 1)]).sum::<f64>() - t * s.lambda()[(i, hn - 1)];
            for k in 0..hn {
                let ajk: f64 = (0..hn).map(|r| alpha[r] * ji[(r, k)]).sum();
                a[(k, i + 1)] = ajk - ci * alpha[k] / t - ad * s.lambda()[(i, k)];
            }
        }
        let mut out = DMatrix::zeros(d, d);
        for j in 0..hn - 1 {
            out[(j, j)] = c;
            for k in 0..=m {
                out[(j, hn - 1 + k)] = a[(j, k)];
                out[(hn - 1 + k, j)] = a[(j, k)];
            }
        }
        Ok(out)
    }

    /// Normal, curvature matrix, `c` and the ranks at one point.
    pub fn curvature_report(&self, x: &[f64], t: f64, y: &[f64]) -> Result<CurvatureReport> {
        let rank = self.mixed_hessian_rank(x, t, y, RANK_TOL)?;
        let normal = self.normal_vector(x, t, y)?;
        let (curv, rank_curv) = self.curvature_matrix(x, t, y, &normal)?;
        Ok(CurvatureReport {
            x: x.to_vec(),
            t,
            y: y.to_vec(),
            sigma: self.sigma_value(x, t, y)?,
            c_value: self.c_value(x, t, y, &normal)?,
            c_bound: self.c_lower_bound(t, y, &normal),
            normal: normal.iter().copied().collect(),
            singular_values_xi: rank.singular_values,
            singular_values_curv: linalg::singular_values(&curv),
            rank_xi: rank.rank,
            rank_curv,
        })
    }

    /// Tangent columns `ξ_{y_j}` (`j < 2n`) and `ξ_{ȳ_i}` of
    /// `ξ(y', ȳ) = ΠΞ(x, t, y', 𝔶_{2n}(ȳ), ȳ)`.
    fn fold_tangents(&self, x: &[f64], t: f64, yp: &[f64], ybar: &[f64]) -> Result<DMatrix<f64>> {
        let s = self.structure();
        let (hn, d, m) = (2 * s.n(), s.d(), s.m());
        let mut y = yp.to_vec();
        y.push(self.fold_height(x, t, ybar)?);
        y.extend_from_slice(ybar);
        let xy = self.mixed_hessian(x, t, &y)?;
        let mut out = DMatrix::zeros(d, d - 1);
        for j in 0..hn - 1 {
            out.set_column(j, &xy.column(j).rows(0, d));
        }
        for i in 0..m {
            let mut unit = vec![0.0; m];
            unit[i] = 1.0;
            let dy = self.fold_height(x, t, &unit)?;
            let col = xy.column(hn + i).rows(0, d) + xy.column(hn - 1).rows(0, d) * dy;
            out.set_column(hn - 1 + i, &col);
        }
        Ok(out)
    }

    /// Curvature of the fold cone at `(y', ȳ)`; the rank should be `d − 2`.
    pub fn fold_cone_curvature(&self, x: &[f64], t: f64, yp: &[f64], ybar: &[f64]) -> Result<FoldReport> {
        let s = self.structure();
        let (hn, d) = (2 * s.n(), s.d());
        if linalg::norm(ybar) == 0.0 {
            return Err(domain("the fold cone needs ȳ ≠ 0"));
        }
        let tangents = self.fold_tangents(x, t, yp, ybar)?;
        let sv = linalg::singular_values(&tangents);
        if linalg::numerical_rank(&sv, RANK_TOL) < d - 1 {
            return Err(Error::Degenerate("fold tangent frame is rank deficient".into()));
        }
        let nu = linalg::cofactor_normal(&tangents);
        let mut nu = &nu / nu.norm();
        let jy = s.j_theta(ybar);
        let gamma_of = |v: &DVector<f64>| (0..hn).map(|k| v[k] * jy[(k, hn - 1)]).sum::<f64>();
        if gamma_of(&nu) < 0.0 {
            nu = -nu;
        }
        let gamma = gamma_of(&nu);
        let z: Vec<f64> = yp.iter().chain(ybar).copied().collect();
        let mut curv = DMatrix::zeros(d - 1, d - 1);
        for l in 0..d - 1 {
            let col = derivative(
                |step| {
                    let mut zz = z.clone();
                    zz[l] += step;
                    Ok(self.fold_tangents(x, t, &zz[..hn - 1], &zz[hn - 1..])?.tr_mul(&nu))
                },
                FD_STEP,
            )?;
            curv.set_column(l, &col);
        }
        let curv = symmetrize(&curv);
        let sv = linalg::singular_values(&curv);
        Ok(FoldReport { rank: linalg::numerical_rank(&sv, RANK_TOL), singular_values: sv, normal: nu.iter().copied().collect(), gamma, curvature: curv })
    }

    /// Directional derivatives of `det ΠΞ_y` along the kernel field
    /// `V_L = Σ b_j ∂_{y_j}` and the cokernel field `V_R = Σ a_j ∂_{x_j}`,
    /// at a point with `x' = y'` and `σ = 0`.
    pub fn fold_transversality(&self, x: &[f64], t: f64, y: &[f64]) -> Result<Transversality> {
        let s = self.structure();
        let (hn, d) = (2 * s.n(), s.d());
        let off = (0..hn - 1).map(|k| (x[k] - y[k]).abs()).fold(0.0, f64::max);
        if off > 1e-12 {
            return Err(domain(format!("fold transversality is evaluated at x' = y', got |x' − y'| = {off:e}")));
        }
        let sigma = self.sigma_value(x, t, y)?;
        if sigma.abs() > 1e-10 {
            return Err(domain(format!("fold transversality needs σ = 0, got {sigma:e}")));
        }
        let pxy = self.mixed_hessian(x, t, y)?.rows(0, d).into_owned();
        let sv = linalg::singular_values(&pxy);
        let rank = linalg::numerical_rank(&sv, RANK_TOL);
        if rank != d - 1 {
            return Err(Error::Degenerate(format!("ΠΞ_y has rank {rank}, not {}; not a fold point", d - 1)));
        }
        let (a, b, _) = linalg::null_pair(&pxy);
        let det_y = |step: f64| -> Result<DVector<f64>> {
            let yv: Vec<f64> = y.iter().zip(b.iter()).map(|(v, bv)| v + step * bv).collect();
            Ok(DVector::from_element(1, self.spatial_determinant(x, t, &yv)?))
        };
        let det_x = |step: f64| -> Result<DVector<f64>> {
            let xv: Vec<f64> = x.iter().zip(a.iter()).map(|(v, av)| v + step * av).collect();
            Ok(DVector::from_element(1, self.spatial_determinant(&xv, t, y)?))
        };
        let left = derivative(det_y, FD_STEP)?[0];
        let right = derivative(det_x, FD_STEP)?[0];
        let jy = s.j_theta(&y[hn..]);
        let b2n_predicted = -(0..hn - 1).map(|k| jy[(hn - 1, k)] * b[k]).sum::<f64>();
        Ok(Transversality { left, right, kernel: b.iter().copied().collect(), cokernel: a.iter().copied().collect(), b2n_predicted })
    }
}
