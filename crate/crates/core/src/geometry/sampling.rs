//! Seeded chart points and the CSV form of curvature reports.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PhaseModel, RANK_TOL};
use crate::error::Result;
use crate::group::random_unit;

/// A point `(x, t, y)` of the local chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub x: Vec<f64>,
    pub t: f64,
    pub y: Vec<f64>,
}

/// Which slice of the chart to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// Independent `x'`, `y'` and free `y_{2n} ∈ [−1, 1]`.
    Generic,
    /// `y' = x'`, free `y_{2n}`.
    Diagonal,
    /// Independent `x'`, `y'`, with `y_{2n}` solving `σ = 0`.
    Fold,
    /// `y' = x'` and `σ = 0`.
    DiagonalFold,
}

fn ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let dir = random_unit(rng, dim);
    let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    dir.into_iter().map(|v| v * r).collect()
}

/// `count` chart points: `y'` in the ball of radius 0.1, `x̲ = e_{2n}` plus a
/// perturbation of size at most 0.1, `t ∈ [1, 2]`, `½ ≤ |ȳ| ≤ 2`.
pub fn sample_points(pm: &PhaseModel, kind: SampleKind, count: usize, seed: u64) -> Vec<ChartPoint> {
    let s = pm.structure();
    let (hn, m) = (2 * s.n(), s.m());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut x = ball(&mut rng, hn, 0.1);
            x[hn - 1] += 1.0;
            x.extend((0..m).map(|_| rng.gen_range(-1.0..1.0)));
            let t = rng.gen_range(1.0..2.0);
            let yp = match kind {
                SampleKind::Diagonal | SampleKind::DiagonalFold => x[..hn - 1].to_vec(),
                SampleKind::Generic | SampleKind::Fold => ball(&mut rng, hn - 1, 0.1),
            };
            // uniform in the annulus ½ ≤ |ȳ| ≤ 2 with respect to volume
            let (lo, hi) = (0.5f64.powi(m as i32), 2f64.powi(m as i32));
            let r = rng.gen_range(lo..hi).powf(1.0 / m as f64);
            let ybar: Vec<f64> = random_unit(&mut rng, m).into_iter().map(|v| v * r).collect();
            let y2n = match kind {
                SampleKind::Generic | SampleKind::Diagonal => rng.gen_range(-1.0..1.0),
                SampleKind::Fold | SampleKind::DiagonalFold => pm.fold_height(&x, t, &ybar).expect("dimensions match"),
            };
            let mut y = yp;
            y.push(y2n);
            y.extend(ybar);
            ChartPoint { x, t, y }
        })
        .collect()
}

pub const GEOMETRY_CSV_HEADER: &str =
    "kind,index,t,sigma,rank_xi,spatial_rank,rank_curv,c_value,c_bound,sv_min_xi,sv_min_curv,det_spatial,det_reduced,x,y,sv_xi,sv_curv";

/// Ranks, determinants and curvature data at one chart point. For fold
/// points the curvature rank is that of the fold cone and `c` is not defined.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCertificate {
    pub kind: SampleKind,
    pub index: usize,
    pub t: f64,
    pub sigma: f64,
    pub rank_xi: usize,
    pub spatial_rank: usize,
    pub rank_curv: usize,
    pub c_value: Option<f64>,
    pub c_bound: Option<f64>,
    pub sv_min_xi: f64,
    /// Smallest singular value counted in `rank_curv`.
    pub sv_min_curv: f64,
    pub det_spatial: f64,
    pub det_reduced: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sv_xi: Vec<f64>,
    pub sv_curv: Vec<f64>,
}

impl SampleKind {
    pub fn is_fold(self) -> bool {
        matches!(self, SampleKind::Fold | SampleKind::DiagonalFold)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SampleKind::Generic => "generic",
            SampleKind::Diagonal => "diagonal",
            SampleKind::Fold => "fold",
            SampleKind::DiagonalFold => "diagonal-fold",
        }
    }

    /// `(rank Ξ_y, rank ΠΞ_y, curvature rank)` expected on a nondegenerate structure.
    pub fn expected_ranks(self, d: usize) -> (usize, usize, usize) {
        if self.is_fold() {
            (d, d - 1, d - 2)
        } else {
            (d, d, d - 1)
        }
    }
}

fn smallest_counted(sv: &[f64], rank: usize) -> f64 {
    if rank == 0 {
        0.0
    } else {
        sv[rank - 1]
    }
}

pub fn certify_point(pm: &PhaseModel, kind: SampleKind, index: usize, p: &ChartPoint) -> Result<PointCertificate> {
    let s = pm.structure();
    let hn = 2 * s.n();
    let rank = pm.mixed_hessian_rank(&p.x, p.t, &p.y, RANK_TOL)?;
    let det_spatial = pm.spatial_determinant(&p.x, p.t, &p.y)?;
    let det_reduced = pm.reduced_matrix(&p.x, p.t, &p.y)?.determinant();
    let (rank_curv, sv_curv, c_value, c_bound) = if kind.is_fold() {
        let fold = pm.fold_cone_curvature(&p.x, p.t, &p.y[..hn - 1], &p.y[hn..])?;
        (fold.rank, fold.singular_values, None, None)
    } else {
        let rep = pm.curvature_report(&p.x, p.t, &p.y)?;
        // c is the diagonal entry of the block form, which exists only at x' = y'
        let diag = kind == SampleKind::Diagonal;
        (rep.rank_curv, rep.singular_values_curv, diag.then_some(rep.c_value), diag.then_some(rep.c_bound))
    };
    Ok(PointCertificate {
        kind,
        index,
        t: p.t,
        sigma: pm.sigma_value(&p.x, p.t, &p.y)?,
        rank_xi: rank.rank,
        spatial_rank: rank.spatial_rank,
        rank_curv,
        c_value,
        c_bound,
        sv_min_xi: smallest_counted(&rank.singular_values, rank.rank),
        sv_min_curv: smallest_counted(&sv_curv, rank_curv),
        det_spatial,
        det_reduced,
        x: p.x.clone(),
        y: p.y.clone(),
        sv_xi: rank.singular_values,
        sv_curv,
    })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|a| format!("{a:.9e}")).collect::<Vec<_>>().join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map(|a| format!("{a:.9e}")).unwrap_or_default()
}

impl PointCertificate {
    pub fn ranks(&self) -> (usize, usize, usize) {
        (self.rank_xi, self.spatial_rank, self.rank_curv)
    }

    pub fn csv_row(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{},{},{:.9e},{:.9e},{},{},{},{},{},{:.9e},{:.9e},{:.9e},{:.9e},{},{},{},{}",
            self.kind.as_str(),
            self.index,
            self.t,
            self.sigma,
            self.rank_xi,
            self.spatial_rank,
            self.rank_curv,
            opt(self.c_value),
            opt(self.c_bound),
            self.sv_min_xi,
            self.sv_min_curv,
            self.det_spatial,
            self.det_reduced,
            join(&self.x),
            join(&self.y),
            join(&self.sv_xi),
            join(&self.sv_curv)
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::standard_heisenberg;

    #[test]
    fn certificates_on_h2() {
        let pm = PhaseModel::new(standard_heisenberg(2));
        for kind in [SampleKind::Generic, SampleKind::Diagonal, SampleKind::Fold] {
            for (i, p) in sample_points(&pm, kind, 10, 5).iter().enumerate() {
                let c = certify_point(&pm, kind, i, p).unwrap();
                assert_eq!(c.ranks(), kind.expected_ranks(5));
                assert_eq!(c.csv_row().split(',').count(), GEOMETRY_CSV_HEADER.split(',').count());
                if kind.is_fold() {
                    assert!(c.det_spatial.abs() < 1e-10);
                } else {
                    assert!((c.det_spatial - c.det_reduced).abs() <= 1e-8 * c.det_spatial.abs());
                }
                if kind == SampleKind::Diagonal {
                    assert!(c.c_value.unwrap().abs() >= c.c_bound.unwrap() - 1e-8);
                } else {
                    assert!(c.c_value.is_none());
                }
            }
        }
    }

    #[test]
    fn sampling_respects_the_chart() {
        let pm = PhaseModel::new(standard_heisenberg(2));
        for kind in [SampleKind::Generic, SampleKind::Diagonal, SampleKind::Fold, SampleKind::DiagonalFold] {
            let pts = sample_points(&pm, kind, 50, 1);
            assert_eq!(pts, sample_points(&pm, kind, 50, 1));
            for p in &pts {
                assert!((1.0..2.0).contains(&p.t));
                let r = p.y[4].abs();
                assert!((0.5..=2.0).contains(&r));
                let dx: f64 = (0..4).map(|k| (p.x[k] - if k == 3 { 1.0 } else { 0.0 }).powi(2)).sum::<f64>().sqrt();
                assert!(dx <= 0.1);
                let sigma = pm.sigma_value(&p.x, p.t, &p.y).unwrap();
                if matches!(kind, SampleKind::Fold | SampleKind::DiagonalFold) {
                    assert!(sigma.abs() < 1e-14);
                }
                if matches!(kind, SampleKind::Diagonal | SampleKind::DiagonalFold) {
                    assert_eq!(&p.x[..3], &p.y[..3]);
                }
            }
        }
    }
}
