//! The four power-law families. Constants default to values that reach the
//! asymptotic regime on dyadic ladders starting at `δ = 1/8`; all of them can
//! be overridden.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{ExampleInstance, Family};
use crate::averaging::TimeSelector;
use crate::error::{domain, structure, Error, Result};
use crate::field::{BoxND, ScalarField};
use crate::group::{unit_heisenberg, MetivierStructure, PointRef};
use crate::lattice::{AffineBox, KnappSlab, Shear, ShellSlab};
use crate::linalg::{dot, norm, spectral_norm};
use crate::sphere::{sphere_rule, Frame, Quadrature};

fn check_delta(delta: f64, max: f64, what: &str) -> Result<()> {
    if !(delta > 0.0 && delta <= max) {
        return Err(domain(format!("{what}: delta must lie in (0, {max:.6}], got {delta}")));
    }
    Ok(())
}

/// `Λy̲` for a single row-major `Λ`.
fn lambda_apply(lambda: &DMatrix<f64>, ubar: &[f64]) -> Vec<f64> {
    (0..lambda.nrows()).map(|i| (0..ubar.len()).map(|k| lambda[(i, k)] * ubar[k]).sum()).collect()
}

/// Constants of the ball family.
#[derive(Debug, Clone, PartialEq)]
pub struct BallParams {
    /// `f = 1` on the Euclidean ball of radius `radius · δ`.
    pub radius: f64,
    /// Half-width of the test slab is `δ / region_constant`;
    /// `None` means `10(1 + ‖Λ‖ + max ‖J_i‖)`.
    pub region_constant: Option<f64>,
    pub radial_count: usize,
    pub directions: usize,
    pub offset_count: usize,
    pub quadrature: usize,
    pub field_count: usize,
}

impl BallParams {
    pub fn new(n: usize) -> Self {
        let (directions, quadrature) = if n == 1 { (8, 192) } else { (4, 20) };
        Self { radius: 1.0, region_constant: None, radial_count: 6, directions, offset_count: 7, quadrature, field_count: 12 }
    }
}

/// `f = 1_{B_{rδ}}` against
/// `R_δ = {9/8 ≤ |x̲| ≤ 15/8, |x̄ − |x̲|Λx̲|_∞ ≤ δ/C}` with `t(x) = |x̲|`.
pub fn ball_example(s: &MetivierStructure, delta: f64) -> Result<ExampleInstance> {
    ball_example_with(s, delta, &BallParams::new(s.n()))
}

pub fn ball_example_with(s: &MetivierStructure, delta: f64, p: &BallParams) -> Result<ExampleInstance> {
    let (n, hn, d) = (s.n(), 2 * s.n(), s.d());
    if !(p.radius > 0.0) {
        return Err(domain("ball radius factor must be positive"));
    }
    check_delta(delta, 0.5 / p.radius, "ball family")?;
    let c_region = p.region_constant.unwrap_or(10.0 * (1.0 + s.lambda_norm() + s.max_j_norm()));
    if !(c_region > 0.0) {
        return Err(domain("ball region constant must be positive"));
    }
    let rad = p.radius * delta;
    let field = ScalarField::new(format!("indicator of the ball of radius {rad:.3e}"), BoxND::cube(d, rad), move |y: PointRef<'_>| {
        if dot(y.ubar, y.ubar) + dot(y.bar, y.bar) <= rad * rad {
            1.0
        } else {
            0.0
        }
    });
    let field_domain = AffineBox::from_box(&BoxND::cube(d, rad), hn, &vec![p.field_count; d])?;
    let test_region = ShellSlab {
        radii: (9.0 / 8.0, 15.0 / 8.0),
        radial_count: p.radial_count,
        directions: sphere_rule(n, p.directions)?,
        offset_half: delta / c_region,
        offset_count: p.offset_count,
        shear: Shear::Radial,
        lambda: s.lambda().clone(),
    };
    let quadrature = Quadrature::Cap { center: vec![0.0; hn], radius: rad, resolution: p.quadrature, fallback: sphere_rule(n, 16)? };
    Ok(ExampleInstance {
        family: Family::Ball,
        delta,
        structure: s.clone(),
        field,
        field_domain: Arc::new(field_domain),
        test_region: Arc::new(test_region),
        selector: TimeSelector::radial(),
        quadrature,
        params: vec![("radius", p.radius), ("region_constant", c_region)],
    })
}

/// Constants of the scaling family.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub t: f64,
    /// Width constant of the shell; `None` means `10 Σ ‖J_i‖`.
    pub c0: Option<f64>,
    pub quadrature: usize,
    pub radial_count: usize,
    pub directions: usize,
    pub offset_count: usize,
}

impl ScalingParams {
    pub fn new(n: usize) -> Self {
        let (directions, quadrature) = if n == 1 { (8, 64) } else { (4, 8) };
        Self { t: 1.5, c0: None, quadrature, radial_count: 4, directions, offset_count: 3 }
    }
}

/// `g` = indicator of the shell `{||y̲| − t| ≤ C₀δ, |ȳ − tΛy̲| ≤ C₀δ}`, measured on
/// the small set `{|x̲| ≤ δ, |x̄ − tΛx̲|_∞ ≤ δ}` at the fixed time `t`, where the
/// average is identically one.
pub fn scaling_example(s: &MetivierStructure, delta: f64) -> Result<ExampleInstance> {
    scaling_example_with(s, delta, &ScalingParams::new(s.n()))
}

pub fn scaling_example_with(s: &MetivierStructure, delta: f64, p: &ScalingParams) -> Result<ExampleInstance> {
    let (n, hn, m) = (s.n(), 2 * s.n(), s.m());
    let t = p.t;
    if !(1.0..=2.0).contains(&t) {
        return Err(domain(format!("scaling family: t must lie in [1, 2], got {t}")));
    }
    let c0 = p.c0.unwrap_or(10.0 * s.sum_j_norm());
    if !(c0 > 0.0) {
        return Err(domain("scaling constant must be positive"));
    }
    check_delta(delta, 0.5 * t / c0, "scaling family")?;
    let w = c0 * delta;
    let lambda = s.lambda().clone();
    let lam = lambda.clone();
    let reach = t + w;
    let bar_half = w + t * s.lambda_norm() * reach;
    let mut lo = vec![-reach; hn];
    let mut hi = vec![reach; hn];
    lo.extend(vec![-bar_half; m]);
    hi.extend(vec![bar_half; m]);
    let field = ScalarField::new(format!("shell of width {w:.3e} at radius {t}"), BoxND::new(lo, hi)?, move |y: PointRef<'_>| {
        let ly = lambda_apply(&lam, y.ubar);
        let dev: Vec<f64> = y.bar.iter().zip(&ly).map(|(b, l)| b - t * l).collect();
        if (norm(y.ubar) - t).abs() <= w && norm(&dev) <= w {
            1.0
        } else {
            0.0
        }
    });
    let dirs = sphere_rule(n, p.directions)?;
    let field_domain = ShellSlab {
        radii: (t - w, t + w),
        radial_count: p.radial_count,
        directions: dirs.clone(),
        offset_half: w,
        offset_count: p.offset_count,
        shear: Shear::Fixed(t),
        lambda: lambda.clone(),
    };
    let test_region = ShellSlab {
        radii: (0.0, delta),
        radial_count: p.radial_count,
        directions: dirs,
        offset_half: delta,
        offset_count: p.offset_count,
        shear: Shear::Fixed(t),
        lambda,
    };
    Ok(ExampleInstance {
        family: Family::Scaling,
        delta,
        structure: s.clone(),
        field,
        field_domain: Arc::new(field_domain),
        test_region: Arc::new(test_region),
        selector: TimeSelector::fixed(t)?,
        quadrature: Quadrature::Global(sphere_rule(n, p.quadrature)?),
        params: vec![("t", t), ("c0", c0)],
    })
}

/// The plane `V = span(u, v)` with `u = Λᵀ/‖Λ‖` (or `e₁` when `Λ = 0`) and
/// `v = Ju/‖Ju‖`, completed to an orthonormal frame. Requires `m = 1` and
/// `JV ⊂ V`.
pub fn knapp_plane(s: &MetivierStructure) -> Result<Frame> {
    if s.m() != 1 {
        return Err(Error::Unsupported(format!("knapp family needs m = 1, got m = {}", s.m())));
    }
    let hn = 2 * s.n();
    let lrow: Vec<f64> = (0..hn).map(|k| s.lambda()[(0, k)]).collect();
    let ln = norm(&lrow);
    let u: Vec<f64> = if ln > 1e-12 {
        lrow.iter().map(|v| v / ln).collect()
    } else {
        let mut e = vec![0.0; hn];
        e[0] = 1.0;
        e
    };
    let j = &s.j()[0];
    let ju: Vec<f64> = (0..hn).map(|r| (0..hn).map(|c| j[(r, c)] * u[c]).sum()).collect();
    let jn = norm(&ju);
    if jn < 1e-12 {
        return Err(Error::Degenerate("Ju vanishes; no Knapp plane".into()));
    }
    let v: Vec<f64> = ju.iter().map(|x| x / jn).collect();
    let frame = Frame::from_plane(u, v);
    let leak = perp_j_par_norm(j, &frame);
    if leak > 1e-12 {
        return Err(structure(format!("J does not preserve the Knapp plane: ‖π_⊥Jπ‖ = {leak:.3e}")));
    }
    Ok(frame)
}

/// `‖π_⊥ J π‖` for the plane of `frame`.
pub(crate) fn perp_j_par_norm(j: &DMatrix<f64>, frame: &Frame) -> f64 {
    let hn = frame.dim();
    if frame.w.is_empty() {
        return 0.0;
    }
    let mut block = DMatrix::zeros(frame.w.len(), 2);
    for (c, basis) in [&frame.u, &frame.v].into_iter().enumerate() {
        let jb: Vec<f64> = (0..hn).map(|r| (0..hn).map(|k| j[(r, k)] * basis[k]).sum()).collect();
        for (r, wk) in frame.w.iter().enumerate() {
            block[(r, c)] = dot(wk, &jb);
        }
    }
    spectral_norm(&block)
}

/// Constants of the Knapp family.
#[derive(Debug, Clone, PartialEq)]
pub struct KnappParams {
    /// `f` lives on `|π_⊥y̲| ≤ a√δ, |πy̲| ≤ bδ, |y_d| ≤ cδ` with `[a, b, c]`.
    pub field: [f64; 3],
    /// The test region uses `|π_⊥x̲| ≤ a'√δ` and `|x_d − tΛx̲| ≤ c'δ` with `[a', c']`.
    pub region: [f64; 2],
    /// Lattice counts for `r`, `φ`, each perpendicular coordinate, and `s`.
    pub counts: [usize; 4],
    pub quadrature: usize,
    pub field_count: usize,
}

impl KnappParams {
    pub fn new(n: usize) -> Self {
        let quadrature = if n == 1 { 192 } else { 16 };
        Self { field: [1.0, 1.0, 1.0], region: [0.5, 0.5], counts: [3, 2, 6, 5], quadrature, field_count: 12 }
    }
}

/// The parabolic slab along `V`, against
/// `R_δ = {|π_⊥x̲| ≤ a'√δ, 9/8 ≤ |πx̲| ≤ 15/8, |x_d − |πx̲|Λx̲| ≤ c'δ}` with the
/// direction of `πx̲` kept at normalized coordinates in `(1/4, 3/4)` and
/// `t(x) = |πx̲|`.
pub fn knapp_example(s: &MetivierStructure, delta: f64) -> Result<ExampleInstance> {
    knapp_example_with(s, delta, &KnappParams::new(s.n()))
}

pub fn knapp_example_with(s: &MetivierStructure, delta: f64, p: &KnappParams) -> Result<ExampleInstance> {
    let frame = knapp_plane(s)?;
    let (n, hn) = (s.n(), 2 * s.n());
    let [a, b, c] = p.field;
    let [ra, rc] = p.region;
    if [a, b, c, ra, rc].iter().any(|v| !(*v > 0.0)) {
        return Err(domain("knapp constants must be positive"));
    }
    check_delta(delta, (0.5 / a).powi(2).min(0.5 / b), "knapp family")?;
    let (perp, par, ctr) = (a * delta.sqrt(), b * delta, c * delta);
    let (u, v) = (frame.u.clone(), frame.v.clone());
    let (fu, fv) = (u.clone(), v.clone());
    let reach = perp.hypot(par);
    let mut lo = vec![-reach; hn];
    let mut hi = vec![reach; hn];
    lo.push(-ctr);
    hi.push(ctr);
    let field = ScalarField::new(format!("knapp slab ({perp:.3e}, {par:.3e}, {ctr:.3e})"), BoxND::new(lo, hi)?, move |y: PointRef<'_>| {
        let (pu, pv) = (dot(y.ubar, &fu), dot(y.ubar, &fv));
        let plane2 = pu * pu + pv * pv;
        let perp2 = (dot(y.ubar, y.ubar) - plane2).max(0.0);
        if plane2 <= par * par && perp2 <= perp * perp && y.bar[0].abs() <= ctr {
            1.0
        } else {
            0.0
        }
    });
    let d = hn + 1;
    let mut axes = DMatrix::zeros(d, d);
    for k in 0..hn {
        axes[(k, 0)] = par * u[k];
        axes[(k, 1)] = par * v[k];
        for (j, wj) in frame.w.iter().enumerate() {
            axes[(k, 2 + j)] = perp * wj[k];
        }
    }
    axes[(hn, hn)] = ctr;
    let field_domain = AffineBox::new(vec![0.0; d], axes, vec![p.field_count; d], hn)?;
    let test_region = KnappSlab {
        frame: frame.clone(),
        radii: (9.0 / 8.0, 15.0 / 8.0),
        angles: (0.75f64.acos(), 0.75f64.asin()),
        perp_radius: ra * delta.sqrt(),
        offset_half: rc * delta,
        lambda: s.lambda().clone(),
        counts: p.counts,
    };
    let selector = TimeSelector::analytic("|pi x|", move |x| dot(x.ubar, &u).hypot(dot(x.ubar, &v)));
    let quadrature = Quadrature::Split {
        frame,
        center: vec![0.0; hn],
        par,
        perp,
        resolution: p.quadrature,
        fallback: sphere_rule(n, 8)?,
    };
    Ok(ExampleInstance {
        family: Family::Knapp,
        delta,
        structure: s.clone(),
        field,
        field_domain: Arc::new(field_domain),
        test_region: Arc::new(test_region),
        selector,
        quadrature,
        params: vec![("a", a), ("b", b), ("c", c), ("region_perp", ra), ("region_offset", rc)],
    })
}

/// Constants of the moment-curve family.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentParams {
    pub counts: usize,
    pub field_count: usize,
    pub quadrature: usize,
}

impl Default for MomentParams {
    fn default() -> Self {
        Self { counts: 8, field_count: 8, quadrature: 256 }
    }
}

/// On the first Heisenberg group with `xᵀJy = x₂y₁ − x₁y₂` and `Λ = 0`:
///
/// ```text
/// f = 1 on P_δ = {|y₁| ≤ (2δ)², |y₂| ≤ 2δ, |y₃ + y₂| ≤ (2δ)³},
/// V_δ = {|x₁ − 1| ≤ δ², |x₂| ≤ δ, |x₃| ≤ δ³},   t = 1.
/// ```
pub fn moment_example(delta: f64) -> Result<ExampleInstance> {
    moment_example_with(delta, &MomentParams::default())
}

pub fn moment_example_with(delta: f64, p: &MomentParams) -> Result<ExampleInstance> {
    check_delta(delta, 0.25, "moment family")?;
    let s = unit_heisenberg(1);
    let (a, b, c) = (4.0 * delta * delta, 2.0 * delta, 8.0 * delta.powi(3));
    let field = ScalarField::new(
        format!("moment box ({a:.3e}, {b:.3e}, {c:.3e})"),
        BoxND::centered(&[0.0; 3], &[a, b, b + c]),
        move |y: PointRef<'_>| {
            if y.ubar[0].abs() <= a && y.ubar[1].abs() <= b && (y.bar[0] + y.ubar[1]).abs() <= c {
                1.0
            } else {
                0.0
            }
        },
    );
    let field_axes = DMatrix::from_row_slice(3, 3, &[a, 0.0, 0.0, 0.0, b, 0.0, 0.0, -b, c]);
    let field_domain = AffineBox::new(vec![0.0; 3], field_axes, vec![p.field_count; 3], 2)?;
    let test_axes = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![delta * delta, delta, delta.powi(3)]));
    let test_region = AffineBox::new(vec![1.0, 0.0, 0.0], test_axes, vec![p.counts; 3], 2)?;
    let quadrature =
        Quadrature::Cap { center: vec![0.0; 2], radius: a.hypot(b), resolution: p.quadrature, fallback: sphere_rule(1, 64)? };
    Ok(ExampleInstance {
        family: Family::MomentCurve,
        delta,
        structure: s,
        field,
        field_domain: Arc::new(field_domain),
        test_region: Arc::new(test_region),
        selector: TimeSelector::fixed(1.0)?,
        quadrature,
        params: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{quaternionic_htype, standard_heisenberg};
    use approx::assert_relative_eq;

    #[test]
    fn knapp_plane_is_invariant() {
        for s in [standard_heisenberg(1), standard_heisenberg(2), unit_heisenberg(3)] {
            let f = knapp_plane(&s).unwrap();
            assert!(perp_j_par_norm(&s.j()[0], &f) <= 1e-12);
        }
        let tilted = unit_heisenberg(2).with_lambda(DMatrix::from_row_slice(1, 4, &[0.1, 0.0, 0.05, 0.0])).unwrap();
        assert!(perp_j_par_norm(&tilted.j()[0], &knapp_plane(&tilted).unwrap()) <= 1e-12);
        assert!(matches!(knapp_plane(&quaternionic_htype(1, 3).unwrap()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn field_norms_match_volumes() {
        let s = standard_heisenberg(1);
        let d = 1.0 / 16.0;
        // ball of radius δ in ℝ³
        let ball = ball_example(&s, d).unwrap();
        let vol = 4.0 / 3.0 * std::f64::consts::PI * d.powi(3);
        assert_relative_eq!(ball.field_norm(1.0).unwrap(), vol, max_relative = 0.05);
        let m = moment_example(d).unwrap();
        assert_relative_eq!(m.field_norm(1.0).unwrap(), 512.0 * d.powi(6), max_relative = 1e-12);
        assert_relative_eq!(m.test_region.volume(), 8.0 * d.powi(6), max_relative = 1e-12);
    }

    #[test]
    fn scaling_average_is_one() {
        for s in [standard_heisenberg(1), standard_heisenberg(2)] {
            for d in [1.0 / 8.0, 1.0 / 64.0] {
                let inst = scaling_example(&s, d).unwrap();
                for (v, w) in inst.maximal_samples() {
                    assert!(w <= 0.0 || (v - 1.0).abs() < 1e-12, "value {v}");
                }
            }
        }
    }

    #[test]
    fn delta_ranges() {
        let s = standard_heisenberg(1);
        assert!(ball_example(&s, 0.0).is_err());
        assert!(ball_example(&s, 0.75).is_err());
        assert!(moment_example(0.5).is_err());
        assert!(knapp_example(&s, 1.0).is_err());
        assert!(scaling_example(&s, 0.4).is_err());
    }
}
