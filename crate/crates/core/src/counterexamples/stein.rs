//! Logarithmic densities at the critical exponent `p₂ = 2n/(2n−1)`.
//!
//! `f_α(v) = |v̲|^{−(2n−1)} |log|v̲||^{−α}` on `ε ≤ |v̲| ≤ ½, |v̄| ≤ 1` has
//! `‖f_α‖_{p₂}` bounded as `ε → 0` once `αp₂ > 1`, while the average over a
//! sphere through the origin grows like `(log 1/ε)^{1−α}`.

use std::f64::consts::LN_2;
use std::sync::Arc;

use super::{least_squares, ExampleInstance, ExponentFit, Family};
use crate::averaging::{maximal_at, TimeSelector};
use crate::error::{domain, Error, Result};
use crate::field::{BoxND, ScalarField};
use crate::group::{GroupPoint, MetivierStructure, PointRef};
use crate::lattice::{AffineBox, Shear, ShellSlab};
use crate::linalg::{compensated_sum, norm};
use crate::sphere::{gauss_legendre, sphere_area, sphere_rule, GradedArc, Quadrature};

const NODES: usize = 12;

fn check_alpha(n: usize, alpha: f64) -> Result<()> {
    let lo = (2 * n - 1) as f64 / (2 * n) as f64;
    if !(alpha > lo && alpha < 1.0) {
        return Err(domain(format!("alpha must lie in ({lo}, 1), got {alpha}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    Ok(())
}

/// The truncated density `f_α` on a structure with `2n` horizontal and `m`
/// center coordinates.
pub fn stein_density(n: usize, m: usize, alpha: f64, eps: f64) -> Result<ScalarField> {
    check_alpha(n, alpha)?;
    check_eps(eps)?;
    let k = (2 * n - 1) as i32;
    let mut lo = vec![-0.5; 2 * n];
    let mut hi = vec![0.5; 2 * n];
    lo.extend(vec![-1.0; m]);
    hi.extend(vec![1.0; m]);
    Ok(ScalarField::new(format!("stein density alpha={alpha} eps={eps:.3e}"), BoxND::new(lo, hi)?, move |y: PointRef<'_>| {
        let r = norm(y.ubar);
        if r < eps || r > 0.5 || norm(y.bar) > 1.0 {
            return 0.0;
        }
        r.powi(-k) * (-r.ln()).powf(-alpha)
    }))
}

/// `‖f_α‖_{L^p}` by Gauss–Legendre in `u = log(1/r)` on octave pieces; the
/// center factor is the volume of the unit ball of `ℝ^m`, here `m = 1`.
pub fn stein_norm(n: usize, alpha: f64, eps: f64, p: f64) -> Result<f64> {
    check_alpha(n, alpha)?;
    check_eps(eps)?;
    if !(p >= 1.0) || p.is_infinite() {
        return Err(domain(format!("stein norm needs a finite p >= 1, got {p}")));
    }
    let k = (2 * n - 1) as f64;
    // r^{k} dr with f^p = r^{-kp} u^{-αp}, r = e^{-u}
    let decay = k + 1.0 - k * p;
    let (u0, u1) = (LN_2, -eps.ln());
    let gl = gauss_legendre(NODES);
    let mut pieces = Vec::new();
    let mut a = u0;
    while a < u1 {
        let b = (2.0 * a).min(u1);
        pieces.push((a, b));
        a = b;
    }
    let radial = compensated_sum(pieces.iter().flat_map(|&(a, b)| {
        let (h, c) = (0.5 * (b - a), 0.5 * (a + b));
        gl.iter().map(move |&(x, w)| {
            let u = c + h * x;
            w * h * (-decay * u).exp() * u.powf(-alpha * p)
        })
    }));
    Ok((2.0 * sphere_area(2 * n) * radial).powf(1.0 / p))
}

fn probe_x(n: usize) -> GroupPoint {
    let mut ubar = vec![0.0; 2 * n];
    ubar[0] = 1.5;
    GroupPoint::new(ubar, vec![0.0])
}

/// The density on the first Heisenberg-type group (`n = m = 1`) with an arc
/// rule graded toward the singular point at the origin.
pub fn stein_example(s: &MetivierStructure, alpha: f64, eps: f64) -> Result<ExampleInstance> {
    if (s.n(), s.m()) != (1, 1) {
        return Err(Error::Unsupported(format!("the graded arc rule needs n = m = 1, got n={}, m={}", s.n(), s.m())));
    }
    let field = stein_density(1, 1, alpha, eps)?;
    let field_domain = AffineBox::from_box(field.support(), 2, &[16, 16, 4])?;
    let test_region = ShellSlab {
        radii: (1.0, 2.0),
        radial_count: 4,
        directions: sphere_rule(1, 8)?,
        offset_half: 0.25,
        offset_count: 3,
        shear: Shear::Radial,
        lambda: s.lambda().clone(),
    };
    let quadrature = Quadrature::Arc(GradedArc { center: vec![0.0, 0.0], radii: vec![eps, 0.5], inner_octaves: 0, nodes_per_piece: NODES });
    Ok(ExampleInstance {
        family: Family::SteinDensity,
        delta: eps,
        structure: s.clone(),
        field,
        field_domain: Arc::new(field_domain),
        test_region: Arc::new(test_region),
        selector: TimeSelector::radial(),
        quadrature,
        params: vec![("alpha", alpha), ("eps", eps)],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinRow {
    pub j: u32,
    pub eps: f64,
    /// `f_α * μ_t(x)` at the probe `x = (3/2, 0, 0)`, `t = 3/2`.
    pub value: f64,
    /// `‖f_α‖_{p₂}`.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinDiagnostic {
    pub alpha: f64,
    pub rows: Vec<SteinRow>,
    pub increasing: bool,
    /// Fit of `log(value_{j+1} − value_j)` against `log(j + ½)`.
    pub increment_fit: ExponentFit,
    /// `1 + slope`; the prediction is `1 − α`.
    pub growth_exponent: f64,
}

/// Probe values for `ε = 2^{−j}`. The growth is read off the increments, which
/// removes the `ε`-independent part of the average.
pub fn stein_growth(s: &MetivierStructure, alpha: f64, js: &[u32]) -> Result<SteinDiagnostic> {
    if js.len() < 4 || js.windows(2).any(|w| w[1] != w[0] + 1) || js[0] < 2 {
        return Err(domain("need at least 4 consecutive levels j >= 2"));
    }
    let x = probe_x(s.n());
    let p2 = (2 * s.n()) as f64 / (2 * s.n() - 1) as f64;
    let rows = js
        .iter()
        .map(|&j| {
            let eps = 0.5f64.powi(j as i32);
            let inst = stein_example(s, alpha, eps)?;
            let value = maximal_at(s, &inst.field, x.as_ref(), &inst.selector, &inst.quadrature);
            Ok(SteinRow { j, eps, value, norm: stein_norm(s.n(), alpha, eps, p2)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let increasing = rows.windows(2).all(|w| w[1].value > w[0].value);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in rows.windows(2) {
        let inc = w[1].value - w[0].value;
        if !(inc > 0.0) {
            return Err(Error::Degenerate(format!("probe value did not grow between j={} and j={}", w[0].j, w[1].j)));
        }
        xs.push((w[0].j as f64 + 0.5).ln());
        ys.push(inc.ln());
    }
    let fit = least_squares(&xs, &ys)?;
    Ok(SteinDiagnostic { alpha, rows, increasing, increment_fit: fit, growth_exponent: 1.0 + fit.slope })
}
