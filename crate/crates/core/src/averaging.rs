//! Spherical means `f * μ_t^Λ` and local maximal values.
//!
//! ```text
//! f * μ_t^Λ(x) = ∫ f(x̲ − tω, x̄ − t²Λω − t (x̲ᵀJ_iω)_i) dμ(ω)
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::field::ScalarField;
use crate::group::{GroupPoint, MetivierStructure, PointRef};
use crate::sphere::Quadrature;

/// Evaluates the spherical mean at `(x, t)` with the given quadrature.
pub fn spherical_average(s: &MetivierStructure, f: &ScalarField, t: f64, x: &GroupPoint, quad: &Quadrature) -> Result<f64> {
    s.check_point(x)?;
    Ok(average_at(s, f, t, x.as_ref(), quad))
}

/// Unchecked inner loop of [`spherical_average`].
pub(crate) fn average_at(s: &MetivierStructure, f: &ScalarField, t: f64, x: PointRef<'_>, quad: &Quadrature) -> f64 {
    let (h, m) = (2 * s.n(), s.m());
    // x̲ᵀJ_i, computed once per point
    let xj: Vec<Vec<f64>> = s
        .j()
        .iter()
        .map(|ji| (0..h).map(|b| (0..h).map(|a| x.ubar[a] * ji[(a, b)]).sum()).collect())
        .collect();
    let lambda = s.lambda();
    let mut yu = vec![0.0; h];
    let mut yb = vec![0.0; m];
    let mut acc = 0.0;
    quad.visit(x, t, &mut |w, wt| {
        for k in 0..h {
            yu[k] = x.ubar[k] - t * w[k];
        }
        for i in 0..m {
            let mut tw = 0.0;
            let mut lw = 0.0;
            for k in 0..h {
                tw += xj[i][k] * w[k];
                lw += lambda[(i, k)] * w[k];
            }
            yb[i] = x.bar[i] - t * t * lw - t * tw;
        }
        let v = f.eval(PointRef { ubar: &yu, bar: &yb });
        if v != 0.0 {
            acc += wt * v;
        }
    });
    acc
}

type TimeMap = dyn Fn(PointRef<'_>) -> f64 + Send + Sync;

/// How the time `t ∈ [1, 2]` is chosen at each point.
#[derive(Clone)]
pub enum TimeSelector {
    /// `count` equispaced times in `[1, 2]`; the maximal value is the max over them.
    Grid { count: usize },
    /// A single time used everywhere.
    Fixed(f64),
    /// `t = t(x)`, clamped to `[1, 2]`; gives a lower bound for the supremum.
    Analytic { label: String, map: Arc<TimeMap> },
}

impl TimeSelector {
    pub fn grid(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(domain(format!("time grid needs at least 2 points, got {count}")));
        }
        Ok(TimeSelector::Grid { count })
    }

    pub fn fixed(t: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&t) {
            return Err(domain(format!("fixed time must lie in [1, 2], got {t}")));
        }
        Ok(TimeSelector::Fixed(t))
    }

    pub fn analytic(label: impl Into<String>, map: impl Fn(PointRef<'_>) -> f64 + Send + Sync + 'static) -> Self {
        TimeSelector::Analytic { label: label.into(), map: Arc::new(map) }
    }

    /// `t(x) = |x̲|`.
    pub fn radial() -> Self {
        Self::analytic("|ubar x|", |x| x.ubar.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// The times at which the mean is evaluated for `x`.
    pub fn times(&self, x: PointRef<'_>) -> Vec<f64> {
        match self {
            TimeSelector::Grid { count } => (0..*count).map(|k| 1.0 + k as f64 / (*count - 1) as f64).collect(),
            TimeSelector::Fixed(t) => vec![*t],
            TimeSelector::Analytic { map, .. } => vec![map(x).clamp(1.0, 2.0)],
        }
    }

    pub fn label(&self) -> String {
        match self {
            TimeSelector::Grid { count } => format!("grid({count})"),
            TimeSelector::Fixed(t) => format!("fixed({t})"),
            TimeSelector::Analytic { label, .. } => format!("t(x) = {label}"),
        }
    }
}

impl fmt::Debug for TimeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeSelector({})", self.label())
    }
}

/// `max_t |f * μ_t^Λ(x)|` over the selector's times.
pub fn maximal_value(s: &MetivierStructure, f: &ScalarField, x: &GroupPoint, sel: &TimeSelector, quad: &Quadrature) -> Result<f64> {
    s.check_point(x)?;
    Ok(maximal_at(s, f, x.as_ref(), sel, quad))
}

pub(crate) fn maximal_at(s: &MetivierStructure, f: &ScalarField, x: PointRef<'_>, sel: &TimeSelector, quad: &Quadrature) -> f64 {
    sel.times(x).into_iter().map(|t| average_at(s, f, t, x, quad).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BoxND;
    use crate::group::standard_heisenberg;
    use crate::sphere::sphere_rule;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_averages_to_one() {
        let s = standard_heisenberg(2);
        let f = ScalarField::constant(1.0, BoxND::cube(5, 100.0));
        let quad = Quadrature::from(sphere_rule(2, 6).unwrap());
        let x = GroupPoint::new(vec![0.1, 0.2, -0.3, 0.4], vec![1.0]);
        assert_abs_diff_eq!(spherical_average(&s, &f, 1.5, &x, &quad).unwrap(), 1.0, epsilon = 1e-12);
        let sel = TimeSelector::grid(5).unwrap();
        assert_abs_diff_eq!(maximal_value(&s, &f, &x, &sel, &quad).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_support_gives_zero() {
        let s = standard_heisenberg(1);
        let f = ScalarField::constant(1.0, BoxND::centered(&[10.0, 0.0, 0.0], &[0.5, 0.5, 0.5]));
        let quad = Quadrature::from(sphere_rule(1, 64).unwrap());
        let x = GroupPoint::zeros(1, 1);
        assert_eq!(spherical_average(&s, &f, 1.0, &x, &quad).unwrap(), 0.0);
    }

    #[test]
    fn selectors() {
        assert!(TimeSelector::grid(1).is_err());
        assert!(TimeSelector::fixed(2.5).is_err());
        let r = TimeSelector::radial();
        assert_eq!(r.times(PointRef { ubar: &[3.0, 4.0], bar: &[0.0] }), vec![2.0]);
        assert_eq!(r.times(PointRef { ubar: &[0.6, 0.8], bar: &[0.0] }), vec![1.0]);
        assert_eq!(TimeSelector::grid(3).unwrap().times(PointRef { ubar: &[0.0, 0.0], bar: &[0.0] }), vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn first_moment_of_horizontal_coordinate() {
        // f(y) = y₁ gives x₁ − t E[ω₁] = x₁
        let s = standard_heisenberg(1);
        let f = ScalarField::new("y1", BoxND::cube(3, 100.0), |y| y.ubar[0]);
        let quad = Quadrature::from(sphere_rule(1, 32).unwrap());
        let x = GroupPoint::new(vec![0.7, -0.2], vec![0.3]);
        assert_abs_diff_eq!(spherical_average(&s, &f, 1.3, &x, &quad).unwrap(), 0.7, epsilon = 1e-13);
    }
}
