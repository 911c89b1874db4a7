//! Lower-bound families for the local maximal operator, their predicted
//! scaling exponents, and the log–log fitter used to compare the two.
//!
//! Each family is a `δ`-indexed pair `(f_δ, R_δ)`: a test function and a set on
//! which `Mf_δ` is large. The measured quantity is
//!
//! ```text
//! ratio(δ) = ‖Mf_δ‖_{L^q(R_δ)} / ‖f_δ‖_{L^p}  ≈  C δ^{e(p, q)},
//! ```
//!
//! A bounded `L^p → L^q` operator keeps the ratio bounded, so `e < 0` rules the
//! pair out. The fitted log–log slope is compared against `e`.

mod families;
mod stein;

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::averaging::{maximal_at, TimeSelector};
use crate::error::{domain, Error, Result};
use crate::field::ScalarField;
use crate::group::MetivierStructure;
use crate::lattice::{evaluate, norm_of_samples, Domain};
use crate::linalg::compensated_sum;
use crate::region::{fmt_q, parse_q, qi, Q};
use crate::sphere::Quadrature;

pub use families::{
    ball_example, ball_example_with, knapp_example, knapp_example_with, knapp_plane, moment_example,
    moment_example_with, scaling_example, scaling_example_with, BallParams, KnappParams, MomentParams,
    ScalingParams,
};
pub use stein::{stein_density, stein_example, stein_growth, stein_norm, SteinDiagnostic, SteinRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Ball,
    Scaling,
    Knapp,
    SteinDensity,
    MomentCurve,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Ball, Family::Scaling, Family::Knapp, Family::SteinDensity, Family::MomentCurve];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Ball => "ball",
            Family::Scaling => "scaling",
            Family::Knapp => "knapp",
            Family::SteinDensity => "stein",
            Family::MomentCurve => "moment",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown family {s:?} (expected ball, scaling, knapp, stein or moment)")))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A Lebesgue exponent `p ∈ [1, ∞]`, stored through its reciprocal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Q);

impl Exponent {
    /// From `1/p ∈ [0, 1]`.
    pub fn from_reciprocal(ip: Q) -> Result<Self> {
        if ip < Q::zero() || ip > Q::one() {
            return Err(domain(format!("1/p must lie in [0, 1], got {}", fmt_q(&ip))));
        }
        Ok(Exponent(ip))
    }

    pub fn infinity() -> Self {
        Exponent(Q::zero())
    }

    /// Parses `"inf"`, an integer, or a rational `a/b ≥ 1`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(Self::infinity());
        }
        let p = parse_q(t)?;
        if p < Q::one() {
            return Err(Error::Config(format!("Lebesgue exponent must be >= 1, got {t}")));
        }
        Ok(Exponent(p.recip()))
    }

    pub fn reciprocal(&self) -> &Q {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            f64::INFINITY
        } else {
            q_to_f64(&self.0.recip())
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            f.write_str("inf")
        } else {
            f.write_str(&fmt_q(&self.0.recip()))
        }
    }
}

pub(crate) fn q_to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// One member `(f_δ, R_δ)` of a family, ready to be measured.
#[derive(Debug, Clone)]
pub struct ExampleInstance {
    pub family: Family,
    pub delta: f64,
    pub structure: MetivierStructure,
    pub field: ScalarField,
    /// Lattice over the support of `f`, used for `‖f‖_p`.
    pub field_domain: Arc<dyn Domain>,
    /// The set `R_δ` on which `Mf` is measured.
    pub test_region: Arc<dyn Domain>,
    pub selector: TimeSelector,
    pub quadrature: Quadrature,
    /// The constants the instance was built with, by name.
    pub params: Vec<(&'static str, f64)>,
}

impl ExampleInstance {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    /// `(Mf(x), cell weight)` over the test region, in lattice order.
    pub fn maximal_samples(&self) -> Vec<(f64, f64)> {
        evaluate(self.test_region.as_ref(), |x| maximal_at(&self.structure, &self.field, x, &self.selector, &self.quadrature))
    }

    /// Weighted mean of `Mf` over the test region.
    pub fn region_mean(&self) -> Result<f64> {
        mean(&self.maximal_samples())
    }

    pub fn field_norm(&self, p: f64) -> Result<f64> {
        if self.family == Family::SteinDensity {
            let (a, e) = (self.param("alpha").unwrap_or(f64::NAN), self.param("eps").unwrap_or(f64::NAN));
            return stein_norm(self.structure.n(), a, e, p);
        }
        norm_of_samples(&evaluate(self.field_domain.as_ref(), |x| self.field.eval(x)), p)
    }

    /// `‖Mf‖_{L^q(R_δ)} / ‖f‖_{L^p}`.
    pub fn ratio(&self, p: f64, q: f64) -> Result<f64> {
        Ok(self.measure(p, q)?.0)
    }

    /// The ratio together with the mean of `Mf` over `R_δ`, from one pass.
    pub fn measure(&self, p: f64, q: f64) -> Result<(f64, f64)> {
        let samples = self.maximal_samples();
        let lhs = norm_of_samples(&samples, q)?;
        let rhs = self.field_norm(p)?;
        if !(rhs > 0.0) {
            return Err(Error::Degenerate(format!("{} at delta={}: ‖f‖_p vanishes", self.family, self.delta)));
        }
        Ok((lhs / rhs, mean(&samples)?))
    }
}

fn mean(samples: &[(f64, f64)]) -> Result<f64> {
    let w = compensated_sum(samples.iter().map(|s| s.1));
    if !(w > 0.0) {
        return Err(Error::Degenerate("test region has zero measure".into()));
    }
    Ok(compensated_sum(samples.iter().map(|(v, w)| v * w)) / w)
}

fn check_dims(family: Family, n: u32, m: u32) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(domain("n and m must be positive"));
    }
    match family {
        Family::Knapp if m != 1 => Err(Error::Unsupported(format!("knapp family needs m = 1, got m = {m}"))),
        Family::MomentCurve if (n, m) != (1, 1) => {
            Err(Error::Unsupported(format!("moment-curve family lives on the first Heisenberg group, got n={n}, m={m}")))
        }
        Family::SteinDensity => Err(Error::Unsupported("the Stein family has no power-law exponent".into())),
        _ => Ok(()),
    }
}

/// The exponent `e` with `ratio(δ) ≳ δ^e`, as an exact rational in `1/p`, `1/q`.
///
/// ```text
/// ball      (2n−1) + m/q − (2n+m)/p
/// scaling   (2n+m)/q − (m+1)/p
/// knapp     n/q + n − (n+2)/p          (m = 1)
/// moment    1 + 6/q − 6/p              (n = m = 1)
/// ```
pub fn predicted_exponent_exact(family: Family, n: u32, m: u32, ip: &Q, iq: &Q) -> Result<Q> {
    check_dims(family, n, m)?;
    for v in [ip, iq] {
        if *v < Q::zero() || *v > Q::one() {
            return Err(domain(format!("reciprocal exponents must lie in [0, 1], got {}", fmt_q(v))));
        }
    }
    let (n, m) = (qi(n as i64), qi(m as i64));
    let two_n = qi(2) * &n;
    Ok(match family {
        Family::Ball => &two_n - qi(1) + &m * iq - (&two_n + &m) * ip,
        Family::Scaling => (&two_n + &m) * iq - (&m + qi(1)) * ip,
        Family::Knapp => &n * iq + &n - (&n + qi(2)) * ip,
        Family::MomentCurve => qi(1) + qi(6) * iq - qi(6) * ip,
        Family::SteinDensity => unreachable!(),
    })
}

/// Floating-point form of [`predicted_exponent_exact`]; `p`, `q` may be infinite.
pub fn predicted_exponent(family: Family, n: u32, m: u32, p: f64, q: f64) -> Result<f64> {
    check_dims(family, n, m)?;
    if !(p >= 1.0 && q >= 1.0) {
        return Err(domain(format!("exponents must be >= 1, got p={p}, q={q}")));
    }
    let (ip, iq, n, m) = (1.0 / p, 1.0 / q, n as f64, m as f64);
    Ok(match family {
        Family::Ball => 2.0 * n - 1.0 + m * iq - (2.0 * n + m) * ip,
        Family::Scaling => (2.0 * n + m) * iq - (m + 1.0) * ip,
        Family::Knapp => n * iq + n - (n + 2.0) * ip,
        Family::MomentCurve => 1.0 + 6.0 * iq - 6.0 * ip,
        Family::SteinDensity => unreachable!(),
    })
}

/// Least-squares line `log ratio = slope · log δ + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares through `(x_k, y_k)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    let k = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / k;
    let my = compensated_sum(ys.iter().copied()) / k;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let syy = compensated_sum(ys.iter().map(|y| (y - my) * (y - my)));
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)));
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ExponentFit { slope, intercept, r_squared })
}

/// Fits `ratio ≈ C δ^slope` to `(δ, ratio)` pairs.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(domain(format!("need at least 3 (delta, ratio) points, got {}", points.len())));
    }
    for &(d, r) in points {
        if !(d > 0.0) || !d.is_finite() {
            return Err(domain(format!("delta must be positive and finite, got {d}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Degenerate(format!("ratio at delta={d} is {r}; log-log fit needs positive values")));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    least_squares(&xs, &ys)
}

/// `2^{−a}, 2^{−a−1}, …, 2^{−b}`.
pub fn dyadic_ladder(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|k| 0.5f64.powi(k as i32)).collect()
}

pub const LADDER_CSV_HEADER: &str = "family,n,m,p,q,delta,ratio,predicted_exponent,region_mean";

/// One measured point of a `δ` ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub p: Exponent,
    pub q: Exponent,
    pub delta: f64,
    pub ratio: f64,
    pub predicted: Q,
    /// Mean of `Mf` over the test region.
    pub region_mean: f64,
}

impl LadderRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.9e},{:.9e},{},{:.9e}",
            self.family,
            self.n,
            self.m,
            self.p,
            self.q,
            self.delta,
            self.ratio,
            fmt_q(&self.predicted),
            self.region_mean
        )
    }
}

/// Builds and measures one instance per `δ`. The instances are independent and
/// run in parallel; rows come back in the order of `deltas`.
pub fn run_ladder<B>(build: B, deltas: &[f64], p: &Exponent, q: &Exponent) -> Result<Vec<LadderRow>>
where
    B: Fn(f64) -> Result<ExampleInstance> + Sync,
{
    deltas
        .par_iter()
        .map(|&d| {
            let inst = build(d)?;
            let (n, m) = (inst.structure.n(), inst.structure.m());
            let predicted = predicted_exponent_exact(inst.family, n as u32, m as u32, p.reciprocal(), q.reciprocal())?;
            let (ratio, region_mean) = inst.measure(p.to_f64(), q.to_f64())?;
            Ok(LadderRow { family: inst.family, n, m, p: p.clone(), q: q.clone(), delta: d, ratio, predicted, region_mean })
        })
        .collect()
}

/// Fit of a finished ladder.
pub fn fit_ladder(rows: &[LadderRow]) -> Result<ExponentFit> {
    fit_exponent(&rows.iter().map(|r| (r.delta, r.ratio)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::q;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_laws_are_fitted_exactly() {
        for (c, e) in [(1.0, -2.0), (3.7, 0.75), (0.01, 0.5), (2.0, 0.0)] {
            let pts: Vec<(f64, f64)> = dyadic_ladder(3, 9).into_iter().map(|d| (d, c * d.powf(e))).collect();
            let fit = fit_exponent(&pts).unwrap();
            assert_abs_diff_eq!(fit.slope, e, epsilon = 1e-12);
            assert_abs_diff_eq!(fit.intercept, f64::ln(c), epsilon = 1e-10);
            assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(fit_exponent(&[(0.5, 1.0), (0.25, 2.0)]), Err(Error::Domain(_))));
        assert!(matches!(fit_exponent(&[(0.5, 1.0), (0.25, 0.0), (0.125, 1.0)]), Err(Error::Degenerate(_))));
        assert!(matches!(fit_exponent(&[(0.5, 1.0), (0.5, 2.0), (0.5, 1.0)]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn predicted_exponents() {
        let inf = f64::INFINITY;
        assert_eq!(predicted_exponent(Family::Ball, 1, 1, 1.0, inf).unwrap(), -2.0);
        assert_eq!(predicted_exponent(Family::Ball, 2, 1, 2.0, 4.0).unwrap(), 0.75);
        assert_eq!(predicted_exponent(Family::Scaling, 1, 1, 2.0, 2.0).unwrap(), 0.5);
        assert_eq!(predicted_exponent(Family::Knapp, 2, 1, 2.0, 4.0).unwrap(), 0.5);
        assert_eq!(predicted_exponent(Family::MomentCurve, 1, 1, 2.0, 2.0).unwrap(), 1.0);
        assert_eq!(predicted_exponent_exact(Family::Knapp, 2, 1, &q(1, 2), &q(1, 4)).unwrap(), q(1, 2));
        assert!(matches!(predicted_exponent(Family::Knapp, 2, 2, 2.0, 2.0), Err(Error::Unsupported(_))));
        assert!(matches!(predicted_exponent(Family::SteinDensity, 1, 1, 2.0, 2.0), Err(Error::Unsupported(_))));
        assert!(predicted_exponent_exact(Family::Ball, 1, 1, &q(3, 2), &q(0, 1)).is_err());
    }

    #[test]
    fn exponents_parse_and_print() {
        assert_eq!(Exponent::parse("inf").unwrap().to_string(), "inf");
        assert_eq!(Exponent::parse("4").unwrap().reciprocal(), &q(1, 4));
        assert_eq!(Exponent::parse("3/2").unwrap().to_string(), "3/2");
        assert!(Exponent::parse("1/2").is_err());
        assert!(Exponent::parse("x").is_err());
    }
}
