//! Seeded property suites behind `group-check` and `lemma-check`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::group::{dilate, group_multiply, inverse, random_unit, GroupPoint, MetivierStructure};
use crate::linalg;
use crate::skew::{skew_inverse_norm, SkewNorm};

/// Outcome of one property over many samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    /// The sample with the largest error, serialized.
    pub worst: String,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

struct Tracker {
    outcome: CheckOutcome,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { outcome: CheckOutcome { name, samples: 0, max_error: 0.0, tolerance, worst: String::new() } }
    }

    fn record(&mut self, err: f64, case: impl FnOnce() -> String) {
        self.outcome.samples += 1;
        // NaN counts as a failure
        if !(err <= self.outcome.max_error) {
            self.outcome.max_error = if err.is_nan() { f64::INFINITY } else { err };
            self.outcome.worst = case();
        }
    }
}

fn point<R: Rng>(rng: &mut R, s: &MetivierStructure) -> GroupPoint {
    GroupPoint::new((0..2 * s.n()).map(|_| rng.gen_range(-1.0..1.0)).collect(), (0..s.m()).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn fmt_point(x: &GroupPoint) -> String {
    x.coords().iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(";")
}

/// Associativity, identity, inverse and the dilation automorphism on
/// `samples` seeded points in `[−1, 1]^d`.
pub fn group_suite(s: &MetivierStructure, samples: usize, seed: u64, tolerance: f64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assoc = Tracker::new("associativity", tolerance);
    let mut ident = Tracker::new("identity", tolerance);
    let mut inv = Tracker::new("inverse", tolerance);
    let mut dil = Tracker::new("dilation", tolerance);
    let e = s.identity();
    for _ in 0..samples {
        let (x, y, z) = (point(&mut rng, s), point(&mut rng, s), point(&mut rng, s));
        let lhs = group_multiply(s, &group_multiply(s, &x, &y)?, &z)?;
        let rhs = group_multiply(s, &x, &group_multiply(s, &y, &z)?)?;
        assoc.record(lhs.max_abs_diff(&rhs), || format!("x={} y={} z={}", fmt_point(&x), fmt_point(&y), fmt_point(&z)));
        let err = group_multiply(s, &x, &e)?.max_abs_diff(&x).max(group_multiply(s, &e, &x)?.max_abs_diff(&x));
        ident.record(err, || format!("x={}", fmt_point(&x)));
        let xi = inverse(s, &x)?;
        let err = group_multiply(s, &x, &xi)?.max_abs_diff(&e).max(group_multiply(s, &xi, &x)?.max_abs_diff(&e));
        inv.record(err, || format!("x={}", fmt_point(&x)));
        let t = rng.gen_range(0.1..3.0);
        let lhs = dilate(s, t, &group_multiply(s, &x, &y)?)?;
        let rhs = group_multiply(s, &dilate(s, t, &x)?, &dilate(s, t, &y)?)?;
        dil.record(lhs.max_abs_diff(&rhs), || format!("t={t:.17e} x={} y={}", fmt_point(&x), fmt_point(&y)));
    }
    Ok(vec![assoc.outcome, ident.outcome, inv.outcome, dil.outcome])
}

/// `max ‖(J^θ)² + |θ|² I‖` over `count` seeded directions scaled into `[½, 2]`.
pub fn htype_defect(s: &MetivierStructure, count: usize, seed: u64, tolerance: f64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tr = Tracker::new("htype-identity", tolerance);
    let hn = 2 * s.n();
    for _ in 0..count {
        let r = rng.gen_range(0.5..2.0);
        let theta: Vec<f64> = random_unit(&mut rng, s.m()).into_iter().map(|v| r * v).collect();
        let jt = s.j_theta(&theta);
        let defect = &jt * &jt + DMatrix::identity(hn, hn) * linalg::dot(&theta, &theta);
        tr.record(linalg::spectral_norm(&defect), || format!("theta={}", theta.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(";")));
    }
    tr.outcome
}

/// One sample of the skew-norm sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRow {
    pub index: usize,
    pub dim: usize,
    pub rho: f64,
    /// `even`, `even-singular` or `odd`.
    pub branch: &'static str,
    pub formula: f64,
    pub brute_force: f64,
    pub rel_error: f64,
}

pub const LEMMA_CSV_HEADER: &str = "index,N,rho,branch,formula,brute_force,rel_error";

impl LemmaRow {
    pub fn csv_row(&self) -> String {
        format!("{},{},{:.17e},{},{:.17e},{:.17e},{:.3e}", self.index, self.dim, self.rho, self.branch, self.formula, self.brute_force, self.rel_error)
    }

    /// The odd branch must return exactly `|ρ|⁻¹`.
    pub fn odd_branch_exact(&self) -> bool {
        self.branch != "odd" || self.formula == self.rho.abs().recip()
    }
}

/// `samples` seeded skew matrices with sizes cycling through `dims`, entries
/// uniform in `[−1, 1]`, and `ρ ∈ [−2, 2] \ (−0.05, 0.05)`. Every fourth even
/// sample has its last row and column zeroed so that `det B = 0`.
pub fn lemma_sweep(samples: usize, dims: (u32, u32), seed: u64) -> Result<Vec<LemmaRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (dims.1 - dims.0 + 1) as usize;
    (0..samples)
        .map(|index| {
            let dim = dims.0 as usize + index % span;
            let mut b = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in i + 1..dim {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    b[(i, j)] = v;
                    b[(j, i)] = -v;
                }
            }
            let singular = dim.is_multiple_of(2) && index % 4 == 3;
            if singular {
                for k in 0..dim {
                    b[(dim - 1, k)] = 0.0;
                    b[(k, dim - 1)] = 0.0;
                }
            }
            let mag = rng.gen_range(0.05..2.0);
            let rho = if rng.gen::<bool>() { mag } else { -mag };
            let formula = match skew_inverse_norm(rho, &b)? {
                SkewNorm::Finite(v) => v,
                SkewNorm::Singular => f64::INFINITY,
            };
            let a = DMatrix::identity(dim, dim) * rho + &b;
            let brute_force = a.try_inverse().map(|inv| linalg::spectral_norm(&inv)).unwrap_or(f64::INFINITY);
            let rel_error = ((formula - brute_force) / brute_force).abs();
            let branch = match (dim % 2, singular) {
                (1, _) => "odd",
                (_, true) => "even-singular",
                _ => "even",
            };
            Ok(LemmaRow { index, dim, rho, branch, formula, brute_force, rel_error })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{quaternionic_htype, standard_heisenberg};

    #[test]
    fn suites_pass_on_standard_structures() {
        for s in [standard_heisenberg(2), quaternionic_htype(1, 3).unwrap()] {
            for c in group_suite(&s, 100, 3, 1e-12).unwrap() {
                assert!(c.passed(), "{c:?}");
            }
        }
        assert!(htype_defect(&quaternionic_htype(1, 3).unwrap(), 50, 1, 1e-12).passed());
        // the standard form has J² = −¼I, so it is not H-type with this normalization
        assert!(!htype_defect(&standard_heisenberg(1), 5, 1, 1e-12).passed());
    }

    #[test]
    fn lemma_rows_agree() {
        let rows = lemma_sweep(40, (2, 8), 9).unwrap();
        assert!(rows.iter().any(|r| r.branch == "even-singular"));
        for r in rows {
            assert!(r.rel_error <= 1e-10 && r.odd_branch_exact(), "{r:?}");
        }
    }
}
