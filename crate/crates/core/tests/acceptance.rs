//! One line per acceptance criterion, written straight to stdout so it shows
//! up without `--nocapture`. Tolerances are pinned here.

use std::io::Write;
use std::time::{Duration, Instant};

use metlab::counterexamples::{
    ball_example, fit_ladder, knapp_example, moment_example, predicted_exponent, predicted_exponent_exact, run_ladder, scaling_example, stein_growth,
    dyadic_ladder, Exponent, ExampleInstance, Family,
};
use metlab::geometry::{certify_point, sample_points, PhaseModel, SampleKind};
use metlab::group::{quaternionic_htype, smallness_margin, standard_heisenberg, ThetaGrid};
use metlab::harness::{
    default_table, execute, group_suite, htype_defect, lemma_sweep, parse_override, Command, ExperimentConfig,
};
use metlab::region::{
    averaging_region, bourgain_vertex, heisenberg_corners, maximal_corners, maximal_region, q, q4_from_interpolation, qi,
    RatPoint,
};
use metlab::Result;

const SLOPE_TOL: f64 = 0.15;
const MIN_R2: f64 = 0.98;
const STEIN_TOL: f64 = 0.2;

fn report(id: &str, what: &str, pass: bool, detail: &str, elapsed: Duration, budget: Duration) -> bool {
    let in_time = elapsed <= budget;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    let line = format!("[acceptance] {id:<4} {verdict}  {what}: {detail} ({:.2?} of {budget:.0?})\n", elapsed);
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    pass && in_time
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn c01_skew_norm_oracle() {
    let t = Instant::now();
    let rows = lemma_sweep(200, (2, 8), 2024).unwrap();
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let odd: Vec<_> = rows.iter().filter(|r| r.dim % 2 == 1).collect();
    let odd_ok = odd.iter().all(|r| r.odd_branch_exact());
    let pass = worst <= 1e-10 && odd_ok && !rows.iter().any(|r| r.rel_error.is_nan());
    let detail = format!("200 samples, max rel error {worst:.2e} <= 1e-10, {} odd cases exact = {odd_ok}", odd.len());
    assert!(report("1", "skew-norm formula vs brute force", pass, &detail, t.elapsed(), secs(5)));
}

#[test]
fn c02_group_law() {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [standard_heisenberg(1), standard_heisenberg(2), quaternionic_htype(1, 3).unwrap()] {
        for c in group_suite(&s, 1000, 17, 1e-12).unwrap() {
            pass &= c.passed() && c.samples == 1000;
            parts.push(format!("{}={:.1e}", c.name, c.max_error));
        }
    }
    let detail = format!("1000 samples each, tol 1e-12, worst per check and structure: {}", parts.join(" "));
    assert!(report("2", "group law and dilations", pass, &detail, t.elapsed(), secs(3)));
}

#[test]
fn c03_htype_identity() {
    let t = Instant::now();
    let c = htype_defect(&quaternionic_htype(1, 3).unwrap(), 100, 5, 1e-12);
    let detail = format!("100 directions, max |(J^θ)² + |θ|²I| = {:.2e} <= 1e-12", c.max_error);
    assert!(report("3", "H-type identity, quaternionic m=3", c.passed() && c.samples == 100, &detail, t.elapsed(), secs(1)));
}

fn h2_model() -> PhaseModel {
    PhaseModel::new(standard_heisenberg(2))
}

#[test]
fn c04_rank_certificates() {
    let t = Instant::now();
    let pm = h2_model();
    let margin = smallness_margin(pm.structure(), &ThetaGrid::default_for(1)).unwrap();
    let mut pass = (margin.margin - 0.5).abs() < 1e-12 && margin.certified();
    let mut failures = Vec::new();
    let mut worst_det_rel: f64 = 0.0;
    let mut worst_fold_det: f64 = 0.0;
    for (kind, count) in [(SampleKind::Generic, 100), (SampleKind::Fold, 50)] {
        for (i, p) in sample_points(&pm, kind, count, 4).iter().enumerate() {
            match certify_point(&pm, kind, i, p) {
                Ok(c) => {
                    if c.ranks() != kind.expected_ranks(5) {
                        failures.push(format!("{} {i}: ranks {:?}", kind.as_str(), c.ranks()));
                    }
                    if kind.is_fold() {
                        worst_fold_det = worst_fold_det.max(c.det_spatial.abs());
                    } else {
                        worst_det_rel = worst_det_rel.max((c.det_spatial - c.det_reduced).abs() / c.det_spatial.abs());
                    }
                }
                Err(e) => failures.push(format!("{} {i}: {e}", kind.as_str())),
            }
        }
    }
    pass &= failures.is_empty() && worst_det_rel <= 1e-8 && worst_fold_det <= 1e-10;
    let detail = format!(
        "margin {:.3}, ranks (Ξ_y, ΠΞ_y, curvature) = (5,5,4) at 100 points and (5,4,3) at 50 fold points, det identity rel err {worst_det_rel:.1e} <= 1e-8, |det ΠΞ_y| on fold {worst_fold_det:.1e} <= 1e-10, failures {:?}",
        margin.margin, failures
    );
    assert!(report("4", "rank certificates on H²", pass, &detail, t.elapsed(), secs(30)));
}

#[test]
fn c05_c_lower_bound() {
    // c is defined through the block form of the curvature matrix at x' = y'
    let t = Instant::now();
    let mut worst_gap = f64::INFINITY;
    let mut count = 0;
    let tilted = standard_heisenberg(2).with_lambda(nalgebra::DMatrix::from_row_slice(1, 4, &[0.1, 0.05, -0.1, 0.12])).unwrap();
    for s in [standard_heisenberg(2), tilted] {
        let pm = PhaseModel::new(s);
        for (i, p) in sample_points(&pm, SampleKind::Diagonal, 100, 8).iter().enumerate() {
            let c = certify_point(&pm, SampleKind::Diagonal, i, p).unwrap();
            worst_gap = worst_gap.min(c.c_value.unwrap().abs() - c.c_bound.unwrap());
            count += 1;
        }
    }
    let detail = format!("{count} points with x' = y' (Λ = 0 and tilted), min(|c| − bound) = {worst_gap:.3e} >= -1e-8");
    assert!(report("5", "lower bound for c", worst_gap >= -1e-8, &detail, t.elapsed(), secs(30)));
}

fn sorted(mut v: Vec<RatPoint>) -> Vec<RatPoint> {
    v.sort_by(|a, b| a.ip.cmp(&b.ip).then(a.iq.cmp(&b.iq)));
    v
}

#[test]
fn c06_region_exactness() {
    let t = Instant::now();
    let r = maximal_region(2, 1).unwrap();
    let expect = vec![
        RatPoint::new(qi(0), qi(0)),
        RatPoint::new(q(5, 8), q(1, 4)),
        RatPoint::new(q(2, 3), q(1, 3)),
        RatPoint::new(q(3, 4), q(3, 4)),
    ];
    let vertices_ok = sorted(r.vertices.clone()) == expect;
    let heis_ok = (2..=6).all(|n| maximal_corners(n, 1) == heisenberg_corners(n));
    let mut bourgain_ok = true;
    for n in 2..=4 {
        for m in 1..=3 {
            bourgain_ok &= q4_from_interpolation(n, m).unwrap() == maximal_corners(n, m)[3];
        }
    }
    // the same vertex by hand for H²: gains 2 and 5/3 − 1, so ϑ = 3/4
    let by_hand = bourgain_vertex(&RatPoint::new(qi(1), qi(0)), &qi(2), &RatPoint::new(q(1, 2), q(1, 3)), &q(2, 3)).unwrap();
    bourgain_ok &= by_hand == RatPoint::new(q(5, 8), q(1, 4));
    let trap = averaging_region(1, 1).unwrap();
    let trap_expect = vec![
        RatPoint::new(qi(0), qi(0)),
        RatPoint::new(q(1, 2), q(1, 3)),
        RatPoint::new(q(2, 3), q(1, 2)),
        RatPoint::new(qi(1), qi(1)),
    ];
    let trap_ok = sorted(trap.vertices.clone()) == trap_expect;
    let pass = vertices_ok && heis_ok && bourgain_ok && trap_ok;
    let detail = format!("H² vertices {vertices_ok}, m=1 corners agree for n=2..6 {heis_ok}, interpolated Q4 {bourgain_ok}, H¹ averaging trapezoid {trap_ok}");
    assert!(report("6", "exact regions", pass, &detail, t.elapsed(), secs(1)));
}

fn slope_case(id: &str, what: &str, build: impl Fn(f64) -> Result<ExampleInstance> + Sync, ladder: (u32, u32), pq: (&str, &str), family: Family, nm: (u32, u32), budget: Duration) -> (bool, f64) {
    let t = Instant::now();
    let (p, qx) = (Exponent::parse(pq.0).unwrap(), Exponent::parse(pq.1).unwrap());
    let pred = predicted_exponent(family, nm.0, nm.1, p.to_f64(), qx.to_f64()).unwrap();
    let rows = run_ladder(&build, &dyadic_ladder(ladder.0, ladder.1), &p, &qx).unwrap();
    let fit = fit_ladder(&rows).unwrap();
    let min_mean = rows.iter().map(|r| r.region_mean).fold(f64::INFINITY, f64::min);
    let pass = (fit.slope - pred).abs() <= SLOPE_TOL && fit.r_squared >= MIN_R2;
    let detail = format!(
        "δ = 2^-{}..2^-{}, slope {:.4} vs {pred} ± {SLOPE_TOL}, r² {:.5} >= {MIN_R2}",
        ladder.0, ladder.1, fit.slope, fit.r_squared
    );
    (report(id, what, pass, &detail, t.elapsed(), budget), min_mean)
}

#[test]
fn c07a_ball_h1() {
    let s = standard_heisenberg(1);
    let (ok, _) = slope_case("7a", "ball family, H¹, (1,∞)", |d| ball_example(&s, d), (3, 7), ("1", "inf"), Family::Ball, (1, 1), secs(120));
    assert!(ok);
}

#[test]
fn c07b_ball_h2() {
    let s = standard_heisenberg(2);
    let (ok, _) = slope_case("7b", "ball family, H², (2,4)", |d| ball_example(&s, d), (3, 5), ("2", "4"), Family::Ball, (2, 1), secs(900));
    assert!(ok);
}

#[test]
fn c07c_knapp_h2() {
    let s = standard_heisenberg(2);
    let (ok, _) = slope_case("7c", "knapp family, H², (2,4)", |d| knapp_example(&s, d), (3, 5), ("2", "4"), Family::Knapp, (2, 1), secs(900));
    assert!(ok);
}

#[test]
fn c07d_scaling_h1() {
    let s = standard_heisenberg(1);
    let (ok, min_mean) = slope_case("7d", "scaling family, H¹, (2,2)", |d| scaling_example(&s, d), (3, 7), ("2", "2"), Family::Scaling, (1, 1), secs(120));
    let t = Instant::now();
    let bounded = min_mean >= 0.5;
    let ok2 = report("7d'", "scaling family region average bounded below", bounded, &format!("min over ladder {min_mean:.6} >= 0.5"), t.elapsed(), secs(1));
    assert!(ok && ok2);
}

#[test]
fn c07e_moment() {
    let (ok, _) = slope_case("7e", "moment family, H¹, (2,2)", moment_example, (3, 7), ("2", "2"), Family::MomentCurve, (1, 1), secs(120));
    assert!(ok);
}

#[test]
fn c08_stein_divergence() {
    let t = Instant::now();
    let js: Vec<u32> = (10..=30).collect();
    let diag = stein_growth(&standard_heisenberg(1), 0.9, &js).unwrap();
    let pass = diag.increasing && (diag.growth_exponent - 0.1).abs() <= STEIN_TOL;
    let detail = format!(
        "j = 10..30, increasing {}, growth exponent {:.4} vs 0.1 ± {STEIN_TOL}, norms {:.4}..{:.4}",
        diag.increasing,
        diag.growth_exponent,
        diag.rows[0].norm,
        diag.rows.last().unwrap().norm
    );
    assert!(report("8", "Stein density at the critical exponent", pass, &detail, t.elapsed(), secs(60)));
}

#[test]
fn c09_exponents_vanish_on_edges() {
    let t = Instant::now();
    let zero = |f: Family, n: u32, m: u32, p: &RatPoint| predicted_exponent_exact(f, n, m, &p.ip, &p.iq).unwrap() == qi(0);
    let mut pass = true;
    let mut checked = 0;
    for n in 1..=6u32 {
        for m in 1..=3u32 {
            let [q1, q2, q3, q4] = maximal_corners(n, m);
            let mid23 = q2.midpoint(&q3);
            let mid14 = q1.midpoint(&q4);
            pass &= [&q2, &q3, &mid23].iter().all(|p| zero(Family::Ball, n, m, p));
            pass &= [&q1, &q4, &mid14].iter().all(|p| zero(Family::Scaling, n, m, p));
            checked += 6;
            if m == 1 {
                let mid34 = q3.midpoint(&q4);
                pass &= [&q3, &q4, &mid34].iter().all(|p| zero(Family::Knapp, n, m, p));
                checked += 3;
            }
        }
    }
    let a = RatPoint::new(q(1, 2), q(1, 3));
    let b = RatPoint::new(q(2, 3), q(1, 2));
    pass &= [&a, &b, &a.midpoint(&b)].iter().all(|p| zero(Family::MomentCurve, 1, 1, p));
    checked += 3;
    let detail = format!("{checked} exact evaluations: ball on Q2Q3, scaling on Q1Q4, knapp on Q3Q4 (m=1), moment on the H¹ trapezoid edge");
    assert!(report("9", "predicted exponents vanish on region edges", pass, &detail, t.elapsed(), secs(1)));
}

fn config(sets: &[&str]) -> ExperimentConfig {
    let mut t = default_table();
    for s in sets {
        parse_override(s, &mut t).unwrap();
    }
    ExperimentConfig::from_table(t).unwrap()
}

#[test]
fn c10_determinism_across_thread_counts() {
    let t = Instant::now();
    let runs: Vec<(Command, ExperimentConfig)> = vec![
        (Command::GroupCheck, config(&["seed=11", "samples=200"])),
        (Command::Geometry, config(&["seed=11", "points=20", "diagonal_points=10", "fold_points=10"])),
        (Command::LemmaCheck, config(&["seed=11"])),
        (Command::Counterexample, config(&["n=1", "family=scaling", "p=2", "q=2"])),
        (Command::Counterexample, config(&["n=1", "family=moment", "p=2", "q=2"])),
        (Command::Region, config(&["format=svg"])),
    ];
    let mut pass = true;
    for (cmd, cfg) in &runs {
        let outputs: Vec<Vec<u8>> = [1, 2, 4, 7]
            .iter()
            .map(|&threads| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                pool.install(|| execute(*cmd, cfg).unwrap().output)
            })
            .collect();
        pass &= outputs.windows(2).all(|w| w[0] == w[1]) && !outputs[0].is_empty();
    }
    let detail = format!("{} commands, byte-identical output on 1, 2, 4 and 7 threads", runs.len());
    assert!(report("10", "determinism", pass, &detail, t.elapsed(), secs(60)));
}
