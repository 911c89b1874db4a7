//! The pointwise lower bounds behind each family, read off the mean of the
//! maximal function over the test region.

use metlab::counterexamples::{ball_example, dyadic_ladder, fit_exponent, knapp_example, moment_example, scaling_example, ExampleInstance};
use metlab::group::standard_heisenberg;
use metlab::Result;

fn mean_slope(build: impl Fn(f64) -> Result<ExampleInstance>, from: u32, to: u32) -> (f64, Vec<f64>) {
    let means: Vec<f64> = dyadic_ladder(from, to).into_iter().map(|d| build(d).unwrap().region_mean().unwrap()).collect();
    let pts: Vec<(f64, f64)> = dyadic_ladder(from, to).into_iter().zip(means.iter().copied()).collect();
    (fit_exponent(&pts).unwrap().slope, means)
}

#[test]
fn ball_average_scales_like_the_cap() {
    let s = standard_heisenberg(1);
    let (slope, means) = mean_slope(|d| ball_example(&s, d), 3, 7);
    assert!((slope - 1.0).abs() < 0.2, "{slope}");
    assert!(means.iter().all(|m| *m > 0.0));
}

#[test]
fn knapp_average_scales_like_delta_to_the_n() {
    for n in [1usize, 2] {
        let s = standard_heisenberg(n);
        let (slope, _) = mean_slope(|d| knapp_example(&s, d), 3, 5);
        assert!((slope - n as f64).abs() < 0.2, "n={n}: {slope}");
    }
}

#[test]
fn scaling_average_is_bounded_below() {
    for n in [1usize, 2] {
        let s = standard_heisenberg(n);
        let (slope, means) = mean_slope(|d| scaling_example(&s, d), 3, 6);
        assert!(slope.abs() < 0.05, "{slope}");
        assert!(means.iter().all(|m| *m > 0.5), "{means:?}");
    }
}

#[test]
fn moment_average_is_linear_in_delta() {
    let (slope, _) = mean_slope(moment_example, 3, 7);
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
}
