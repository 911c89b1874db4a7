//! Spherical means on H² with a global rule and with a localized cap rule.

use metlab::averaging::{maximal_value, spherical_average, TimeSelector};
use metlab::field::{BoxND, ScalarField};
use metlab::group::{standard_heisenberg, GroupPoint};
use metlab::sphere::{sphere_rule, Quadrature};

fn main() -> metlab::Result<()> {
    let s = standard_heisenberg(2);
    let one = ScalarField::constant(1.0, BoxND::cube(5, 10.0));
    let global = Quadrature::Global(sphere_rule(2, 8)?);
    let x = GroupPoint::new(vec![0.3, 0.0, -0.2, 0.1], vec![0.5]);
    println!("mean of 1: {:.15}", spherical_average(&s, &one, 1.5, &x, &global)?);

    let r = 0.05;
    let ball = ScalarField::new("small ball", BoxND::cube(5, r), move |y: metlab::PointRef<'_>| {
        let r2: f64 = y.ubar.iter().chain(y.bar).map(|v| v * v).sum();
        if r2 <= r * r {
            1.0
        } else {
            0.0
        }
    });
    let cap = Quadrature::Cap { center: vec![0.0; 4], radius: r, resolution: 24, fallback: sphere_rule(2, 8)? };
    let x = GroupPoint::new(vec![1.5, 0.0, 0.0, 0.0], vec![0.0]);
    println!("ball mean, global rule: {:.6e}", spherical_average(&s, &ball, 1.5, &x, &global)?);
    println!("ball mean, cap rule:    {:.6e}", spherical_average(&s, &ball, 1.5, &x, &cap)?);
    println!("max over t ∈ [1, 2]:    {:.6e}", maximal_value(&s, &ball, &x, &TimeSelector::grid(33)?, &cap)?);
    Ok(())
}
