//! Fixed-time averages of a thin shell, with the average itself bounded below.

use metlab::counterexamples::{dyadic_ladder, fit_ladder, predicted_exponent, run_ladder, scaling_example, Exponent, Family};
use metlab::group::standard_heisenberg;

fn main() -> metlab::Result<()> {
    for n in [1usize, 2] {
        let s = standard_heisenberg(n);
        let (p, q) = (Exponent::parse("2")?, Exponent::parse("2")?);
        let rows = run_ladder(|d| scaling_example(&s, d), &dyadic_ladder(3, 6), &p, &q)?;
        let fit = fit_ladder(&rows)?;
        let means: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.region_mean)).collect();
        println!(
            "H^{n}: slope {:.4} (predicted {}), region means [{}]",
            fit.slope,
            predicted_exponent(Family::Scaling, n as u32, 1, 2.0, 2.0)?,
            means.join(", ")
        );
    }
    Ok(())
}
