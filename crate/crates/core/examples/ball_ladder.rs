//! Ball family on H¹ at (p, q) = (1, ∞): the ratio grows like δ⁻².

use metlab::counterexamples::{ball_example, dyadic_ladder, fit_ladder, run_ladder, Exponent, LADDER_CSV_HEADER};
use metlab::group::standard_heisenberg;

fn main() -> metlab::Result<()> {
    let s = standard_heisenberg(1);
    let (p, q) = (Exponent::parse("1")?, Exponent::infinity());
    let rows = run_ladder(|d| ball_example(&s, d), &dyadic_ladder(3, 7), &p, &q)?;
    println!("{LADDER_CSV_HEADER}");
    for r in &rows {
        println!("{}", r.csv_row());
    }
    let fit = fit_ladder(&rows)?;
    println!("# slope {:.4}, r² {:.6}", fit.slope, fit.r_squared);
    Ok(())
}
