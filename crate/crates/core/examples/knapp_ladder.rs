//! Knapp-type plates adapted to the plane spanned by u and Ju.

use metlab::counterexamples::{dyadic_ladder, fit_ladder, knapp_example, knapp_plane, run_ladder, Exponent};
use metlab::group::standard_heisenberg;
use nalgebra::DMatrix;

fn main() -> metlab::Result<()> {
    let s = standard_heisenberg(2).with_lambda(DMatrix::from_row_slice(1, 4, &[0.0, 0.1, 0.05, 0.0]))?;
    let frame = knapp_plane(&s)?;
    println!("plane frame: {frame:?}");
    let (p, q) = (Exponent::parse("2")?, Exponent::parse("4")?);
    let rows = run_ladder(|d| knapp_example(&s, d), &dyadic_ladder(3, 5), &p, &q)?;
    for r in &rows {
        println!("{}", r.csv_row());
    }
    let fit = fit_ladder(&rows)?;
    println!("# slope {:.4} (predicted {}), r² {:.6}", fit.slope, metlab::region::fmt_q(&rows[0].predicted), fit.r_squared);
    Ok(())
}
