//! The moment-curve example on H¹ at (p, q) = (2, 2).

use metlab::counterexamples::{dyadic_ladder, fit_ladder, moment_example, run_ladder, Exponent};

fn main() -> metlab::Result<()> {
    let two = Exponent::parse("2")?;
    let rows = run_ladder(moment_example, &dyadic_ladder(3, 8), &two, &two)?;
    for r in &rows {
        println!("delta {:.3e}  ratio {:.6e}  mean {:.6e}", r.delta, r.ratio, r.region_mean);
    }
    println!("slope {:.4}", fit_ladder(&rows)?.slope);
    Ok(())
}
