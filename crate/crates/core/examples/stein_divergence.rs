//! Logarithmic densities at p = 2 on H¹: bounded norms, growing probe values.

use metlab::counterexamples::stein_growth;
use metlab::group::standard_heisenberg;

fn main() -> metlab::Result<()> {
    let s = standard_heisenberg(1);
    for alpha in [0.6, 0.75, 0.9] {
        let js: Vec<u32> = (10..=30).collect();
        let diag = stein_growth(&s, alpha, &js)?;
        let (first, last) = (&diag.rows[0], diag.rows.last().unwrap());
        println!(
            "alpha {alpha}: value {:.4} -> {:.4}, norm {:.4} -> {:.4}, growth exponent {:.4} (expected {:.2})",
            first.value,
            last.value,
            first.norm,
            last.norm,
            diag.growth_exponent,
            1.0 - alpha
        );
    }
    Ok(())
}
