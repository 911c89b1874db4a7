//! Exact (1/p, 1/q) regions and point classification.

use metlab::region::{averaging_region, export_region, fmt_q, maximal_region, q, q4_from_interpolation, ExportFormat, Mode, RatPoint};

fn main() -> metlab::Result<()> {
    let r = maximal_region(2, 1)?;
    for (v, l) in r.vertices.iter().zip(&r.labels) {
        println!("{l}: ({}, {})", fmt_q(&v.ip), fmt_q(&v.iq));
    }
    let q4 = q4_from_interpolation(2, 1)?;
    println!("Q4 by interpolation: ({}, {})", fmt_q(&q4.ip), fmt_q(&q4.iq));
    for pt in [RatPoint::new(q(1, 2), q(1, 4)), RatPoint::new(q(3, 4), q(3, 4)), RatPoint::new(q(9, 10), q(1, 10))] {
        let c = r.contains(&pt, Mode::Strong);
        println!("({}, {}): {:?}, {}", fmt_q(&pt.ip), fmt_q(&pt.iq), c.location, c.status.as_str());
    }
    print!("{}", String::from_utf8(export_region(&averaging_region(1, 1)?, ExportFormat::Csv)).unwrap());
    Ok(())
}
