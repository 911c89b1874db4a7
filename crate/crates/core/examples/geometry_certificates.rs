//! Rank, curvature and fold certificates at a few seeded chart points.

use metlab::geometry::{certify_point, sample_points, PhaseModel, SampleKind, GEOMETRY_CSV_HEADER};
use metlab::group::standard_heisenberg;
use nalgebra::DMatrix;

fn main() -> metlab::Result<()> {
    let s = standard_heisenberg(2).with_lambda(DMatrix::from_row_slice(1, 4, &[0.1, 0.0, -0.05, 0.1]))?;
    let pm = PhaseModel::new(s);
    println!("{GEOMETRY_CSV_HEADER}");
    for kind in [SampleKind::Generic, SampleKind::Diagonal, SampleKind::Fold] {
        for (i, p) in sample_points(&pm, kind, 3, 1).iter().enumerate() {
            let c = certify_point(&pm, kind, i, p)?;
            eprintln!("{} {i}: ranks {:?}, expected {:?}", kind.as_str(), c.ranks(), kind.expected_ranks(5));
            println!("{}", c.csv_row());
        }
    }
    Ok(())
}
