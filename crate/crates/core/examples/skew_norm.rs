//! `‖(ρI + B)⁻¹‖` for skew `B` from the eigenvalues of `BᵀB`, against a direct inverse.

use metlab::linalg::spectral_norm;
use metlab::skew::skew_inverse_norm;
use nalgebra::DMatrix;

fn main() -> metlab::Result<()> {
    let b = DMatrix::from_row_slice(4, 4, &[0.0, 1.0, 0.3, 0.0, -1.0, 0.0, 0.0, 0.2, -0.3, 0.0, 0.0, 2.0, 0.0, -0.2, -2.0, 0.0]);
    for rho in [0.1, 0.5, 1.0, -2.0] {
        let formula = skew_inverse_norm(rho, &b)?;
        let brute = spectral_norm(&(DMatrix::identity(4, 4) * rho + &b).try_inverse().unwrap());
        println!("rho = {rho:5}: formula {:?}, brute force {brute:.15}", formula);
    }
    // odd size: B always has a kernel, so the norm is 1/|ρ|
    let odd = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0]);
    println!("odd: {:?}", skew_inverse_norm(0.25, &odd)?);
    println!("rho = 0, singular B: {:?}", skew_inverse_norm(0.0, &DMatrix::zeros(2, 2))?);
    Ok(())
}
