//! Group law, dilations and the H-type structures.

use metlab::group::{
    dilate, group_multiply, inverse, quaternionic_htype, radon_hurwitz, smallness_margin, standard_heisenberg, GroupPoint, ThetaGrid,
};

fn main() -> metlab::Result<()> {
    let h1 = standard_heisenberg(1);
    let x = GroupPoint::new(vec![1.0, 0.0], vec![0.0]);
    let y = GroupPoint::new(vec![0.0, 1.0], vec![0.0]);
    let xy = group_multiply(&h1, &x, &y)?;
    let yx = group_multiply(&h1, &y, &x)?;
    println!("x·y = {:?}", xy.coords());
    println!("y·x = {:?}", yx.coords());
    println!("x⁻¹ = {:?}", inverse(&h1, &x)?.coords());
    println!("δ_2(x·y) = {:?}", dilate(&h1, 2.0, &xy)?.coords());

    let q = quaternionic_htype(1, 3)?;
    println!("quaternionic: n = {}, m = {}, d = {}", q.n(), q.m(), q.d());
    let margin = smallness_margin(&q, &ThetaGrid::default_for(q.m()))?;
    println!("smallness margin {:.6}, certified {}", margin.margin, margin.certified());
    for k in [2, 4, 8, 16, 32] {
        println!("RH({k}) = {}", radon_hurwitz(k));
    }
    Ok(())
}
