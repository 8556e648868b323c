use weight1_core::dirichlet::all_characters;
use weight1_core::modsym::ModSymSpace;
use std::time::Instant;
fn main() {
    let chars = all_characters(59);
    let psi = chars.iter().find(|c| c.order() == 29).unwrap();
    let t = Instant::now();
    let s = ModSymSpace::build(59, psi);
    println!("build(59, ord29): dim {} in {:?}", s.dim_s2, t.elapsed());
    let t = Instant::now();
    let lat = s.qexp_basis(12);
    println!("qexp(12): rank {} in {:?}", lat.rank(), t.elapsed());
    let chi = chars.iter().find(|c| c.order() == 58).unwrap();
    let pool = weight1_core::auxforms::multipliers_for(59, 13);
    println!("pool size {}", pool.len());
    let t = Instant::now();
    let (cand, tors, used) = weight1_core::weightone::candidate_space(59, chi, &pool, 11);
    println!("candidate rank {} torsion {} used {} in {:?}", cand.rank(), tors, used.len(), t.elapsed());
}
