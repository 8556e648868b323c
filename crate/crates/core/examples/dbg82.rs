use weight1_core::dirichlet::all_characters;
use weight1_core::weightone::{run_job, scan_unit, suspect_primes};
use std::time::Instant;
fn main() {
    // the order-40 character with chi(47) = zeta_40
    let chi = all_characters(82).into_iter()
        .find(|c| c.order() == 40 && c.value_exp(47) == Some(1)).unwrap();
    let t = Instant::now();
    let job = run_job(82, &chi);
    println!("job(82, ord40): status={:?} lower={} upper={} torsion={} in {:?}",
        job.status, job.lower_bound, job.upper_bound, job.torsion_gcd, t.elapsed());
    let t = Instant::now();
    let (primes, residual) = suspect_primes(82, 13); // small sweep for speed here
    println!("suspects: {:?} residual {:?} in {:?}", primes, residual, t.elapsed());
    let t = Instant::now();
    let finding = scan_unit(82, &chi, 199, &[1, 127, 1]);
    println!("scan(82, 199): {:?} in {:?}", finding.map(|f| (f.classification, f.extra_dim, f.qexp.map(|q| q[2].clone()))), t.elapsed());
}
