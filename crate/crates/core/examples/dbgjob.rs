use weight1_core::dirichlet::from_local_label;
use weight1_core::weightone::run_job;
fn main() {
    for (n, label) in [(23u64, "23_2"), (31, "31_2"), (39, "3_2 13_2"), (44, "2_1 11_2"), (47, "47_2")] {
        let chi = from_local_label(label, n).unwrap().into_iter().find(|c| c.is_odd()).unwrap();
        let t = std::time::Instant::now();
        let r = run_job(n, &chi);
        println!("N={} chi={} status={:?} lower={} upper={} dim={:?} new={:?} torsion={} mult={:?} [{:?}]",
            n, label, r.status, r.lower_bound, r.upper_bound, r.certified_dim, r.dim_new,
            r.torsion_gcd, r.multipliers_used.len(), t.elapsed());
    }
}
