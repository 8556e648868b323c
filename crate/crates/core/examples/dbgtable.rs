use weight1_core::dirichlet::{all_characters, conjugacy_classes};
use weight1_core::weightone::{run_job, trivial_vanishing};
use std::time::Instant;
fn main() {
    let t_all = Instant::now();
    let mut rows = Vec::new();
    for n in 23..=60u64 {
        if trivial_vanishing(n).is_some() { continue; }
        let t = Instant::now();
        let chars = all_characters(n);
        let classes = conjugacy_classes(&chars);
        for class in classes {
            let chi = &class.representative;
            if !chi.is_odd() { continue; }
            let r = run_job(n, chi);
            if r.dim_new.unwrap_or(0) > 0 {
                rows.push((n, chi.label(), r.dim_new.unwrap()));
            }
            assert!(r.certified_dim.is_some(), "UNRESOLVED at ({}, {})", n, chi.label());
        }
        eprintln!("N={} done in {:?}", n, t.elapsed());
    }
    println!("TABLE ({} rows) in {:?}:", rows.len(), t_all.elapsed());
    for (n, label, d) in rows {
        println!("{} {} {}", n, label, d);
    }
}
