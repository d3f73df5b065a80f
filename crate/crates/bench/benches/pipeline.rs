use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use multimirror::{
    borisov_dual, build_witness, find_translations, roundtrip_check_w, CharacterTable, LatticePolytope, LatticeVector,
    WStructure,
};
use multimirror_bench::fixture;

const FIXTURES: &[&str] = &["bn51", "stacked-2x", "rank3-1", "rank3-3"];

fn hull(c: &mut Criterion) {
    // Integer points of the cube [-2, 2]^3.
    let pts: Vec<LatticeVector> = (0..125)
        .map(|i| LatticeVector::from_i64(&[i % 5 - 2, (i / 5) % 5 - 2, i / 25 - 2]))
        .collect();
    c.bench_function("hull/cube-125", |b| {
        b.iter(|| LatticePolytope::hull(black_box(&pts)).unwrap())
    });
    let cube = LatticePolytope::hull(&pts).unwrap();
    c.bench_function("lattice_points/cube", |b| {
        b.iter(|| {
            LatticePolytope::hull(black_box(cube.vertices()))
                .unwrap()
                .lattice_points()
                .len()
        })
    });
}

fn duality(c: &mut Criterion) {
    for name in FIXTURES {
        let mp = fixture(name);
        c.bench_function(&format!("borisov_dual/{name}"), |b| {
            b.iter(|| borisov_dual(black_box(mp.nabla1())))
        });
        c.bench_function(&format!("find_translations/{name}"), |b| {
            b.iter(|| find_translations(black_box(mp.nabla1())).unwrap())
        });
    }
}

fn cells(c: &mut Criterion) {
    for name in FIXTURES {
        let mp = fixture(name);
        c.bench_function(&format!("build_xi/{name}"), |b| {
            b.iter(|| CharacterTable::build_xi(black_box(&mp)).unwrap())
        });
        let w = WStructure::build(&CharacterTable::build_xi(&mp).unwrap()).unwrap();
        c.bench_function(&format!("witness/{name}"), |b| {
            b.iter(|| build_witness(black_box(&w)).unwrap())
        });
        c.bench_function(&format!("roundtrip-10/{name}"), |b| {
            b.iter(|| roundtrip_check_w(black_box(&w), 10, 1e-9, 0))
        });
    }
}

criterion_group!(benches, hull, duality, cells);
criterion_main!(benches);
