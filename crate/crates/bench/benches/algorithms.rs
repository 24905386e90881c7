use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sectorctl::ancilla::{self, SequenceParams};
use sectorctl::fock::{self, FockSpace};
use sectorctl::su2::{self, Gen};
use sectorctl::{group, lie, weyl, C64};

fn closure(c: &mut Criterion) {
    let mut g = c.benchmark_group("lie_closure");
    for n in [2usize, 4, 6] {
        let sch = fock::schwinger_ops(&fock::number_sector(2, n).unwrap()).unwrap();
        let gens = vec![sch.x.clone(), sch.z.clone(), &sch.z * &sch.z];
        g.bench_with_input(BenchmarkId::new("double_well", n), &gens, |b, gens| {
            b.iter(|| lie::lie_closure(black_box(gens), 1e-9, 64).unwrap().dim)
        });
    }
    g.finish();
}

fn decomposition(c: &mut Criterion) {
    c.bench_function("three_level_scenario", |b| {
        b.iter(|| group::three_level_scenario(1e-9, black_box(0xC0FFEE)).unwrap().group_order)
    });
}

fn enveloping(c: &mut Criterion) {
    let word: Vec<Gen> = "ZXYZXYZX".chars().map(|l| Gen::parse(l).unwrap()).collect();
    c.bench_function("normal_order_len8", |b| b.iter(|| su2::normal_order(black_box(&word))));
    let mut g = c.benchmark_group("symbolic_closure");
    g.sample_size(10);
    for two_j in [2u32, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(two_j), &two_j, |b, &t| {
            b.iter(|| su2::generate_closure_symbolic(&su2::double_well_start(), t, t).unwrap().matrix_rank)
        });
    }
    g.finish();
}

fn bosons(c: &mut Criterion) {
    let mut g = c.benchmark_group("bosons");
    g.sample_size(10);
    let space = FockSpace::uniform(2, 8).unwrap();
    g.bench_function("nonlin_identities_l2", |b| {
        b.iter(|| fock::check_nonlin_identities(black_box(&space), 1).unwrap().nonlin2_residual)
    });
    g.bench_function("propagate_l2", |b| {
        b.iter(|| weyl::propagate_nonlinearity(2, 8, true, 1e-9).unwrap().closure_dim)
    });
    let params = SequenceParams {
        alpha: C64::from_polar(0.5, 0.0),
        beta: C64::from_polar(0.5, 1.2),
        theta: 0.3,
        h_g: su2::spin_matrices(2).2,
    };
    g.bench_function("simul_sequence_spin1_cutoff40", |b| {
        b.iter(|| ancilla::simul_sequence(black_box(&params), 40).unwrap())
    });
    g.finish();
}

criterion_group!(benches, closure, decomposition, enveloping, bosons);
criterion_main!(benches);
