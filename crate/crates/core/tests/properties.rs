use proptest::prelude::*;

use nalgebra::DMatrix;
use sectorctl::ancilla::{self, SequenceParams};
use sectorctl::fock::{self, BHParams, FockSpace};
use sectorctl::linalg::{self, ComplexMatrix, C64};
use sectorctl::report::{number, to_json};
use sectorctl::su2::{self, Gen};
use sectorctl::weyl::BosonPoly;
use sectorctl::lie;

fn hermitian(d: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    let a = DMatrix::from_fn(d, d, |i, j| {
        let (re, im) = entries[i * d + j];
        C64::new(re, im)
    });
    (&a + a.adjoint()) * C64::from(0.5)
}

fn unitary(d: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    linalg::matrix_exp(&(hermitian(d, entries) * C64::new(0.0, 2.0)))
}

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_dim_invariant_under_conjugation(
        d in 2usize..4,
        g1 in entries(9),
        g2 in entries(9),
        u in entries(9),
    ) {
        let gens = vec![hermitian(d, &g1), hermitian(d, &g2)];
        let v = unitary(d, &u);
        let conj: Vec<_> = gens.iter().map(|g| &v * g * v.adjoint()).collect();
        let a = lie::lie_closure(&gens, 1e-9, 64).unwrap();
        let b = lie::lie_closure(&conj, 1e-9, 64).unwrap();
        prop_assert_eq!(a.dim, b.dim);
        prop_assert!(a.dim <= d * d);
        for g in &gens {
            prop_assert!(a.basis.in_span(&(g * linalg::I)).unwrap().0);
        }
    }

    #[test]
    fn closure_dim_invariant_under_permutation(
        g1 in entries(4),
        g2 in entries(4),
        g3 in entries(4),
    ) {
        let gens = vec![hermitian(2, &g1), hermitian(2, &g2), hermitian(2, &g3)];
        let mut rev = gens.clone();
        rev.reverse();
        let a = lie::lie_closure(&gens, 1e-9, 64).unwrap().dim;
        let b = lie::lie_closure(&rev, 1e-9, 64).unwrap().dim;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normal_ordering_is_a_homomorphism(
        two_j in 1u32..6,
        word in prop::collection::vec(0usize..3, 1..7),
    ) {
        let gens: Vec<Gen> = word.iter().map(|&k| Gen::ALL[k]).collect();
        let (sx, sy, sz) = su2::spin_matrices(two_j);
        let mats = [sx, sy, sz];
        let d = two_j as usize + 1;
        let direct = word.iter().fold(linalg::identity(d), |acc, &k| acc * &mats[k]);
        let ordered = su2::eval_poly(&su2::normal_order(&gens), two_j);
        prop_assert!((ordered - &direct).norm() <= 1e-10 * direct.norm().max(1.0));
    }

    #[test]
    fn hamschw_holds_for_random_parameters(
        n in 1usize..7,
        gamma1 in -3.0f64..3.0,
        gamma2 in -3.0f64..3.0,
        tau in -3.0f64..3.0,
        epsilon in -3.0f64..3.0,
    ) {
        let r = fock::verify_hamschw(&BHParams { gamma1, gamma2, tau, epsilon }, n).unwrap();
        prop_assert!(r < 1e-11, "{}", r);
    }

    #[test]
    fn weyl_commutator_matches_truncated_matrices(
        p in prop::collection::vec((0u32..3, 0u32..3, -2i64..3), 1..4),
        q in prop::collection::vec((0u32..3, 0u32..3, -2i64..3), 1..4),
    ) {
        let build = |terms: &[(u32, u32, i64)]| {
            let mut out = BosonPoly::zero(1);
            for &(r, l, c) in terms {
                if r + l <= 2 {
                    out.add_scaled(&BosonPoly::ladder(1, 0, r, l), &su2::real(c, 1));
                }
            }
            out
        };
        let (a, b) = (build(&p), build(&q));
        let space = FockSpace::uniform(1, 12).unwrap();
        let guard = space.guard_states(8);
        let v = space.selector(&guard);
        let (ma, mb) = (a.eval(&space), b.eval(&space));
        let want = v.adjoint() * (&ma * &mb - &mb * &ma) * &v;
        let got = a.commutator(&b).eval_on(&space, &guard);
        prop_assert!((got - want).norm() < 1e-9);
    }

    #[test]
    fn weyl_adjoint_reverses_products(
        p in prop::collection::vec((0u32..3, 0u32..3, -2i64..3, -2i64..3), 1..4),
        q in prop::collection::vec((0u32..3, 0u32..3, -2i64..3, -2i64..3), 1..4),
    ) {
        let build = |terms: &[(u32, u32, i64, i64)]| {
            let mut out = BosonPoly::zero(2);
            for &(r, l, re, im) in terms {
                let c = su2::coeff(su2::rational(re, 1), su2::rational(im, 1));
                out.add_scaled(&BosonPoly::ladder(2, (r % 2) as usize, r, l), &c);
            }
            out
        };
        let (a, b) = (build(&p), build(&q));
        prop_assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
    }

    #[test]
    fn loop_phase_depends_only_on_relative_phase(
        rot in -3.0f64..3.0,
        phase_a in -3.0f64..3.0,
        phase_b in -3.0f64..3.0,
        theta in 0.1f64..1.0,
    ) {
        let h_g = su2::spin_matrices(1).2;
        let cutoff = 30;
        let run = |a: C64, b: C64| {
            let p = SequenceParams { alpha: a, beta: b, theta, h_g: h_g.clone() };
            let u = ancilla::simul_sequence(&p, cutoff).unwrap();
            ancilla::effective_hamiltonian_extract(&u, &p, cutoff, 1e-6).unwrap().phases
        };
        let (a, b) = (C64::from_polar(0.5, phase_a), C64::from_polar(0.5, phase_b));
        let r = C64::from_polar(1.0, rot);
        let base = run(a, b);
        let rotated = run(a * r, b * r);
        for (x, y) in base.iter().zip(&rotated) {
            let d = (x - y + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            prop_assert!(d.abs() < 1e-8, "{} vs {}", x, y);
        }
    }

    #[test]
    fn json_numbers_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let s = number(x);
        let back: f64 = s.parse().unwrap();
        prop_assert_eq!(back, if x == 0.0 { 0.0 } else { x });
        let v: serde_json::Value = serde_json::from_str(&to_json(&serde_json::json!({"x": x}))).unwrap();
        prop_assert_eq!(v["x"].as_f64().unwrap(), x);
    }
}
