//! Acceptance criteria AC1–AC8. Each criterion prints one line:
//!
//! ```text
//! AC3 PASS  0.003s  max residual 1.9e-14 over 300 draws
//! ```
//!
//! Run with `cargo test -p sectorctl-core --test acceptance`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sectorctl::ancilla::{self, SequenceParams};
use sectorctl::fock::{self, BHParams, FockSpace};
use sectorctl::group::{self, three_level};
use sectorctl::linalg::{self, ComplexMatrix, C64};
use sectorctl::report::Format;
use sectorctl::{identities, lie, registry, scenario, su2, weyl, AlgebraKind};

const SEED: u64 = 0xC0FFEE;

// Tolerances and budgets pinned by the criteria.
const PROJECTOR_TOL: f64 = 1e-9;
const HAMSCHW_TOL: f64 = 1e-12;
const N2_TOL: f64 = 1e-10;
const HOMOMORPHISM_TOL: f64 = 1e-10;
const CHI_SPAN_TOL: f64 = 1e-9;
const NONLIN_EXACT_TOL: f64 = 1e-10;
const NONLIN_SPAN_TOL: f64 = 1e-8;
const REACH_TOL: f64 = 1e-8;
const UNREACHABLE_FLOOR: f64 = 0.1;
const PHASE_TOL: f64 = 1e-6;
const UNITARITY_TOL: f64 = 1e-6;
const BILINEAR_TOL: f64 = 1e-6;
const CUTOFF_DRIFT_TOL: f64 = 1e-7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_budget = elapsed <= budget;
    let pass = out.pass && in_budget;
    let budget_note = if in_budget {
        String::new()
    } else {
        format!(" (over budget {:.1}s)", budget.as_secs_f64())
    };
    println!(
        "{id} {}  {:.3}s  {}{budget_note}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        out.detail
    );
    pass
}

fn ac1() -> Outcome {
    let t = group::three_level_scenario(PROJECTOR_TOL, SEED).unwrap();
    let prop_ok = t.prop.iter().all(|p| p.pass);
    let blocks_universal = t.encoded.iter().all(|b| b.universal);
    Outcome {
        pass: t.block_dims == [1, 2]
            && t.symmetric_projector_distance <= PROJECTOR_TOL
            && t.group_algebra_dim == 5
            && prop_ok
            && blocks_universal,
        detail: format!(
            "blocks {:?}, symmetric projector distance {:.1e}, group algebra dim {}, invariance {}",
            t.block_dims,
            t.symmetric_projector_distance,
            t.group_algebra_dim,
            if prop_ok { "ok" } else { "broken" }
        ),
    }
}

fn ac2() -> Outcome {
    let mut pass = true;
    let mut dims = Vec::new();
    for n in 1..=4 {
        let dw = fock::doublewell_universality(n, 1e-9, SEED).unwrap();
        let want = (n + 1) * (n + 1);
        let oracle = su2::canonical_monomial_rank(n as u32, n as u32);
        pass &= dw.closure.dim == want && dw.verdict.kind == AlgebraKind::FullU && oracle == want;
        dims.push(format!("{}/{}", dw.closure.dim, oracle));
    }
    Outcome {
        pass,
        detail: format!("closure/oracle dims for N=1..4: {}", dims.join(" ")),
    }
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut draws = 0;
    for n in 1..=6 {
        for _ in 0..50 {
            let p = BHParams {
                gamma1: rng.random_range(-2.0..2.0),
                gamma2: rng.random_range(-2.0..2.0),
                tau: rng.random_range(-2.0..2.0),
                epsilon: rng.random_range(-2.0..2.0),
            };
            worst = worst.max(fock::verify_hamschw(&p, n).unwrap());
            draws += 1;
        }
    }
    Outcome {
        pass: worst < HAMSCHW_TOL,
        detail: format!("max residual {worst:.1e} over {draws} draws"),
    }
}

fn ac4() -> Outcome {
    let t = fock::verify_n2_table(N2_TOL).unwrap();
    let unit_rows = ["X", "Y", "XY+YX", "X2-Y2", "ZX+XZ", "ZY+YZ"];
    let all_rows = t.rows.len() == 8 && t.rows.iter().all(|r| r.pass && r.residual < N2_TOL);
    let unit = unit_rows.iter().all(|name| {
        t.rows
            .iter()
            .any(|r| r.relation == *name && (r.scalar - 1.0).abs() < N2_TOL)
    });
    let z = t.rows.iter().find(|r| r.relation == "Z").map(|r| r.scalar);
    Outcome {
        pass: all_rows && unit && z.is_some(),
        detail: format!(
            "{} rows, unit scalars {}, Z-row scalar {:?}",
            t.rows.len(),
            if unit { "ok" } else { "off" },
            z
        ),
    }
}

fn ac5() -> Outcome {
    let mut worst_hom = 0.0f64;
    for two_j in 1..=5 {
        worst_hom = worst_hom.max(su2::homomorphism_defect(two_j, 200, 6, SEED + two_j as u64));
    }
    let mut ranks_ok = true;
    for two_j in 1..=6u32 {
        let d = two_j as usize + 1;
        ranks_ok &= su2::canonical_monomial_rank(two_j, two_j) == d * d;
        let sym = su2::generate_closure_symbolic(&su2::double_well_start(), two_j, two_j.max(2)).unwrap();
        ranks_ok &= sym.matrix_rank == d * d;
    }
    let mut zy_exact = true;
    let mut chi_worst = 0.0f64;
    let mut chi_count = 0;
    for two_j in 2..=6 {
        for o in identities::verify_procedure_identities(two_j) {
            if o.name == "zy" {
                zy_exact &= o.symbolic_residual == 0.0;
            }
            if o.name.starts_with("chi") {
                chi_worst = chi_worst.max(o.span_residual);
                chi_count += 1;
            }
        }
    }
    Outcome {
        pass: worst_hom <= HOMOMORPHISM_TOL && ranks_ok && zy_exact && chi_worst <= CHI_SPAN_TOL && chi_count > 0,
        detail: format!(
            "homomorphism defect {worst_hom:.1e}, ranks {}, zy {}, {chi_count} chi instances max span residual {chi_worst:.1e}",
            if ranks_ok { "full" } else { "deficient" },
            if zy_exact { "exact" } else { "inexact" }
        ),
    }
}

fn ac6() -> Outcome {
    let space = FockSpace::uniform(2, 8).unwrap();
    let nl = fock::check_nonlin_identities(&space, 1).unwrap();
    let prop = weyl::propagate_nonlinearity(2, 8, true, 1e-9).unwrap();
    let neg = weyl::propagate_nonlinearity(2, 8, false, 1e-9).unwrap();
    let reach = prop.reach.iter().find(|m| m.mode == 1).unwrap();
    let blocked = neg.reach.iter().find(|m| m.mode == 1).unwrap();
    Outcome {
        pass: nl.nonlin2_residual < NONLIN_EXACT_TOL
            && nl.nonlin1_residual < NONLIN_SPAN_TOL
            && nl.nonlin3_residual < NONLIN_SPAN_TOL
            && reach.reachable
            && reach.guarded_residual < REACH_TOL
            && !blocked.reachable
            && blocked.guarded_residual > UNREACHABLE_FLOOR,
        detail: format!(
            "nonlin1 {:.1e}, nonlin2 {:.1e}, nonlin3 {:.1e}, n2^2 reach {:.1e}, control {:.2}",
            nl.nonlin1_residual, nl.nonlin2_residual, nl.nonlin3_residual, reach.guarded_residual, blocked.guarded_residual
        ),
    }
}

/// Displacements as (phase, amplitude) pairs composed with
/// `D(x) D(y) = e^{−i Im(x ȳ)} D(x + y)`.
#[derive(Clone, Copy)]
struct Disp {
    phase: f64,
    amp: C64,
}

impl Disp {
    fn of(amp: C64) -> Self {
        Disp { phase: 0.0, amp }
    }

    fn then_left(self, left: Disp) -> Disp {
        Disp {
            phase: self.phase + left.phase - (left.amp * self.amp.conj()).im,
            amp: left.amp + self.amp,
        }
    }
}

/// Loop phase on the `h` eigenspace: the coupling rotates the inner
/// displacements to `α e^{−iθh}`.
fn loop_phase(alpha: C64, beta: C64, theta: f64, h: f64) -> f64 {
    let rotated = alpha * C64::from_polar(1.0, -theta * h);
    let total = [Disp::of(rotated), Disp::of(beta), Disp::of(-rotated), Disp::of(-beta)]
        .into_iter()
        .reduce(|acc, d| acc.then_left(d))
        .unwrap();
    assert!(total.amp.norm() < 1e-14);
    total.phase
}

fn wrap(x: f64) -> f64 {
    x - TAU * (x / TAU).round()
}

fn extract(h_g: &ComplexMatrix, alpha: C64, beta: C64, theta: f64, cutoff: usize) -> ancilla::Extraction {
    let p = SequenceParams {
        alpha,
        beta,
        theta,
        h_g: h_g.clone(),
    };
    let u = ancilla::simul_sequence(&p, cutoff).unwrap();
    ancilla::effective_hamiltonian_extract(&u, &p, cutoff, 1e-6).unwrap()
}

fn ac7() -> Outcome {
    let theta = 0.3;
    let alpha = C64::from_polar(0.5, 0.0);
    let beta = C64::from_polar(0.5, FRAC_PI_2);
    let mut pass = true;
    let mut notes = Vec::new();
    for two_j in [1u32, 2] {
        let h_g = su2::spin_matrices(two_j).2;
        let ex = extract(&h_g, alpha, beta, theta, 40);
        let phase_err = ex
            .eigenvalues
            .iter()
            .zip(&ex.phases)
            .map(|(&h, &p)| wrap(p - loop_phase(alpha, beta, theta, h)).abs())
            .fold(0.0, f64::max);
        let a2 = extract(&h_g, alpha * 2.0, beta, theta, 40).fit.amplitude;
        let b3 = extract(&h_g, alpha, beta * 3.0, theta, 40).fit.amplitude;
        let c = ex.fit.amplitude;
        let bilinear = (a2 - 2.0 * c).abs().max((b3 - 3.0 * c).abs());
        let drift = (extract(&h_g, alpha, beta, theta, 50).fit.ratio - ex.fit.ratio).abs();
        pass &= phase_err < PHASE_TOL
            && ex.unitarity_defect < UNITARITY_TOL
            && bilinear < BILINEAR_TOL
            && drift < CUTOFF_DRIFT_TOL;
        notes.push(format!(
            "J={}/2: phase {phase_err:.1e}, vacuum {:.1e}, bilinear {bilinear:.1e}, ratio {:.6} (drift {drift:.1e})",
            two_j, ex.unitarity_defect, ex.fit.ratio
        ));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let h = (&a + a.adjoint()) * C64::new(0.0, 1.5);
    linalg::matrix_exp(&h)
}

fn closure_dim(gens: &[ComplexMatrix]) -> usize {
    lie::lie_closure(gens, 1e-9, 64).unwrap().dim
}

fn generator_sets() -> Vec<(String, Vec<ComplexMatrix>)> {
    let mut sets = Vec::new();
    for name in ["qubit_xz", "qutrit_encoded"] {
        if let scenario::Spec::LieClosure { generators, .. } | scenario::Spec::EncodedUniversality { generators, .. } =
            registry::builtin(name).unwrap().spec
        {
            sets.push((name.to_string(), generators));
        }
    }
    sets.push((
        "d3_couplings".into(),
        vec![three_level::coupling(0, 1), three_level::coupling_i(1, 2), three_level::rotation() + three_level::rotation().adjoint()],
    ));
    for n in 1..=4 {
        let sch = fock::schwinger_ops(&fock::number_sector(2, n).unwrap()).unwrap();
        sets.push((format!("double_well_n{n}"), vec![sch.x.clone(), sch.z.clone(), &sch.z * &sch.z]));
    }
    sets
}

fn ac8() -> Outcome {
    let run_suite = || -> Vec<String> {
        registry::builtin_names()
            .into_iter()
            .map(|n| {
                let s = registry::builtin(n).unwrap();
                scenario::run_scenario(&s).unwrap().emit(Format::Json)
            })
            .collect()
    };
    let suite_start = Instant::now();
    let first = run_suite();
    let suite_time = suite_start.elapsed();
    let second = run_suite();
    let identical = first == second;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut invariant = true;
    let mut failures = Vec::new();
    let sets = generator_sets();
    for (name, gens) in &sets {
        let base = closure_dim(gens);
        let mut reversed = gens.clone();
        reversed.reverse();
        let mut ok = closure_dim(&reversed) == base;
        for _ in 0..3 {
            let u = random_unitary(gens[0].nrows(), &mut rng);
            let conj: Vec<_> = gens.iter().map(|g| &u * g * u.adjoint()).collect();
            ok &= closure_dim(&conj) == base;
        }
        if !ok {
            failures.push(name.clone());
        }
        invariant &= ok;
    }
    Outcome {
        pass: identical && invariant && suite_time <= Duration::from_secs(120),
        detail: format!(
            "{} reports {}, suite {:.1}s, closure dims invariant over {} generator sets{}",
            first.len(),
            if identical { "byte-identical" } else { "differ" },
            suite_time.as_secs_f64(),
            sets.len(),
            if failures.is_empty() { String::new() } else { format!(" (broken: {})", failures.join(", ")) }
        ),
    }
}

fn main() {
    let results = [
        check("AC1", Duration::from_millis(100), ac1),
        check("AC2", Duration::from_secs(5), ac2),
        check("AC3", Duration::from_secs(1), ac3),
        check("AC4", Duration::from_millis(100), ac4),
        check("AC5", Duration::from_secs(30), ac5),
        check("AC6", Duration::from_secs(60), ac6),
        check("AC7", Duration::from_secs(10), ac7),
        check("AC8", Duration::from_secs(240), ac8),
    ];
    let failed: Vec<String> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(k, _)| format!("AC{}", k + 1))
        .collect();
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", results.len(), results.len());
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        std::process::exit(1);
    }
}
