//! Finite groups given by unitary generators, their sector decomposition and
//! group-algebra Lie algebras.

use std::collections::HashMap;

use serde::Serialize;

use crate::decompose::{self, Decomposition};
use crate::error::{Error, Result};
use crate::lie::{self, AlgebraKind};
use crate::linalg::{self, c64, ComplexMatrix, OperatorBasis, I};

pub type IrrepDecomposition = Decomposition;

/// A finite group as unitary matrices. Element 0 is the identity.
#[derive(Clone, Debug)]
pub struct GroupRep {
    pub dim: usize,
    pub elements: Vec<ComplexMatrix>,
    /// `mult_table[i][j]` is the index of `elements[i] · elements[j]`.
    pub mult_table: Vec<Vec<usize>>,
    /// Generator indices whose ordered product gives each element.
    pub element_words: Vec<Vec<usize>>,
}

impl GroupRep {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Word of element `k` spelled with the given generator names.
    pub fn word(&self, k: usize, names: &[&str]) -> String {
        if self.element_words[k].is_empty() {
            return "e".to_string();
        }
        self.element_words[k].iter().map(|&g| names[g]).collect()
    }
}

fn element_key(m: &ComplexMatrix) -> Vec<i64> {
    let mut key = Vec::with_capacity(2 * m.len() + 1);
    key.push(m.nrows() as i64);
    for z in m.iter() {
        key.push((z.re * 1e8).round() as i64);
        key.push((z.im * 1e8).round() as i64);
    }
    key
}

/// Closes the generators under multiplication.
pub fn group_from_generators(gens: &[ComplexMatrix], max_order: usize, tol: f64) -> Result<GroupRep> {
    let first = gens
        .first()
        .ok_or_else(|| Error::invalid("at least one generator is required"))?;
    let d = first.nrows();
    if max_order < 1 {
        return Err(Error::invalid("max_order must be at least 1"));
    }
    for (k, g) in gens.iter().enumerate() {
        linalg::check_matrix(g)?;
        if g.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: g.nrows(),
            });
        }
        if linalg::unitarity_defect(g) > tol * (d as f64).sqrt().max(1.0) {
            return Err(Error::invalid(format!("generator {k} is not unitary")));
        }
    }

    let mut elements = vec![linalg::identity(d)];
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    index.insert(element_key(&elements[0]), 0);
    let mut next = 0;
    while next < elements.len() {
        for (gi, g) in gens.iter().enumerate() {
            let p = &elements[next] * g;
            let key = element_key(&p);
            if index.contains_key(&key) {
                continue;
            }
            if elements.len() >= max_order {
                return Err(Error::GroupTooLarge { max_order });
            }
            let mut w = words[next].clone();
            w.push(gi);
            index.insert(key, elements.len());
            elements.push(p);
            words.push(w);
        }
        next += 1;
    }

    let n = elements.len();
    let mut mult_table = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let key = element_key(&(&elements[i] * &elements[j]));
            mult_table[i][j] = *index
                .get(&key)
                .ok_or_else(|| Error::Numerical("product left the group; rounding too coarse".into()))?;
        }
    }
    Ok(GroupRep {
        dim: d,
        elements,
        mult_table,
        element_words: words,
    })
}

pub fn decompose_rep(rep: &GroupRep, seed: u64) -> IrrepDecomposition {
    decompose::decompose(&rep.elements, rep.dim, seed)
}

/// Real-orthonormal basis of the anti-Hermitian part of the represented
/// group algebra.
pub fn group_algebra_antiherm(rep: &GroupRep, tol: f64) -> OperatorBasis {
    let mut basis = OperatorBasis::new(rep.dim, tol);
    for g in &rep.elements {
        let h = (g + g.adjoint()) * I;
        let a = g - g.adjoint();
        for m in [h, a] {
            basis
                .orthonormal_extend(&m)
                .expect("anti-Hermitian by construction");
        }
    }
    basis
}

#[derive(Clone, Debug, Serialize)]
pub struct PropCheck {
    pub sector: usize,
    pub dim: usize,
    pub multiplicity: usize,
    pub restricted_dim: usize,
    /// max_g ‖(I − P) ρ(g) P‖_F.
    pub invariance_residual: f64,
    pub pass: bool,
}

/// On each isotypic sector, the restricted group algebra must fill u(d_J).
pub fn verify_prop_eq(rep: &GroupRep, decomposition: &IrrepDecomposition, tol: f64) -> Vec<PropCheck> {
    let algebra = group_algebra_antiherm(rep, tol);
    decomposition
        .sectors
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let dj = s.dim();
            let p = linalg::projector(&s.basis);
            let q = linalg::identity(rep.dim) - &p;
            let invariance_residual = rep
                .elements
                .iter()
                .map(|g| linalg::frobenius(&(&q * g * &p)))
                .fold(0.0, f64::max);
            let restricted_dim = algebra.restricted(&s.basis).len();
            PropCheck {
                sector: k,
                dim: dj,
                multiplicity: s.multiplicity,
                restricted_dim,
                invariance_residual,
                pass: restricted_dim == dj * dj,
            }
        })
        .collect()
}

/// Three-level operators: `R` cycles the levels, `P` swaps the first two.
pub mod three_level {
    use super::*;

    pub fn rotation() -> ComplexMatrix {
        linalg::ket_bra(3, 0, 1) + linalg::ket_bra(3, 1, 2) + linalg::ket_bra(3, 2, 0)
    }

    /// The swap written with only the `|1⟩⟨2| + |2⟩⟨1|` part; not unitary.
    pub fn swap_literal() -> ComplexMatrix {
        coupling(0, 1)
    }

    /// The unitary reflection, `|1⟩⟨2| + |2⟩⟨1| + |3⟩⟨3|`.
    pub fn reflection() -> ComplexMatrix {
        swap_literal() + linalg::ket_bra(3, 2, 2)
    }

    /// `|a⟩⟨b| + h.c.`
    pub fn coupling(a: usize, b: usize) -> ComplexMatrix {
        let e = linalg::ket_bra(3, a, b);
        &e + e.adjoint()
    }

    /// `i|a⟩⟨b| + h.c.`, the coupling with Rabi frequency `i`.
    pub fn coupling_i(a: usize, b: usize) -> ComplexMatrix {
        let e = linalg::ket_bra(3, a, b) * I;
        &e + e.adjoint()
    }

    /// The symmetric sector vector `(|1⟩ + |2⟩ + |3⟩)/√3` as a projector.
    pub fn symmetric_projector() -> ComplexMatrix {
        let v = ComplexMatrix::from_element(3, 1, c64(1.0 / 3f64.sqrt(), 0.0));
        linalg::projector(&v)
    }

    /// Projector onto `span{Σ_j e^{2πikj/3}|j⟩ : k = 1, 2}`.
    pub fn fourier_projector() -> ComplexMatrix {
        let cols: Vec<_> = [1.0, 2.0]
            .iter()
            .map(|&k| {
                nalgebra::DVector::from_iterator(
                    3,
                    (1..=3).map(|j| {
                        let t = 2.0 * std::f64::consts::PI * k * j as f64 / 3.0;
                        c64(t.cos(), t.sin()) / 3f64.sqrt()
                    }),
                )
            })
            .collect();
        linalg::projector(&ComplexMatrix::from_columns(&cols))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreeLevelReport {
    pub group_order: usize,
    pub block_dims: Vec<usize>,
    pub commutant_dim: usize,
    pub group_algebra_dim: usize,
    pub prop: Vec<PropCheck>,
    /// ‖P_computed − P_expected‖_F for the 1- and 2-dimensional sectors.
    pub symmetric_projector_distance: f64,
    pub fourier_projector_distance: f64,
    pub projector_commutation_residual: f64,
    pub couplings_closure_dim: usize,
    pub couplings_kind: AlgebraKind,
    pub couplings_contains_identity: bool,
    /// Worst in_span residual over the sampled group-algebra elements.
    pub sampled_span_residual: f64,
    pub sampled_in_span: bool,
    pub encoded: Vec<lie::EncodedBlock>,
    pub literal_swap_unitarity_defect: f64,
}

impl ThreeLevelReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.group_order == 6
            && self.block_dims == [1, 2]
            && self.group_algebra_dim == 5
            && self.prop.iter().all(|p| p.pass)
            && self.symmetric_projector_distance <= tol
            && self.fourier_projector_distance <= tol
            && self.projector_commutation_residual <= tol
            && self.sampled_in_span
            && self.encoded.iter().all(|b| b.universal)
    }
}

/// End-to-end replay of the three-level example with the dihedral symmetry.
pub fn three_level_scenario(tol: f64, seed: u64) -> Result<ThreeLevelReport> {
    use three_level::*;
    let r = rotation();
    let p = reflection();
    let rep = group_from_generators(&[r.clone(), p.clone()], 64, tol)?;
    let deco = decompose_rep(&rep, seed);
    let algebra = group_algebra_antiherm(&rep, tol);
    let prop = verify_prop_eq(&rep, &deco, tol);

    let by_dim = |d: usize| {
        deco.sectors
            .iter()
            .find(|s| s.dim() == d)
            .map(|s| linalg::projector(&s.basis))
    };
    let dist = |got: Option<ComplexMatrix>, want: &ComplexMatrix| {
        got.map_or(f64::INFINITY, |g| linalg::frobenius(&(g - want)))
    };
    let p1 = symmetric_projector();
    let p2 = fourier_projector();
    let projector_commutation_residual = [&p1, &p2]
        .iter()
        .flat_map(|q| [&r, &p].map(|g| linalg::frobenius(&linalg::bracket(q, g))))
        .fold(0.0, f64::max);

    let couplings = vec![
        coupling(0, 1),
        coupling(1, 2),
        coupling(2, 0),
        coupling_i(0, 1),
        coupling_i(1, 2),
        coupling_i(2, 0),
    ];
    let closure = lie::lie_closure(&couplings, tol, usize::MAX)?;
    let verdict = lie::classify_algebra(&closure, seed)?;

    // i α P − β R + β̄ R† for a few (α, β), P as written for the symmetry.
    let samples = [
        (1.0, c64(0.0, 0.0)),
        (0.0, c64(1.0, 0.0)),
        (0.0, c64(0.0, 1.0)),
        (0.7, c64(-0.3, 1.1)),
    ];
    let swap = swap_literal();
    let mut sampled_span_residual: f64 = 0.0;
    for (alpha, beta) in samples {
        let m = &swap * c64(0.0, alpha) - &r * beta + r.adjoint() * beta.conj();
        let (_, res) = closure.basis.in_span(&m)?;
        sampled_span_residual = sampled_span_residual.max(res);
    }

    let algebra_gens = vec![p.clone(), &r + r.adjoint(), (&r - r.adjoint()) * I];
    let encoded = lie::encoded_universality(&algebra_gens, &[p1.clone(), p2.clone()], tol)?;

    Ok(ThreeLevelReport {
        group_order: rep.order(),
        block_dims: deco.sector_dims(),
        commutant_dim: deco.commutant_dim,
        group_algebra_dim: algebra.len(),
        prop,
        symmetric_projector_distance: dist(by_dim(1), &p1),
        fourier_projector_distance: dist(by_dim(2), &p2),
        projector_commutation_residual,
        couplings_closure_dim: closure.dim,
        couplings_kind: verdict.kind,
        couplings_contains_identity: closure.contains_identity,
        sampled_in_span: sampled_span_residual <= tol * 10.0,
        sampled_span_residual,
        encoded,
        literal_swap_unitarity_defect: linalg::unitarity_defect(&swap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_diag, DEFAULT_TOL};

    #[test]
    fn orders() {
        use three_level::*;
        let d3 = group_from_generators(&[rotation(), reflection()], 100, DEFAULT_TOL).unwrap();
        assert_eq!(d3.order(), 6);
        assert_eq!(d3.word(0, &["R", "P"]), "e");
        let triv = group_from_generators(&[linalg::identity(3)], 10, DEFAULT_TOL).unwrap();
        assert_eq!(triv.order(), 1);
        let z2 = group_from_generators(&[real_diag(&[1.0, -1.0])], 10, DEFAULT_TOL).unwrap();
        assert_eq!(z2.order(), 2);
        assert_eq!(z2.mult_table, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn too_large_and_non_unitary() {
        let t = 1.0f64;
        let u = linalg::diag(&[c64(t.cos(), t.sin()), c64(1.0, 0.0)]);
        assert!(matches!(
            group_from_generators(&[u], 50, DEFAULT_TOL),
            Err(Error::GroupTooLarge { max_order: 50 })
        ));
        assert!(group_from_generators(&[three_level::swap_literal()], 50, DEFAULT_TOL).is_err());
    }

    #[test]
    fn trivial_group_blocks() {
        let rep = group_from_generators(&[linalg::identity(3)], 4, DEFAULT_TOL).unwrap();
        let d = decompose_rep(&rep, 3);
        assert_eq!(d.commutant_dim, 9);
        assert_eq!(d.block_dims(), vec![1, 1, 1]);
        assert_eq!(d.sectors.len(), 1);
        assert_eq!(d.sectors[0].multiplicity, 3);
        assert_eq!(group_algebra_antiherm(&rep, DEFAULT_TOL).len(), 1);
    }

    #[test]
    fn z2_multiplicity_fails_prop() {
        let rep = group_from_generators(&[real_diag(&[1.0, 1.0, -1.0])], 4, DEFAULT_TOL).unwrap();
        let d = decompose_rep(&rep, 11);
        assert_eq!(d.commutant_dim, 5);
        assert_eq!(d.sector_dims(), vec![1, 2]);
        assert_eq!(group_algebra_antiherm(&rep, DEFAULT_TOL).len(), 2);
        let checks = verify_prop_eq(&rep, &d, DEFAULT_TOL);
        let two = checks.iter().find(|c| c.dim == 2).unwrap();
        assert_eq!(two.restricted_dim, 1);
        assert!(!two.pass);
        assert_eq!(two.multiplicity, 2);
    }

    #[test]
    fn three_level_replay() {
        let r = three_level_scenario(DEFAULT_TOL, decompose::DEFAULT_SEED).unwrap();
        assert_eq!(r.block_dims, vec![1, 2]);
        assert_eq!(r.group_algebra_dim, 5);
        assert!(r.symmetric_projector_distance < 1e-9);
        assert!(r.fourier_projector_distance < 1e-9);
        assert_eq!(r.couplings_closure_dim, 8);
        assert_eq!(r.couplings_kind, AlgebraKind::FullSu);
        assert!(r.sampled_in_span);
        assert_eq!(r.encoded[0].restricted_dim, 1);
        assert_eq!(r.encoded[1].restricted_dim, 4);
        assert!(r.pass(1e-9));
        assert!(r.literal_swap_unitarity_defect > 0.5);
    }
}
