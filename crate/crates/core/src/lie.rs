//! Dynamical Lie algebra closure and classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::decompose::{self, Decomposition};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, OperatorBasis, RealSpan, I};

/// Something that can be bracketed and measured in real coordinates.
pub trait LieElement: Clone + Send + Sync {
    /// Real coordinates; Euclidean geometry on these decides independence.
    fn coords(&self) -> Vec<f64>;

    /// The Lie bracket, or `None` when the result falls outside the region
    /// the caller wants to explore (a degree guard, for instance).
    fn bracket(&self, other: &Self) -> Option<Self>;

    /// Element to store once `self` was found independent. `unit` is the
    /// normalized residual of its coordinates against the current span.
    fn adopt(self, _unit: &[f64]) -> Self {
        self
    }
}

impl LieElement for ComplexMatrix {
    fn coords(&self) -> Vec<f64> {
        linalg::flatten_real(self)
    }

    fn bracket(&self, other: &Self) -> Option<Self> {
        Some(linalg::bracket(self, other))
    }

    fn adopt(self, unit: &[f64]) -> Self {
        linalg::unflatten_real(unit, self.nrows())
    }
}

/// Which pairs are bracketed in each round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairPolicy {
    /// Every (older, newer) pair.
    AllPairs,
    /// Only brackets with the surviving seed elements. Spans the same algebra
    /// (right-normed brackets suffice) with far fewer products.
    WithSeeds,
}

#[derive(Clone, Debug)]
pub struct Closure<E> {
    pub elements: Vec<E>,
    pub span: RealSpan,
    pub rounds: usize,
    pub saturated: bool,
}

const CHUNK: usize = 256;

/// Closes `seeds` under brackets and real-linear span. `capacity` bounds the
/// dimension of the space the elements live in (`d²` for anti-Hermitian
/// `d × d` matrices); reaching it ends the closure early.
///
/// Pairs `(k, l)` with `k < l` and `l` new in the previous round are processed
/// in insertion order. Brackets inside a chunk are evaluated in parallel, the
/// extension into the span is always serial, so the result does not depend on
/// the number of worker threads.
pub fn close<E: LieElement>(
    seeds: &[E],
    coord_len: usize,
    capacity: usize,
    tol: f64,
    max_rounds: usize,
    policy: PairPolicy,
) -> Closure<E> {
    let mut span = RealSpan::new(coord_len, tol);
    let mut elements: Vec<E> = Vec::new();
    let mut norms: Vec<f64> = Vec::new();
    let push = |e: E, floor: f64, span: &mut RealSpan, elements: &mut Vec<E>, norms: &mut Vec<f64>| {
        let c = e.coords();
        if let Some(unit) = span.extend_scaled(&c, floor) {
            let e = e.adopt(&unit);
            norms.push(e.coords().iter().fold(0.0, |acc, x| acc + x * x).sqrt());
            elements.push(e);
        }
    };
    for s in seeds {
        push(s.clone(), 0.0, &mut span, &mut elements, &mut norms);
    }
    let n_seeds = elements.len();

    let mut frontier = 0..elements.len();
    let mut rounds = 0;
    let mut saturated = false;
    while rounds < max_rounds {
        rounds += 1;
        if span.len() >= capacity {
            saturated = true;
            break;
        }
        let before = elements.len();
        let pairs: Vec<(usize, usize)> = frontier
            .clone()
            .flat_map(|l| {
                let upper = match policy {
                    PairPolicy::AllPairs => l,
                    PairPolicy::WithSeeds => l.min(n_seeds),
                };
                (0..upper).map(move |k| (k, l))
            })
            .collect();
        for chunk in pairs.chunks(CHUNK) {
            if span.len() >= capacity {
                break;
            }
            let products: Vec<(Option<E>, f64)> = chunk
                .par_iter()
                .map(|&(k, l)| (elements[k].bracket(&elements[l]), norms[k] * norms[l]))
                .collect();
            for (p, floor) in products {
                if let Some(p) = p {
                    push(p, floor, &mut span, &mut elements, &mut norms);
                }
            }
        }
        if elements.len() == before {
            saturated = true;
            break;
        }
        frontier = before..elements.len();
    }
    if !saturated && span.len() >= capacity {
        saturated = true;
    }
    Closure {
        elements,
        span,
        rounds,
        saturated,
    }
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub basis: OperatorBasis,
    pub dim: usize,
    pub rounds: usize,
    pub saturated: bool,
    pub contains_identity: bool,
}

impl ClosureResult {
    pub fn ambient_dim(&self) -> usize {
        self.basis.dim()
    }
}

fn check_generators(generators: &[ComplexMatrix], tol: f64) -> Result<usize> {
    let first = generators
        .first()
        .ok_or_else(|| Error::invalid("at least one generator is required"))?;
    let d = first.nrows();
    for (k, h) in generators.iter().enumerate() {
        linalg::check_matrix(h)?;
        if h.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.nrows(),
            });
        }
        if !linalg::is_hermitian(h, tol) {
            return Err(Error::invalid(format!("generator {k} is not Hermitian")));
        }
    }
    Ok(d)
}

/// Closure of `{i H}` under commutators.
pub fn lie_closure(generators: &[ComplexMatrix], tol: f64, max_rounds: usize) -> Result<ClosureResult> {
    let d = check_generators(generators, tol)?;
    if max_rounds < 1 {
        return Err(Error::invalid("max_rounds must be at least 1"));
    }
    let seeds: Vec<ComplexMatrix> = generators.iter().map(|h| h * I).collect();
    let c = close(&seeds, 2 * d * d, d * d, tol, max_rounds, PairPolicy::AllPairs);
    Ok(finish(d, c.span, c.rounds, c.saturated))
}

pub(crate) fn finish(d: usize, span: RealSpan, rounds: usize, saturated: bool) -> ClosureResult {
    let basis = OperatorBasis::from_span(d, span);
    let (contains_identity, _) = basis
        .in_span(&(linalg::identity(d) * I))
        .expect("dimension checked");
    ClosureResult {
        dim: basis.len(),
        basis,
        rounds,
        saturated,
        contains_identity,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    FullU,
    FullSu,
    BlockDiagonal,
    Other,
}

impl AlgebraKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgebraKind::FullU => "full_u",
            AlgebraKind::FullSu => "full_su",
            AlgebraKind::BlockDiagonal => "block_diagonal",
            AlgebraKind::Other => "other",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraVerdict {
    pub kind: AlgebraKind,
    /// Isotypic sector dimensions, in canonical order.
    pub block_dims: Vec<usize>,
    /// Restricted real dimension ≥ d_J² − 1 on each sector.
    pub per_block_universal: Vec<bool>,
    /// Restricted real dimension == d_J² on each sector.
    pub per_block_full_u: Vec<bool>,
    pub restricted_dims: Vec<usize>,
    pub commutant_dim: usize,
    pub decomposition: Decomposition,
}

/// Classifies a saturated closure via its commutant.
pub fn classify_algebra(result: &ClosureResult, seed: u64) -> Result<AlgebraVerdict> {
    if !result.saturated {
        return Err(Error::invalid("cannot classify an unsaturated closure"));
    }
    let d = result.ambient_dim();
    let ops = result.basis.elements();
    let decomposition = decompose::decompose(&ops, d, seed);

    let mut restricted_dims = Vec::new();
    let mut per_block_universal = Vec::new();
    let mut per_block_full_u = Vec::new();
    for s in &decomposition.sectors {
        let dj = s.dim();
        let r = result.basis.restricted(&s.basis).len();
        restricted_dims.push(r);
        per_block_universal.push(r + 1 >= dj * dj);
        per_block_full_u.push(r == dj * dj);
    }

    let kind = if decomposition.commutant_dim > 1 {
        AlgebraKind::BlockDiagonal
    } else if result.dim == d * d {
        AlgebraKind::FullU
    } else if result.dim + 1 == d * d && !result.contains_identity {
        AlgebraKind::FullSu
    } else {
        AlgebraKind::Other
    };

    Ok(AlgebraVerdict {
        kind,
        block_dims: decomposition.sector_dims(),
        per_block_universal,
        per_block_full_u,
        restricted_dims,
        commutant_dim: decomposition.commutant_dim,
        decomposition,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EncodedBlock {
    pub block_index: usize,
    pub dim: usize,
    /// Restricted real dimension ≥ d_J² − 1.
    pub universal: bool,
    pub restricted_dim: usize,
    pub identity_included: bool,
}

/// Universality of the closure restricted to each projector's range.
pub fn encoded_universality(
    generators: &[ComplexMatrix],
    projectors: &[ComplexMatrix],
    tol: f64,
) -> Result<Vec<EncodedBlock>> {
    let d = check_generators(generators, tol)?;
    if projectors.is_empty() {
        return Err(Error::invalid("at least one projector is required"));
    }
    let mut sum = linalg::zeros(d);
    for (k, p) in projectors.iter().enumerate() {
        linalg::check_matrix(p)?;
        if p.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.nrows(),
            });
        }
        let scale = linalg::frobenius(p).max(1.0);
        if !linalg::is_hermitian(p, tol) || linalg::frobenius(&(p * p - p)) > tol * scale {
            return Err(Error::invalid(format!("projector {k} is not a Hermitian idempotent")));
        }
        for (g, h) in generators.iter().enumerate() {
            let c = linalg::frobenius(&linalg::bracket(p, h));
            if c > tol * scale * linalg::frobenius(h).max(1.0) {
                return Err(Error::invalid(format!(
                    "projector {k} does not commute with generator {g} (residual {c:.3e})"
                )));
            }
        }
        sum += p;
    }
    if linalg::frobenius(&(sum - linalg::identity(d))) > tol * (d as f64).sqrt().max(1.0) {
        return Err(Error::invalid("projectors do not sum to the identity"));
    }

    let closure = lie_closure(generators, tol, usize::MAX)?;
    let mut out = Vec::new();
    for (k, p) in projectors.iter().enumerate() {
        let v = range_isometry(p);
        let dj = v.ncols();
        let restricted = closure.basis.restricted(&v);
        let (identity_included, _) = restricted.in_span(&(linalg::identity(dj) * I))?;
        let r = restricted.len();
        out.push(EncodedBlock {
            block_index: k,
            dim: dj,
            universal: r + 1 >= dj * dj,
            restricted_dim: r,
            identity_included,
        });
    }
    Ok(out)
}

/// Orthonormal columns spanning the range of a projector.
pub fn range_isometry(p: &ComplexMatrix) -> ComplexMatrix {
    let (values, vectors) = linalg::hermitian_eigen(p);
    let cols: Vec<_> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.5)
        .map(|(k, _)| vectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        ComplexMatrix::zeros(p.nrows(), 0)
    } else {
        ComplexMatrix::from_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real_rows, real_diag, DEFAULT_TOL};

    fn spin_half() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let sx = from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let sy = ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -0.5), c64(0., 0.5), c64(0., 0.)]);
        let sz = real_diag(&[0.5, -0.5]);
        (sx, sy, sz)
    }

    #[test]
    fn su2_at_spin_half() {
        let (sx, _, sz) = spin_half();
        let r = lie_closure(&[sx, sz], DEFAULT_TOL, 50).unwrap();
        assert_eq!(r.dim, 3);
        assert!(r.saturated);
        assert!(!r.contains_identity);
        let v = classify_algebra(&r, decompose::DEFAULT_SEED).unwrap();
        assert_eq!(v.kind, AlgebraKind::FullSu);
        assert_eq!(v.block_dims, vec![2]);
    }

    #[test]
    fn abelian_diagonal_is_block_diagonal() {
        let r = lie_closure(&[real_diag(&[1.0, 1.0, 0.0])], DEFAULT_TOL, 10).unwrap();
        assert_eq!(r.dim, 1);
        let v = classify_algebra(&r, 7).unwrap();
        assert_eq!(v.kind, AlgebraKind::BlockDiagonal);
        let mut dims = v.block_dims.clone();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
        assert_eq!(v.block_dims.iter().sum::<usize>(), 3);
    }

    #[test]
    fn full_basis_takes_one_round() {
        let d = 2;
        let mut gens = Vec::new();
        for r in 0..d {
            for c in r..d {
                let e = linalg::ket_bra(d, r, c);
                gens.push(&e + e.adjoint());
                if r != c {
                    gens.push((&e - e.adjoint()) * I);
                }
            }
        }
        let res = lie_closure(&gens, DEFAULT_TOL, 10).unwrap();
        assert_eq!(res.dim, 4);
        assert_eq!(res.rounds, 1);
        assert!(res.saturated);
    }

    #[test]
    fn unsaturated_is_flagged_and_rejected_by_classifier() {
        let (sx, _, sz) = spin_half();
        let r = lie_closure(&[sx * c64(1.0, 0.0), sz], DEFAULT_TOL, 1).unwrap();
        if !r.saturated {
            assert!(classify_algebra(&r, 1).is_err());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let (_, sy, _) = spin_half();
        assert!(lie_closure(&[sy * I], DEFAULT_TOL, 5).is_err());
        assert!(lie_closure(&[], DEFAULT_TOL, 5).is_err());
        assert!(lie_closure(&[linalg::identity(2)], DEFAULT_TOL, 0).is_err());
    }

    #[test]
    fn encoded_sigma_z_is_not_universal() {
        let sz = real_diag(&[1.0, -1.0]);
        let b = encoded_universality(&[sz], &[linalg::identity(2)], DEFAULT_TOL).unwrap();
        assert_eq!(b.len(), 1);
        assert!(!b[0].universal);
        assert_eq!(b[0].restricted_dim, 1);
    }

    #[test]
    fn encoded_rejects_noncommuting_projector() {
        let sx = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let p = real_diag(&[1.0, 0.0]);
        let q = real_diag(&[0.0, 1.0]);
        assert!(encoded_universality(&[sx], &[p, q], DEFAULT_TOL).is_err());
        let half = real_diag(&[0.5, 0.5]);
        assert!(encoded_universality(&[real_diag(&[1.0, 2.0])], &[half.clone(), half], DEFAULT_TOL).is_err());
    }
}
