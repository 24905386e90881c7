//! Normal-ordered polynomials in several bosonic modes with exact
//! Gaussian-rational coefficients.
//!
//! A monomial stores, per mode, the powers `(p, q)` of `c†^p c^q`. Products
//! are reduced with Wick's rule
//! `c^q c†^p = Σ_j C(q,j) C(p,j) j! c†^(p−j) c^(q−j)`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::lie::{self, LieElement, PairPolicy};
use crate::linalg::{ComplexMatrix, OperatorBasis};
use crate::su2::{imag, real, to_c64, Coeff};

/// Per-mode `(creation power, annihilation power)`.
pub type Ladder = Vec<(u32, u32)>;

#[derive(Clone, Debug, PartialEq)]
pub struct BosonPoly {
    modes: usize,
    terms: BTreeMap<Ladder, Coeff>,
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut out = BigInt::one();
    for t in 0..k {
        out = out * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    out
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn int(n: BigInt) -> Coeff {
    Coeff::new(BigRational::from_integer(n), BigRational::zero())
}

/// `(c†^p1 c^q1)(c†^p2 c^q2)` for one mode, as `(weight, (p, q))` pairs.
fn wick(a: (u32, u32), b: (u32, u32)) -> Vec<(BigInt, (u32, u32))> {
    let (p1, q1) = a;
    let (p2, q2) = b;
    (0..=q1.min(p2))
        .map(|j| {
            let w = binomial(q1, j) * binomial(p2, j) * factorial(j);
            (w, (p1 + p2 - j, q1 + q2 - j))
        })
        .collect()
}

impl BosonPoly {
    pub fn zero(modes: usize) -> Self {
        Self {
            modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(modes: usize, c: Coeff) -> Self {
        let mut p = Self::zero(modes);
        p.add_term(vec![(0, 0); modes], c);
        p
    }

    pub fn one(modes: usize) -> Self {
        Self::constant(modes, real(1, 1))
    }

    /// `c†^p c^q` on a single mode.
    pub fn ladder(modes: usize, mode: usize, p: u32, q: u32) -> Self {
        assert!(mode < modes, "mode out of range");
        let mut l = vec![(0, 0); modes];
        l[mode] = (p, q);
        let mut out = Self::zero(modes);
        out.add_term(l, real(1, 1));
        out
    }

    pub fn lower(modes: usize, mode: usize) -> Self {
        Self::ladder(modes, mode, 0, 1)
    }

    pub fn raise(modes: usize, mode: usize) -> Self {
        Self::ladder(modes, mode, 1, 0)
    }

    pub fn number(modes: usize, mode: usize) -> Self {
        Self::ladder(modes, mode, 1, 1)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> &BTreeMap<Ladder, Coeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|l| l.iter().map(|&(p, q)| p + q).sum())
            .max()
    }

    pub fn add_term(&mut self, l: Ladder, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(l) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &BosonPoly, s: &Coeff) {
        for (l, c) in &other.terms {
            self.add_term(l.clone(), c * s);
        }
    }

    pub fn scale(&self, s: &Coeff) -> BosonPoly {
        let mut out = Self::zero(self.modes);
        out.add_scaled(self, s);
        out
    }

    pub fn add(&self, other: &BosonPoly) -> BosonPoly {
        let mut out = self.clone();
        out.add_scaled(other, &real(1, 1));
        out
    }

    pub fn sub(&self, other: &BosonPoly) -> BosonPoly {
        let mut out = self.clone();
        out.add_scaled(other, &real(-1, 1));
        out
    }

    pub fn mul(&self, other: &BosonPoly) -> BosonPoly {
        assert_eq!(self.modes, other.modes, "mode count mismatch");
        let mut out = Self::zero(self.modes);
        for (la, ca) in &self.terms {
            for (lb, cb) in &other.terms {
                let mut partial: Vec<(BigInt, Ladder)> = vec![(BigInt::one(), Vec::new())];
                for k in 0..self.modes {
                    let expansion = wick(la[k], lb[k]);
                    let mut next = Vec::with_capacity(partial.len() * expansion.len());
                    for (w, l) in &partial {
                        for (w2, pq) in &expansion {
                            let mut l2 = l.clone();
                            l2.push(*pq);
                            next.push((w * w2, l2));
                        }
                    }
                    partial = next;
                }
                let c = ca * cb;
                for (w, l) in partial {
                    out.add_term(l, &c * int(w));
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> BosonPoly {
        (0..k).fold(Self::one(self.modes), |acc, _| acc.mul(self))
    }

    /// Hermitian adjoint: swaps creation and annihilation powers and
    /// conjugates coefficients.
    pub fn adjoint(&self) -> BosonPoly {
        let mut out = Self::zero(self.modes);
        for (l, c) in &self.terms {
            out.add_term(l.iter().map(|&(p, q)| (q, p)).collect(), c.conj());
        }
        out
    }

    pub fn commutator(&self, other: &BosonPoly) -> BosonPoly {
        self.mul(other).sub(&other.mul(self))
    }

    /// Matrix of the polynomial between the given basis states of `space`.
    /// Entry `(r, c)` is `⟨states[r]| P |states[c]⟩`; a raising step past a
    /// mode's cutoff gives zero, exactly as the truncated ladder matrices do.
    pub fn eval_on(&self, space: &FockSpace, states: &[usize]) -> ComplexMatrix {
        let n = states.len();
        let mut out = ComplexMatrix::zeros(n, n);
        let position: HashMap<usize, usize> = states.iter().enumerate().map(|(r, &s)| (s, r)).collect();
        let cutoffs = space.cutoffs();
        for (col, &s) in states.iter().enumerate() {
            let occ = space.occupation(s);
            for (l, c) in &self.terms {
                let mut amp = 1.0f64;
                let mut target = occ.clone();
                let mut alive = true;
                for k in 0..self.modes {
                    let (p, q) = l[k];
                    let nk = target[k] as u32;
                    if q > nk {
                        alive = false;
                        break;
                    }
                    let mid = nk - q;
                    if (mid + p) as usize > cutoffs[k] {
                        alive = false;
                        break;
                    }
                    for t in 0..q {
                        amp *= ((nk - t) as f64).sqrt();
                    }
                    for t in 1..=p {
                        amp *= ((mid + t) as f64).sqrt();
                    }
                    target[k] = (mid + p) as usize;
                }
                if !alive {
                    continue;
                }
                let idx = space.index(&target).expect("occupation within cutoffs");
                if let Some(&row) = position.get(&idx) {
                    out[(row, col)] += to_c64(c) * amp;
                }
            }
        }
        out
    }

    pub fn eval(&self, space: &FockSpace) -> ComplexMatrix {
        let all: Vec<usize> = (0..space.dim()).collect();
        self.eval_on(space, &all)
    }

    pub fn to_terms(&self) -> Vec<(Ladder, [f64; 2])> {
        self.terms
            .iter()
            .map(|(l, c)| {
                let z = to_c64(c);
                (l.clone(), [z.re, z.im])
            })
            .collect()
    }
}

/// Enumerates ladder monomials of total degree at most `cap`.
#[derive(Debug)]
struct MonomialIndex {
    index: HashMap<Ladder, usize>,
}

impl MonomialIndex {
    fn new(modes: usize, cap: u32) -> Self {
        let mut list: Vec<Ladder> = vec![Vec::new()];
        for _ in 0..modes {
            let mut next = Vec::new();
            for l in &list {
                let used: u32 = l.iter().map(|&(p, q)| p + q).sum();
                for p in 0..=(cap - used) {
                    for q in 0..=(cap - used - p) {
                        let mut l2 = l.clone();
                        l2.push((p, q));
                        next.push(l2);
                    }
                }
            }
            list = next;
        }
        list.sort();
        Self {
            index: list.into_iter().enumerate().map(|(k, l)| (l, k)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.index.len()
    }
}

#[derive(Clone, Debug)]
struct WeylElement {
    poly: BosonPoly,
    index: Arc<MonomialIndex>,
    cap: u32,
}

impl LieElement for WeylElement {
    fn coords(&self) -> Vec<f64> {
        let m = self.index.len();
        let mut v = vec![0.0; 2 * m];
        for (l, c) in self.poly.terms() {
            let k = self.index.index[l];
            let z = to_c64(c);
            v[k] = z.re;
            v[m + k] = z.im;
        }
        v
    }

    fn bracket(&self, other: &Self) -> Option<Self> {
        let poly = self.poly.commutator(&other.poly);
        if poly.degree().is_some_and(|d| d > self.cap) {
            return None;
        }
        Some(WeylElement {
            poly,
            index: Arc::clone(&self.index),
            cap: self.cap,
        })
    }
}

/// Hermitian combinations `x = c + c†` and `p = i(c† − c)` style pairs:
/// returns `m + m†` and `i(m − m†)`, dropping zeros.
pub fn hermitian_parts(m: &BosonPoly) -> Vec<BosonPoly> {
    let adj = m.adjoint();
    let sym = m.add(&adj);
    if adj == *m {
        return vec![m.clone()];
    }
    let anti = m.sub(&adj).scale(&imag(1, 1));
    [sym, anti].into_iter().filter(|p| !p.is_zero()).collect()
}

/// Hermitian control set: every mode gets `c`, `c†`, `c²`, `c†²` and `n`
/// (as Hermitian pairs), mode 0 additionally gets `n²` when `with_square`,
/// and every pair of modes gets the hopping terms `c_i†c_j`, `c_j†c_i`.
pub fn multimode_controls(modes: usize, with_square: bool) -> Vec<BosonPoly> {
    let mut out = Vec::new();
    for k in 0..modes {
        out.extend(hermitian_parts(&BosonPoly::lower(modes, k)));
        out.extend(hermitian_parts(&BosonPoly::ladder(modes, k, 0, 2)));
        out.push(BosonPoly::number(modes, k));
        if k == 0 && with_square {
            out.push(BosonPoly::number(modes, 0).pow(2));
        }
    }
    for i in 0..modes {
        for j in (i + 1)..modes {
            let hop = BosonPoly::raise(modes, i).mul(&BosonPoly::lower(modes, j));
            out.extend(hermitian_parts(&hop));
        }
    }
    out
}

/// Smallest per-mode cutoff accepted by the multimode checks.
pub const MIN_CUTOFF: usize = 6;

/// Ladder degree reached by the nonlinear identities; the guard band width.
pub const GUARD_DEGREE: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct ModeReach {
    pub mode: usize,
    /// Residual of `i n_k²` against the closure span in coefficient space.
    pub symbolic_residual: f64,
    /// Residual of `i n_k²` against the closure restricted to the guard.
    pub guarded_residual: f64,
    pub reachable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationReport {
    pub modes: usize,
    pub cutoff: usize,
    pub with_square: bool,
    pub degree_cap: u32,
    pub closure_dim: usize,
    pub rounds: usize,
    pub saturated: bool,
    pub guard_dim: usize,
    pub guarded_rank: usize,
    pub reach: Vec<ModeReach>,
}

/// Closes the multimode control set under `i[·,·]` in the Weyl algebra,
/// keeping brackets of ladder degree at most [`GUARD_DEGREE`], and tests
/// whether every `n_k²` with `k ≥ 1` was generated.
///
/// Membership is checked twice: exactly, in coefficient space, and on the
/// guard subspace `Σ n ≤ cutoff − 4` of the truncated Fock space.
pub fn propagate_nonlinearity(modes: usize, cutoff: usize, with_square: bool, tol: f64) -> Result<PropagationReport> {
    if modes < 2 {
        return Err(Error::invalid("propagation needs at least two modes"));
    }
    if cutoff < MIN_CUTOFF {
        return Err(Error::invalid(format!(
            "cutoff {cutoff} is too small; at least {MIN_CUTOFF} is required"
        )));
    }
    let cap = GUARD_DEGREE as u32;
    let index = Arc::new(MonomialIndex::new(modes, cap));
    let seeds: Vec<WeylElement> = multimode_controls(modes, with_square)
        .into_iter()
        .map(|h| WeylElement {
            poly: h.scale(&imag(1, 1)),
            index: Arc::clone(&index),
            cap,
        })
        .collect();
    let coord_len = 2 * index.len();
    let c = lie::close(&seeds, coord_len, index.len(), tol, usize::MAX, PairPolicy::AllPairs);

    let space = FockSpace::uniform(modes, cutoff)?;
    let guard = space.guard_states(cutoff - GUARD_DEGREE);
    let mut guarded = OperatorBasis::new(guard.len(), tol);
    for e in &c.elements {
        let m = e.poly.eval_on(&space, &guard);
        guarded.orthonormal_extend(&m)?;
    }

    let mut reach = Vec::new();
    for k in 1..modes {
        let sq = BosonPoly::number(modes, k).pow(2).scale(&imag(1, 1));
        let target = WeylElement {
            poly: sq.clone(),
            index: Arc::clone(&index),
            cap,
        };
        let (sym_in, symbolic_residual) = c.span.in_span(&target.coords());
        let (g_in, guarded_residual) = guarded.in_span(&sq.eval_on(&space, &guard))?;
        reach.push(ModeReach {
            mode: k,
            symbolic_residual,
            guarded_residual,
            reachable: sym_in && g_in,
        });
    }
    Ok(PropagationReport {
        modes,
        cutoff,
        with_square,
        degree_cap: cap,
        closure_dim: c.span.len(),
        rounds: c.rounds,
        saturated: c.saturated,
        guard_dim: guard.len(),
        guarded_rank: guarded.len(),
        reach,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fock, linalg};

    fn n(modes: usize, k: usize) -> BosonPoly {
        BosonPoly::number(modes, k)
    }

    #[test]
    fn canonical_commutator() {
        let a = BosonPoly::lower(1, 0);
        let ad = BosonPoly::raise(1, 0);
        assert_eq!(a.commutator(&ad), BosonPoly::one(1));
    }

    #[test]
    fn number_square_normal_form() {
        // n² = c†² c² + c† c
        let sq = n(1, 0).pow(2);
        let mut expected = BosonPoly::ladder(1, 0, 2, 2);
        expected.add_term(vec![(1, 1)], real(1, 1));
        assert_eq!(sq, expected);
    }

    #[test]
    fn modes_commute() {
        let a = BosonPoly::lower(2, 0);
        let bd = BosonPoly::raise(2, 1);
        assert!(a.commutator(&bd).is_zero());
    }

    #[test]
    fn adjoint_reverses_products() {
        let a = BosonPoly::lower(2, 0);
        let bd = BosonPoly::raise(2, 1);
        let p = a.mul(&bd).mul(&BosonPoly::raise(2, 0));
        let lhs = p.adjoint();
        let rhs = BosonPoly::lower(2, 0).mul(&BosonPoly::lower(2, 1)).mul(&BosonPoly::raise(2, 0));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_matches_truncated_ladders() {
        let space = FockSpace::uniform(2, 3).unwrap();
        for mode in 0..2 {
            let a = BosonPoly::lower(2, mode).eval(&space);
            let m = fock::mode_op(&space, mode, fock::ModeOp::Lower).unwrap();
            assert!(linalg::frobenius(&(a - m)) < 1e-14);
            let nn = n(2, mode).pow(2).eval(&space);
            let nm = fock::mode_op(&space, mode, fock::ModeOp::Number).unwrap();
            assert!(linalg::frobenius(&(nn - &nm * &nm)) < 1e-12);
        }
    }

    #[test]
    fn monomial_index_size() {
        // monomials of degree ≤ 4 in four variables
        assert_eq!(MonomialIndex::new(2, 4).len(), 70);
    }

    #[test]
    fn square_reaches_second_mode() {
        let r = propagate_nonlinearity(2, 8, true, 1e-9).unwrap();
        assert!(r.reach[0].reachable, "{r:?}");
        assert!(r.reach[0].guarded_residual < 1e-8);
    }

    #[test]
    fn no_square_stays_quadratic() {
        let r = propagate_nonlinearity(2, 8, false, 1e-9).unwrap();
        assert!(!r.reach[0].reachable);
        assert!(r.reach[0].guarded_residual > 0.1);
    }
}
