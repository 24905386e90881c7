//! Polynomials in abstract su(2) generators with exact Gaussian-rational
//! coefficients.
//!
//! Generators satisfy `[X,Y] = iZ`, `[Y,Z] = iX`, `[Z,X] = iY`. Monomials are
//! stored in the canonical order `X^a Y^b Z^c`. Spin representations are
//! labelled by `two_j = 2j` so half-integers stay exact.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lie::{self, LieElement, PairPolicy};
use crate::linalg::{self, c64, ComplexMatrix, OperatorBasis, C64, I};

/// Exact Gaussian rational.
pub type Coeff = Complex<BigRational>;

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn coeff(re: BigRational, im: BigRational) -> Coeff {
    Complex::new(re, im)
}

/// `n/d` as a real coefficient.
pub fn real(n: i64, d: i64) -> Coeff {
    coeff(rational(n, d), BigRational::zero())
}

/// `i·n/d`.
pub fn imag(n: i64, d: i64) -> Coeff {
    coeff(BigRational::zero(), rational(n, d))
}

pub fn to_c64(c: &Coeff) -> C64 {
    c64(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    X,
    Y,
    Z,
}

impl Gen {
    pub const ALL: [Gen; 3] = [Gen::X, Gen::Y, Gen::Z];

    /// Accepts `X/Y/Z` and the aliases `A/B/C`.
    pub fn parse(label: char) -> Result<Gen> {
        match label {
            'X' | 'A' => Ok(Gen::X),
            'Y' | 'B' => Ok(Gen::Y),
            'Z' | 'C' => Ok(Gen::Z),
            other => Err(Error::invalid(format!("unknown generator label `{other}`"))),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Sign `s` in `[x, y] = i s z`; zero when `x == y`.
pub fn structure_sign(x: Gen, y: Gen) -> i64 {
    match (x.index() + 3 - y.index()) % 3 {
        0 => 0,
        2 => 1,
        _ => -1,
    }
}

/// The generator completing `{x, y}`.
pub fn third(x: Gen, y: Gen) -> Gen {
    Gen::ALL[3 - x.index() - y.index()]
}

/// A relabelling `(A, B, C)` of `(X, Y, Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Convention {
    pub a: Gen,
    pub b: Gen,
    pub c: Gen,
}

impl Convention {
    pub const CYCLIC: Convention = Convention {
        a: Gen::X,
        b: Gen::Y,
        c: Gen::Z,
    };
    pub const ANTICYCLIC: Convention = Convention {
        a: Gen::X,
        b: Gen::Z,
        c: Gen::Y,
    };

    pub fn new(a: Gen, b: Gen, c: Gen) -> Result<Self> {
        if a == b || b == c || a == c {
            return Err(Error::invalid("convention labels must be distinct"));
        }
        Ok(Self { a, b, c })
    }

    /// `s_{xy}` with `[x, y] = i s_{xy} z`.
    pub fn s(&self, x: Gen, y: Gen) -> i64 {
        structure_sign(x, y)
    }

    pub fn label(&self) -> String {
        format!("{:?}{:?}{:?}", self.a, self.b, self.c)
    }
}

/// `X^a Y^b Z^c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { a: 0, b: 0, c: 0 };

    pub fn new(a: u32, b: u32, c: u32) -> Self {
        Self { a, b, c }
    }

    pub fn degree(&self) -> u32 {
        self.a + self.b + self.c
    }

    pub fn of(g: Gen) -> Self {
        match g {
            Gen::X => Self::new(1, 0, 0),
            Gen::Y => Self::new(0, 1, 0),
            Gen::Z => Self::new(0, 0, 1),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Monomial::ONE {
            return write!(f, "1");
        }
        for (g, e) in [('X', self.a), ('Y', self.b), ('Z', self.c)] {
            match e {
                0 => {}
                1 => write!(f, "{g}")?,
                _ => write!(f, "{g}^{e}")?,
            }
        }
        Ok(())
    }
}

/// Linear combination of canonical monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpinPoly {
    terms: BTreeMap<Monomial, Coeff>,
}

impl SpinPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::ONE, Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::monomial(Monomial::ONE, c)
    }

    pub fn monomial(m: Monomial, c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn mono(a: u32, b: u32, c: u32) -> Self {
        Self::monomial(Monomial::new(a, b, c), Coeff::one())
    }

    pub fn gen(g: Gen) -> Self {
        Self::monomial(Monomial::of(g), Coeff::one())
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Coeff> {
        &self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &SpinPoly, s: &Coeff) {
        for (m, c) in &other.terms {
            self.add_term(*m, c * s);
        }
    }

    pub fn scale(&self, s: &Coeff) -> SpinPoly {
        let mut out = SpinPoly::zero();
        out.add_scaled(self, s);
        out
    }

    /// Terms with degree strictly above `deg`.
    pub fn above(&self, deg: u32) -> SpinPoly {
        SpinPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() > deg)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SpinPoly) -> SpinPoly {
        let mut out = SpinPoly::zero();
        for (ml, cl) in &self.terms {
            for (mr, cr) in &other.terms {
                let prod = mul_mono(*ml, *mr);
                out.add_scaled(&prod, &(cl * cr));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> SpinPoly {
        (0..k).fold(SpinPoly::one(), |acc, _| acc.mul(self))
    }

    /// Coefficient norm in f64, for reporting.
    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| to_c64(c).norm_sqr())
            .fold(0.0, |acc, x| acc + x)
            .sqrt()
    }

    /// `(exponents, [re, im])` list in canonical order.
    pub fn to_terms(&self) -> Vec<([u32; 3], [f64; 2])> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let z = to_c64(c);
                ([m.a, m.b, m.c], [z.re, z.im])
            })
            .collect()
    }
}

impl std::ops::Add for &SpinPoly {
    type Output = SpinPoly;
    fn add(self, rhs: &SpinPoly) -> SpinPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &Coeff::one());
        out
    }
}

impl std::ops::Sub for &SpinPoly {
    type Output = SpinPoly;
    fn sub(self, rhs: &SpinPoly) -> SpinPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &(-Coeff::one()));
        out
    }
}

impl std::ops::Mul for &SpinPoly {
    type Output = SpinPoly;
    fn mul(self, rhs: &SpinPoly) -> SpinPoly {
        SpinPoly::mul(self, rhs)
    }
}

impl fmt::Display for SpinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({} + {}i){}", c.re, c.im, m))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

thread_local! {
    static MUL_CACHE: RefCell<HashMap<(Monomial, Monomial), Rc<SpinPoly>>> = RefCell::new(HashMap::new());
    static CASIMIR_CACHE: RefCell<HashMap<(Monomial, u32), Rc<SpinPoly>>> = RefCell::new(HashMap::new());
}

fn canonical(a: u32, b: u32, c: u32) -> SpinPoly {
    SpinPoly::mono(a, b, c)
}

/// Product of two canonical monomials, normal ordered.
fn mul_mono(l: Monomial, r: Monomial) -> Rc<SpinPoly> {
    if let Some(hit) = MUL_CACHE.with(|m| m.borrow().get(&(l, r)).cloned()) {
        return hit;
    }
    let out = Rc::new(mul_mono_uncached(l, r));
    MUL_CACHE.with(|m| m.borrow_mut().insert((l, r), out.clone()));
    out
}

fn mul_mono_uncached(l: Monomial, r: Monomial) -> SpinPoly {
    // Already ordered cases.
    if (l.b == 0 && l.c == 0) || (r.a == 0 && r.b == 0) || (r.a == 0 && l.c == 0) {
        return canonical(l.a + r.a, l.b + r.b, l.c + r.c);
    }
    let (g, rest) = if r.a > 0 {
        (Gen::X, Monomial::new(r.a - 1, r.b, r.c))
    } else {
        (Gen::Y, Monomial::new(0, r.b - 1, r.c))
    };
    let head = mul_gen(l, g);
    let mut out = SpinPoly::zero();
    for (m, c) in head.terms() {
        out.add_scaled(&mul_mono(*m, rest), c);
    }
    out
}

/// `l · g` for g ∈ {X, Y} (multiplying by Z on the right is trivial).
fn mul_gen(l: Monomial, g: Gen) -> SpinPoly {
    let Monomial { a, b, c } = l;
    let mut out = SpinPoly::zero();
    match g {
        Gen::Z => out = canonical(a, b, c + 1),
        Gen::Y => {
            // Z^c Y = Y Z^c − i Σ_k Z^k X Z^{c−1−k}
            out.add_term(Monomial::new(a, b + 1, c), Coeff::one());
            for k in 0..c {
                let p = mul_mono(Monomial::new(a, b, k), Monomial::new(1, 0, c - 1 - k));
                out.add_scaled(&p, &imag(-1, 1));
            }
        }
        Gen::X => {
            // Z^c X = X Z^c + i Σ_k Z^k Y Z^{c−1−k};  Y^b X = X Y^b − i Σ_k Y^k Z Y^{b−1−k}
            out.add_term(Monomial::new(a + 1, b, c), Coeff::one());
            for k in 0..b {
                let p = mul_mono(Monomial::new(a, k, 1), Monomial::new(0, b - 1 - k, c));
                out.add_scaled(&p, &imag(-1, 1));
            }
            for k in 0..c {
                let p = mul_mono(Monomial::new(a, b, k), Monomial::new(0, 1, c - 1 - k));
                out.add_scaled(&p, &imag(1, 1));
            }
        }
    }
    out
}

/// Rewrites a free word into canonical form.
pub fn normal_order(word: &[Gen]) -> SpinPoly {
    word.iter()
        .fold(SpinPoly::one(), |acc, &g| acc.mul(&SpinPoly::gen(g)))
}

/// Parses a word such as `"ZZX"` (aliases `A/B/C` allowed) and orders it.
pub fn normal_order_str(word: &str) -> Result<SpinPoly> {
    let gens = word.chars().map(Gen::parse).collect::<Result<Vec<_>>>()?;
    Ok(normal_order(&gens))
}

pub fn poly_commutator(p: &SpinPoly, q: &SpinPoly) -> SpinPoly {
    &p.mul(q) - &q.mul(p)
}

/// `j(j+1)` for `two_j = 2j`.
pub fn casimir_value(two_j: u32) -> BigRational {
    let t = two_j as i64;
    rational(t * (t + 2), 4)
}

/// Eliminates `Y²` with `Y² = j(j+1) − X² − Z²` until every monomial has
/// `b ≤ 1`.
pub fn casimir_reduce(p: &SpinPoly, two_j: u32) -> SpinPoly {
    let mut out = SpinPoly::zero();
    for (m, c) in p.terms() {
        out.add_scaled(&reduce_mono(*m, two_j), c);
    }
    out
}

fn reduce_mono(m: Monomial, two_j: u32) -> Rc<SpinPoly> {
    if m.b <= 1 {
        return Rc::new(SpinPoly::monomial(m, Coeff::one()));
    }
    if let Some(hit) = CASIMIR_CACHE.with(|c| c.borrow().get(&(m, two_j)).cloned()) {
        return hit;
    }
    // X^a Y^{b−2} (j(j+1) − X² − Z²) Z^c
    let Monomial { a, b, c } = m;
    let mut expanded = SpinPoly::zero();
    expanded.add_term(
        Monomial::new(a, b - 2, c),
        coeff(casimir_value(two_j), BigRational::zero()),
    );
    expanded.add_scaled(&mul_mono(Monomial::new(a, b - 2, 0), Monomial::new(2, 0, c)), &real(-1, 1));
    expanded.add_term(Monomial::new(a, b - 2, c + 2), real(-1, 1));
    let out = Rc::new(casimir_reduce(&expanded, two_j));
    CASIMIR_CACHE.with(|cache| cache.borrow_mut().insert((m, two_j), out.clone()));
    out
}

/// Standard spin matrices `(S_x, S_y, S_z)` with `S_z = diag(j, j−1, …, −j)`.
pub fn spin_matrices(two_j: u32) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let d = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let mut sp = linalg::zeros(d);
    for k in 1..d {
        // |m⟩ at index k has m = j − k; S_+ |m⟩ = √(j(j+1) − m(m+1)) |m+1⟩.
        let m = j - k as f64;
        sp[(k - 1, k)] = c64((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm) * c64(0.5, 0.0);
    let sy = (&sp - &sm) * c64(0.0, -0.5);
    let sz = linalg::real_diag(&(0..d).map(|k| j - k as f64).collect::<Vec<_>>());
    (sx, sy, sz)
}

/// Evaluates `p` on the spin-`j` representation.
pub fn eval_poly(p: &SpinPoly, two_j: u32) -> ComplexMatrix {
    let d = two_j as usize + 1;
    let (sx, sy, sz) = spin_matrices(two_j);
    let mut powers: HashMap<(usize, u32), ComplexMatrix> = HashMap::new();
    let mut power = |g: usize, e: u32| -> ComplexMatrix {
        powers
            .entry((g, e))
            .or_insert_with(|| {
                let base = [&sx, &sy, &sz][g];
                (0..e).fold(linalg::identity(d), |acc, _| acc * base)
            })
            .clone()
    };
    let mut out = linalg::zeros(d);
    for (m, c) in p.terms() {
        let prod = power(0, m.a) * power(1, m.b) * power(2, m.c);
        out += prod * to_c64(c);
    }
    out
}

/// Worst relative defect `‖eval(normal_order(w)) − Π_k S_{w_k}‖ / max(1, ‖Π‖)`
/// over `count` random words of length `1..=max_len`.
pub fn homomorphism_defect(two_j: u32, count: usize, max_len: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (sx, sy, sz) = spin_matrices(two_j);
    let mats = [sx, sy, sz];
    let d = two_j as usize + 1;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let len = rng.random_range(1..=max_len.max(1));
        let word: Vec<Gen> = (0..len).map(|_| Gen::ALL[rng.random_range(0..3)]).collect();
        let direct = word.iter().fold(linalg::identity(d), |acc, g| acc * &mats[g.index()]);
        let ordered = eval_poly(&normal_order(&word), two_j);
        let defect = linalg::frobenius(&(ordered - &direct)) / linalg::frobenius(&direct).max(1.0);
        worst = worst.max(defect);
    }
    worst
}

/// Canonical monomials with `b ≤ 1` and degree ≤ `max_degree`.
pub fn canonical_monomials(max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        for b in 0..=1.min(deg) {
            for a in (0..=deg - b).rev() {
                out.push(Monomial::new(a, b, deg - b - a));
            }
        }
    }
    out
}

/// Complex rank of the spin-`j` images of the canonical monomials up to
/// `max_degree`.
pub fn canonical_monomial_rank(two_j: u32, max_degree: u32) -> usize {
    let d = two_j as usize + 1;
    let cols: Vec<ComplexMatrix> = canonical_monomials(max_degree)
        .into_iter()
        .map(|m| eval_poly(&SpinPoly::monomial(m, Coeff::one()), two_j))
        .collect();
    let a = ComplexMatrix::from_fn(d * d, cols.len(), |r, c| cols[c].as_slice()[r]);
    let sv = a.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * smax).count()
}

#[derive(Clone, Debug)]
struct SymElement {
    poly: SpinPoly,
    image: ComplexMatrix,
    two_j: u32,
    cap: u32,
}

impl LieElement for SymElement {
    fn coords(&self) -> Vec<f64> {
        linalg::flatten_real(&self.image)
    }

    fn bracket(&self, other: &Self) -> Option<Self> {
        let raw = poly_commutator(&self.poly, &other.poly).scale(&imag(1, 1));
        let poly = casimir_reduce(&raw, self.two_j);
        if poly.degree().is_none_or(|d| d > self.cap) {
            return None;
        }
        let image = eval_poly(&poly, self.two_j) * I;
        Some(SymElement {
            poly,
            image,
            two_j: self.two_j,
            cap: self.cap,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SymbolicClosure {
    /// Hermitian polynomials (Casimir-reduced) found independent at spin j.
    pub basis: Vec<SpinPoly>,
    /// Real rank of `{i · eval(p)}`.
    pub matrix_rank: usize,
    pub rounds: usize,
    pub saturated: bool,
    pub operator_basis: OperatorBasis,
}

/// Closes Hermitian `start` polynomials under `i[·,·]` and real span.
///
/// Brackets whose Casimir-reduced degree exceeds `degree_cap` are skipped
/// rather than truncated, so every reported element is a genuine member of
/// the generated algebra.
pub fn generate_closure_symbolic(start: &[SpinPoly], two_j: u32, degree_cap: u32) -> Result<SymbolicClosure> {
    if start.is_empty() {
        return Err(Error::invalid("start set must be non-empty"));
    }
    if degree_cap < 1 {
        return Err(Error::invalid("degree_cap must be at least 1"));
    }
    let d = two_j as usize + 1;
    let seeds: Vec<SymElement> = start
        .iter()
        .map(|p| {
            let poly = casimir_reduce(p, two_j);
            SymElement {
                image: eval_poly(&poly, two_j) * I,
                poly,
                two_j,
                cap: degree_cap,
            }
        })
        .collect();
    let c = lie::close(&seeds, 2 * d * d, d * d, linalg::DEFAULT_TOL, usize::MAX, PairPolicy::WithSeeds);
    let operator_basis = crate::linalg::OperatorBasis::from_span(d, c.span);
    Ok(SymbolicClosure {
        matrix_rank: operator_basis.len(),
        basis: c.elements.into_iter().map(|e| e.poly).collect(),
        rounds: c.rounds,
        saturated: c.saturated,
        operator_basis,
    })
}

/// The standard start set `{X, Z, Z²}`.
pub fn double_well_start() -> Vec<SpinPoly> {
    vec![SpinPoly::gen(Gen::X), SpinPoly::gen(Gen::Z), SpinPoly::mono(0, 0, 2)]
}
