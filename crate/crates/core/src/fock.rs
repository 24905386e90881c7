//! Truncated bosonic Fock spaces, fixed-number sectors and the two-site
//! Bose–Hubbard model.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{self, AlgebraVerdict, ClosureResult};
use crate::linalg::{self, ComplexMatrix, RealSpan, C64, I};

/// Tensor product of truncated oscillators, basis ordered lexicographically
/// by occupation tuple (mode 0 most significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::invalid("a Fock space needs at least one mode"));
        }
        let mut strides = vec![1; cutoffs.len()];
        for k in (0..cutoffs.len() - 1).rev() {
            strides[k] = strides[k + 1] * (cutoffs[k + 1] + 1);
        }
        let dim = strides[0] * (cutoffs[0] + 1);
        Ok(Self { cutoffs, strides, dim })
    }

    pub fn uniform(modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; modes])
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.modes() {
            return None;
        }
        let mut idx = 0;
        for (k, &n) in occupation.iter().enumerate() {
            if n > self.cutoffs[k] {
                return None;
            }
            idx += n * self.strides[k];
        }
        Some(idx)
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        assert!(index < self.dim, "basis index out of range");
        self.strides
            .iter()
            .zip(&self.cutoffs)
            .map(|(&s, &c)| (index / s) % (c + 1))
            .collect()
    }

    /// Basis indices with total occupation at most `max_total`.
    pub fn guard_states(&self, max_total: usize) -> Vec<usize> {
        (0..self.dim)
            .filter(|&k| self.occupation(k).iter().sum::<usize>() <= max_total)
            .collect()
    }

    /// Isometry onto the given basis states.
    pub fn selector(&self, states: &[usize]) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(self.dim, states.len());
        for (c, &s) in states.iter().enumerate() {
            v[(s, c)] = C64::new(1.0, 0.0);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeOp {
    Lower,
    Raise,
    Number,
}

fn single_mode(kind: ModeOp, cutoff: usize) -> ComplexMatrix {
    let d = cutoff + 1;
    let mut lower = ComplexMatrix::zeros(d, d);
    for n in 1..d {
        lower[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    match kind {
        ModeOp::Lower => lower,
        ModeOp::Raise => lower.adjoint(),
        ModeOp::Number => linalg::real_diag(&(0..d).map(|n| n as f64).collect::<Vec<_>>()),
    }
}

/// Truncated ladder or number operator of one mode on the full space.
pub fn mode_op(space: &FockSpace, mode: usize, kind: ModeOp) -> Result<ComplexMatrix> {
    if mode >= space.modes() {
        return Err(Error::invalid(format!(
            "mode {mode} out of range for {} modes",
            space.modes()
        )));
    }
    let mut out = linalg::identity(1);
    for (k, &c) in space.cutoffs().iter().enumerate() {
        let factor = if k == mode {
            single_mode(kind, c)
        } else {
            linalg::identity(c + 1)
        };
        out = linalg::kron(&out, &factor);
    }
    Ok(out)
}

/// `T_ij = c_i† c_j + c_j† c_i`.
pub fn hopping_op(space: &FockSpace, i: usize, j: usize) -> Result<ComplexMatrix> {
    if i == j {
        return Err(Error::invalid("hopping needs two distinct modes"));
    }
    let t = mode_op(space, i, ModeOp::Raise)? * mode_op(space, j, ModeOp::Lower)?;
    Ok(&t + t.adjoint())
}

/// Occupation tuples of `modes` modes summing to `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberSector {
    pub modes: usize,
    pub n: usize,
    /// Ordered with the occupation of mode 0 descending (reverse
    /// lexicographic), so for two modes index `k` has `k` bosons in mode 1.
    pub basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl NumberSector {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Diagonal `n_i`.
    pub fn number(&self, i: usize) -> ComplexMatrix {
        let values: Vec<f64> = self.basis.iter().map(|o| o[i] as f64).collect();
        linalg::real_diag(&values)
    }

    /// `c_i† c_j` restricted to the sector.
    pub fn transfer(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (col, occ) in self.basis.iter().enumerate() {
            if i == j {
                out[(col, col)] = C64::new(occ[i] as f64, 0.0);
                continue;
            }
            if occ[j] == 0 {
                continue;
            }
            let amp = ((occ[j] * (occ[i] + 1)) as f64).sqrt();
            let mut t = occ.clone();
            t[j] -= 1;
            t[i] += 1;
            let row = self.index[&t];
            out[(row, col)] = C64::new(amp, 0.0);
        }
        out
    }

    /// Isometry embedding the sector into a Fock space.
    pub fn embedding(&self, space: &FockSpace) -> Result<ComplexMatrix> {
        if space.modes() != self.modes {
            return Err(Error::invalid("sector and Fock space have different mode counts"));
        }
        let states: Vec<usize> = self
            .basis
            .iter()
            .map(|o| {
                space
                    .index(o)
                    .ok_or_else(|| Error::invalid("Fock cutoff below sector particle number"))
            })
            .collect::<Result<_>>()?;
        Ok(space.selector(&states))
    }
}

fn compositions(modes: usize, n: usize) -> Vec<Vec<usize>> {
    if modes == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(modes - 1, n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn number_sector(modes: usize, n: usize) -> Result<NumberSector> {
    if modes < 1 {
        return Err(Error::invalid("a sector needs at least one mode"));
    }
    let basis = compositions(modes, n);
    let index = basis.iter().enumerate().map(|(k, o)| (o.clone(), k)).collect();
    Ok(NumberSector { modes, n, basis, index })
}

/// `binomial(n + modes − 1, modes − 1)`.
pub fn sector_dim(modes: usize, n: usize) -> usize {
    let mut out = 1usize;
    for k in 1..modes {
        out = out * (n + k) / k;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BHParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub tau: f64,
    pub epsilon: f64,
}

impl BHParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.gamma1, self.gamma2, self.tau, self.epsilon];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("Bose–Hubbard parameters must be finite"))
        }
    }
}

fn require_dimer(modes: usize) -> Result<()> {
    if modes != 2 {
        return Err(Error::invalid(format!("the double well has two modes, got {modes}")));
    }
    Ok(())
}

/// `γ₁n₁ + γ₂n₂ + τ(c₁†c₂ + c₂†c₁) + ε[n₁(n₁−1) + n₂(n₂−1)]` on the sector.
pub fn bh_hamiltonian(params: &BHParams, sector: &NumberSector) -> Result<ComplexMatrix> {
    require_dimer(sector.modes)?;
    params.validate()?;
    let n1 = sector.number(0);
    let n2 = sector.number(1);
    let hop = sector.transfer(0, 1) + sector.transfer(1, 0);
    Ok(assemble(params, &n1, &n2, &hop))
}

/// The same Hamiltonian on a full truncated two-mode Fock space.
pub fn bh_hamiltonian_fock(params: &BHParams, space: &FockSpace) -> Result<ComplexMatrix> {
    require_dimer(space.modes())?;
    params.validate()?;
    let n1 = mode_op(space, 0, ModeOp::Number)?;
    let n2 = mode_op(space, 1, ModeOp::Number)?;
    let hop = hopping_op(space, 0, 1)?;
    Ok(assemble(params, &n1, &n2, &hop))
}

fn assemble(p: &BHParams, n1: &ComplexMatrix, n2: &ComplexMatrix, hop: &ComplexMatrix) -> ComplexMatrix {
    let id = linalg::identity(n1.nrows());
    let self_int = n1 * (n1 - &id) + n2 * (n2 - &id);
    n1 * C64::from(p.gamma1) + n2 * C64::from(p.gamma2) + hop * C64::from(p.tau) + self_int * C64::from(p.epsilon)
}

/// Schwinger spin operators on a two-mode sector.
#[derive(Clone, Debug)]
pub struct Schwinger {
    /// `c₁†c₂ + c₂†c₁`.
    pub x: ComplexMatrix,
    /// `i(c₂†c₁ − c₁†c₂)`.
    pub y: ComplexMatrix,
    /// `(n₁ − n₂)/2`.
    pub z: ComplexMatrix,
    /// `(X/2, Y/2, Z)`, a spin-N/2 triple with `[S_x, S_y] = i S_z`.
    pub scaled: [ComplexMatrix; 3],
}

pub fn schwinger_ops(sector: &NumberSector) -> Result<Schwinger> {
    require_dimer(sector.modes)?;
    let t12 = sector.transfer(0, 1);
    let t21 = sector.transfer(1, 0);
    let x = &t12 + &t21;
    let y = (&t21 - &t12) * I;
    let z = (sector.number(0) - sector.number(1)) * C64::from(0.5);
    let scaled = [&x * C64::from(0.5), &y * C64::from(0.5), z.clone()];
    Ok(Schwinger { x, y, z, scaled })
}

/// Best real `s` with `lhs ≈ s·rhs`, and `‖lhs − s·rhs‖_F`.
pub fn best_fit_scalar(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> (f64, f64) {
    let rr = linalg::frobenius(rhs).powi(2);
    if rr == 0.0 {
        return (0.0, linalg::frobenius(lhs));
    }
    let s = rhs.iter().zip(lhs.iter()).map(|(r, l)| (r.conj() * l).re).fold(0.0, |a, v| a + v) / rr;
    (s, linalg::frobenius(&(lhs - rhs * C64::from(s))))
}

/// Measured `κ` in `[X, Y] = κ i Z` for the unscaled operators.
pub fn raw_structure_constant(sector: &NumberSector) -> Result<(f64, f64)> {
    let s = schwinger_ops(sector)?;
    let lhs = linalg::bracket(&s.x, &s.y);
    Ok(best_fit_scalar(&lhs, &(&s.z * I)))
}

/// `‖H_BH − (γ_A Z + τX + 2εZ² + γ_S N + εN²/2)‖_F` on the `n`-particle
/// sector, with `γ_A = γ₁ − γ₂` and `γ_S = (γ₁ + γ₂ − 2ε)/2`.
pub fn verify_hamschw(params: &BHParams, n: usize) -> Result<f64> {
    let sector = number_sector(2, n)?;
    let h = bh_hamiltonian(params, &sector)?;
    let s = schwinger_ops(&sector)?;
    let nf = n as f64;
    let gamma_a = params.gamma1 - params.gamma2;
    let gamma_s = (params.gamma1 + params.gamma2 - 2.0 * params.epsilon) / 2.0;
    let id = linalg::identity(sector.dim());
    let rhs = &s.z * C64::from(gamma_a)
        + &s.x * C64::from(params.tau)
        + (&s.z * &s.z) * C64::from(2.0 * params.epsilon)
        + id * C64::from(gamma_s * nf + params.epsilon * nf * nf / 2.0);
    Ok(linalg::frobenius(&(h - rhs)))
}

#[derive(Clone, Debug, Serialize)]
pub struct N2Row {
    pub relation: String,
    pub scalar: f64,
    pub residual: f64,
    pub lhs_norm: f64,
    pub pass: bool,
    /// For rows whose printed right-hand side had to be corrected: the
    /// residual of the printed form.
    pub printed_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct N2Table {
    pub rows: Vec<N2Row>,
    /// Factor relating the table's `Z` to the sector `Z = (n₁ − n₂)/2`.
    pub z_scale: f64,
    pub pass: bool,
}

fn e(n: usize, m: usize) -> ComplexMatrix {
    linalg::ket_bra(3, n, m)
}

fn xs(n: usize, m: usize) -> ComplexMatrix {
    e(n, m) + e(m, n)
}

fn ys(n: usize, m: usize) -> ComplexMatrix {
    (e(n, m) - e(m, n)) * I
}

/// Checks the two-boson basis table: eight su(2) enveloping elements
/// against their `|n⟩⟨m|` expansions, each up to a best-fit real scalar.
///
/// The table's kets count bosons in the first well, so sector operators are
/// relabelled before comparison. Its `Z` is `2(E₂₂ − E₀₀)`, twice the sector
/// `Z`; rows built from `Z` use the table's normalization, recovered from
/// the `Z` row itself. The `X² − Z²` row is printed with `X₀₁` where the
/// product gives `X₀₂`; both forms are evaluated, the corrected one decides.
pub fn verify_n2_table(tol: f64) -> Result<N2Table> {
    let sector = number_sector(2, 2)?;
    let s = schwinger_ops(&sector)?;
    let mut flip = ComplexMatrix::zeros(3, 3);
    for k in 0..3 {
        flip[(k, 2 - k)] = C64::new(1.0, 0.0);
    }
    let relabel = |m: &ComplexMatrix| &flip * m * &flip;
    let x = relabel(&s.x);
    let y = relabel(&s.y);
    let z_raw = relabel(&s.z);
    let r2 = C64::from(2f64.sqrt());

    let z_rhs = (e(2, 2) - e(0, 0)) * C64::from(2.0);
    let (z_scale, _) = best_fit_scalar(&z_raw, &z_rhs);
    if z_scale == 0.0 {
        return Err(Error::Numerical("sector Z vanished".into()));
    }
    let z = &z_raw / C64::from(z_scale);

    let corrected = (xs(0, 2) + e(1, 1) * C64::from(2.0) - e(0, 0) - e(2, 2)) * C64::from(2.0);
    let printed = (xs(0, 1) + e(1, 1) * C64::from(2.0) - e(0, 0) - e(2, 2)) * C64::from(2.0);
    let x2_z2 = &x * &x - &z * &z;

    let relations: Vec<(&str, ComplexMatrix, ComplexMatrix, Option<ComplexMatrix>)> = vec![
        ("X", x.clone(), (xs(0, 1) + xs(1, 2)) * r2, None),
        ("Y", y.clone(), (ys(0, 1) + ys(1, 2)) * r2, None),
        ("Z", z_raw.clone(), z_rhs, None),
        ("X2-Y2", &x * &x - &y * &y, xs(0, 2) * C64::from(4.0), None),
        ("X2-Z2", x2_z2, corrected, Some(printed)),
        ("XY+YX", &x * &y + &y * &x, ys(0, 2) * C64::from(4.0), None),
        ("ZX+XZ", &z * &x + &x * &z, (xs(1, 2) - xs(0, 1)) * (r2 * 2.0), None),
        ("ZY+YZ", &z * &y + &y * &z, (ys(1, 2) - ys(0, 1)) * (r2 * 2.0), None),
    ];
    let rows: Vec<N2Row> = relations
        .into_iter()
        .map(|(name, lhs, rhs, printed)| {
            let (scalar, residual) = best_fit_scalar(&lhs, &rhs);
            let lhs_norm = linalg::frobenius(&lhs);
            N2Row {
                relation: name.to_string(),
                scalar,
                residual,
                lhs_norm,
                pass: residual <= tol * lhs_norm,
                printed_residual: printed.map(|p| best_fit_scalar(&lhs, &p).1),
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(N2Table { rows, z_scale, pass })
}

/// Largest particle number accepted by [`doublewell_universality`].
pub const DOUBLE_WELL_MAX_N: usize = 6;

#[derive(Clone, Debug)]
pub struct DoubleWell {
    pub n: usize,
    pub closure: ClosureResult,
    pub verdict: AlgebraVerdict,
}

/// Closure of `{X, Z, Z²}` on the `n`-particle sector.
pub fn doublewell_universality(n: usize, tol: f64, seed: u64) -> Result<DoubleWell> {
    if !(1..=DOUBLE_WELL_MAX_N).contains(&n) {
        return Err(Error::invalid(format!(
            "particle number must be in 1..={DOUBLE_WELL_MAX_N}, got {n}"
        )));
    }
    let sector = number_sector(2, n)?;
    let s = schwinger_ops(&sector)?;
    let gens = vec![s.x.clone(), s.z.clone(), &s.z * &s.z];
    let closure = lie::lie_closure(&gens, tol, 64)?;
    let verdict = lie::classify_algebra(&closure, seed)?;
    Ok(DoubleWell { n, closure, verdict })
}

/// Smallest per-mode cutoff accepted by [`check_nonlin_identities`].
pub const NONLIN_MIN_CUTOFF: usize = 6;

/// Ladder degree of the nonlinear identities; the guard band width.
pub const NONLIN_GUARD: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct NonlinReport {
    pub mode: usize,
    pub guard_dim: usize,
    /// `[[n₁², T], T] + 8n₁nᵢ − 2c₁²cᵢ†² − 2cᵢ²c₁†²` against the available span.
    pub nonlin1_residual: f64,
    /// `[n₁, [n₁, [[n₁², T], T]]] − 8(c₁²cᵢ†² + cᵢ²c₁†²)`, exact on the guard.
    pub nonlin2_residual: f64,
    /// `[[n₁nᵢ, T], T] − κ nᵢ²` against the available span, best `κ`.
    pub nonlin3_residual: f64,
    pub nonlin3_scalar: f64,
    /// `[[n₁nᵢ, T], T]` itself against the available span; large when the
    /// double commutator genuinely contains `nᵢ²`.
    pub nonlin3_bare_residual: f64,
}

impl NonlinReport {
    pub fn pass(&self, exact_tol: f64, span_tol: f64) -> bool {
        self.nonlin2_residual < exact_tol
            && self.nonlin1_residual < span_tol
            && self.nonlin3_residual < span_tol
            && self.nonlin3_scalar.abs() > 0.5
            && self.nonlin3_bare_residual > 0.1
    }
}

fn hermitian_pair(m: &ComplexMatrix) -> [ComplexMatrix; 2] {
    let adj = m.adjoint();
    [m + &adj, (m - &adj) * I]
}

fn span_residual(span: &RealSpan, m: &ComplexMatrix) -> Vec<f64> {
    let (mut r, _) = span.residual(&linalg::flatten_real(m));
    let tmp = r.clone();
    let (r2, _) = span.residual(&tmp);
    r.copy_from_slice(&r2);
    r
}

fn norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a + x * x).sqrt()
}

/// Checks the nonlinearity-propagation identities between mode 0 and mode
/// `i` on the guard subspace `Σ n ≤ cutoff − 4` of a truncated space.
///
/// The available span is that of the Hermitian parts of every ladder
/// monomial of degree ≤ 2 in all modes, plus `n₁²`. For the last identity
/// it also holds the two terms extracted before it, `n₁nᵢ` and
/// `c₁²cᵢ†² + h.c.`.
pub fn check_nonlin_identities(space: &FockSpace, i: usize) -> Result<NonlinReport> {
    let modes = space.modes();
    if modes < 2 {
        return Err(Error::invalid("nonlinear identities need at least two modes"));
    }
    if i == 0 || i >= modes {
        return Err(Error::invalid(format!("target mode must be in 1..{modes}, got {i}")));
    }
    let cutoff = *space.cutoffs().iter().min().expect("non-empty");
    if cutoff < NONLIN_MIN_CUTOFF {
        return Err(Error::invalid(format!(
            "cutoff {cutoff} is too small; at least {NONLIN_MIN_CUTOFF} is required"
        )));
    }
    let guard = space.guard_states(cutoff - NONLIN_GUARD);
    let v = space.selector(&guard);
    let vt = v.adjoint();
    // `V† f₁ f₂ … f_k V`, multiplied from the left so every step is thin.
    let chain = |factors: &[&ComplexMatrix]| -> ComplexMatrix {
        let mut acc = vt.clone();
        for f in factors {
            acc = &acc * *f;
        }
        acc * &v
    };

    let lower: Vec<ComplexMatrix> = (0..modes).map(|k| mode_op(space, k, ModeOp::Lower)).collect::<Result<_>>()?;
    let raise: Vec<ComplexMatrix> = lower.iter().map(|a| a.adjoint()).collect();
    // Everything below conserves the total occupation, so it is block
    // diagonal over the guard and may be multiplied after compression.
    let n1 = chain(&[&raise[0], &lower[0]]);
    let ni = chain(&[&raise[i], &lower[i]]);
    let t = chain(&[&hopping_op(space, 0, i)?]);
    let pair = chain(&[&lower[0], &lower[0], &raise[i], &raise[i]]) + chain(&[&lower[i], &lower[i], &raise[0], &raise[0]]);

    let n1sq = &n1 * &n1;
    let l1 = linalg::commutator(&linalg::commutator(&n1sq, &t)?, &t)?;
    let l2 = linalg::commutator(&n1, &linalg::commutator(&n1, &l1)?)?;
    let l3 = linalg::commutator(&linalg::commutator(&(&n1 * &ni), &t)?, &t)?;

    let guard_dim = guard.len();
    let mut span = RealSpan::new(2 * guard_dim * guard_dim, linalg::DEFAULT_TOL);
    let id = linalg::identity(space.dim());
    let mut factors: Vec<&ComplexMatrix> = vec![&id];
    factors.extend(lower.iter());
    factors.extend(raise.iter());
    let mut ladders: Vec<ComplexMatrix> = factors.iter().map(|f| chain(&[*f])).collect();
    for p in 1..factors.len() {
        for q in p..factors.len() {
            ladders.push(chain(&[factors[p], factors[q]]));
        }
    }
    for m in &ladders {
        for h in hermitian_pair(m) {
            span.extend(&linalg::flatten_real(&h));
        }
    }
    span.extend(&linalg::flatten_real(&n1sq));

    let target1 = &l1 + (&n1 * &ni) * C64::from(8.0) - &pair * C64::from(2.0);
    let nonlin1_residual = norm(&span_residual(&span, &target1));
    let nonlin2_residual = linalg::frobenius(&(&l2 - &pair * C64::from(8.0)));

    span.extend(&linalg::flatten_real(&(&n1 * &ni)));
    span.extend(&linalg::flatten_real(&pair));
    let r_l = span_residual(&span, &l3);
    let r_n = span_residual(&span, &(&ni * &ni));
    let nn = r_n.iter().fold(0.0, |a, x| a + x * x);
    let kappa = if nn > 0.0 {
        r_n.iter().zip(&r_l).fold(0.0, |a, (x, y)| a + x * y) / nn
    } else {
        0.0
    };
    let rest: Vec<f64> = r_l.iter().zip(&r_n).map(|(l, n)| l - kappa * n).collect();
    Ok(NonlinReport {
        mode: i,
        guard_dim,
        nonlin1_residual,
        nonlin2_residual,
        nonlin3_residual: norm(&rest),
        nonlin3_scalar: kappa,
        nonlin3_bare_residual: norm(&r_l),
    })
}
