//! Effective system Hamiltonians from an ancillary bosonic mode: displacement
//! loops around a number-controlled coupling.
//!
//! Hybrid operators act on `system ⊗ boson`, system index major. The
//! displacement convention is `D(α) = exp(α a − ᾱ a†)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{self, AlgebraKind};
use crate::linalg::{self, ComplexMatrix, C64};

/// Boson cutoff used when none is given; enough for `|α|, |β| ≤ 1`.
pub const DEFAULT_CUTOFF: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HybridSpace {
    pub sys_dim: usize,
    pub cutoff: usize,
}

impl HybridSpace {
    pub fn dim(&self) -> usize {
        self.sys_dim * (self.cutoff + 1)
    }

    pub fn index(&self, sys: usize, boson: usize) -> usize {
        sys * (self.cutoff + 1) + boson
    }
}

#[derive(Clone, Debug)]
pub struct SequenceParams {
    pub alpha: C64,
    pub beta: C64,
    pub theta: f64,
    pub h_g: ComplexMatrix,
}

impl SequenceParams {
    pub fn validate(&self) -> Result<()> {
        check_hamiltonian(&self.h_g)?;
        let finite = [self.alpha.re, self.alpha.im, self.beta.re, self.beta.im, self.theta];
        if !finite.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("sequence amplitudes and angle must be finite"));
        }
        Ok(())
    }
}

fn check_hamiltonian(h: &ComplexMatrix) -> Result<()> {
    linalg::check_matrix(h)?;
    if !linalg::is_hermitian(h, 1e-10) {
        return Err(Error::invalid("H_g must be Hermitian"));
    }
    Ok(())
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 1 {
        return Err(Error::invalid("boson cutoff must be at least 1"));
    }
    Ok(())
}

fn lower(cutoff: usize) -> ComplexMatrix {
    let d = cutoff + 1;
    let mut a = ComplexMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `exp(α a − ᾱ a†)` on the truncated mode.
pub fn displacement(alpha: C64, cutoff: usize) -> Result<ComplexMatrix> {
    check_cutoff(cutoff)?;
    let a = lower(cutoff);
    let gen = &a * alpha - a.adjoint() * alpha.conj();
    Ok(linalg::matrix_exp(&gen))
}

/// `exp(iθ H_g ⊗ n)`, assembled block by block from the eigenbasis of `H_g`.
pub fn controlled_coupling(h_g: &ComplexMatrix, theta: f64, cutoff: usize) -> Result<ComplexMatrix> {
    check_hamiltonian(h_g)?;
    check_cutoff(cutoff)?;
    let space = HybridSpace {
        sys_dim: h_g.nrows(),
        cutoff,
    };
    let (values, vectors) = linalg::hermitian_eigen(h_g);
    let mut out = ComplexMatrix::zeros(space.dim(), space.dim());
    for n in 0..=cutoff {
        let phases: Vec<C64> = values
            .iter()
            .map(|&h| C64::from_polar(1.0, theta * h * n as f64))
            .collect();
        let block = &vectors * linalg::diag(&phases) * vectors.adjoint();
        for s in 0..space.sys_dim {
            for t in 0..space.sys_dim {
                out[(space.index(s, n), space.index(t, n))] = block[(s, t)];
            }
        }
    }
    Ok(out)
}

/// `C (I ⊗ D(α)) C†` with `C = exp(iθ H_g ⊗ n)`. On the `h` eigenspace of
/// `H_g` this is `D(α e^{−iθh})`.
pub fn conjugated_displacement(alpha: C64, h_g: &ComplexMatrix, theta: f64, cutoff: usize) -> Result<ComplexMatrix> {
    let c = controlled_coupling(h_g, theta, cutoff)?;
    let d = linalg::kron(&linalg::identity(h_g.nrows()), &displacement(alpha, cutoff)?);
    Ok(&c * d * c.adjoint())
}

/// `D(−β) D̃(−α) D(β) D̃(α)`, where `D̃` is the conjugated displacement and
/// the rightmost factor acts first.
pub fn simul_sequence(params: &SequenceParams, cutoff: usize) -> Result<ComplexMatrix> {
    params.validate()?;
    let id = linalg::identity(params.h_g.nrows());
    let plain = |z: C64| -> Result<ComplexMatrix> { Ok(linalg::kron(&id, &displacement(z, cutoff)?)) };
    let coupling = controlled_coupling(&params.h_g, params.theta, cutoff)?;
    let cd = |z: C64| -> Result<ComplexMatrix> { Ok(&coupling * plain(z)? * coupling.adjoint()) };
    Ok(plain(-params.beta)? * cd(-params.alpha)? * plain(params.beta)? * cd(params.alpha)?)
}

/// Least-squares fit of per-eigenvalue phases to `c·sin(θh + φ₀)`, `c ≥ 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhaseFit {
    pub amplitude: f64,
    pub phase_offset: f64,
    pub max_error: f64,
    /// `amplitude / (|α||β|)`; NaN when either amplitude vanishes.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Extraction {
    /// `(I ⊗ ⟨0|) U (I ⊗ |0⟩)`.
    pub u_eff: ComplexMatrix,
    pub eigenvalues: Vec<f64>,
    /// `arg ⟨v_h| U_eff |v_h⟩` per eigenvector of `H_g`.
    pub phases: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    pub fit: PhaseFit,
    pub unitarity_defect: f64,
    /// `‖(I ⊗ Q₀) U (I ⊗ |0⟩)‖_F` with `Q₀ = I − |0⟩⟨0|`.
    pub leakage: f64,
    /// Set when the unitarity defect exceeds the tolerance.
    pub flagged: bool,
}

impl Extraction {
    /// `V diag(φ_h) V†`, the Hermitian generator of `U_eff` read off in the
    /// eigenbasis of `H_g`.
    pub fn effective_hamiltonian(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.phases.iter().map(|&p| C64::from(p)).collect();
        &self.eigenvectors * linalg::diag(&d) * self.eigenvectors.adjoint()
    }
}

pub fn fit_phases(eigenvalues: &[f64], phases: &[f64], theta: f64) -> (f64, f64, f64) {
    let m = eigenvalues.len();
    let a = DMatrix::<f64>::from_fn(m, 2, |r, c| {
        let x = theta * eigenvalues[r];
        if c == 0 {
            x.sin()
        } else {
            x.cos()
        }
    });
    let b = DVector::from_column_slice(phases);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd
        .solve(&b, 1e-12 * smax.max(f64::MIN_POSITIVE))
        .expect("SVD computed with U and V");
    let (s, co) = (x[0], x[1]);
    let amplitude = s.hypot(co);
    let phase_offset = if amplitude == 0.0 { 0.0 } else { co.atan2(s) };
    let max_error = (&a * &x - b).iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
    (amplitude, phase_offset, max_error)
}

/// Reads the system unitary off the boson vacuum and fits its phases.
pub fn effective_hamiltonian_extract(u: &ComplexMatrix, params: &SequenceParams, cutoff: usize, tol: f64) -> Result<Extraction> {
    params.validate()?;
    let space = HybridSpace {
        sys_dim: params.h_g.nrows(),
        cutoff,
    };
    if u.nrows() != space.dim() || u.ncols() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: u.nrows(),
        });
    }
    let d = space.sys_dim;
    let u_eff = ComplexMatrix::from_fn(d, d, |s, t| u[(space.index(s, 0), space.index(t, 0))]);
    let mut leak = 0.0;
    for t in 0..d {
        for s in 0..d {
            for n in 1..=cutoff {
                leak += u[(space.index(s, n), space.index(t, 0))].norm_sqr();
            }
        }
    }
    let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(&params.h_g);
    let phases: Vec<f64> = (0..d)
        .map(|k| {
            let v = eigenvectors.column(k);
            (v.adjoint() * &u_eff * v)[(0, 0)].arg()
        })
        .collect();
    let (amplitude, phase_offset, max_error) = fit_phases(&eigenvalues, &phases, params.theta);
    let scale = params.alpha.norm() * params.beta.norm();
    let unitarity_defect = linalg::unitarity_defect(&u_eff);
    Ok(Extraction {
        u_eff,
        eigenvalues,
        phases,
        eigenvectors,
        fit: PhaseFit {
            amplitude,
            phase_offset,
            max_error,
            ratio: if scale > 0.0 { amplitude / scale } else { f64::NAN },
        },
        unitarity_defect,
        leakage: leak.sqrt(),
        flagged: unitarity_defect > tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReachReport {
    pub sys_dim: usize,
    /// Effective Hamiltonians harvested from the sequences (two per `H_g`).
    pub harvested: usize,
    pub extra: usize,
    pub closure_dim: usize,
    pub kind: AlgebraKind,
    pub contains_identity: bool,
    pub max_unitarity_defect: f64,
}

/// Runs the sequence for every `H_g` at `β` and at `β e^{−iπ/2}` (a quarter
/// turn of the loop phase), harvests the effective Hamiltonians, adds the
/// directly available `extra` Hamiltonians and closes under commutators.
#[allow(clippy::too_many_arguments)]
pub fn group_algebra_reach(
    h_list: &[ComplexMatrix],
    extra: &[ComplexMatrix],
    alpha: C64,
    beta: C64,
    theta: f64,
    cutoff: usize,
    tol: f64,
    seed: u64,
) -> Result<ReachReport> {
    let first = h_list
        .first()
        .ok_or_else(|| Error::invalid("at least one H_g is required"))?;
    let d = first.nrows();
    let mut gens = Vec::new();
    let mut max_defect = 0.0f64;
    for h in h_list {
        if h.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.nrows(),
            });
        }
        for b in [beta, beta * C64::from_polar(1.0, -FRAC_PI_2)] {
            let params = SequenceParams {
                alpha,
                beta: b,
                theta,
                h_g: h.clone(),
            };
            let u = simul_sequence(&params, cutoff)?;
            let ex = effective_hamiltonian_extract(&u, &params, cutoff, tol)?;
            max_defect = max_defect.max(ex.unitarity_defect);
            gens.push(ex.effective_hamiltonian());
        }
    }
    let harvested = gens.len();
    for h in extra {
        gens.push(h.clone());
    }
    let closure = lie::lie_closure(&gens, tol, 64)?;
    let verdict = lie::classify_algebra(&closure, seed)?;
    Ok(ReachReport {
        sys_dim: d,
        harvested,
        extra: extra.len(),
        closure_dim: closure.dim,
        kind: verdict.kind,
        contains_identity: closure.contains_identity,
        max_unitarity_defect: max_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement(c(0.0, 0.0), 10).unwrap();
        assert!(linalg::frobenius(&(d - linalg::identity(11))) < 1e-15);
    }

    #[test]
    fn displacement_inverse_and_vacuum_overlap() {
        let cutoff = 30;
        let alpha = c(0.6, -0.5);
        let p = displacement(alpha, cutoff).unwrap() * displacement(-alpha, cutoff).unwrap();
        let half = cutoff / 2;
        let block = p.view((0, 0), (half + 1, half + 1)).into_owned();
        assert!(linalg::frobenius(&(block - linalg::identity(half + 1))) < 1e-8);
        let d = displacement(alpha, cutoff).unwrap();
        assert!((d[(0, 0)].norm() - (-alpha.norm_sqr() / 2.0).exp()).abs() < 1e-8);
    }

    #[test]
    fn coupling_blocks() {
        let h = linalg::real_diag(&[0.5, -0.5]);
        let cc = controlled_coupling(&h, std::f64::consts::PI, 4).unwrap();
        let space = HybridSpace { sys_dim: 2, cutoff: 4 };
        assert!((cc[(space.index(0, 2), space.index(0, 2))] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((cc[(space.index(1, 2), space.index(1, 2))] - c(-1.0, 0.0)).norm() < 1e-12);
        let zero = controlled_coupling(&h, 0.0, 4).unwrap();
        assert!(linalg::frobenius(&(zero - linalg::identity(10))) < 1e-14);
    }

    #[test]
    fn alpha_zero_sequence_is_identity() {
        let params = SequenceParams {
            alpha: c(0.0, 0.0),
            beta: c(0.3, 0.2),
            theta: 0.4,
            h_g: linalg::real_diag(&[1.0, 0.0, -1.0]),
        };
        let u = simul_sequence(&params, 12).unwrap();
        assert!(linalg::frobenius(&(u - linalg::identity(39))) < 1e-12);
    }

    #[test]
    fn spin_half_phase_ratio_is_two() {
        let params = SequenceParams {
            alpha: c(0.5, 0.0),
            beta: c(0.0, 0.5),
            theta: 0.3,
            h_g: linalg::real_diag(&[0.5, -0.5]),
        };
        let u = simul_sequence(&params, DEFAULT_CUTOFF).unwrap();
        let ex = effective_hamiltonian_extract(&u, &params, DEFAULT_CUTOFF, 1e-6).unwrap();
        assert!(ex.fit.max_error < 1e-6);
        assert!((ex.fit.ratio - 2.0).abs() < 1e-6, "{:?}", ex.fit);
        assert!(ex.unitarity_defect < 1e-6 && !ex.flagged);
        assert!(ex.leakage < 1e-6);
    }

    #[test]
    fn non_hermitian_rejected() {
        let h = linalg::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(controlled_coupling(&h, 0.1, 3).is_err());
        assert!(displacement(c(0.1, 0.0), 0).is_err());
    }
}
