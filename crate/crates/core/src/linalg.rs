//! Dense complex matrices and the real-linear span machinery shared by every
//! other module.
//!
//! Lie algebras in this crate are *real* vector spaces of anti-Hermitian
//! matrices. All span, rank and membership decisions therefore use the real
//! Hilbert–Schmidt inner product `Re tr(a† b)`, which is the Euclidean dot
//! product of the matrices flattened into `[re..., im...]` coordinates.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square complex matrix; the universal operator carrier.
pub type ComplexMatrix = DMatrix<C64>;

/// Default relative tolerance for span decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative singular-value threshold for null-space (commutant) solves.
pub const NULLSPACE_REL: f64 = 1e-8;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(dim, dim)
}

pub fn diag(values: &[C64]) -> ComplexMatrix {
    let mut m = zeros(values.len());
    for (k, v) in values.iter().enumerate() {
        m[(k, k)] = *v;
    }
    m
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    diag(&values.iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>())
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    ComplexMatrix::from_fn(n, rows[0].len(), |r, c| c64(rows[r][c], 0.0))
}

/// |row⟩⟨col| in dimension `dim`.
pub fn ket_bra(dim: usize, row: usize, col: usize) -> ComplexMatrix {
    let mut m = zeros(dim);
    m[(row, col)] = c64(1.0, 0.0);
    m
}

/// Checks the `ComplexMatrix` invariants: square, non-empty, finite.
pub fn check_matrix(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::invalid(format!(
            "matrix must be square with dim >= 1, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    Ok(())
}

fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    Ok(())
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    check_same_dim(a, b)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(a, b)?;
    Ok(bracket(a, b))
}

/// Unchecked commutator for internal hot loops.
#[inline]
pub(crate) fn bracket(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).fold(0.0, |acc, x| acc + x).sqrt()
}

/// `‖a − a†‖_F`.
pub fn hermitian_defect(a: &ComplexMatrix) -> f64 {
    frobenius(&(a - a.adjoint()))
}

/// `‖a + a†‖_F`.
pub fn anti_hermitian_defect(a: &ComplexMatrix) -> f64 {
    frobenius(&(a + a.adjoint()))
}

pub fn is_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    hermitian_defect(a) <= tol * frobenius(a).max(1.0)
}

pub fn is_anti_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    anti_hermitian_defect(a) <= tol * frobenius(a).max(1.0)
}

/// `‖u† u − I‖_F`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - identity(u.nrows())))
}

/// Matrix exponential by scaling-and-squaring Padé approximation.
pub fn matrix_exp(a: &ComplexMatrix) -> ComplexMatrix {
    a.clone().exp()
}

/// Kronecker product `a ⊗ b` (a's index major).
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Flattens into real coordinates `[re..., im...]` so that the Euclidean dot
/// product equals `Re tr(a† b)`.
pub fn flatten_real(m: &ComplexMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    out.extend(m.iter().map(|z| z.re));
    out.extend(m.iter().map(|z| z.im));
    out
}

pub fn unflatten_real(v: &[f64], dim: usize) -> ComplexMatrix {
    let n = dim * dim;
    debug_assert_eq!(v.len(), 2 * n);
    ComplexMatrix::from_iterator(dim, dim, (0..n).map(|k| c64(v[k], v[n + k])))
}

/// Compresses `m` onto the column space of the isometry `v`: `v† m v`.
pub fn compress(m: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    v.adjoint() * m * v
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).fold(0.0, |acc, v| acc + v)
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal set of real coordinate vectors with incremental extension.
#[derive(Clone, Debug)]
pub struct RealSpan {
    len: usize,
    vectors: Vec<Vec<f64>>,
    tol: f64,
}

impl RealSpan {
    pub fn new(len: usize, tol: f64) -> Self {
        Self {
            len,
            vectors: Vec::new(),
            tol,
        }
    }

    pub fn coord_len(&self) -> usize {
        self.len
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    fn project_out(&self, r: &mut [f64]) {
        for e in &self.vectors {
            let c = dot(e, r);
            if c != 0.0 {
                r.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
    }

    /// Residual after a single projection pass, and its norm.
    pub fn residual(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let mut r = v.to_vec();
        self.project_out(&mut r);
        let n = norm(&r);
        (r, n)
    }

    /// Membership: residual ≤ tol·max(1, ‖v‖).
    pub fn in_span(&self, v: &[f64]) -> (bool, f64) {
        let (_, res) = self.residual(v);
        (res <= self.tol * norm(v).max(1.0), res)
    }

    /// Gram–Schmidt with one re-orthogonalization pass. Returns the new unit
    /// vector when `v` was not absorbed.
    pub fn extend(&mut self, v: &[f64]) -> Option<Vec<f64>> {
        self.extend_scaled(v, 0.0)
    }

    /// As [`extend`](Self::extend), but the residual must also beat
    /// `tol · floor`. Use when `v` was computed from operands of known size,
    /// so that rounding noise in a vanishing result is not taken as new.
    pub fn extend_scaled(&mut self, v: &[f64], floor: f64) -> Option<Vec<f64>> {
        assert_eq!(v.len(), self.len, "coordinate length mismatch");
        let scale = norm(v);
        if scale == 0.0 || self.vectors.len() >= self.len {
            return None;
        }
        let mut r = v.to_vec();
        self.project_out(&mut r);
        self.project_out(&mut r);
        let res = norm(&r);
        if res <= self.tol * scale.max(floor) {
            return None;
        }
        r.iter_mut().for_each(|x| *x /= res);
        self.vectors.push(r.clone());
        Some(r)
    }
}

/// Real-orthonormal set of anti-Hermitian matrices under `Re tr(a† b)`.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    span: RealSpan,
}

impl OperatorBasis {
    pub fn new(dim: usize, tol: f64) -> Self {
        Self {
            dim,
            span: RealSpan::new(2 * dim * dim, tol),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.span.tol()
    }

    pub fn len(&self) -> usize {
        self.span.len()
    }

    pub fn is_empty(&self) -> bool {
        self.span.is_empty()
    }

    pub fn element(&self, k: usize) -> ComplexMatrix {
        unflatten_real(&self.span.vectors()[k], self.dim)
    }

    pub fn elements(&self) -> Vec<ComplexMatrix> {
        (0..self.len()).map(|k| self.element(k)).collect()
    }

    fn check_dim(&self, m: &ComplexMatrix) -> Result<()> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.nrows(),
            });
        }
        Ok(())
    }

    /// Projects `m` onto the real-orthogonal complement of the basis and
    /// appends the normalized residual when it survives the tolerance.
    pub fn orthonormal_extend(&mut self, m: &ComplexMatrix) -> Result<Option<ComplexMatrix>> {
        self.check_dim(m)?;
        if anti_hermitian_defect(m) > self.tol() * frobenius(m) {
            return Err(Error::invalid("orthonormal_extend requires an anti-Hermitian matrix"));
        }
        Ok(self
            .span
            .extend(&flatten_real(m))
            .map(|v| unflatten_real(&v, self.dim)))
    }

    /// `(member, ‖m − Σ_k Re tr(E_k† m) E_k‖_F)`.
    pub fn in_span(&self, m: &ComplexMatrix) -> Result<(bool, f64)> {
        self.check_dim(m)?;
        Ok(self.span.in_span(&flatten_real(m)))
    }

    pub(crate) fn from_span(dim: usize, span: RealSpan) -> Self {
        debug_assert_eq!(span.coord_len(), 2 * dim * dim);
        Self { dim, span }
    }

    /// Real span of the compressions `v† E v` of every element.
    pub fn restricted(&self, v: &ComplexMatrix) -> OperatorBasis {
        let mut out = OperatorBasis::new(v.ncols(), self.tol());
        for e in self.elements() {
            let r = compress(&e, v);
            out.span.extend_scaled(&flatten_real(&r), 1.0);
        }
        out
    }
}

/// Orthonormal basis (as matrices) of `{T : a_k T = T b_k ∀k}` where `T` is
/// `rows × cols`. With `a_k = b_k` this is the commutant.
///
/// The null space is narrowed one pair at a time; each step keeps right
/// singular vectors with `σ ≤ NULLSPACE_REL · max(σ_max, ‖a‖_F, ‖b‖_F)`.
pub fn intertwiner_space<'a, It>(pairs: It, rows: usize, cols: usize) -> Vec<ComplexMatrix>
where
    It: IntoIterator<Item = (&'a ComplexMatrix, &'a ComplexMatrix)>,
{
    let n = rows * cols;
    let mut basis = DMatrix::<C64>::identity(n, n);
    for (a, b) in pairs {
        let r = basis.ncols();
        if r == 0 {
            break;
        }
        let mut image = DMatrix::<C64>::zeros(n, r);
        for j in 0..r {
            let t = DMatrix::from_column_slice(rows, cols, basis.column(j).as_slice());
            let y = a * &t - &t * b;
            image.set_column(j, &nalgebra::DVector::from_column_slice(y.as_slice()));
        }
        let svd = image.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let thr = NULLSPACE_REL * sigma_max.max(frobenius(a)).max(frobenius(b));
        let null_rows: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] <= thr)
            .collect();
        if null_rows.is_empty() {
            basis = DMatrix::zeros(n, 0);
            break;
        }
        let v = v_t.adjoint();
        let keep = DMatrix::from_columns(
            &null_rows.iter().map(|&k| v.column(k).into_owned()).collect::<Vec<_>>(),
        );
        basis = &basis * keep;
    }
    (0..basis.ncols())
        .map(|j| DMatrix::from_column_slice(rows, cols, basis.column(j).as_slice()))
        .collect()
}

/// Orthonormal basis of the commutant of `ops` (all `dim × dim`).
pub fn commutant(ops: &[ComplexMatrix], dim: usize) -> Vec<ComplexMatrix> {
    intertwiner_space(ops.iter().map(|m| (m, m)), dim, dim)
}

/// Splits the spectrum of a Hermitian matrix into clusters of (numerically)
/// equal eigenvalues and returns an orthonormal column basis per cluster.
pub fn eigenspaces(h: &ComplexMatrix, gap: f64) -> Vec<(f64, ComplexMatrix)> {
    let (values, vectors) = hermitian_eigen(h);
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &lam) in values.iter().enumerate() {
        match out.last_mut() {
            Some((last, idx)) if (lam - *last).abs() <= gap => {
                idx.push(k);
                *last = lam;
            }
            _ => out.push((lam, vec![k])),
        }
    }
    out.into_iter()
        .map(|(lam, idx)| {
            let cols: Vec<_> = idx.iter().map(|&k| vectors.column(k).into_owned()).collect();
            (lam, ComplexMatrix::from_columns(&cols))
        })
        .collect()
}

/// Orthogonal projector `v v†` onto the columns of an isometry.
pub fn projector(v: &ComplexMatrix) -> ComplexMatrix {
    v * v.adjoint()
}

/// Complex least-squares fit of `target` onto the span of `columns`
/// (flattened matrices). Returns the coefficients and the residual norm.
pub fn complex_lstsq(columns: &[ComplexMatrix], target: &ComplexMatrix) -> (Vec<C64>, f64) {
    if columns.is_empty() {
        return (Vec::new(), frobenius(target));
    }
    let n = target.len();
    let a = DMatrix::<C64>::from_fn(n, columns.len(), |r, c| columns[c].as_slice()[r]);
    let b = nalgebra::DVector::from_column_slice(target.as_slice());
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd
        .solve(&b, 1e-12 * smax.max(f64::MIN_POSITIVE))
        .expect("SVD computed with U and V");
    let res = (&a * &x - b).norm();
    (x.iter().cloned().collect(), res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    fn sz() -> ComplexMatrix {
        from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&identity(2), &identity(2)).unwrap(), c64(2.0, 0.0));
        assert_eq!(hs_inner(&sx(), &sz()).unwrap(), c64(0.0, 0.0));
        let a = sx() * I;
        assert!((hs_inner(&a, &a).unwrap() - c64(2.0, 0.0)).norm() < 1e-15);
        assert!(hs_inner(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn commutator_examples() {
        let a = sx();
        assert_eq!(frobenius(&commutator(&a, &a).unwrap()), 0.0);

        let half = c64(0.5, 0.0);
        let s_z = sz() * half;
        let s_x = sx() * half;
        let s_y = ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -0.5), c64(0., 0.5), c64(0., 0.)]);
        let got = commutator(&s_z, &s_x).unwrap();
        assert!(frobenius(&(got - s_y * I)) < 1e-15);

        let d1 = real_diag(&[1.0, 2.0]);
        let d2 = real_diag(&[3.0, 4.0]);
        assert_eq!(frobenius(&commutator(&d1, &d2).unwrap()), 0.0);
        assert!(commutator(&d1, &identity(3)).is_err());
    }

    #[test]
    fn extend_examples() {
        let mut b = OperatorBasis::new(2, DEFAULT_TOL);
        let isz = sz() * I;
        let e = b.orthonormal_extend(&isz).unwrap().unwrap();
        assert!(frobenius(&(e - &isz / c64(2f64.sqrt(), 0.0))) < 1e-15);

        assert!(b.orthonormal_extend(&(&isz * c64(3.0, 0.0))).unwrap().is_none());

        let mixed = (sz() + sx()) * I;
        let e = b.orthonormal_extend(&mixed).unwrap().unwrap();
        assert!(frobenius(&(e - sx() * I / c64(2f64.sqrt(), 0.0))) < 1e-15);
        assert_eq!(b.len(), 2);

        // Hermitian input is rejected.
        assert!(b.orthonormal_extend(&sx()).is_err());
    }

    #[test]
    fn in_span_examples() {
        let mut b = OperatorBasis::new(2, DEFAULT_TOL);
        b.orthonormal_extend(&(sz() * I)).unwrap();
        let (ok, res) = b.in_span(&(sz() * I)).unwrap();
        assert!(ok && res < 1e-15);
        let (ok, res) = b.in_span(&(sx() * I)).unwrap();
        assert!(!ok);
        assert!((res - 2f64.sqrt()).abs() < 1e-15);

        let empty = OperatorBasis::new(2, DEFAULT_TOL);
        assert_eq!(empty.in_span(&zeros(2)).unwrap(), (true, 0.0));
    }

    #[test]
    fn basis_never_exceeds_real_dimension() {
        let mut b = OperatorBasis::new(2, DEFAULT_TOL);
        for k in 0..12 {
            let t = (k + 1) as f64;
            let m = ComplexMatrix::from_fn(2, 2, |r, c| {
                let s = (r + 3 * c + 1) as f64;
                c64((t * s).cos(), (t * s * 0.7).sin())
            });
            let ah = &m - m.adjoint();
            b.orthonormal_extend(&ah).unwrap();
        }
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn matrix_exp_examples() {
        assert!(frobenius(&(matrix_exp(&zeros(3)) - identity(3))) < 1e-15);
        let d = diag(&[c64(0.0, std::f64::consts::PI), c64(0.0, 0.0)]);
        assert!(frobenius(&(matrix_exp(&d) - real_diag(&[-1.0, 1.0]))) < 1e-14);

        // exp(iθσ) = cosθ I + i sinθ σ; σ_y = ((0,-i),(i,0)), θ = π/2 gives ((0,1),(-1,0)).
        let sy = ComplexMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)]);
        let theta = std::f64::consts::FRAC_PI_2;
        let u = matrix_exp(&(&sy * c64(0.0, theta)));
        let expected = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(frobenius(&(u - expected)) < 1e-14);
    }

    #[test]
    fn commutant_of_diagonal() {
        let ops = vec![real_diag(&[1.0, 1.0, 0.0])];
        assert_eq!(commutant(&ops, 3).len(), 5);
        assert_eq!(commutant(&[sx(), sz()], 2).len(), 1);
    }

    #[test]
    fn eigenspaces_cluster_degenerate_values() {
        let h = real_diag(&[2.0, -1.0, 2.0]);
        let spaces = eigenspaces(&h, 1e-9);
        assert_eq!(spaces.len(), 2);
        assert_eq!(spaces[0].1.ncols(), 1);
        assert_eq!(spaces[1].1.ncols(), 2);
    }

    #[test]
    fn lstsq_recovers_coefficients() {
        let cols = vec![sx(), sz()];
        let target = sx() * c64(2.0, 1.0) - sz() * c64(0.5, 0.0);
        let (x, res) = complex_lstsq(&cols, &target);
        assert!(res < 1e-12);
        assert!((x[0] - c64(2.0, 1.0)).norm() < 1e-12);
        assert!((x[1] - c64(-0.5, 0.0)).norm() < 1e-12);
    }
}
