//! Dense complex vectors and square matrices at desk-scale dimensions, plus a
//! cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! The eigensolver shares no code with the closed-form paths elsewhere in the
//! crate and serves as the reference against which they are checked.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar type for every amplitude and matrix entry.
pub type ComplexScalar = Complex64;

/// Largest dimension accepted for a ket or operator.
pub const MAX_DIM: usize = 4096;

/// Tolerance on `|<v|v> - 1|` for a ket to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Sweep budget of the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Off-diagonal Frobenius mass at which the Jacobi iteration stops.
pub const JACOBI_OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Hermiticity tolerance accepted by [`hermitian_eig`].
pub const EIG_HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::validation("dimension must be at least 1"));
    }
    if dim > MAX_DIM {
        return Err(Error::validation(format!(
            "dimension {dim} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    Ok(())
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(i) => Err(Error::validation(format!("non-finite component at index {i}"))),
        None => Ok(()),
    }
}

fn dim_mismatch(what: &str, a: usize, b: usize) -> Error {
    Error::validation(format!("{what}: dimension mismatch ({a} vs {b})"))
}

/// A column vector in a finite-dimensional Hilbert space.
#[derive(Clone, PartialEq)]
pub struct Ket {
    components: Vec<Complex64>,
}

impl Ket {
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        check_dim(components.len())?;
        check_finite(&components)?;
        Ok(Ket { components })
    }

    /// Builds a ket from purely real components.
    pub fn from_real(components: &[f64]) -> Result<Self> {
        Ket::new(components.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The `index`-th computational basis vector of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::validation(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut components = vec![ZERO; dim];
        components[index] = ONE;
        Ok(Ket { components })
    }

    pub(crate) fn from_vec_unchecked(components: Vec<Complex64>) -> Self {
        Ket { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Complex64> {
        self.components
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// Fails unless `|<v|v> - 1| <= 1e-12`.
    pub fn ensure_normalized(&self, name: &str) -> Result<()> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return Err(Error::validation(format!("{name} is the zero vector")));
        }
        if (n - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::validation(format!(
                "{name} is not normalized (<v|v> = {n:.17e})"
            )));
        }
        Ok(())
    }

    /// Returns `v / |v|`, failing on the zero vector.
    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::validation("cannot normalize the zero vector"));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Ket {
        Ket::from_vec_unchecked(self.components.iter().map(|z| z * factor).collect())
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Ket) -> Result<Ket> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Ket,
        what: &str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Ket> {
        if self.dim() != other.dim() {
            return Err(dim_mismatch(what, self.dim(), other.dim()));
        }
        Ok(Ket::from_vec_unchecked(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.components).finish()
    }
}

/// `<bra|ket>`, conjugate-linear in `bra`.
pub fn inner(bra: &Ket, ket: &Ket) -> Result<Complex64> {
    if bra.dim() != ket.dim() {
        return Err(dim_mismatch("inner", bra.dim(), ket.dim()));
    }
    Ok(inner_slices(bra.components(), ket.components()))
}

pub(crate) fn inner_slices(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

/// `|ket><bra|`, entry `(i, j) = ket_i * conj(bra_j)`.
pub fn outer(ket: &Ket, bra: &Ket) -> Result<OperatorMatrix> {
    if ket.dim() != bra.dim() {
        return Err(dim_mismatch("outer", ket.dim(), bra.dim()));
    }
    let n = ket.dim();
    let mut entries = Vec::with_capacity(n * n);
    for a in ket.components() {
        for b in bra.components() {
            entries.push(a * b.conj());
        }
    }
    Ok(OperatorMatrix { dim: n, entries })
}

/// A square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl OperatorMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::validation(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        check_finite(&entries)?;
        Ok(OperatorMatrix { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::validation(format!(
                "row {i} has {} entries, expected {dim} (matrix must be square)",
                row.len()
            )));
        }
        OperatorMatrix::new(dim, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        OperatorMatrix::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(OperatorMatrix { dim, entries: vec![ZERO; dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = OperatorMatrix::zeros(dim)?;
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        Ok(m)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let mut m = OperatorMatrix::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * values.len() + i] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    pub(crate) fn from_vec_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        OperatorMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Ket {
        Ket::from_vec_unchecked((0..self.dim).map(|r| self.get(r, col)).collect())
    }

    fn same_dim(&self, other: &OperatorMatrix, what: &str) -> Result<()> {
        if self.dim != other.dim {
            return Err(dim_mismatch(what, self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_dim(other, "add")?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(OperatorMatrix::from_vec_unchecked(self.dim, entries))
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_dim(other, "sub")?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(OperatorMatrix::from_vec_unchecked(self.dim, entries))
    }

    pub fn scale(&self, factor: Complex64) -> OperatorMatrix {
        OperatorMatrix::from_vec_unchecked(
            self.dim,
            self.entries.iter().map(|z| z * factor).collect(),
        )
    }

    pub fn scale_real(&self, factor: f64) -> OperatorMatrix {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn multiply(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.same_dim(other, "multiply")?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.entries[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(OperatorMatrix::from_vec_unchecked(n, out))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> OperatorMatrix {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        OperatorMatrix::from_vec_unchecked(n, out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> OperatorMatrix {
        let n = self.dim;
        let mut out = self.entries.clone();
        for i in 0..n {
            out[i * n + i] = Complex64::new(self.get(i, i).re, 0.0);
            for j in (i + 1)..n {
                let z = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                out[i * n + j] = z;
                out[j * n + i] = z.conj();
            }
        }
        OperatorMatrix::from_vec_unchecked(n, out)
    }

    /// Matrix-vector product `M v`.
    pub fn apply(&self, v: &Ket) -> Result<Ket> {
        if self.dim != v.dim() {
            return Err(dim_mismatch("apply", self.dim, v.dim()));
        }
        Ok(Ket::from_vec_unchecked(
            (0..self.dim).map(|i| inner_conj_free(self.row(i), v.components())).collect(),
        ))
    }

    /// `<bra| M |ket>`.
    pub fn matrix_element(&self, bra: &Ket, ket: &Ket) -> Result<Complex64> {
        inner(bra, &self.apply(ket)?)
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// `max |U†U - I|` entry-wise.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().multiply(self).expect("same dimension");
        let id = OperatorMatrix::identity(self.dim).expect("valid dimension");
        g.sub(&id).expect("same dimension").max_abs()
    }
}

fn inner_conj_free(row: &[Complex64], v: &[Complex64]) -> Complex64 {
    row.iter().zip(v).map(|(a, b)| a * b).sum()
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Complex64]> = (0..self.dim).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// `Σ_k λ_k |v_k><v_k|`.
pub fn spectral_sum(eigenvalues: &[f64], eigenvectors: &[Ket]) -> Result<OperatorMatrix> {
    let first = eigenvectors
        .first()
        .ok_or_else(|| Error::validation("spectral sum needs at least one eigenvector"))?;
    if eigenvalues.len() != eigenvectors.len() {
        return Err(dim_mismatch("spectral_sum", eigenvalues.len(), eigenvectors.len()));
    }
    let mut acc = OperatorMatrix::zeros(first.dim())?;
    for (&lambda, v) in eigenvalues.iter().zip(eigenvectors) {
        acc = acc.add(&outer(v, v)?.scale_real(lambda))?;
    }
    Ok(acc)
}

/// Largest off-diagonal `|<v_i|v_j>|` and largest `|<v_i|v_i> - 1|`,
/// reported as a single defect of the Gram matrix against the identity.
pub fn gram_defect(vectors: &[Ket]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let g = inner(a, b)?;
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g - target).norm());
        }
    }
    Ok(worst)
}

/// Angle between the rays spanned by two nonzero kets, in `[0, π/2]`.
///
/// Computed from the orthogonal residual rather than `acos`, which keeps
/// full relative accuracy for tiny angles.
pub fn ray_angle(a: &Ket, b: &Ket) -> Result<f64> {
    let a = a.normalized()?;
    let b = b.normalized()?;
    let overlap = inner(&a, &b)?;
    let residual = b.sub(&a.scale(overlap))?.norm();
    Ok(residual.atan2(overlap.norm()))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenResult {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal, in the same order as `eigenvalues`.
    pub eigenvectors: Vec<Ket>,
    /// `max_k |M v_k - λ_k v_k|`.
    pub residual: f64,
    /// Number of Jacobi sweeps used.
    pub sweeps: usize,
}

impl HermitianEigenResult {
    pub fn reconstruct(&self) -> Result<OperatorMatrix> {
        spectral_sum(&self.eigenvalues, &self.eigenvectors)
    }
}

fn off_diagonal_mass(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies the classical real rotation, so the combined
/// 2x2 unitary is
///
/// ```text
/// W = [[ c,          s          ],
///      [ -s e^{-iφ}, c e^{-iφ}  ]]    with a_pq = |a_pq| e^{iφ}
/// ```
///
/// and `A <- W† A W`, `V <- V W`.
pub fn hermitian_eig(m: &OperatorMatrix) -> Result<HermitianEigenResult> {
    let defect = m.hermiticity_defect();
    if defect > EIG_HERMITIAN_TOL {
        return Err(Error::validation(format!(
            "matrix is not Hermitian (max |M - M†| = {defect:.3e})"
        )));
    }
    let n = m.dim();
    let mut a = m.hermitian_part().entries;
    let mut v = OperatorMatrix::identity(n)?.entries;
    let scale = m.frobenius_norm().max(1.0);
    let target = JACOBI_OFF_DIAGONAL_TOL * scale;

    let mut sweeps = 0;
    while off_diagonal_mass(&a, n) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::numerical(format!(
                "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps \
                 (off-diagonal mass {:.3e})",
                off_diagonal_mass(&a, n)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k * n + k].re).collect();
    let eigenvectors: Vec<Ket> = order
        .iter()
        .map(|&k| Ket::from_vec_unchecked((0..n).map(|r| v[r * n + k]).collect()))
        .collect();

    let mut residual = 0.0_f64;
    for (lambda, vec) in eigenvalues.iter().zip(&eigenvectors) {
        let mv = m.apply(vec)?;
        let r = mv.sub(&vec.scale(Complex64::new(*lambda, 0.0)))?.norm();
        residual = residual.max(r);
    }

    Ok(HermitianEigenResult { eigenvalues, eigenvectors, residual, sweeps })
}

fn rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // Skip pivots that can no longer change the diagonal in floating point.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * n + q] = ZERO;
        a[q * n + p] = ZERO;
        return;
    }
    let phase = apq.conj() / mag; // e^{-iφ}
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let w_pp = Complex64::new(c, 0.0);
    let w_pq = Complex64::new(s, 0.0);
    let w_qp = phase * (-s);
    let w_qq = phase * c;

    // A <- A W
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * w_pp + akq * w_qp;
        a[k * n + q] = akp * w_pq + akq * w_qq;
    }
    // A <- W† A
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = w_pp.conj() * apk + w_qp.conj() * aqk;
        a[q * n + k] = w_pq.conj() * apk + w_qq.conj() * aqk;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
    // V <- V W
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * w_pp + vkq * w_qp;
        v[k * n + q] = vkp * w_pq + vkq * w_qq;
    }
}
