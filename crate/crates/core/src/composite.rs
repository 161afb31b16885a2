//! Two-party composite spaces: tensor products, partial traces, Schmidt
//! polar form and entropy functionals.
//!
//! Composite index convention: `i * dim_b + j` for `|i>_A ⊗ |j>_B`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, inner_slices, outer, Ket, OperatorMatrix, ZERO};

/// Hermiticity and trace tolerance of [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-12;

/// Most negative eigenvalue tolerated in a [`DensityMatrix`].
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;

/// Eigenvalues below this contribute nothing to the entropy.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Schmidt coefficients at or below this are dropped.
pub const SCHMIDT_CUTOFF: f64 = 1e-13;

const SVD_MAX_SWEEPS: usize = 100;
const SVD_ORTHOGONALITY_TOL: f64 = 1e-15;
const SVD_NEGLIGIBLE_COLUMN: f64 = 1e-30;

/// Which factor of a composite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// `|a> ⊗ |b>`.
pub fn tensor(a: &Ket, b: &Ket) -> Result<Ket> {
    let mut out = Vec::with_capacity(a.dim() * b.dim());
    for x in a.components() {
        for y in b.components() {
            out.push(x * y);
        }
    }
    Ket::new(out)
}

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: OperatorMatrix,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(matrix: OperatorMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > DENSITY_TOL {
            return Err(Error::validation(format!(
                "density matrix is not Hermitian (max |M - M†| = {defect:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::validation(format!("density matrix has trace {trace}")));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = *eig.eigenvalues.last().expect("dimension >= 1");
        if min < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::validation(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix { matrix, eigenvalues: eig.eigenvalues })
    }

    pub fn pure(state: &Ket) -> Result<Self> {
        state.ensure_normalized("state")?;
        DensityMatrix::new(outer(state, state)?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    /// Eigenvalues from the Jacobi solver, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// A normalized pure state on `C^dim_a ⊗ C^dim_b`, stored as its
/// `dim_a x dim_b` amplitude grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex64>,
}

impl BipartiteState {
    /// Amplitudes are row-major: entry `i * dim_b + j` multiplies `|i>|j>`.
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = BipartiteState::unnormalized(dim_a, dim_b, amplitudes)?;
        let n = state.norm_sqr();
        if (n - 1.0).abs() > DENSITY_TOL {
            return Err(Error::validation(format!(
                "bipartite state is not normalized (norm² = {n:.17e})"
            )));
        }
        Ok(state)
    }

    /// Like [`BipartiteState::new`] but rescales to unit norm first.
    pub fn renormalized(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = BipartiteState::unnormalized(dim_a, dim_b, amplitudes)?;
        let n = state.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::validation("bipartite state is the zero vector"));
        }
        let amplitudes = state.amplitudes.iter().map(|z| z / n).collect();
        BipartiteState::new(dim_a, dim_b, amplitudes)
    }

    fn unnormalized(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::validation("factor dimensions must be at least 1"));
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::validation(format!(
                "expected {} amplitudes for a {dim_a}x{dim_b} state, got {}",
                dim_a * dim_b,
                amplitudes.len()
            )));
        }
        // Reuses the finiteness and size checks of Ket.
        let amplitudes = Ket::new(amplitudes)?.into_components();
        Ok(BipartiteState { dim_a, dim_b, amplitudes })
    }

    pub fn from_ket(ket: &Ket, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != ket.dim() {
            return Err(Error::validation(format!(
                "dimension {} does not factor as {dim_a} x {dim_b}",
                ket.dim()
            )));
        }
        BipartiteState::new(dim_a, dim_b, ket.components().to_vec())
    }

    pub fn product(a: &Ket, b: &Ket) -> Result<Self> {
        BipartiteState::from_ket(&tensor(a, b)?, a.dim(), b.dim())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.dim_b + j]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn to_ket(&self) -> Ket {
        Ket::from_vec_unchecked(self.amplitudes.clone())
    }

    fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Reduced state of one factor: `A A†` for side A, `Aᵀ conj(A)` for B.
    pub fn reduced(&self, keep: Side) -> Result<DensityMatrix> {
        let (da, db) = (self.dim_a, self.dim_b);
        let a = &self.amplitudes;
        let m = match keep {
            Side::A => {
                let mut out = vec![ZERO; da * da];
                for i in 0..da {
                    for j in 0..da {
                        out[i * da + j] =
                            inner_slices(&a[j * db..(j + 1) * db], &a[i * db..(i + 1) * db]);
                    }
                }
                OperatorMatrix::new(da, out)?
            }
            Side::B => {
                let mut out = vec![ZERO; db * db];
                for k in 0..db {
                    for l in 0..db {
                        out[k * db + l] =
                            (0..da).map(|i| a[i * db + k] * a[i * db + l].conj()).sum();
                    }
                }
                OperatorMatrix::new(db, out)?
            }
        };
        DensityMatrix::new(m.hermitian_part())
    }
}

/// Partial trace of an operator on `C^dim_a ⊗ C^dim_b`.
pub fn partial_trace(
    rho: &OperatorMatrix,
    (dim_a, dim_b): (usize, usize),
    keep: Side,
) -> Result<DensityMatrix> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != rho.dim() {
        return Err(Error::validation(format!(
            "dimension {} does not factor as {dim_a} x {dim_b}",
            rho.dim()
        )));
    }
    let idx = |i: usize, k: usize| i * dim_b + k;
    let m = match keep {
        Side::A => {
            let mut out = vec![ZERO; dim_a * dim_a];
            for i in 0..dim_a {
                for j in 0..dim_a {
                    out[i * dim_a + j] = (0..dim_b).map(|k| rho.get(idx(i, k), idx(j, k))).sum();
                }
            }
            OperatorMatrix::new(dim_a, out)?
        }
        Side::B => {
            let mut out = vec![ZERO; dim_b * dim_b];
            for k in 0..dim_b {
                for l in 0..dim_b {
                    out[k * dim_b + l] = (0..dim_a).map(|i| rho.get(idx(i, k), idx(i, l))).sum();
                }
            }
            OperatorMatrix::new(dim_b, out)?
        }
    };
    DensityMatrix::new(m.hermitian_part())
}

/// Partial trace of the pure state `|psi><psi|` without forming the full
/// projector.
pub fn partial_trace_pure(psi: &Ket, dims: (usize, usize), keep: Side) -> Result<DensityMatrix> {
    BipartiteState::from_ket(psi, dims.0, dims.1)?.reduced(keep)
}

/// `Σ_k s_k |u_k> ⊗ |v_k>` with orthonormal `{u_k}`, `{v_k}`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Positive, descending.
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<Ket>,
    pub right_vectors: Vec<Ket>,
}

impl SchmidtForm {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// The amplitude grid `Σ_k s_k u_k v_kᵀ`.
    pub fn reconstruct(&self) -> Result<BipartiteState> {
        let da = self.left_vectors.first().map_or(0, Ket::dim);
        let db = self.right_vectors.first().map_or(0, Ket::dim);
        let mut amps = vec![ZERO; da * db];
        for ((s, u), v) in self.coefficients.iter().zip(&self.left_vectors).zip(&self.right_vectors)
        {
            for (i, ui) in u.components().iter().enumerate() {
                for (j, vj) in v.components().iter().enumerate() {
                    amps[i * db + j] += ui * vj * *s;
                }
            }
        }
        BipartiteState::renormalized(da, db, amps)
    }
}

/// Schmidt decomposition via a one-sided (Hestenes) Jacobi SVD of the
/// amplitude grid.
///
/// The columns of the grid are rotated pairwise until mutually orthogonal;
/// their norms are the Schmidt coefficients, the normalized columns the left
/// vectors, and the accumulated right rotation (conjugated) the right vectors.
pub fn schmidt(state: &BipartiteState) -> Result<SchmidtForm> {
    let (da, db) = state.dims();
    let mut cols: Vec<Vec<Complex64>> =
        (0..db).map(|j| (0..da).map(|i| state.amplitude(i, j)).collect()).collect();
    let mut v: Vec<Vec<Complex64>> = (0..db)
        .map(|j| (0..db).map(|k| if j == k { Complex64::new(1.0, 0.0) } else { ZERO }).collect())
        .collect();

    let mut converged = false;
    let total: f64 = state.norm_sqr();
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..db {
            for q in (p + 1)..db {
                rotated |= hestenes_rotate(&mut cols, &mut v, p, q, total);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical(format!(
            "one-sided Jacobi SVD did not converge in {SVD_MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<f64> =
        cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..db).filter(|&k| norms[k] > SCHMIDT_CUTOFF).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut coefficients = Vec::with_capacity(order.len());
    let mut left_vectors = Vec::with_capacity(order.len());
    let mut right_vectors = Vec::with_capacity(order.len());
    for k in order {
        let s = norms[k];
        coefficients.push(s);
        left_vectors.push(Ket::new(cols[k].iter().map(|z| z / s).collect())?);
        right_vectors.push(Ket::new(v[k].iter().map(|z| z.conj()).collect())?);
    }
    Ok(SchmidtForm { coefficients, left_vectors, right_vectors })
}

/// Orthogonalizes columns `p` and `q`; returns whether a rotation was applied.
fn hestenes_rotate(
    cols: &mut [Vec<Complex64>],
    v: &mut [Vec<Complex64>],
    p: usize,
    q: usize,
    total: f64,
) -> bool {
    let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
    let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
    // Columns at roundoff level carry no direction worth orthogonalizing.
    if alpha.min(beta) <= SVD_NEGLIGIBLE_COLUMN * total {
        return false;
    }
    let gamma = inner_slices(&cols[p], &cols[q]);
    let g = gamma.norm();
    if g == 0.0 || g <= SVD_ORTHOGONALITY_TOL * (alpha * beta).sqrt() {
        return false;
    }
    // Rotate column q by e^{-iφ} so that <a_p|a_q> = |γ| is real, then apply
    // the real rotation that zeroes it.
    let phase = gamma.conj() / g;
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    for m in [&mut *cols, &mut *v] {
        let (lo, hi) = m.split_at_mut(q);
        let (cp, cq) = (&mut lo[p], &mut hi[0]);
        for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
            let yq = *y * phase;
            let xp = *x;
            *x = xp * c - yq * s;
            *y = xp * s + yq * c;
        }
    }
    true
}

/// `-Σ λ ln λ` over the oracle eigenvalues, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(dm: &DensityMatrix) -> f64 {
    entropy_of_spectrum(dm.eigenvalues())
}

/// `-Σ p ln p` for a probability spectrum. Values in `[-1e-10, 0)` are
/// roundoff and count as zero.
pub fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    let s: f64 = spectrum
        .iter()
        .map(|&p| if p < 0.0 { 0.0 } else { p })
        .filter(|&p| p >= ENTROPY_FLOOR)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// `|S(ρ_A) - S(ρ_B)|`, zero for every pure bipartite state.
pub fn entropy_equality_gap(state: &BipartiteState) -> Result<f64> {
    let sa = von_neumann_entropy(&state.reduced(Side::A)?);
    let sb = von_neumann_entropy(&state.reduced(Side::B)?);
    Ok((sa - sb).abs())
}

/// `Tr ρ²`.
pub fn purity(dm: &DensityMatrix) -> f64 {
    // For Hermitian ρ, Tr ρ² = Σ_ij |ρ_ij|².
    dm.matrix().entries().iter().map(|z| z.norm_sqr()).sum()
}
