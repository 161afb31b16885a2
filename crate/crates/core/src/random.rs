//! Seeded random states, unitaries and Hermitian matrices.
//!
//! All samplers take the generator explicitly; there is no global RNG.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{inner_slices, Ket, OperatorMatrix, ZERO};

/// The generator used throughout the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for item `index` of a batch driven by `seed`.
///
/// Batch results depend only on `(seed, index)`, so a batch may be evaluated
/// in any order or in parallel.
pub fn stream_rng(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unit vector drawn from the unitarily invariant measure on the sphere.
pub fn random_unit_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Ket> {
    loop {
        let v = Ket::new((0..dim).map(|_| complex_gaussian(rng)).collect())?;
        if v.norm_sqr() > 1e-300 {
            return v.normalized();
        }
    }
}

/// Unit vector orthogonal to the normalized ket `to`.
pub fn random_orthogonal_unit_ket<R: Rng + ?Sized>(rng: &mut R, to: &Ket) -> Result<Ket> {
    if to.dim() < 2 {
        return Err(Error::validation("no orthogonal complement in dimension 1"));
    }
    loop {
        let v = random_unit_ket(rng, to.dim())?;
        let w = v.sub(&to.scale(inner_slices(to.components(), v.components())))?;
        if w.norm() > 1e-6 {
            return w.normalized();
        }
    }
}

/// Haar-distributed unitary.
///
/// Gram-Schmidt on the columns of a complex Gaussian matrix; normalizing
/// each column fixes the diagonal of the implied R factor to be real and
/// positive, which is the phase convention that makes the result Haar.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<OperatorMatrix> {
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut col: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        // Two passes of modified Gram-Schmidt keep the columns orthonormal to
        // machine precision.
        for _ in 0..2 {
            for q in &columns {
                let proj = inner_slices(q, &col);
                for (c, qi) in col.iter_mut().zip(q) {
                    *c -= proj * qi;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        columns.push(col.into_iter().map(|z| z / norm).collect());
    }
    let mut entries = vec![ZERO; dim * dim];
    for (j, col) in columns.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            entries[i * dim + j] = *z;
        }
    }
    OperatorMatrix::new(dim, entries)
}

/// Random Hermitian matrix with Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<OperatorMatrix> {
    let mut entries = vec![ZERO; dim * dim];
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        entries[i * dim + i] = Complex64::new(d, 0.0);
        for j in (i + 1)..dim {
            let z = complex_gaussian(rng);
            entries[i * dim + j] = z;
            entries[j * dim + i] = z.conj();
        }
    }
    OperatorMatrix::new(dim, entries)
}
