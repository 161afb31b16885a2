//! Closed form versus Jacobi oracle, for single mixtures and seeded batches.

use rand::Rng;

use crate::ensemble::{build_density, eigen_decompose, EigenEnsemble, ProjectorMixture};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, inner, ray_angle};
use crate::random::stream_rng;

/// Open interval from which batch overlaps and weights are drawn.
pub const SUITE_RANGE: (f64, f64) = (1e-6, 1.0 - 1e-6);

/// Deviations of a closed-form ensemble from the oracle decomposition of the
/// same density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    /// Largest `|λ_closed - λ_oracle|`, including oracle eigenvalues outside
    /// the span of `{α, β}` (which must vanish).
    pub eigenvalue_deviation: f64,
    /// Largest angle between matching eigenvectors; zero when degenerate.
    pub max_angle: f64,
    /// `|<ê₊|ê₋>|`.
    pub orthogonality: f64,
    /// `|λ₊ + λ₋ - 1|`.
    pub trace_defect: f64,
}

impl OracleComparison {
    pub fn merge(self, other: OracleComparison) -> OracleComparison {
        OracleComparison {
            eigenvalue_deviation: self.eigenvalue_deviation.max(other.eigenvalue_deviation),
            max_angle: self.max_angle.max(other.max_angle),
            orthogonality: self.orthogonality.max(other.orthogonality),
            trace_defect: self.trace_defect.max(other.trace_defect),
        }
    }

    pub fn zero() -> OracleComparison {
        OracleComparison { eigenvalue_deviation: 0.0, max_angle: 0.0, orthogonality: 0.0, trace_defect: 0.0 }
    }
}

/// Compares `e` (normally `eigen_decompose(m)`) against the oracle.
pub fn compare_ensemble(m: &ProjectorMixture, e: &EigenEnsemble) -> Result<OracleComparison> {
    let oracle = hermitian_eig(&build_density(m))?;
    let mut eigenvalue_deviation = 0.0_f64;
    for (k, &o) in oracle.eigenvalues.iter().enumerate() {
        let closed = e.eigenvalues.get(k).copied().unwrap_or(0.0);
        eigenvalue_deviation = eigenvalue_deviation.max((closed - o).abs());
    }
    let mut max_angle = 0.0_f64;
    if !e.degenerate {
        for k in 0..2 {
            max_angle = max_angle.max(ray_angle(&e.eigenvectors[k], &oracle.eigenvectors[k])?);
        }
    }
    Ok(OracleComparison {
        eigenvalue_deviation,
        max_angle,
        orthogonality: inner(&e.eigenvectors[0], &e.eigenvectors[1])?.norm(),
        trace_defect: (e.eigenvalues[0] + e.eigenvalues[1] - 1.0).abs(),
    })
}

pub fn compare_with_oracle(m: &ProjectorMixture) -> Result<OracleComparison> {
    compare_ensemble(m, &eigen_decompose(m)?)
}

/// Parameters of batch member `index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteDraw {
    pub dim: usize,
    pub overlap: f64,
    pub p_alpha: f64,
}

/// Mixture `index` of the batch identified by `seed`, with ambient dimension
/// drawn uniformly from `dims` and overlap and weight uniformly from
/// [`SUITE_RANGE`].
pub fn suite_mixture(
    seed: u64,
    index: u64,
    dims: (usize, usize),
) -> Result<(SuiteDraw, ProjectorMixture)> {
    let (lo, hi) = dims;
    if lo < 2 || hi < lo {
        return Err(Error::validation(format!("invalid dimension range {lo}..={hi} (need 2 <= min <= max)")));
    }
    let mut rng = stream_rng(seed, index);
    let dim = rng.random_range(lo..=hi);
    let overlap = rng.random_range(SUITE_RANGE.0..SUITE_RANGE.1);
    let p_alpha = rng.random_range(SUITE_RANGE.0..SUITE_RANGE.1);
    let m = ProjectorMixture::random_with_overlap(&mut rng, dim, overlap, p_alpha)?;
    Ok((SuiteDraw { dim, overlap, p_alpha }, m))
}

/// Orthogonal mixture of two basis vectors, the simplest batch member.
pub fn orthogonal_mixture(dim: usize, p_alpha: f64) -> Result<ProjectorMixture> {
    use crate::linalg::Ket;
    ProjectorMixture::new(Ket::basis(dim, 0)?, Ket::basis(dim, 1)?, p_alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_reproducible() {
        let (a, ma) = suite_mixture(42, 7, (2, 8)).unwrap();
        let (b, mb) = suite_mixture(42, 7, (2, 8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ma.alpha(), mb.alpha());
        assert!((ma.overlap() - a.overlap).abs() < 1e-12);
        assert!(suite_mixture(1, 0, (1, 4)).is_err());
        assert!(suite_mixture(1, 0, (5, 4)).is_err());
    }

    #[test]
    fn orthogonal_member_passes() {
        let c = compare_with_oracle(&orthogonal_mixture(2, 0.5).unwrap()).unwrap();
        assert_eq!(c.eigenvalue_deviation, 0.0);
        assert_eq!(c.orthogonality, 0.0);
    }
}
