//! Spectral decomposition of a mixture of two non-orthogonal projectors,
//!
//! ```text
//! ρ = P_α |α><α| + P_β |β><β|,    P_α + P_β = 1,    c = |<α|β>|.
//! ```
//!
//! After rotating the phase of `|β>` so that `<α|β> = c` is real and
//! non-negative, every eigenvector can be written (unnormalized) as
//! `|e> = |α> + c r |β>`. Matching coefficients of `|α>` and `|β>` in
//! `ρ|e> = λ|e>` gives `λ = P_α (1 + c² r)` together with the quadratic
//!
//! ```text
//! c² r² + (1 - Prat) r - Prat = 0,    Prat = P_β / P_α,
//! ```
//!
//! whose two real roots of opposite sign yield the two orthogonal
//! eigenvectors. The only mixture with a repeated eigenvalue is the
//! orthogonal, equal-weight one.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, inner, outer, ray_angle, Ket, OperatorMatrix, ONE};
use crate::random::{random_hermitian, random_orthogonal_unit_ket, random_unit_ket, seeded_rng};

/// Overlaps at or below this are treated as exactly orthogonal.
pub const ORTHOGONAL_OVERLAP_TOL: f64 = 1e-12;

/// `|<α|β>| >= 1 - LINEAR_DEPENDENCE_TOL` is rejected as linearly dependent.
pub const LINEAR_DEPENDENCE_TOL: f64 = 1e-9;

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Tolerance for eigen-residuals and orthogonality.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Largest perturbation accepted by [`eigenbasis_sensitivity`].
pub const MAX_SENSITIVITY_PERTURBATION: f64 = 1e-2;

/// A weighted pair of normalized, linearly independent kets.
#[derive(Debug, Clone)]
pub struct ProjectorMixture {
    alpha: Ket,
    beta: Ket,
    p_alpha: f64,
    p_beta: f64,
}

impl ProjectorMixture {
    pub fn new(alpha: Ket, beta: Ket, p_alpha: f64) -> Result<Self> {
        alpha.ensure_normalized("alpha")?;
        beta.ensure_normalized("beta")?;
        if alpha.dim() != beta.dim() {
            return Err(Error::validation(format!(
                "alpha and beta have different dimensions ({} vs {})",
                alpha.dim(),
                beta.dim()
            )));
        }
        if !(p_alpha.is_finite() && p_alpha > 0.0 && p_alpha < 1.0) {
            return Err(Error::validation(format!(
                "p_alpha must lie strictly between 0 and 1, got {p_alpha}"
            )));
        }
        let c = inner(&alpha, &beta)?.norm();
        if c >= 1.0 - LINEAR_DEPENDENCE_TOL {
            return Err(Error::validation(format!(
                "alpha and beta are linearly dependent (|<alpha|beta>| = {c:.17})"
            )));
        }
        Ok(ProjectorMixture { alpha, beta, p_alpha, p_beta: 1.0 - p_alpha })
    }

    /// Mixture in dimension `dim` with prescribed overlap `c` and weight.
    ///
    /// `α` is a uniformly random unit vector and `β = c e^{iθ} α +
    /// sqrt(1 - c²) e^{iφ} w` with `w` a random unit vector orthogonal to `α`.
    pub fn random_with_overlap<R: Rng + ?Sized>(
        rng: &mut R,
        dim: usize,
        c: f64,
        p_alpha: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::validation(format!("overlap must lie in [0, 1), got {c}")));
        }
        let alpha = random_unit_ket(rng, dim)?;
        let w = random_orthogonal_unit_ket(rng, &alpha)?;
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let beta = alpha
            .scale(Complex64::from_polar(c, theta))
            .add(&w.scale(Complex64::from_polar((1.0 - c * c).sqrt(), phi)))?;
        // Renormalize away the last ulp of drift.
        ProjectorMixture::new(alpha, beta.normalized()?, p_alpha)
    }

    pub fn alpha(&self) -> &Ket {
        &self.alpha
    }

    pub fn beta(&self) -> &Ket {
        &self.beta
    }

    pub fn p_alpha(&self) -> f64 {
        self.p_alpha
    }

    pub fn p_beta(&self) -> f64 {
        self.p_beta
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// `|<α|β>|`.
    pub fn overlap(&self) -> f64 {
        inner(&self.alpha, &self.beta).expect("dimensions checked at construction").norm()
    }

    /// `P_β / P_α`.
    pub fn prat(&self) -> f64 {
        self.p_beta / self.p_alpha
    }
}

/// `β` rotated by a unit phase so that `<α|β'>` is real and non-negative.
#[derive(Debug, Clone)]
pub struct AlignedOverlap {
    pub beta_aligned: Ket,
    pub c: f64,
    pub applied_phase: Complex64,
}

/// Rotates the phase of `beta` so that `<alpha|beta'> = |<alpha|beta>|`.
pub fn phase_align(alpha: &Ket, beta: &Ket) -> Result<AlignedOverlap> {
    alpha.ensure_normalized("alpha")?;
    beta.ensure_normalized("beta")?;
    let overlap = inner(alpha, beta)?;
    let c = overlap.norm();
    let applied_phase = if c == 0.0 { ONE } else { overlap.conj() / c };
    Ok(AlignedOverlap { beta_aligned: beta.scale(applied_phase), c, applied_phase })
}

/// `P_α |α><α| + P_β |β><β|`.
pub fn build_density(m: &ProjectorMixture) -> OperatorMatrix {
    let pa = outer(&m.alpha, &m.alpha).expect("same dimension").scale_real(m.p_alpha);
    let pb = outer(&m.beta, &m.beta).expect("same dimension").scale_real(m.p_beta);
    pa.add(&pb).expect("same dimension")
}

/// Roots `(r₊, r₋)` of `c² r² + (1 - prat) r - prat = 0`, with `r₊ > 0 > r₋`.
///
/// The larger-magnitude root comes from the sign-matched branch of the
/// quadratic formula and the other from the product `r₊ r₋ = -prat / c²`,
/// so neither suffers cancellation when `prat ≈ 1`.
pub fn solve_roots(c: f64, prat: f64) -> Result<(f64, f64)> {
    if !(c.is_finite() && c > 0.0 && c < 1.0) {
        return Err(Error::validation(format!("overlap c must lie in (0, 1), got {c}")));
    }
    if !(prat.is_finite() && prat > 0.0) {
        return Err(Error::validation(format!("prat must be positive, got {prat}")));
    }
    let a = c * c;
    let b = 1.0 - prat;
    let disc = (b * b + 4.0 * a * prat).sqrt();
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sign * disc);
    let r1 = q / a;
    let r2 = -prat / q;
    Ok(if r1 > r2 { (r1, r2) } else { (r2, r1) })
}

/// The diagonal form of a two-projector mixture.
#[derive(Debug, Clone)]
pub struct EigenEnsemble {
    /// `P_β / P_α`.
    pub prat: f64,
    /// Overlap `c = |<α|β>|` after phase alignment.
    pub c: f64,
    /// `(r₊, r₋)`, absent when `c` is treated as zero.
    pub roots: Option<(f64, f64)>,
    /// Descending.
    pub eigenvalues: [f64; 2],
    /// Normalized, paired with `eigenvalues`.
    pub eigenvectors: [Ket; 2],
    /// Root paired with each eigenvalue, when roots exist.
    pub eigenvalue_roots: Option<[f64; 2]>,
    /// Set only for the orthogonal, equal-weight mixture, whose eigenbasis is
    /// not unique; `eigenvectors` then holds the input pair.
    pub degenerate: bool,
}

impl EigenEnsemble {
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0] - self.eigenvalues[1]
    }
}

/// Closed-form eigen-ensemble of `build_density(m)`.
pub fn eigen_decompose(m: &ProjectorMixture) -> Result<EigenEnsemble> {
    let aligned = phase_align(&m.alpha, &m.beta)?;
    let c = aligned.c;
    if c >= 1.0 - LINEAR_DEPENDENCE_TOL {
        return Err(Error::validation(format!(
            "alpha and beta are linearly dependent (c = {c:.17})"
        )));
    }
    let prat = m.prat();

    if c <= ORTHOGONAL_OVERLAP_TOL {
        let degenerate = (m.p_alpha - 0.5).abs() <= IDENTITY_TOL;
        let (eigenvalues, eigenvectors) = if m.p_beta > m.p_alpha && !degenerate {
            ([m.p_beta, m.p_alpha], [m.beta.clone(), m.alpha.clone()])
        } else {
            ([m.p_alpha, m.p_beta], [m.alpha.clone(), m.beta.clone()])
        };
        return Ok(EigenEnsemble {
            prat,
            c,
            roots: None,
            eigenvalues,
            eigenvectors,
            eigenvalue_roots: None,
            degenerate,
        });
    }

    let (r_plus, r_minus) = solve_roots(c, prat)?;
    let branch = |r: f64| -> Result<(f64, Ket)> {
        let lambda = m.p_alpha * (1.0 + c * c * r);
        // |α> + c r |β'>; its squared norm is 1 + 2c²r + c²r², but the direct
        // norm is better conditioned when c → 1 and c r → -1.
        let e = m.alpha.add(&aligned.beta_aligned.scale(Complex64::new(c * r, 0.0)))?;
        Ok((lambda, e.normalized()?))
    };
    let (lp, vp) = branch(r_plus)?;
    let (lm, vm) = branch(r_minus)?;
    let (eigenvalues, eigenvectors, eigenvalue_roots) = if lp >= lm {
        ([lp, lm], [vp, vm], [r_plus, r_minus])
    } else {
        ([lm, lp], [vm, vp], [r_minus, r_plus])
    };
    Ok(EigenEnsemble {
        prat,
        c,
        roots: Some((r_plus, r_minus)),
        eigenvalues,
        eigenvectors,
        eigenvalue_roots: Some(eigenvalue_roots),
        degenerate: false,
    })
}

/// `Σ λ |ê><ê|`.
pub fn reconstruct(e: &EigenEnsemble) -> OperatorMatrix {
    let [v0, v1] = &e.eigenvectors;
    let p0 = outer(v0, v0).expect("same dimension").scale_real(e.eigenvalues[0]);
    let p1 = outer(v1, v1).expect("same dimension").scale_real(e.eigenvalues[1]);
    p0.add(&p1).expect("same dimension")
}

/// Norm of the component of `ρ|α> - P_α|α>` orthogonal to `|α>`.
///
/// Zero exactly when `|α>` is an eigenvector with eigenvalue `P_α`, which is
/// what reading the weights as probabilities would require. Analytically it
/// equals `c P_β sqrt(1 - c²)`.
pub fn naive_interpretation_residual(m: &ProjectorMixture) -> f64 {
    let rho = build_density(m);
    let rho_alpha = rho.apply(&m.alpha).expect("same dimension");
    let shifted = rho_alpha.sub(&m.alpha.scale(Complex64::new(m.p_alpha, 0.0))).expect("dim");
    let along = inner(&m.alpha, &shifted).expect("same dimension");
    shifted.sub(&m.alpha.scale(along)).expect("same dimension").norm()
}

/// `λ₊ - λ₋ = P_α sqrt((1 - Prat)² + 4 c² Prat)`.
pub fn eigenvalue_gap(m: &ProjectorMixture) -> f64 {
    let c = m.overlap();
    let prat = m.prat();
    m.p_alpha * ((1.0 - prat).powi(2) + 4.0 * c * c * prat).sqrt()
}

/// `λ₊ - λ₋ = sqrt(1 - 4 det ρ)` with `det ρ = P_α P_β (1 - c²)`.
pub fn eigenvalue_gap_from_determinant(m: &ProjectorMixture) -> f64 {
    let c = m.overlap();
    (1.0 - 4.0 * m.p_alpha * m.p_beta * (1.0 - c * c)).max(0.0).sqrt()
}

/// One point of the degeneracy curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracySample {
    pub prat: f64,
    /// `2 - prat - 1/prat`, the radicand of the would-be degenerate overlap.
    pub y: f64,
    /// `sqrt(y) / 2` where `y >= 0`, i.e. only at `prat = 1`.
    pub c_degenerate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DegeneracyCurve {
    pub samples: Vec<DegeneracySample>,
}

impl DegeneracyCurve {
    /// Sample with the largest `y`.
    pub fn maximum(&self) -> Option<&DegeneracySample> {
        self.samples.iter().max_by(|a, b| a.y.total_cmp(&b.y))
    }
}

/// `y(prat) = 2 - prat - 1/prat`, evaluated as `-(prat - 1)² / prat` so that
/// it is never positive in floating point.
pub fn degeneracy_radicand(prat: f64) -> f64 {
    -(prat - 1.0).powi(2) / prat
}

/// Samples the degeneracy radicand on `steps` evenly spaced points of
/// `[prat_min, prat_max]`.
///
/// When `prat = 1` lies inside the range but not on the grid it is added, so
/// the single point where a degenerate overlap exists is always reported.
pub fn degeneracy_scan(prat_min: f64, prat_max: f64, steps: usize) -> Result<DegeneracyCurve> {
    if !(prat_min.is_finite() && prat_max.is_finite() && prat_min > 0.0 && prat_max > 0.0) {
        return Err(Error::validation(format!(
            "prat range must be positive and finite, got [{prat_min}, {prat_max}]"
        )));
    }
    if prat_min > prat_max {
        return Err(Error::validation(format!(
            "prat_min {prat_min} exceeds prat_max {prat_max}"
        )));
    }
    if steps == 0 {
        return Err(Error::validation("steps must be at least 1"));
    }
    let mut grid: Vec<f64> = if steps == 1 {
        vec![prat_min]
    } else {
        let span = prat_max - prat_min;
        (0..steps)
            .map(|k| {
                if k == steps - 1 {
                    prat_max
                } else {
                    prat_min + span * k as f64 / (steps - 1) as f64
                }
            })
            .collect()
    };
    if (prat_min..=prat_max).contains(&1.0) && !grid.contains(&1.0) {
        let at = grid.partition_point(|&p| p < 1.0);
        grid.insert(at, 1.0);
    }
    let samples = grid
        .into_iter()
        .map(|prat| {
            let y = degeneracy_radicand(prat);
            DegeneracySample { prat, y, c_degenerate: (y >= 0.0).then(|| 0.5 * y.sqrt()) }
        })
        .collect();
    Ok(DegeneracyCurve { samples })
}

/// Largest angle by which the two occupied eigenvectors of `ρ` turn when a
/// random traceless Hermitian perturbation of Frobenius norm `perturbation`
/// is added. Scales like `perturbation / gap`, so it blows up as the
/// eigenvalues approach each other.
pub fn eigenbasis_sensitivity(m: &ProjectorMixture, perturbation: f64, seed: u64) -> Result<f64> {
    if !(0.0..=MAX_SENSITIVITY_PERTURBATION).contains(&perturbation) {
        return Err(Error::validation(format!(
            "perturbation must lie in [0, {MAX_SENSITIVITY_PERTURBATION}], got {perturbation}"
        )));
    }
    if perturbation == 0.0 {
        return Ok(0.0);
    }
    let rho = build_density(m);
    let dim = rho.dim();
    let mut rng = seeded_rng(seed);
    let mut h = random_hermitian(&mut rng, dim)?;
    let shift = h.trace().re / dim as f64;
    h = h.sub(&OperatorMatrix::identity(dim)?.scale_real(shift))?;
    let norm = h.frobenius_norm();
    if norm == 0.0 {
        // Only reachable in dimension 1, where there is no basis to turn.
        return Ok(0.0);
    }
    let perturbed = rho.add(&h.scale_real(perturbation / norm))?;
    let perturbed = perturbed.scale_real(1.0 / perturbed.trace().re);

    let before = hermitian_eig(&rho)?;
    let after = hermitian_eig(&perturbed)?;
    let mut worst = 0.0_f64;
    for k in 0..2.min(dim) {
        worst = worst.max(ray_angle(&before.eigenvectors[k], &after.eigenvectors[k])?);
    }
    Ok(worst)
}
