//! A discretized Von Neumann measurement chain.
//!
//! The system is expanded in the eigenbasis of an observable; the interaction
//! shifts a pointer living on a cyclic lattice by a distinct number of cells
//! per eigenvector, producing the correlated state `Σ_i c_i |s_i> |p_i>`.
//! Environmental scattering is modelled per branch: every event adds one
//! fresh environment fragment whose state depends on the branch, so the
//! environment overlap between branches `i` and `j` is the running product
//! of fragment overlaps `<E_j|E_i>`. Coherence between the records
//! `|s_i>|p_i>` decays with that product.

use num_complex::Complex64;
use rand::Rng;

use crate::composite::{BipartiteState, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{gram_defect, hermitian_eig, inner, Ket, OperatorMatrix, ONE, ZERO};
use crate::random::{haar_unitary, random_unit_ket, seeded_rng};

/// Coherence below which the decay fit stops.
pub const FIT_COHERENCE_FLOOR: f64 = 1e-13;

/// Orthonormality tolerance for bases passed to [`coherence_norm`].
pub const BASIS_TOL: f64 = 1e-10;

/// Unitarity tolerance for operators inserted between measurement rounds.
pub const UNITARY_TOL: f64 = 1e-10;

/// A Hermitian observable together with the pointer shift assigned to each
/// of its eigenvectors.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: OperatorMatrix,
    eigenvalues: Vec<f64>,
    eigenbasis: Vec<Ket>,
    shift_indices: Vec<i64>,
}

impl Observable {
    /// Diagonalizes `matrix`; `shift_indices[k]` belongs to the `k`-th
    /// eigenvector in descending eigenvalue order.
    pub fn new(matrix: OperatorMatrix, shift_indices: Vec<i64>) -> Result<Self> {
        if shift_indices.len() != matrix.dim() {
            return Err(Error::validation(format!(
                "observable of dimension {} needs {} shift indices, got {}",
                matrix.dim(),
                matrix.dim(),
                shift_indices.len()
            )));
        }
        for (i, a) in shift_indices.iter().enumerate() {
            if shift_indices[..i].contains(a) {
                return Err(Error::validation(format!("shift index {a} is repeated")));
            }
        }
        let eig = hermitian_eig(&matrix)?;
        Ok(Observable {
            matrix,
            eigenvalues: eig.eigenvalues,
            eigenbasis: eig.eigenvectors,
            shift_indices,
        })
    }

    /// Shifts `0, 1, ..., dim - 1` in eigenvalue order.
    pub fn with_default_shifts(matrix: OperatorMatrix) -> Result<Self> {
        let shifts = (0..matrix.dim() as i64).collect();
        Observable::new(matrix, shifts)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &[Ket] {
        &self.eigenbasis
    }

    pub fn shift_indices(&self) -> &[i64] {
        &self.shift_indices
    }

    /// Amplitudes `c_i = <s_i|system>`.
    pub fn amplitudes(&self, system: &Ket) -> Result<Vec<Complex64>> {
        self.eigenbasis.iter().map(|s| inner(s, system)).collect()
    }
}

/// A pointer on `dim_d` cells with periodic boundary, starting in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointerLattice {
    pub dim_d: usize,
    pub initial_index: usize,
}

impl PointerLattice {
    pub fn new(dim_d: usize, initial_index: usize) -> Result<Self> {
        if dim_d == 0 {
            return Err(Error::validation("pointer lattice needs at least one cell"));
        }
        if initial_index >= dim_d {
            return Err(Error::validation(format!(
                "initial pointer index {initial_index} outside lattice of {dim_d} cells"
            )));
        }
        Ok(PointerLattice { dim_d, initial_index })
    }

    /// Cell reached from the initial cell after `shift` applications of the
    /// cyclic excursion operator.
    pub fn cell(&self, shift: i64) -> usize {
        (self.initial_index as i64 + shift).rem_euclid(self.dim_d as i64) as usize
    }

    pub fn initial_state(&self) -> Ket {
        Ket::basis(self.dim_d, self.initial_index).expect("validated lattice")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvironmentMode {
    /// Each event leaves the branch fragment in a fresh random unit vector.
    RandomVector,
    /// Each event applies an independent Haar unitary to the branch fragment.
    RandomUnitary,
}

impl EnvironmentMode {
    pub fn name(self) -> &'static str {
        match self {
            EnvironmentMode::RandomVector => "random-vector",
            EnvironmentMode::RandomUnitary => "random-unitary",
        }
    }
}

impl std::str::FromStr for EnvironmentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-vector" => Ok(EnvironmentMode::RandomVector),
            "random-unitary" => Ok(EnvironmentMode::RandomUnitary),
            other => Err(Error::validation(format!(
                "unknown environment mode {other:?} (expected random-vector or random-unitary)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvironmentConfig {
    pub dim_n: usize,
    pub seed: u64,
    pub events_per_step: usize,
    pub mode: EnvironmentMode,
}

impl EnvironmentConfig {
    pub fn new(dim_n: usize, seed: u64, events_per_step: usize, mode: EnvironmentMode) -> Result<Self> {
        if dim_n < 2 {
            return Err(Error::validation(format!("environment dimension must be >= 2, got {dim_n}")));
        }
        if dim_n > crate::linalg::MAX_DIM {
            return Err(Error::validation(format!("environment dimension {dim_n} is too large")));
        }
        if events_per_step == 0 {
            return Err(Error::validation("events_per_step must be at least 1"));
        }
        Ok(EnvironmentConfig { dim_n, seed, events_per_step, mode })
    }
}

/// System, observable, pointer and environment of one measurement.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    system: Ket,
    observable: Observable,
    pointer: PointerLattice,
    environment: EnvironmentConfig,
}

impl MeasurementModel {
    pub fn new(
        system: Ket,
        observable: Observable,
        pointer: PointerLattice,
        environment: EnvironmentConfig,
    ) -> Result<Self> {
        system.ensure_normalized("system")?;
        if system.dim() != observable.dim() {
            return Err(Error::validation(format!(
                "system dimension {} does not match observable dimension {}",
                system.dim(),
                observable.dim()
            )));
        }
        let max_shift = observable.shift_indices.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0);
        if (pointer.dim_d as u64) < 2 * max_shift + 1 {
            return Err(Error::validation(format!(
                "pointer lattice of {} cells is too small for shifts up to {max_shift} \
                 (needs at least {})",
                pointer.dim_d,
                2 * max_shift + 1
            )));
        }
        check_collisions(&observable, &pointer)?;
        Ok(MeasurementModel { system, observable, pointer, environment })
    }

    pub fn system(&self) -> &Ket {
        &self.system
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn pointer(&self) -> &PointerLattice {
        &self.pointer
    }

    pub fn environment(&self) -> &EnvironmentConfig {
        &self.environment
    }
}

fn check_collisions(obs: &Observable, pointer: &PointerLattice) -> Result<()> {
    let cells: Vec<usize> = obs.shift_indices.iter().map(|&k| pointer.cell(k)).collect();
    for (i, a) in cells.iter().enumerate() {
        if let Some(j) = cells[..i].iter().position(|b| b == a) {
            return Err(Error::validation(format!(
                "eigenvectors {j} and {i} both move the pointer to cell {a}"
            )));
        }
    }
    Ok(())
}

/// First stage of measurement: `Σ_i c_i |s_i> ⊗ Shift^{k_i} |p₀>`.
pub fn correlated_state(
    system: &Ket,
    obs: &Observable,
    pointer: &PointerLattice,
) -> Result<BipartiteState> {
    system.ensure_normalized("system")?;
    if system.dim() != obs.dim() {
        return Err(Error::validation(format!(
            "system dimension {} does not match observable dimension {}",
            system.dim(),
            obs.dim()
        )));
    }
    check_collisions(obs, pointer)?;
    let (n, d) = (obs.dim(), pointer.dim_d);
    let mut amps = vec![ZERO; n * d];
    for ((s, c), &k) in obs.eigenbasis.iter().zip(obs.amplitudes(system)?).zip(&obs.shift_indices) {
        let cell = pointer.cell(k);
        for (a, sa) in s.components().iter().enumerate() {
            amps[a * d + cell] += c * sa;
        }
    }
    BipartiteState::renormalized(n, d, amps)
}

/// One scattering event on every branch fragment.
pub fn environment_step<R: Rng + ?Sized>(
    branch_env_states: &[Ket],
    cfg: &EnvironmentConfig,
    rng: &mut R,
) -> Result<Vec<Ket>> {
    branch_env_states
        .iter()
        .map(|e| {
            if e.dim() != cfg.dim_n {
                return Err(Error::validation(format!(
                    "environment state has dimension {}, expected {}",
                    e.dim(),
                    cfg.dim_n
                )));
            }
            match cfg.mode {
                EnvironmentMode::RandomVector => random_unit_ket(rng, cfg.dim_n),
                EnvironmentMode::RandomUnitary => haar_unitary(rng, cfg.dim_n)?.apply(e),
            }
        })
        .collect()
}

/// `Σ_{i≠j} |<b_i|ρ|b_j>|`.
pub fn coherence_norm(dm: &DensityMatrix, basis: &[Ket]) -> Result<f64> {
    if basis.len() != dm.dim() {
        return Err(Error::validation(format!(
            "basis has {} vectors, density matrix dimension is {}",
            basis.len(),
            dm.dim()
        )));
    }
    if let Some(b) = basis.iter().find(|b| b.dim() != dm.dim()) {
        return Err(Error::validation(format!(
            "basis vector of dimension {} for a {}-dimensional density matrix",
            b.dim(),
            dm.dim()
        )));
    }
    let defect = gram_defect(basis)?;
    if defect > BASIS_TOL {
        return Err(Error::validation(format!("basis is not orthonormal (Gram defect {defect:.3e})")));
    }
    let images: Vec<Ket> = basis.iter().map(|b| dm.matrix().apply(b)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for (i, bi) in basis.iter().enumerate() {
        for (j, rho_bj) in images.iter().enumerate() {
            if i != j {
                total += inner(bi, rho_bj)?.norm();
            }
        }
    }
    Ok(total)
}

/// One recorded step of a decoherence run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceStep {
    pub step: usize,
    pub coherence: f64,
    /// `|<E_i|E_j>|` between branch environments.
    pub branch_overlaps: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Fitted,
    /// No off-diagonal coherence to begin with (single branch, or an
    /// eigenstate input).
    ZeroInitialCoherence,
    /// Fewer than two usable points in the fit window.
    TooFewPoints,
    /// The fitted slope is not negative.
    NoDecay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceTrace {
    pub steps: Vec<DecoherenceStep>,
    /// Steps for the coherence to drop by a factor `e`.
    pub efold_time: Option<f64>,
    /// RMS deviation of `ln(coherence)` from the fitted line, divided by the
    /// range of `ln(coherence)` over the fit window. Zero when no fit exists.
    pub fit_residual: f64,
    pub fit_status: FitStatus,
}

/// Density matrix of the branch records `|s_i>|p_i>` after the environment
/// has been traced out, expressed in the record basis.
fn record_density(amplitudes: &[Complex64], overlaps: &[Complex64]) -> Result<DensityMatrix> {
    let n = amplitudes.len();
    let mut entries = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = amplitudes[i] * amplitudes[j].conj() * overlaps[i * n + j];
        }
    }
    DensityMatrix::new(OperatorMatrix::new(n, entries)?.hermitian_part())
}

/// Runs `steps` recording steps of environmental scattering.
///
/// Step 0 is the first-stage correlated state. Each later step applies
/// `events_per_step` events; per event every branch receives a fresh
/// fragment starting in `|0>` and kicked by [`environment_step`].
pub fn run_decoherence(model: &MeasurementModel, steps: usize) -> Result<DecoherenceTrace> {
    if steps == 0 {
        return Err(Error::validation("steps must be at least 1"));
    }
    let cfg = &model.environment;
    let obs = &model.observable;
    let n = obs.dim();
    let amplitudes = obs.amplitudes(&model.system)?;
    let record_basis: Vec<Ket> = (0..n).map(|i| Ket::basis(n, i)).collect::<Result<_>>()?;
    let fresh = vec![Ket::basis(cfg.dim_n, 0)?; n];
    let mut rng = seeded_rng(cfg.seed);

    // overlaps[i * n + j] = <E_j|E_i>
    let mut overlaps = vec![ONE; n * n];
    let mut records = Vec::with_capacity(steps + 1);
    let record = |step: usize, overlaps: &[Complex64]| -> Result<DecoherenceStep> {
        let dm = record_density(&amplitudes, overlaps)?;
        Ok(DecoherenceStep {
            step,
            coherence: coherence_norm(&dm, &record_basis)?,
            branch_overlaps: (0..n)
                .map(|i| (0..n).map(|j| overlaps[i * n + j].norm()).collect())
                .collect(),
        })
    };
    records.push(record(0, &overlaps)?);
    for step in 1..=steps {
        for _ in 0..cfg.events_per_step {
            let kicked = environment_step(&fresh, cfg, &mut rng)?;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        overlaps[i * n + j] *= inner(&kicked[j], &kicked[i])?;
                    }
                }
            }
        }
        records.push(record(step, &overlaps)?);
    }

    let (efold_time, fit_residual, fit_status) = fit_efold(&records);
    Ok(DecoherenceTrace { steps: records, efold_time, fit_residual, fit_status })
}

fn fit_efold(records: &[DecoherenceStep]) -> (Option<f64>, f64, FitStatus) {
    if records[0].coherence == 0.0 {
        return (None, 0.0, FitStatus::ZeroInitialCoherence);
    }
    let points: Vec<(f64, f64)> = records[1..]
        .iter()
        .take_while(|r| r.coherence >= FIT_COHERENCE_FLOOR)
        .map(|r| (r.step as f64, r.coherence.ln()))
        .collect();
    if points.len() < 2 {
        return (None, 0.0, FitStatus::TooFewPoints);
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rms = (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let residual = if hi > lo { rms / (hi - lo) } else { 0.0 };
    if slope >= 0.0 {
        return (None, residual, FitStatus::NoDecay);
    }
    (Some(-1.0 / slope), residual, FitStatus::Fitted)
}

/// `|[interaction, obs]|_F`; zero exactly for quantum non-demolition
/// interactions.
pub fn qnd_check(interaction: &OperatorMatrix, obs: &Observable) -> Result<f64> {
    Ok(interaction.commutator(obs.matrix())?.frobenius_norm())
}

/// Probability that a second measurement repeats the outcome of branch
/// `branch_index`.
///
/// The correlated state is projected onto the pointer cell of that branch
/// and renormalized, leaving the system in the conditional state; the
/// optional unitary `between_rounds` then acts on the system, and a fresh
/// pointer measures it again. Environment fragments factor out of the
/// projection and are not needed.
pub fn repeat_measurement_certitude(
    model: &MeasurementModel,
    branch_index: usize,
    between_rounds: Option<&OperatorMatrix>,
) -> Result<f64> {
    Ok(repeat_measurement_distribution(model, branch_index, between_rounds)?[branch_index])
}

/// Outcome probabilities of the second round, indexed by branch, after
/// conditioning on `branch_index` as in [`repeat_measurement_certitude`].
pub fn repeat_measurement_distribution(
    model: &MeasurementModel,
    branch_index: usize,
    between_rounds: Option<&OperatorMatrix>,
) -> Result<Vec<f64>> {
    let obs = &model.observable;
    if branch_index >= obs.dim() {
        return Err(Error::validation(format!(
            "branch index {branch_index} out of range for {} branches",
            obs.dim()
        )));
    }
    let cell = model.pointer.cell(obs.shift_indices[branch_index]);
    let first = correlated_state(&model.system, obs, &model.pointer)?;
    let (n, _) = first.dims();
    let conditional: Vec<Complex64> = (0..n).map(|a| first.amplitude(a, cell)).collect();
    let probability: f64 = conditional.iter().map(|z| z.norm_sqr()).sum();
    if probability <= f64::MIN_POSITIVE {
        return Err(Error::validation(format!("branch {branch_index} has zero probability")));
    }
    let mut system = Ket::new(conditional)?.normalized()?;
    if let Some(u) = between_rounds {
        let defect = if u.dim() == n { u.unitarity_defect() } else { f64::INFINITY };
        if defect > UNITARY_TOL {
            return Err(Error::validation(format!(
                "operator between rounds must be a {n}x{n} unitary (defect {defect:.3e})"
            )));
        }
        system = u.apply(&system)?;
    }
    let second = correlated_state(&system, obs, &model.pointer)?;
    Ok(obs
        .shift_indices
        .iter()
        .map(|&k| {
            let cell = model.pointer.cell(k);
            (0..n).map(|a| second.amplitude(a, cell).norm_sqr()).sum()
        })
        .collect())
}

/// Mean `|<E_1|E_2>|²` over `pairs` independent pairs of random unit vectors
/// in dimension `dim`; tends to `1 / dim`.
pub fn albrecht_overlap_statistic(dim: usize, pairs: usize, seed: u64) -> Result<f64> {
    if pairs == 0 {
        return Err(Error::validation("need at least one pair"));
    }
    let mut rng = seeded_rng(seed);
    let mut total = 0.0;
    for _ in 0..pairs {
        let a = random_unit_ket(&mut rng, dim)?;
        let b = random_unit_ket(&mut rng, dim)?;
        total += inner(&a, &b)?.norm_sqr();
    }
    Ok(total / pairs as f64)
}
