//! Input documents. Complex numbers are `[re, im]` pairs.

use std::path::Path;

use ensemble_core::{
    EnvironmentConfig, EnvironmentMode, Ket, MeasurementModel, Observable, OperatorMatrix, PointerLattice,
    ProjectorMixture,
};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

pub type Pair = [f64; 2];

/// Raw bytes of an input file together with the parsed document.
pub struct Loaded<T> {
    pub bytes: Vec<u8>,
    pub document: T,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let document = parse(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Loaded { bytes, document })
}

/// Parses a JSON document; errors name the offending line and column or field.
pub fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, serde_json::Error> {
    serde_json::from_slice(bytes)
}

fn complex(v: &[Pair]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn field_error(field: &str, err: ensemble_core::Error) -> CliError {
    CliError::from_core(&format!("field `{field}`"), err)
}

fn ket(field: &str, v: &[Pair]) -> Result<Ket, CliError> {
    let k = Ket::new(complex(v)).map_err(|e| field_error(field, e))?;
    k.ensure_normalized(field).map_err(|e| field_error(field, e))?;
    Ok(k)
}

fn matrix(field: &str, rows: &[Vec<Pair>]) -> Result<OperatorMatrix, CliError> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Input(format!(
                "field `{field}[{i}]`: row has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    let entries = rows.iter().flat_map(|r| complex(r)).collect();
    OperatorMatrix::new(n, entries).map_err(|e| field_error(field, e))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub alpha: Vec<Pair>,
    pub beta: Vec<Pair>,
    pub p_alpha: f64,
}

impl MixtureSpec {
    pub fn build(&self) -> Result<ProjectorMixture, CliError> {
        let alpha = ket("alpha", &self.alpha)?;
        let beta = ket("beta", &self.beta)?;
        if beta.dim() != alpha.dim() {
            return Err(CliError::Input(format!(
                "field `beta`: dimension {} differs from `alpha` dimension {}",
                beta.dim(),
                alpha.dim()
            )));
        }
        if !(self.p_alpha > 0.0 && self.p_alpha < 1.0) {
            return Err(CliError::Input(format!(
                "field `p_alpha`: {} must lie strictly between 0 and 1",
                self.p_alpha
            )));
        }
        ProjectorMixture::new(alpha, beta, self.p_alpha).map_err(|e| field_error("alpha, beta", e))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeGrid {
    /// Row `i`, column `j` is the amplitude of `|i>_A |j>_B`.
    pub amplitudes: Vec<Vec<Pair>>,
}

impl AmplitudeGrid {
    /// Dimensions and flattened row-major amplitudes.
    pub fn flatten(&self) -> Result<(usize, usize, Vec<Complex64>), CliError> {
        let da = self.amplitudes.len();
        let db = self.amplitudes.first().map_or(0, Vec::len);
        if da == 0 || db == 0 {
            return Err(CliError::Input("field `amplitudes`: grid must be non-empty".into()));
        }
        for (i, row) in self.amplitudes.iter().enumerate() {
            if row.len() != db {
                return Err(CliError::Input(format!(
                    "field `amplitudes[{i}]`: row has {} entries, expected {db}",
                    row.len()
                )));
            }
        }
        Ok((da, db, self.amplitudes.iter().flat_map(|r| complex(r)).collect()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerSpec {
    pub dim: usize,
    /// Defaults to the middle cell.
    pub initial_index: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub dim_n: usize,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_events")]
    pub events_per_step: usize,
}

fn default_mode() -> String {
    EnvironmentMode::RandomVector.name().to_string()
}

fn default_events() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub system: Vec<Pair>,
    pub observable: Vec<Vec<Pair>>,
    /// Pointer shift per observable eigenvector, in descending eigenvalue
    /// order. Defaults to `0, 1, ..., n-1`.
    pub shifts: Option<Vec<i64>>,
    pub pointer: PointerSpec,
    pub environment: EnvironmentSpec,
    pub steps: usize,
    pub seed: Option<u64>,
}

impl SimulationSpec {
    pub fn build(&self, seed: u64) -> Result<MeasurementModel, CliError> {
        let system = ket("system", &self.system)?;
        let m = matrix("observable", &self.observable)?;
        let observable = match &self.shifts {
            Some(s) => Observable::new(m, s.clone()),
            None => Observable::with_default_shifts(m),
        }
        .map_err(|e| field_error("observable", e))?;
        let initial = self.pointer.initial_index.unwrap_or(self.pointer.dim / 2);
        let pointer = PointerLattice::new(self.pointer.dim, initial).map_err(|e| field_error("pointer", e))?;
        let mode: EnvironmentMode = self
            .environment
            .mode
            .parse()
            .map_err(|e| field_error("environment.mode", e))?;
        let env = EnvironmentConfig::new(self.environment.dim_n, seed, self.environment.events_per_step, mode)
            .map_err(|e| field_error("environment", e))?;
        if self.steps == 0 {
            return Err(CliError::Input("field `steps`: must be at least 1".into()));
        }
        MeasurementModel::new(system, observable, pointer, env).map_err(|e| field_error("shifts", e))
    }
}
