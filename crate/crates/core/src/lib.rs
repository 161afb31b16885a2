//! Eigen-ensembles of two-projector density matrices and a small toolkit for
//! the measurement chain around them: partial traces, Schmidt forms, entropy,
//! and environment-induced decoherence of a pointer.
//!
//! Every routine works on dense matrices at desk-scale dimensions. The
//! closed-form spectral decomposition in [`ensemble`] is cross-checked
//! against the independent Jacobi solver in [`linalg`].

pub mod composite;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod random;
pub mod validation;

pub use composite::{BipartiteState, DensityMatrix, SchmidtForm, Side};
pub use ensemble::{AlignedOverlap, DegeneracyCurve, EigenEnsemble, ProjectorMixture};
pub use error::{Error, Result};
pub use linalg::{ComplexScalar, HermitianEigenResult, Ket, OperatorMatrix};
pub use measurement::{
    DecoherenceTrace, EnvironmentConfig, EnvironmentMode, MeasurementModel, Observable,
    PointerLattice,
};
