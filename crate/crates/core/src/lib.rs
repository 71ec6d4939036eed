//! Numerical laboratory for radial solutions of the weighted fourth-order
//! equation Δ(|x|^α Δu) = |x|^l u^p in R^N.

pub mod asymptotics;
pub mod error;
pub mod exponents;
pub mod identities;
pub mod io;
pub mod numerics;
pub mod radial_ode;
pub mod transform;
pub mod variational;

pub use error::{Error, Result};
pub use exponents::{
    bootstrap_sequences, classify_regime, derive_exponents, linearization_spectrum,
    pohozaev_coefficient, BootstrapSequence, Criticality, DerivedExponents, EmbeddingRegime,
    LinearizationSpectrum, ProblemParams, RegimeReport,
};
pub use transform::{
    from_transformed, quadratic_form, to_transformed, weighted_norm, ChartKind, Origin,
    RadialProfile, TransformedProfile,
};
pub use variational::{
    assemble_forms, first_eigenpair, minimize_rayleigh, DiscreteOperator, Grid1D,
    RayleighResult, SpectralResult,
};
