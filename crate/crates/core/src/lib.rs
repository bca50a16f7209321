//! Kink profiles, the transformed-potential stability criterion, spectral
//! checks of the linearised operators and modulated kink dynamics for scalar
//! field models `φ_tt − φ_xx + W'(φ) = 0` on the line.
//!
//! Modules follow the pipeline: [`potentials`] defines `W` and its wells,
//! [`kink`] builds the static heteroclinic profile, [`criterion`] classifies
//! the sign structure of `V'`, [`spectral`] discretises the linearised
//! operators, and [`dynamics`] evolves perturbed kinks while tracking the
//! modulation parameters.

// `!(x > 0.0)` rejects NaN as well as non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conservation;
pub mod criterion;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kink;
pub mod numerics;
pub mod potentials;
pub mod spectral;

pub use conservation::{conserved, ConservedTriple};
pub use criterion::{
    classify, classify_family, family_reduced_vprime, family_vprime, level_set, sg_limit_report,
    threshold_scan, wells_positivity, Classification, ClassifyOptions, CriterionReport, LevelSet,
    PairSelector, ParamFamily, PositivityCertificate, SgLimitReport, ThresholdResult,
};
pub use dynamics::{
    evolve, initial_guess, local_distance, make_state, modulate, orbital_distance, rho_functional,
    run, step, Boundary, FieldState, Modulation, ModulationTrack, Perturbation, RunConfig,
    RunOutput, RunSummary, SimGrid, Simulation, TrackSample,
};
pub use error::{Error, Result};
pub use kink::{
    boost, build_kink, repulsivity_profile, residuals, tail_fit, BoostedKink, KinkGrid,
    KinkProfile, RepulsivityProfile,
};
pub use potentials::{
    make_family, normalize, perturb, transformed, validate_wells, AffineMap, Family, FamilyArgs,
    Jet, Potential, TransformedPotential, WellPair,
};
pub use spectral::{
    coercivity_estimate, discretize, eigen_lowest, expansion_check, factorization_convergence,
    factorization_residual, kink_invariants, ly_residual, quadratic_forms, spectral_convergence,
    CoercivityEstimate, CoercivityOptions, DiscreteOperator, ExpansionReport,
    FactorizationResidual, FactorizationTable, ModeKind, OperatorKind, QuadraticForms,
    SpectralConvergence, SpectralReport,
};
