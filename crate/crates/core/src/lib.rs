//! Numerical stability certification for a two-place functional equation of
//! information theory with a nonpositive exponent parameter.

pub mod approximant;
pub mod dd;
pub mod domain;
pub mod equation;
pub mod error;
pub mod generators;
pub mod infomeasure;

pub use approximant::{
    certify, closed_defect, default_log_fit_grid, eval_approximant, extend_boundary,
    fit_log_params, fit_power_params, noise_residual_bound, render_json, stability_constant,
    stability_constant_sup, ApproximantParams, BoundaryCondition, BoundaryExtension,
    BoundaryReport, CertStatus, StabilityCertificate, CONSTANT_LOG, CONSTANT_SUP_NEGATIVE,
    RIGIDITY_CONSTANT,
};
pub use dd::Dd;
pub use domain::{
    simplex_sample, Alpha, DomainGrid, ProbabilityVector, DEFAULT_MARGIN, DEFAULT_RESOLUTION,
};
pub use equation::{
    cocycle_defect, defect, eval_f, lift, lift_gap, lift_sym, parse_table_csv,
    parse_table_csv_closed, residual_sup, write_table_csv, FunctionSpec, GridShape, ParsedTable,
    Provenance, ResidualEstimate,
};
pub use error::{Error, Result};
pub use generators::{
    make_canonical_family, make_exact_log, make_exact_power, oracle_defect_scan, perturb,
    perturb_family, DefectField, NoiseKind, PerturbationPlan,
};
pub use infomeasure::{
    canonical_family_eval, certify_family, entropy_degree_alpha, family_bound,
    family_table_from_json, family_table_to_json, fit_family_params, recursivity_residual,
    semisymmetry_residual, tabulate_family, FamilyCertificate, FamilyEntry, FamilyLevelCheck,
    FamilyLevelReport, FamilyParams, FamilyResiduals, MeasureFamily,
};
