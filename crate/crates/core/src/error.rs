//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must be finite and <= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("margin must be finite with 0 <= margin and 3*margin < 1, got {0}")]
    InfeasibleMargin(f64),
    #[error("grid resolution must be at least 2, got {0}")]
    ResolutionTooSmall(u32),
    #[error("probability vector needs at least 2 components, got {0}")]
    TooFewComponents(usize),
    #[error("probability component {index} must be strictly positive, got {value}")]
    NonpositiveComponent { index: usize, value: f64 },
    #[error("probability components sum to {sum}; allowed deviation from 1 is {tol}")]
    SumNotOne { sum: f64, tol: f64 },
    #[error("simplex margin {margin} is infeasible for {n} components (need n*margin < 1)")]
    SimplexMarginInfeasible { margin: f64, n: usize },
    #[error("point ({x}, {y}) is outside the open domain {{x > 0, y > 0, x + y < 1}}")]
    OutsideDomain { x: f64, y: f64 },
    #[error("argument {0} is outside the open interval ]0, 1[")]
    OutsideUnitInterval(f64),
    #[error("argument {0} is outside the closed interval [0, 1]")]
    OutsideClosedInterval(f64),
    #[error("point ({x}, {y}) is outside the closed domain {{x, y in [0, 1[, x + y <= 1}}")]
    OutsideClosedDomain { x: f64, y: f64 },
    #[error("closed-domain mode requires an endpoint value f({0})")]
    MissingEndpoint(f64),
    #[error("x = {x} is outside the tabulated range [{lo}, {hi}]")]
    OutsideTabulatedRange { x: f64, lo: f64, hi: f64 },
    #[error("tabulated data needs at least 2 rows, got {0}")]
    TableTooSmall(usize),
    #[error("tabulated columns disagree: {xs} xs vs {values} values")]
    TableShape { xs: usize, values: usize },
    #[error(
        "tabulated xs must be strictly increasing and inside ]0, 1[ (offending row index {0})"
    )]
    TableOrder(usize),
    #[error("non-finite number {0} is not allowed here")]
    NonFinite(f64),
    #[error("table line {line}: {msg}")]
    TableParse { line: usize, msg: String },
    #[error("evaluation failed at ({x}, {y}): {source}")]
    EvalAt {
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("transform argument {0} must be strictly positive and finite")]
    NonpositiveArg(f64),
    #[error("the power form needs alpha < 0; at alpha = 0 use the log form")]
    PowerNeedsNegativeAlpha,
    #[error("the log form applies only at alpha = 0")]
    LogNeedsZeroAlpha,
    #[error("the fit grid must contain at least one positive u != 1")]
    EmptyFitGrid,
    #[error("approximant parameter kind does not match alpha")]
    ParamsKindMismatch,
    #[error("noise bound must be finite and >= 0, got {0}")]
    InvalidNoiseBound(f64),
    #[error("supplied residual must be finite and >= 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("family level n = {n} is outside 2..={max}")]
    LevelOutOfRange { n: usize, max: usize },
    #[error("vector has {got} components but level n = {n} was requested")]
    VectorLevelMismatch { n: usize, got: usize },
    #[error("residual list has {got} entries; need at least {need} (semisymmetry and level-3 recursivity always included)")]
    EpsLengthMismatch { need: usize, got: usize },
    #[error("family parameter kind does not match alpha")]
    FamilyKindMismatch,
    #[error("family table has no value for level {n} at {p:?}")]
    MissingFamilyValue { n: usize, p: Vec<f64> },
    #[error("duplicate family table entry for level {n} at {p:?}")]
    DuplicateFamilyEntry { n: usize, p: Vec<f64> },
    #[error("max_n must be at least {need}, got {got}")]
    MaxNTooSmall { need: usize, got: usize },
    #[error("noise bound list has {got} entries; levels 2..={max_n} need {need}")]
    DeltaLengthMismatch {
        need: usize,
        got: usize,
        max_n: usize,
    },
    #[error("json: {0}")]
    Json(String),
}
