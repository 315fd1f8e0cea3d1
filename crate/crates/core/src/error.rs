use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("invalid number `{0}`")]
    Number(String),
    #[error("{0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolError {
    #[error("incommensurable grading: {0}")]
    Incommensurable(String),
    #[error("evaluation point must be positive, got {0}")]
    NonPositivePoint(f64),
    #[error("requested depth {requested} exceeds stored depth {available}")]
    DepthExceeded { requested: usize, available: usize },
    #[error("step must be positive")]
    NonPositiveStep,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("transport solve failed at level {level}: {reason}")]
    Transport { level: usize, reason: String },
    #[error("requested order {requested} exceeds supported levels {levels}")]
    LevelOverflow { requested: usize, levels: usize },
    #[error("cutoff budget unreachable at level {level}: norm {norm:e} > budget {budget:e} at scale {scale}")]
    BudgetUnreachable { level: usize, scale: f64, norm: f64, budget: f64 },
    #[error("schedule has {given} cutoffs for {needed} terms or is not nondecreasing")]
    BadSchedule { given: usize, needed: usize },
    #[error("residual solve failed: {0}")]
    ResidualSolve(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("root finding did not converge: {0}")]
    RootFinding(String),
    #[error("root {root} is not simple (|l0'| = {derivative:e})")]
    MultipleRoot { root: f64, derivative: f64 },
    #[error("root {0} is not real")]
    ComplexRoot(Complex64),
    #[error("{0} is not a root of l0")]
    NotRoot(f64),
    #[error("evaluation point {t} lies below the excision support (scale {scale})")]
    BelowExcision { t: f64, scale: f64 },
    #[error("requested depth {requested} exceeds constructed depth {available}")]
    Depth { requested: usize, available: usize },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error("symbol is not elliptic: |p_m| = {margin:e} at x = {x}")]
    NotElliptic { x: f64, margin: f64 },
    #[error("requested depth {requested} exceeds available components {available}")]
    DepthOverflow { requested: usize, available: usize },
    #[error("frequency cut {freq_cut} violates the anti-aliasing bound for grid size {grid_size}")]
    Aliasing { grid_size: usize, freq_cut: usize },
    #[error("grid size mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("strict hyperbolicity violated at t = {t}, x = {x:?}")]
    Hyperbolicity { t: f64, x: Vec<f64> },
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("frequency vanished along the ray at t = {0}")]
    VanishingFrequency(f64),
    #[error("caustic detected at t = {time}: ray map is not injective")]
    Caustic { time: f64 },
    #[error("characteristic roots collide (Vandermonde singular)")]
    RootCollision,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("anchor degree {0} is not an integer")]
    NonIntegerAnchor(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("extrapolation did not converge: {0}")]
    Extrapolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("space dimension {0} is even; the transmission construction requires odd n")]
    EvenDimension(usize),
}
