use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("grid mismatch: ({0} nodes, L={1}) vs ({2} nodes, L={3})")]
    GridMismatch(usize, f64, usize, f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("order {0} outside the admissible range {1}")]
    InvalidOrder(f64, &'static str),

    #[error("argument {0} within 1e-8 of a Gamma pole")]
    GammaPole(f64),

    #[error("Newton iteration failed to converge: residual {residual:.3e} after {iterations} steps")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("Krylov solver breakdown: {0}")]
    KrylovBreakdown(String),

    #[error("continuation step underflow below {min_step:.1e}; last good alpha = {last_good_alpha}")]
    StepUnderflow { last_good_alpha: f64, min_step: f64 },

    #[error("tail-fit window [{0}, {1}] contains a zero or sign-changing quantity")]
    WindowNotPositive(f64, f64),

    #[error("tail-fit window holds {0} nodes; at least {1} required")]
    WindowTooNarrow(usize, usize),

    #[error("eigensolver did not converge within {0} matrix applications")]
    EigenNoConvergence(usize),

    #[error("no spectral clustering detected with k = {0} eigenvalues")]
    NoClustering(usize),

    #[error("sign scan found no crossing within x_max = {0}")]
    NoCrossingFound(f64),

    #[error("kernel table range {x_max} exceeds 10 * R* = {r_star} with far field disabled")]
    FarFieldRequired { x_max: f64, r_star: f64 },

    #[error("modulation decomposition failed at t = {time}: {reason}")]
    DecompositionLost { time: f64, reason: String },

    #[error("perturbation too large for decomposition: |u - phi| = {0:.3e} exceeds {1:.3e}")]
    PerturbationTooLarge(f64, f64),

    #[error("dense solve size {0} exceeds the {1} cap")]
    DenseSizeCap(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
