use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two successive panel-refinement levels of the composite quadrature
    /// disagreed by more than the tolerance.
    #[error("quadrature did not converge: refinement difference {difference:.3e} exceeds {tolerance:.1e}")]
    QuadratureNotConverged { difference: f64, tolerance: f64 },

    /// Mismatched vector/matrix dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Invalid parameter combination or precondition violation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The density is not strictly positive where the solver samples it.
    #[error("density must be positive at collocation nodes: rho({x:.6}) = {value:.6e}")]
    NonPositiveDensity { x: f64, value: f64 },

    /// The discrete spectrum kept fewer clean real eigenvalues than the
    /// reliable portion requires.
    #[error(
        "complex eigenvalues intrude into the reliable spectrum: kept {kept} real positive \
         eigenvalues, need {required}"
    )]
    ComplexSpectrum { kept: usize, required: usize },

    /// The dense eigenvalue iteration did not converge.
    #[error("eigenvalue iteration failed to converge for a {size}x{size} matrix")]
    EigenDidNotConverge { size: usize },

    /// Eigenvalue list violates the strictly-increasing-positive invariant.
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    /// Additive noise pushed an eigenvalue to zero or below.
    #[error("noise made eigenvalue #{index} nonpositive ({value:.6e})")]
    NoiseDestroyedOrdering { index: usize, value: f64 },

    /// The Chebyshev rescale factor does not map the spectrum into [0, 1).
    #[error("scale {scale:.6e} is not below the smallest eigenvalue {lambda1:.6e}")]
    ScaleTooLarge { scale: f64, lambda1: f64 },

    /// Cheap upper bound on the scaled model matrix is too large for the
    /// Chebyshev recursion to stay bounded.
    #[error("row-sum bound {bound:.3} of the scaled model matrix exceeds 1.5")]
    SpectralRadiusExceeded { bound: f64 },

    /// All singular values of the Jacobian are zero.
    #[error("Jacobian is identically zero")]
    ZeroJacobian,

    /// The trace-derived constant initial guess is not positive.
    #[error("initial guess is nonpositive: a1 = {0:.6e}")]
    NonPositiveGuess(f64),

    /// The Gauss-Newton residual grew past 1e6 times its initial value.
    #[error("residual diverged: {norm:.3e} exceeds 1e6 x initial {initial:.3e}")]
    DivergedResidual { norm: f64, initial: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
