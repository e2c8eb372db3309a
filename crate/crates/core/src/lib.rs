//! Reconstruction of a vibrating-string density on [0, 1] from finitely many
//! eigenvalues of -u'' = lambda rho u.
//!
//! The forward model represents the inverse Laplacian composed with
//! multiplication by rho as a truncated matrix in the Laplacian eigenbasis;
//! sums of scaled Chebyshev polynomials of the reciprocal eigenvalues then
//! equal traces of the same polynomials of that matrix. The inversion runs
//! Gauss-Newton on the residual between both sides, with a coarse-to-fine
//! multistep schedule over the basis size.
//!
//! Synthetic spectra come from a Chebyshev pseudospectral collocation solver,
//! optionally with seeded Gaussian noise.

pub mod basis;
pub mod error;
pub mod forward;
pub mod inversion;
pub mod linalg;
pub mod operator;
pub mod presets;
pub mod quad;
pub mod traces;

pub use basis::{BasisSpec, BoundaryCondition, Density};
pub use error::{Error, Result};
pub use forward::{CollocationConfig, Provenance, Spectrum};
pub use inversion::{InversionConfig, ReconstructionResult, StageSummary};
pub use operator::{BasisMatrix, ModelMatrix};
pub use traces::{TraceJacobian, TraceTargets};
