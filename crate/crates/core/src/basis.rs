//! Boundary conditions, density bases, and density evaluation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// Shared evaluator for a custom basis function on [0, 1].
pub type BasisFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of uniform samples used by the soft positivity check.
pub const POSITIVITY_GRID: usize = 1024;

/// Boundary conditions of the string eigenvalue problem -u'' = lambda rho u.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// u(0) = u(1) = 0.
    Dirichlet,
    /// u(0) = u'(1) = 0.
    DirichletNeumann,
}

impl BoundaryCondition {
    /// sqrt(mu_n): the frequency of the n-th Laplacian eigenfunction (n >= 1).
    pub fn frequency(self, n: usize) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => n as f64 * PI,
            BoundaryCondition::DirichletNeumann => (2 * n - 1) as f64 * PI / 2.0,
        }
    }

    /// Laplacian eigenvalue mu_n for the unit density.
    pub fn laplacian_eigenvalue(self, n: usize) -> f64 {
        let f = self.frequency(n);
        f * f
    }

    /// Normalized Laplacian eigenfunction phi_n(x) = sqrt(2) sin(sqrt(mu_n) x).
    pub fn eigenfunction(self, n: usize, x: f64) -> f64 {
        std::f64::consts::SQRT_2 * (self.frequency(n) * x).sin()
    }

    /// Green kernel of the inverse Laplacian under this boundary condition.
    pub fn green_kernel(self, x: f64, y: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        match self {
            BoundaryCondition::Dirichlet => lo * (1.0 - hi),
            BoundaryCondition::DirichletNeumann => lo,
        }
    }
}

/// Expansion basis for the density rho(x) = sum_m a_m psi_m(x).
#[derive(Clone)]
pub enum BasisSpec {
    /// psi_m(x) = cos(2 (m-1) pi x); psi_1 is the constant 1.
    FourierCosine { size: usize },
    /// Arbitrary evaluators, with declared discontinuity locations.
    Custom {
        evaluators: Vec<BasisFn>,
        breakpoints: Vec<f64>,
    },
}

impl BasisSpec {
    pub fn fourier(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidConfig("basis size must be at least 1".into()));
        }
        Ok(BasisSpec::FourierCosine { size })
    }

    pub fn custom(evaluators: Vec<BasisFn>, breakpoints: Vec<f64>) -> Result<Self> {
        if evaluators.is_empty() {
            return Err(Error::InvalidConfig("basis size must be at least 1".into()));
        }
        for pair in breakpoints.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        if breakpoints.iter().any(|&b| b <= 0.0 || b >= 1.0) {
            return Err(Error::InvalidConfig(
                "breakpoints must lie strictly inside (0, 1)".into(),
            ));
        }
        Ok(BasisSpec::Custom {
            evaluators,
            breakpoints,
        })
    }

    /// Number of basis functions.
    pub fn size(&self) -> usize {
        match self {
            BasisSpec::FourierCosine { size } => *size,
            BasisSpec::Custom { evaluators, .. } => evaluators.len(),
        }
    }

    /// Declared discontinuity locations of the basis (or of densities built on it).
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            BasisSpec::FourierCosine { .. } => &[],
            BasisSpec::Custom { breakpoints, .. } => breakpoints,
        }
    }

    /// Evaluate psi_m (1-based index) at x.
    pub fn eval(&self, m: usize, x: f64) -> f64 {
        debug_assert!(m >= 1 && m <= self.size());
        match self {
            BasisSpec::FourierCosine { .. } => (2.0 * (m as f64 - 1.0) * PI * x).cos(),
            BasisSpec::Custom { evaluators, .. } => evaluators[m - 1](x),
        }
    }

    /// The prefix basis with the first `size` functions.
    pub fn truncated(&self, size: usize) -> Result<Self> {
        if size == 0 || size > self.size() {
            return Err(Error::DimensionMismatch(format!(
                "cannot truncate basis of size {} to {}",
                self.size(),
                size
            )));
        }
        Ok(match self {
            BasisSpec::FourierCosine { .. } => BasisSpec::FourierCosine { size },
            BasisSpec::Custom {
                evaluators,
                breakpoints,
            } => BasisSpec::Custom {
                evaluators: evaluators[..size].to_vec(),
                breakpoints: breakpoints.clone(),
            },
        })
    }

    pub fn is_fourier(&self) -> bool {
        matches!(self, BasisSpec::FourierCosine { .. })
    }
}

impl fmt::Debug for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSpec::FourierCosine { size } => {
                write!(f, "FourierCosine(size={size})")
            }
            BasisSpec::Custom {
                evaluators,
                breakpoints,
            } => write!(
                f,
                "Custom(size={}, breakpoints={:?})",
                evaluators.len(),
                breakpoints
            ),
        }
    }
}

/// A density on [0, 1] given by coefficients over a [`BasisSpec`].
#[derive(Debug, Clone)]
pub struct Density {
    basis: BasisSpec,
    coeffs: Vec<f64>,
}

impl Density {
    pub fn new(basis: BasisSpec, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.size() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.size()
            )));
        }
        Ok(Density { basis, coeffs })
    }

    /// The constant density rho(x) = c in the cosine basis.
    pub fn constant(c: f64) -> Self {
        Density {
            basis: BasisSpec::FourierCosine { size: 1 },
            coeffs: vec![c],
        }
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// rho(x) = sum_m a_m psi_m(x) for x in [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x));
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, &a)| a * self.basis.eval(idx + 1, x))
            .sum()
    }

    /// Minimum of rho over a uniform grid with the given number of points.
    pub fn min_on_grid(&self, points: usize) -> f64 {
        debug_assert!(points >= 2);
        (0..points)
            .map(|i| self.eval(i as f64 / (points - 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Soft positivity check on the standard 1024-point grid.
    pub fn is_positive_on_grid(&self) -> bool {
        self.min_on_grid(POSITIVITY_GRID) > 0.0
    }
}

/// Project a function onto the first `size` Fourier cosine modes:
/// a_1 = int rho, a_m = 2 int rho(x) cos(2 (m-1) pi x) dx for m >= 2.
pub fn fourier_project<F: Fn(f64) -> f64>(
    rho: F,
    size: usize,
    breakpoints: &[f64],
) -> Result<Density> {
    if size == 0 {
        return Err(Error::InvalidConfig("basis size must be at least 1".into()));
    }
    let mut coarse = Vec::with_capacity(size);
    let mut fine = Vec::with_capacity(size);
    for m in 1..=size {
        let weight = if m == 1 { 1.0 } else { 2.0 };
        let freq = 2.0 * (m as f64 - 1.0) * PI;
        let integrand = |x: f64| rho(x) * (freq * x).cos();
        coarse.push(weight * quad::integrate(&integrand, breakpoints, quad::DEFAULT_PANELS));
        fine.push(weight * quad::integrate(&integrand, breakpoints, 2 * quad::DEFAULT_PANELS));
    }
    let difference = coarse
        .iter()
        .zip(fine.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if difference > quad::REFINEMENT_TOL {
        return Err(Error::QuadratureNotConverged {
            difference,
            tolerance: quad::REFINEMENT_TOL,
        });
    }
    Density::new(BasisSpec::FourierCosine { size }, fine)
}
