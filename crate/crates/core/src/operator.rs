//! Assembly of the basis matrices M(e_m) and the model matrix M(a) that
//! represent the compact operator (inverse Laplacian composed with
//! multiplication by rho) in the Laplacian eigenbasis.
//!
//! The stored entry is
//!   M_ij(e_m) = (1 / (sqrt(mu_i) sqrt(mu_j))) * int_0^1 sin(sqrt(mu_i) x) sin(sqrt(mu_j) x) psi_m(x) dx,
//! so that M(a) = sum_m 2 a_m M(e_m); the factor 2 comes from the sqrt(2)
//! eigenfunction normalizations and lives in the model assembly only.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::basis::{BasisSpec, BoundaryCondition};
use crate::error::{Error, Result};
use crate::quad;

/// The matrix M(e_m) for one basis function, truncated to `size` modes.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    /// 1-based index of the basis function this matrix represents.
    pub index: usize,
    pub entries: DMatrix<f64>,
}

impl BasisMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }
}

/// The truncated model matrix M(a) with an optional multiplicative rescale.
#[derive(Debug, Clone)]
pub struct ModelMatrix {
    pub entries: DMatrix<f64>,
    /// Rescale factor t; the trace engine works with scale * entries.
    pub scale: f64,
}

impl ModelMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// The rescaled matrix t * M(a).
    pub fn scaled(&self) -> DMatrix<f64> {
        &self.entries * self.scale
    }
}

/// Assemble M(e_m), using the closed form for the Dirichlet cosine case and
/// composite quadrature otherwise.
pub fn assemble_basis_matrix(
    m: usize,
    size: usize,
    basis: &BasisSpec,
    bc: BoundaryCondition,
) -> Result<BasisMatrix> {
    check_index(m, size, basis)?;
    if basis.is_fourier() && bc == BoundaryCondition::Dirichlet {
        Ok(BasisMatrix {
            index: m,
            entries: cosine_closed_form(m, size),
        })
    } else {
        assemble_basis_matrix_quadrature(m, size, basis, bc)
    }
}

/// Assemble M(e_m) by composite Gauss-Legendre quadrature honoring the basis
/// breakpoints. Works for any basis and boundary condition; used directly as
/// the oracle for the closed form.
pub fn assemble_basis_matrix_quadrature(
    m: usize,
    size: usize,
    basis: &BasisSpec,
    bc: BoundaryCondition,
) -> Result<BasisMatrix> {
    check_index(m, size, basis)?;
    let coarse = quadrature_entries(m, size, basis, bc, quad::DEFAULT_PANELS);
    let fine = quadrature_entries(m, size, basis, bc, 2 * quad::DEFAULT_PANELS);
    let difference = (&coarse - &fine).abs().max();
    if difference > quad::REFINEMENT_TOL {
        return Err(Error::QuadratureNotConverged {
            difference,
            tolerance: quad::REFINEMENT_TOL,
        });
    }
    Ok(BasisMatrix {
        index: m,
        entries: fine,
    })
}

/// Assemble all M(e_m) for m = 1..=basis.size().
pub fn assemble_all_basis_matrices(
    basis: &BasisSpec,
    size: usize,
    bc: BoundaryCondition,
) -> Result<Vec<BasisMatrix>> {
    (1..=basis.size())
        .map(|m| assemble_basis_matrix(m, size, basis, bc))
        .collect()
}

/// M(a) = sum_m 2 a_m M(e_m), with unit scale.
pub fn assemble_model_matrix(coeffs: &[f64], mats: &[BasisMatrix]) -> Result<ModelMatrix> {
    if coeffs.len() != mats.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients vs {} basis matrices",
            coeffs.len(),
            mats.len()
        )));
    }
    let size = match mats.first() {
        Some(first) => first.size(),
        None => {
            return Err(Error::DimensionMismatch(
                "at least one basis matrix is required".into(),
            ))
        }
    };
    let mut entries = DMatrix::zeros(size, size);
    for (a, mat) in coeffs.iter().zip(mats) {
        if mat.size() != size {
            return Err(Error::DimensionMismatch(format!(
                "basis matrix {} has size {}, expected {}",
                mat.index,
                mat.size(),
                size
            )));
        }
        entries += &mat.entries * (2.0 * a);
    }
    Ok(ModelMatrix {
        entries,
        scale: 1.0,
    })
}

fn check_index(m: usize, size: usize, basis: &BasisSpec) -> Result<()> {
    if m == 0 || m > basis.size() {
        return Err(Error::DimensionMismatch(format!(
            "basis index {m} out of range 1..={}",
            basis.size()
        )));
    }
    if size == 0 {
        return Err(Error::DimensionMismatch(
            "truncation size must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Closed-form entries of M(e_m) for the Dirichlet cosine case. Rows/columns
/// are 1-based mode indices i, j; the cosine frequency is 2(m-1) pi.
///
/// For m with 2m - 2 > 2 * size every selection rule misses the truncation
/// and the matrix is identically zero; that is permitted.
fn cosine_closed_form(m: usize, size: usize) -> DMatrix<f64> {
    let mut entries = DMatrix::zeros(size, size);
    let c = 2 * m - 2;
    for i in 1..=size {
        for j in 1..=size {
            let denom = PI * PI * (i * j) as f64;
            let value = if m == 1 {
                if i == j {
                    1.0 / (2.0 * denom)
                } else {
                    0.0
                }
            } else if i + j == c {
                -1.0 / (4.0 * denom)
            } else if i.abs_diff(j) == c {
                1.0 / (4.0 * denom)
            } else {
                0.0
            };
            entries[(i - 1, j - 1)] = value;
        }
    }
    entries
}

fn quadrature_entries(
    m: usize,
    size: usize,
    basis: &BasisSpec,
    bc: BoundaryCondition,
    panels: usize,
) -> DMatrix<f64> {
    let mut entries = DMatrix::zeros(size, size);
    for i in 1..=size {
        for j in i..=size {
            let fi = bc.frequency(i);
            let fj = bc.frequency(j);
            let integrand = |x: f64| (fi * x).sin() * (fj * x).sin() * basis.eval(m, x);
            let value = quad::integrate(&integrand, basis.breakpoints(), panels) / (fi * fj);
            entries[(i - 1, j - 1)] = value;
            entries[(j - 1, i - 1)] = value;
        }
    }
    entries
}
