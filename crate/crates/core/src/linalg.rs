//! Thin wrappers over nalgebra's dense decompositions.

use nalgebra::linalg::{balancing, Schur, SymmetricEigen};
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues of a general real square matrix, after Parlett-Reinsch
/// balancing. Balancing is a diagonal similarity, so eigenvalues are
/// unchanged.
pub fn general_eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let size = matrix.nrows();
    let mut balanced = matrix.clone();
    balancing::balance_parlett_reinsch(&mut balanced);
    let schur = Schur::try_new(balanced, f64::EPSILON, 100_000)
        .ok_or(Error::EigenDidNotConverge { size })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues_sorted(matrix: &DMatrix<f64>) -> Vec<f64> {
    let eigen = SymmetricEigen::new(matrix.clone());
    let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    values
}

/// Minimum-norm least-squares solution of `matrix * x = rhs` by SVD, with
/// singular values below `rel_cutoff * sigma_max` treated as zero.
pub fn min_norm_least_squares(
    matrix: &DMatrix<f64>,
    rhs: &DVector<f64>,
    rel_cutoff: f64,
) -> Result<DVector<f64>> {
    if matrix.nrows() != rhs.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, rhs has {}",
            matrix.nrows(),
            rhs.len()
        )));
    }
    let svd = matrix.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Err(Error::ZeroJacobian);
    }
    let solution = svd
        .solve(rhs, rel_cutoff * sigma_max)
        .map_err(|msg| Error::InvalidConfig(msg.into()))?;
    Ok(DVector::from_column_slice(solution.as_slice()))
}

/// Condition number sigma_max / sigma_min of a rectangular matrix.
pub fn condition_number(matrix: &DMatrix<f64>) -> f64 {
    let svd = matrix.clone().svd(false, false);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let min = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    max / min
}
