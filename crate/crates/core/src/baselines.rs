//! Independent oracles used to cross-check the cross-norm machinery at
//! desk scale: the PPT criterion, Schmidt analysis of pure states, and the
//! closed-form cross norm on the pure-state family.
//!
//! PPT is complete only in 2 (x) 2 and 2 (x) 3; the test suites rely on it
//! as a two-sided oracle in those dimensions and as a necessary condition
//! everywhere else.

use crate::bipartite::{partial_transpose, BipartiteDims};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, svd};
use crate::matrix::ComplexMatrix;
use crate::states::DensityOperator;
use num_complex::Complex64;

/// Outcome of the partial-transpose test.
#[derive(Debug, Clone, Copy)]
pub struct PptReport {
    pub min_eigenvalue: f64,
    pub is_ppt: bool,
}

/// Minimum eigenvalue of the partially transposed state; `is_ppt` holds
/// when it stays above `-tol`.
pub fn ppt_check(rho: &DensityOperator, tol: f64) -> PptReport {
    let pt = partial_transpose(rho.matrix(), rho.dims()).expect("state dims are consistent");
    let eig = hermitian_eig(&pt).expect("partial transpose stays Hermitian");
    let min_eigenvalue = eig.eigenvalues.last().copied().unwrap_or(0.0);
    PptReport {
        min_eigenvalue,
        is_ppt: min_eigenvalue >= -tol,
    }
}

/// Schmidt coefficients of a unit vector: singular values of its d1 x d2
/// reshaping, descending. Their squares sum to one.
pub fn schmidt_coefficients(psi: &[Complex64], dims: BipartiteDims) -> Result<Vec<f64>> {
    if psi.len() != dims.total() {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {}", dims.total()),
            actual: format!("{}", psi.len()),
        });
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let reshaped = ComplexMatrix::from_fn(dims.d1(), dims.d2(), |i, k| psi[i * dims.d2() + k]);
    Ok(svd(&reshaped).singular_values)
}

/// Closed-form greatest cross norm of a pure state: `(sum_k c_k)^2` over
/// the Schmidt coefficients.
pub fn pure_gamma(psi: &[Complex64], dims: BipartiteDims) -> Result<f64> {
    let coefficients = schmidt_coefficients(psi, dims)?;
    let total: f64 = coefficients.iter().sum();
    Ok(total * total)
}
