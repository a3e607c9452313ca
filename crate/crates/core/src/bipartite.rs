//! Structural transforms on bipartite operators: Kronecker products,
//! partial trace/transpose, realignment, and the operator-Schmidt form.
//!
//! One indexing convention rules them all: the composite row index is
//! `i * d2 + k` with `i` running over the first factor. `vec` is row-major,
//! so `realignment(a (x) b) = vec(a) vec(b)^T` holds exactly. The pairwise
//! consistency of these maps is what the property suite checks hardest,
//! since a silent transposition here corrupts every bound downstream.

use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::matrix::ComplexMatrix;
use num_complex::Complex64;

/// Factor dimensions of a bipartite space H1 (x) H2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteDims {
    d1: usize,
    d2: usize,
}

impl BipartiteDims {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "factor dimensions must be positive, got ({d1}, {d2})"
            )));
        }
        Ok(Self { d1, d2 })
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    /// Composite dimension d1 * d2.
    pub fn total(&self) -> usize {
        self.d1 * self.d2
    }

    /// Checks that `m` is square with the composite dimension.
    pub fn check_operator(&self, m: &ComplexMatrix) -> Result<()> {
        if m.rows() != self.total() || m.cols() != self.total() {
            return Err(Error::DimensionMismatch {
                expected: format!(
                    "{0}x{0} operator for dims ({1}, {2})",
                    self.total(),
                    self.d1,
                    self.d2
                ),
                actual: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        Ok(())
    }
}

/// Which factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Kronecker product. `(a (x) b)[(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == Complex64::ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Trace out the selected factor. Preserves the total trace.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    over: Subsystem,
) -> Result<ComplexMatrix> {
    dims.check_operator(m)?;
    let (d1, d2) = (dims.d1, dims.d2);
    Ok(match over {
        Subsystem::Second => ComplexMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| m[(i * d2 + k, j * d2 + k)]).sum()
        }),
        Subsystem::First => ComplexMatrix::from_fn(d2, d2, |k, l| {
            (0..d1).map(|i| m[(i * d2 + k, i * d2 + l)]).sum()
        }),
    })
}

/// Partial transpose on the second factor: ((i,k),(j,l)) -> ((i,l),(j,k)).
/// Sends a (x) b to a (x) b^T; applying it twice is the identity, bit-exact.
pub fn partial_transpose(m: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    dims.check_operator(m)?;
    let (d1, d2) = (dims.d1, dims.d2);
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for i in 0..d1 {
        for j in 0..d1 {
            for k in 0..d2 {
                for l in 0..d2 {
                    out[(i * d2 + k, j * d2 + l)] = m[(i * d2 + l, j * d2 + k)];
                }
            }
        }
    }
    Ok(out)
}

/// Realignment: the d1^2 x d2^2 matrix with
/// `R[(i*d1 + j), (k*d2 + l)] = m[(i*d2 + k), (j*d2 + l)]`.
///
/// Linear, Frobenius-isometric, and sends a (x) b to vec(a) vec(b)^T; its
/// singular values are the operator-Schmidt coefficients of `m`.
pub fn realignment(m: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    dims.check_operator(m)?;
    let (d1, d2) = (dims.d1, dims.d2);
    let mut out = ComplexMatrix::zeros(d1 * d1, d2 * d2);
    for i in 0..d1 {
        for j in 0..d1 {
            for k in 0..d2 {
                for l in 0..d2 {
                    #[cfg(not(feature = "corrupt-realignment"))]
                    {
                        out[(i * d1 + j, k * d2 + l)] = m[(i * d2 + k, j * d2 + l)];
                    }
                    #[cfg(feature = "corrupt-realignment")]
                    {
                        // Deliberate index flip for mutation testing of the
                        // self-test suite.
                        out[(j * d1 + i, k * d2 + l)] = m[(i * d2 + k, j * d2 + l)];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Operator-Schmidt decomposition `m = sum_k c_k A_k (x) B_k` with
/// Hilbert-Schmidt-orthonormal factor families and descending c_k >= 0.
#[derive(Debug, Clone)]
pub struct OperatorSchmidt {
    pub coefficients: Vec<f64>,
    pub left_factors: Vec<ComplexMatrix>,
    pub right_factors: Vec<ComplexMatrix>,
}

impl OperatorSchmidt {
    /// Re-sums the decomposition.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d1 = self.left_factors[0].rows();
        let d2 = self.right_factors[0].rows();
        let mut out = ComplexMatrix::zeros(d1 * d2, d1 * d2);
        for ((c, a), b) in self
            .coefficients
            .iter()
            .zip(&self.left_factors)
            .zip(&self.right_factors)
        {
            out = &out + &kron(&a.scale_re(*c), b);
        }
        out
    }
}

/// Operator-Schmidt decomposition via SVD of the realignment. Coefficients
/// at or below `rank_tol` are dropped.
pub fn operator_schmidt(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    rank_tol: f64,
) -> Result<OperatorSchmidt> {
    let r = realignment(m, dims)?;
    let s = svd(&r);
    let (d1, d2) = (dims.d1, dims.d2);
    let mut coefficients = Vec::new();
    let mut left_factors = Vec::new();
    let mut right_factors = Vec::new();
    for (k, &sigma) in s.singular_values.iter().enumerate() {
        if sigma <= rank_tol {
            break;
        }
        coefficients.push(sigma);
        // R = sum_k sigma_k u_k v_k^H, so vec(A_k) = u_k and vec(B_k) = conj(v_k).
        left_factors.push(ComplexMatrix::from_vec_row_major(d1, d1, &s.u.col(k)));
        let v_conj: Vec<Complex64> = s.v.col(k).iter().map(|z| z.conj()).collect();
        right_factors.push(ComplexMatrix::from_vec_row_major(d2, d2, &v_conj));
    }
    Ok(OperatorSchmidt {
        coefficients,
        left_factors,
        right_factors,
    })
}
