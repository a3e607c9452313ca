//! Spectral kernels: SVD, Hermitian eigendecomposition, and the norms
//! derived from them.
//!
//! Both factorizations are Jacobi-type. One-sided Jacobi orthogonalizes
//! matrix columns by complex plane rotations and reads the singular values
//! off as column norms; two-sided Jacobi diagonalizes Hermitian matrices
//! with the same rotation algebra. At desk-scale dimensions these are fast
//! enough and deliver residuals near machine precision, which the
//! downstream tolerance stack (1e-9 spectral, 1e-8 validation) relies on.

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use num_complex::Complex64;

const MAX_SWEEPS: usize = 64;
const REL_TOL: f64 = 1e-15;

/// Singular value decomposition `m = U diag(sigma) V^H`.
///
/// `u` is rows x k and `v` is cols x k with k = min(rows, cols); both have
/// orthonormal columns, and `singular_values` is descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Hermitian eigendecomposition `m = V diag(w) V^H` with `w` descending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// Jacobi rotation parameters zeroing the off-diagonal of the 2x2 Hermitian
/// block [[a, g], [conj(g), b]] where g = |g| * phase.
struct Rotation {
    cs: f64,
    sn: f64,
    phase: Complex64,
}

fn rotation_for(a: f64, b: f64, g_abs: f64, phase: Complex64) -> Rotation {
    let zeta = (b - a) / (2.0 * g_abs);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    Rotation {
        cs,
        sn: cs * t,
        phase,
    }
}

/// One-sided Jacobi SVD.
pub fn svd(m: &ComplexMatrix) -> Svd {
    if m.rows() < m.cols() {
        // Factor the adjoint and swap the roles of U and V.
        let s = svd(&m.dagger());
        return Svd {
            u: s.v,
            singular_values: s.singular_values,
            v: s.u,
        };
    }

    let rows = m.rows();
    let n = m.cols();
    let mut w = m.clone();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let mut a = 0.0;
                let mut b = 0.0;
                let mut g = Complex64::ZERO;
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    a += wp.norm_sqr();
                    b += wq.norm_sqr();
                    g += wp.conj() * wq;
                }
                let g_abs = g.norm();
                if g_abs == 0.0 || g_abs * g_abs <= REL_TOL * REL_TOL * a * b {
                    continue;
                }
                converged = false;
                let rot = rotation_for(a, b, g_abs, g / g_abs);
                apply_rotation_cols(&mut w, p, q, &rot);
                apply_rotation_cols(&mut v, p, q, &rot);
            }
        }
        if converged {
            break;
        }
    }

    // Column norms are the singular values; order them descending.
    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..rows).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap().then(x.cmp(&y)));

    let sigma_max = norms.iter().cloned().fold(0.0, f64::max);
    let negligible = sigma_max * (rows as f64) * f64::EPSILON;

    let mut u = ComplexMatrix::zeros(rows, n);
    let mut v_sorted = ComplexMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        singular_values.push(if sigma <= negligible { 0.0 } else { sigma });
        for i in 0..n {
            v_sorted[(i, dst)] = v[(i, src)];
        }
        if sigma <= negligible {
            deficient.push(dst);
            norms[src] = 0.0;
        } else {
            for i in 0..rows {
                u[(i, dst)] = w[(i, src)] / sigma;
            }
        }
    }
    if !deficient.is_empty() {
        complete_orthonormal_columns(&mut u, &deficient);
    }

    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

/// Apply the rotation to columns (p, q): col_p <- cs*col_p - sn*conj(phase)*col_q,
/// col_q <- sn*phase*col_p + cs*col_q.
fn apply_rotation_cols(m: &mut ComplexMatrix, p: usize, q: usize, rot: &Rotation) {
    let cs = Complex64::new(rot.cs, 0.0);
    let sn = Complex64::new(rot.sn, 0.0);
    for i in 0..m.rows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)];
        m[(i, p)] = cs * xp - sn * rot.phase.conj() * xq;
        m[(i, q)] = sn * rot.phase * xp + cs * xq;
    }
}

/// Fill the listed columns of `u` with unit vectors orthogonal to all other
/// columns. Deterministic: each slot takes the standard basis vector whose
/// projection residual is largest (that residual is at least 1/sqrt(rows)
/// whenever a column is still missing), re-orthogonalized once more for
/// stability.
fn complete_orthonormal_columns(u: &mut ComplexMatrix, deficient: &[usize]) {
    let rows = u.rows();
    let cols = u.cols();
    let filled: Vec<usize> = (0..cols).filter(|j| !deficient.contains(j)).collect();
    let mut done: Vec<usize> = filled;

    let project_out = |vec: &mut Vec<Complex64>, u: &ComplexMatrix, done: &[usize]| {
        for &j in done {
            let proj: Complex64 = (0..rows).map(|i| u[(i, j)].conj() * vec[i]).sum();
            for (i, entry) in vec.iter_mut().enumerate() {
                *entry -= proj * u[(i, j)];
            }
        }
    };

    for &target in deficient {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for cand in 0..rows {
            let mut vec: Vec<Complex64> = (0..rows)
                .map(|i| {
                    if i == cand {
                        Complex64::ONE
                    } else {
                        Complex64::ZERO
                    }
                })
                .collect();
            project_out(&mut vec, u, &done);
            let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(n, _)| norm > *n) {
                best = Some((norm, vec));
            }
        }
        let (norm, mut vec) = best.expect("rows >= 1");
        assert!(
            norm > 1e-8,
            "orthonormal completion degenerated (residual {norm})"
        );
        for entry in vec.iter_mut() {
            *entry /= norm;
        }
        project_out(&mut vec, u, &done);
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (i, entry) in vec.iter().enumerate() {
            u[(i, target)] = entry / norm;
        }
        done.push(target);
    }
}

/// Hermiticity tolerance for `hermitian_eig` inputs (max-entry deviation).
pub const HERMITICITY_TOL: f64 = 1e-8;

/// Two-sided Jacobi eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose max-entry distance from their adjoint exceeds
/// [`HERMITICITY_TOL`]; the iteration itself runs on the Hermitian part.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }

    let n = m.rows();
    let mut h = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let frob = h.frobenius_norm();
    let tol = REL_TOL * frob;

    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let g = h[(p, q)];
                let g_abs = g.norm();
                if g_abs <= tol {
                    continue;
                }
                converged = false;
                let a = h[(p, p)].re;
                let b = h[(q, q)].re;
                let rot = rotation_for(a, b, g_abs, g / g_abs);
                // H <- J^H H J, V <- V J.
                apply_rotation_cols(&mut h, p, q, &rot);
                apply_rotation_rows(&mut h, p, q, &rot);
                apply_rotation_cols(&mut v, p, q, &rot);
                h[(p, q)] = Complex64::ZERO;
                h[(q, p)] = Complex64::ZERO;
                h[(p, p)] = Complex64::new(h[(p, p)].re, 0.0);
                h[(q, q)] = Complex64::new(h[(q, q)].re, 0.0);
            }
        }
        if converged {
            break;
        }
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        eigenvalues[y]
            .partial_cmp(&eigenvalues[x])
            .unwrap()
            .then(x.cmp(&y))
    });
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    eigenvalues = order.iter().map(|&j| eigenvalues[j]).collect();

    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Left action of J^H on rows (p, q): row_p <- cs*row_p - sn*phase*row_q,
/// row_q <- sn*conj(phase)*row_p + cs*row_q.
fn apply_rotation_rows(m: &mut ComplexMatrix, p: usize, q: usize, rot: &Rotation) {
    let cs = Complex64::new(rot.cs, 0.0);
    let sn = Complex64::new(rot.sn, 0.0);
    for j in 0..m.cols() {
        let xp = m[(p, j)];
        let xq = m[(q, j)];
        m[(p, j)] = cs * xp - sn * rot.phase * xq;
        m[(q, j)] = sn * rot.phase.conj() * xp + cs * xq;
    }
}

/// Trace norm (nuclear norm): sum of singular values. Square inputs only.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(svd(m).singular_values.iter().sum())
}

/// Operator norm: largest singular value. Any shape.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    svd(m).singular_values.first().copied().unwrap_or(0.0)
}

/// Spectral clamp of a Hermitian matrix to its positive part:
/// `sum_{w_k > 0} w_k v_k v_k^H`.
pub fn positive_part(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &w) in eig.eigenvalues.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = eig.eigenvectors[(i, k)];
            for j in 0..n {
                out[(i, j)] += vi * eig.eigenvectors[(j, k)].conj() * w;
            }
        }
    }
    Ok(out)
}
